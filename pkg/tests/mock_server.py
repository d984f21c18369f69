"""Scripted OpenAI-compatible server for provider tests."""

from __future__ import annotations

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer


class MockProviderServer:
    """Serves /chat/completions and /embeddings with a scriptable status
    sequence and tracks the in-flight high-water mark."""

    def __init__(self, response_delay: float = 0.0):
        self.status_script: list[int] = []  # consumed before each success
        self.requests: list[dict] = []
        self.response_delay = response_delay
        self.in_flight = 0
        self.high_water = 0
        self._lock = threading.Lock()
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def do_POST(self):
                with outer._lock:
                    outer.in_flight += 1
                    outer.high_water = max(outer.high_water, outer.in_flight)
                try:
                    length = int(self.headers.get("Content-Length", 0))
                    body = json.loads(self.rfile.read(length))
                    with outer._lock:
                        outer.requests.append({"path": self.path, "body": body})
                        status = outer.status_script.pop(0) if outer.status_script else 200
                    if outer.response_delay:
                        time.sleep(outer.response_delay)
                    if status != 200:
                        self.send_response(status)
                        self.end_headers()
                        return
                    payload = outer._respond(self.path, body)
                    data = json.dumps(payload).encode()
                    self.send_response(200)
                    self.send_header("Content-Type", "application/json")
                    self.send_header("Content-Length", str(len(data)))
                    self.end_headers()
                    self.wfile.write(data)
                finally:
                    with outer._lock:
                        outer.in_flight -= 1

        self.server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)

    def _respond(self, path: str, body: dict) -> dict:
        if path.endswith("/embeddings"):
            inputs = body["input"]
            # deterministic per-text vector: char-code histogram, 8 dims
            data = []
            for i, text in enumerate(inputs):
                vec = [0.0] * 8
                for ch in text:
                    vec[ord(ch) % 8] += 1.0
                vec[0] += 1.0  # never the zero vector
                data.append({"embedding": vec, "index": i})
            return {"data": data, "model": body.get("model", "")}
        user = body["messages"][-1]["content"]
        return {
            "choices": [{"message": {"role": "assistant",
                                     "content": f"echo:{user[-40:]}"}}],
            "usage": {"prompt_tokens": len(user.split()), "completion_tokens": 5},
        }

    @property
    def base_url(self) -> str:
        host, port = self.server.server_address
        return f"http://{host}:{port}"

    def __enter__(self):
        self.thread.start()
        return self

    def __exit__(self, *exc):
        self.server.shutdown()
        self.server.server_close()
