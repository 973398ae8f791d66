"""Minimal HTTP classification service.

One route, POST only: the body is a plain-text paragraph, the reply
names the winning class, the full probability row, and how many
normalized tokens went into the prediction. The handler keeps no
state between requests.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .modelio import ModelBundle, classify_text

MAX_BODY_BYTES = 64 * 1024


class ClassifierHandler(BaseHTTPRequestHandler):
    server_version = "stmtkit"

    def log_message(self, format, *args):
        pass

    def _send(self, status: int, payload: bytes, content_type: str) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def _send_error(self, status: int, message: str) -> None:
        body = json.dumps({"error": message}).encode("utf-8")
        self._send(status, body, "application/json")

    def do_GET(self):
        self._send_error(405, "POST a plain-text paragraph")

    def do_POST(self):
        try:
            self._handle_post()
        finally:
            self.server.note_request()

    def _handle_post(self):
        try:
            length = int(self.headers.get("Content-Length", "0"))
        except ValueError:
            self._send_error(400, "bad content length")
            return
        if length > MAX_BODY_BYTES:
            self._send_error(413, "body exceeds 64 KiB")
            return
        body = self.rfile.read(length)
        if not body.strip():
            self._send_error(400, "empty input")
            return
        try:
            text = body.decode("utf-8")
            label, probs, token_count = classify_text(self.server.bundle, text)
            result = {
                "label": label,
                "probs": [float(p) for p in probs],
                "tokens": token_count,
            }
        except Exception:
            # deliberately opaque: internals never leak to callers
            self._send_error(500, "internal error")
            return
        accept = self.headers.get("Accept", "")
        if "text/plain" in accept and "json" not in accept:
            lines = [f"label={result['label']}", f"tokens={result['tokens']}"]
            for name, prob in zip(self.server.bundle.classes, result["probs"]):
                lines.append(f"prob.{name}={prob:.6f}")
            payload = ("\n".join(lines) + "\n").encode("utf-8")
            self._send(200, payload, "text/plain; charset=utf-8")
        else:
            self._send(200, json.dumps(result).encode("utf-8"), "application/json")


class ClassifierServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address, bundle: ModelBundle, max_requests: int | None = None):
        super().__init__(address, ClassifierHandler)
        self.bundle = bundle
        self.max_requests = max_requests
        self.requests_served = 0
        self._lock = threading.Lock()

    def note_request(self) -> None:
        with self._lock:
            self.requests_served += 1
            if self.max_requests is not None and self.requests_served >= self.max_requests:
                threading.Thread(target=self.shutdown, daemon=True).start()


def make_server(
    bundle: ModelBundle, host: str = "127.0.0.1", port: int = 0, max_requests=None
) -> ClassifierServer:
    return ClassifierServer((host, port), bundle, max_requests=max_requests)


def run(
    bundle: ModelBundle, host: str, port: int, max_requests: int | None = None
) -> int:
    """Serve until interrupted (or max_requests); returns requests served."""
    server = make_server(bundle, host, port, max_requests)
    try:
        server.serve_forever(poll_interval=0.05)
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return server.requests_served
