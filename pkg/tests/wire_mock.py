"""Minimal in-process HTTP scorer used to exercise the wire protocol.

Implements the normative request/response contract over http.server so
transport-level behavior (status codes, malformed bodies) can be tested
without the real neural service.
"""

from __future__ import annotations

import json
import threading
from contextlib import contextmanager
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable, Iterator

from cqarank.inputs import StructuredInput
from cqarank.protocol import (
    SCORE_PATH,
    ProtocolError,
    error_to_json,
    request_from_json,
    response_to_json,
)

ScoreFn = Callable[[str, str, StructuredInput], float]


def _make_handler(score_fn: ScoreFn):
    class Handler(BaseHTTPRequestHandler):
        def log_message(self, *args) -> None:  # keep test output clean
            pass

        def _send(self, status: int, payload: dict) -> None:
            body = json.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("content-type", "application/json")
            self.send_header("content-length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_POST(self) -> None:
            if self.path != SCORE_PATH:
                self._send(404, error_to_json(f"no such path {self.path}"))
                return
            length = int(self.headers.get("content-length", 0))
            raw = self.rfile.read(length)
            try:
                payload = json.loads(raw)
            except json.JSONDecodeError:
                self._send(400, error_to_json("request body is not valid JSON"))
                return
            try:
                format, pairs = request_from_json(payload)
            except ProtocolError as exc:
                self._send(400, error_to_json(str(exc)))
                return
            scores = {
                pair_id: score_fn(format, pair_id, structured)
                for pair_id, structured in pairs
            }
            self._send(200, response_to_json(scores))

    return Handler


@contextmanager
def mock_service(score_fn: ScoreFn) -> Iterator[str]:
    """Run a protocol-conformant scorer on an ephemeral port; yields its
    base URL and shuts the server down on exit.
    """
    server = ThreadingHTTPServer(("127.0.0.1", 0), _make_handler(score_fn))
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield f"http://127.0.0.1:{server.server_port}"
    finally:
        server.shutdown()
        server.server_close()
        thread.join(timeout=5)


@contextmanager
def raw_service(status: int, body: bytes, content_type: str = "application/json") -> Iterator[str]:
    """Serve a fixed response to every POST, for broken-transport tests."""

    class Handler(BaseHTTPRequestHandler):
        def log_message(self, *args) -> None:
            pass

        def do_POST(self) -> None:
            self.rfile.read(int(self.headers.get("content-length", 0)))
            self.send_response(status)
            self.send_header("content-type", content_type)
            self.send_header("content-length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

    server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield f"http://127.0.0.1:{server.server_port}"
    finally:
        server.shutdown()
        server.server_close()
        thread.join(timeout=5)


def overlap_score(format: str, pair_id: str, structured: StructuredInput) -> float:
    """Deterministic toy relevance: token overlap between the query side and
    the answer, so dropping an informative segment lowers scores.
    """
    query_tokens = set()
    for segment in structured.query_segments:
        query_tokens.update(segment.text.lower().split())
    answer_tokens = structured.answer_text.lower().split()
    return float(sum(1 for token in answer_tokens if token in query_tokens))
