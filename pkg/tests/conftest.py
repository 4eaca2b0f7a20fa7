"""Shared fixtures: synthetic corpora, trained models, and an HTTP stub backend."""
from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from medifact.config import PipelineConfig
from medifact.detect import train_detectors
from medifact.extractive import build_pair_index
from medifact.modelio import PipelineModel
from medifact.synthetic import CONFUSIONS, SyntheticConfig, generate_corpus

REPAIRS = {wrong: right for right, wrong in CONFUSIONS.items()}


class StubBackendServer:
    """In-process HTTP server implementing the correction wire protocol.

    ``reply_fn`` maps the parsed request payload to a response dict; the
    default echoes the error sentence back.
    """

    def __init__(self, reply_fn=None):
        self.reply_fn = reply_fn or (
            lambda payload: {
                "corrected_sentence": payload["error_sentence"],
                "confidence": 0.5,
            }
        )
        self.requests: list[dict] = []
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def _send_json(self, status: int, payload: dict):
                body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json; charset=utf-8")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def do_GET(self):
                if self.path == "/health":
                    self._send_json(200, {"status": "ok"})
                else:
                    self._send_json(404, {"error": "not found"})

            def do_POST(self):
                if self.path != "/correct":
                    self._send_json(404, {"error": "not found"})
                    return
                length = int(self.headers.get("Content-Length", 0))
                raw = self.rfile.read(length)
                try:
                    payload = json.loads(raw.decode("utf-8"))
                    if not isinstance(payload, dict):
                        raise ValueError("payload is not an object")
                    for field in ("context", "question", "error_sentence"):
                        if field not in payload:
                            raise ValueError(f"missing field {field}")
                except (ValueError, UnicodeDecodeError) as exc:
                    self._send_json(400, {"error": str(exc)})
                    return
                outer.requests.append(payload)
                self._send_json(200, outer.reply_fn(payload))

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        return f"http://127.0.0.1:{self._server.server_port}"

    def __enter__(self):
        self._thread.start()
        return self

    def __exit__(self, *exc):
        self._server.shutdown()
        self._server.server_close()
        return False


def repair_reply(payload: dict) -> dict:
    """Stub model with confusion-table knowledge: fixes corrupted tokens."""
    sentence = payload["error_sentence"]
    out = []
    changed = False
    for word in sentence.split():
        core = word.strip(".,").lower()
        if core in REPAIRS:
            out.append(word.replace(word.strip(".,"), REPAIRS[core]))
            changed = True
        else:
            out.append(word)
    return {
        "corrected_sentence": " ".join(out),
        "confidence": 0.9 if changed else 0.3,
    }


@pytest.fixture()
def stub_server():
    with StubBackendServer() as server:
        yield server


@pytest.fixture(scope="session")
def small_corpus():
    return generate_corpus(SyntheticConfig(n_train=120, n_test=60, seed=2024))


@pytest.fixture(scope="session")
def small_model(small_corpus) -> PipelineModel:
    cfg = PipelineConfig()
    detectors = train_detectors(small_corpus.train, cfg)
    pair_index = build_pair_index(small_corpus.train)
    return PipelineModel(detectors=detectors, pair_index=pair_index, config=cfg)
