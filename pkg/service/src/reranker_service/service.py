"""HTTP scoring service: one POST endpoint implementing the wire protocol
over a loaded checkpoint.

Malformed requests are answered with HTTP 400 and the service keeps
serving; scoring is per pair and deterministic, so identical pairs receive
identical scores regardless of batch composition.
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .encoding import encode_pair
from .errors import EncodingError, VocabularyError, WireError
from .model import load_checkpoint, score_encoded
from .wire import SCORE_PATH, error_body, parse_request, response_body


def create_app(checkpoint_dir: Path | str) -> FastAPI:
    loaded = load_checkpoint(checkpoint_dir)
    max_len = int(loaded.metadata["max_sequence_length"])

    app = FastAPI(title="reranker-service", docs_url=None, redoc_url=None)

    @app.get("/healthz")
    def healthz() -> dict:
        return {
            "status": "ok",
            "format": loaded.metadata["format"],
            "vocab_size": loaded.metadata["vocab_size"],
            "trained": loaded.metadata.get("trained", False),
        }

    @app.post(SCORE_PATH)
    async def score(request: Request) -> JSONResponse:
        raw = await request.body()
        try:
            payload = json.loads(raw)
        except ValueError:
            return JSONResponse(
                error_body("request body is not valid JSON"), status_code=400
            )
        try:
            format, pairs = parse_request(payload)
            encoded = [
                encode_pair(
                    loaded.tokenizer, pair.segments, pair.answer_text, format, max_len
                )
                for pair in pairs
            ]
        except (WireError, EncodingError, VocabularyError) as exc:
            return JSONResponse(error_body(str(exc)), status_code=400)

        scores = score_encoded(loaded.model, encoded)
        return JSONResponse(
            response_body(
                {pair.pair_id: value for pair, value in zip(pairs, scores)}
            )
        )

    return app
