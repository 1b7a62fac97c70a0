"""FastAPI wrapper around a loaded pipeline model.

The model loads once at startup and is read-only afterwards, so requests
may be served concurrently.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..encoder import SentenceTooLongError
from ..pipeline import PipelineModel
from .schemas import (
    AnnotateRequest,
    AnnotateResponse,
    HealthResponse,
    ModelInfoResponse,
    SentenceAnnotation,
)


def create_app(model: PipelineModel) -> FastAPI:
    app = FastAPI(title="hanpipe", version=__version__,
                  description="Six-task Chinese NLP annotation service")

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.get("/model", response_model=ModelInfoResponse)
    def model_info() -> ModelInfoResponse:
        return ModelInfoResponse(
            version=__version__,
            tasks=model.tasks,
            encoder_width=model.encoder_config.width,
            encoder_layers=model.encoder_config.layers,
            max_sentence_length=model.encoder_config.max_len - 2,
            vocab_size=len(model.vocab),
            labels=model.labels,
        )

    @app.post("/annotate", response_model=AnnotateResponse)
    def annotate(request: AnnotateRequest) -> AnnotateResponse:
        results = []
        for i, text in enumerate(request.sentences):
            try:
                sent = model.annotate(text)
            except SentenceTooLongError as exc:
                raise HTTPException(status_code=422, detail=f"sentence {i}: {exc}") from exc
            results.append(SentenceAnnotation.from_sentence(sent))
        return AnnotateResponse(sentences=results)

    return app


def create_app_from_dir(model_dir: str) -> FastAPI:
    """Factory for ``uvicorn hanpipe.service.app:create_app_from_dir`` style use."""
    return create_app(PipelineModel.load(model_dir))
