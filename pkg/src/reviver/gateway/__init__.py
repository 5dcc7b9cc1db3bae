"""Gateway to the large multimodal model: one surface, two backends."""

from .backends import (
    Backend,
    FixtureAnnotations,
    FixtureScene,
    HttpBackend,
    MockBackend,
    annotations_path_for,
    load_annotations,
)
from .core import ModelGateway
from .types import BackendTransportError, GatewayError, ModelParams, ModelRequest, ModelResponse, ModelTask

__all__ = [
    "Backend",
    "BackendTransportError",
    "FixtureAnnotations",
    "FixtureScene",
    "GatewayError",
    "HttpBackend",
    "MockBackend",
    "ModelGateway",
    "ModelParams",
    "ModelRequest",
    "ModelResponse",
    "ModelTask",
    "annotations_path_for",
    "load_annotations",
]
