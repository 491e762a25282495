"""MLLM access: requests, backends, retry failsafe, transcripts and response extraction."""

from .client import (
    DEFAULT_MODEL,
    DEFAULT_TEMPERATURE,
    MAX_IMAGES,
    Backend,
    BackendError,
    BackendExhausted,
    ChatRequest,
    Completion,
    FixtureMissing,
    LiveBackend,
    Message,
    MLLMError,
    MockBackend,
    RateLimited,
    RequestTag,
    Transcript,
    TransportError,
    complete_with_retries,
)
from .extract import (
    ExtractionError,
    JsonSyntax,
    MalformedResponse,
    NoJsonFound,
    NoListFound,
    NotNumeric,
    UnterminatedString,
    extract_code_block,
    extract_dict_list,
    extract_json,
    extract_list,
    extract_numeric_list,
)

__all__ = [
    "DEFAULT_MODEL",
    "DEFAULT_TEMPERATURE",
    "MAX_IMAGES",
    "Backend",
    "BackendError",
    "BackendExhausted",
    "ChatRequest",
    "Completion",
    "ExtractionError",
    "FixtureMissing",
    "JsonSyntax",
    "LiveBackend",
    "MLLMError",
    "MalformedResponse",
    "Message",
    "MockBackend",
    "NoJsonFound",
    "NoListFound",
    "NotNumeric",
    "RateLimited",
    "RequestTag",
    "Transcript",
    "TransportError",
    "UnterminatedString",
    "complete_with_retries",
    "extract_code_block",
    "extract_dict_list",
    "extract_json",
    "extract_list",
    "extract_numeric_list",
]
