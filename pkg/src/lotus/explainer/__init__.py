"""Phase one: prompt, pluggable explanation backends, cache, fine-tune export."""

from lotus.explainer.backends import (
    DEFAULT_CUE_MAP,
    STUB_DEFAULT,
    STUB_DESCRIPTOR,
    Backend,
    BackendDescriptor,
    CommandBackend,
    HttpBackend,
    StubBackend,
    make_backend,
    stub_explain,
)
from lotus.explainer.cache import CacheEntry, ExplanationCache, cache_key, resolve_cache_path
from lotus.explainer.finetune import FinetuneJobSpec, build_job, export_finetune_job, load_finetune_job
from lotus.explainer.generate import (
    Explanation,
    generate_explanation,
    generate_many,
    lookup_explanation,
    normalize_explanation,
)
from lotus.explainer.prompt import (
    DEFAULT_TEMPLATE,
    INSTRUCTION,
    PromptTemplate,
    build_prompt,
    get_template,
)

__all__ = [
    "DEFAULT_CUE_MAP",
    "DEFAULT_TEMPLATE",
    "INSTRUCTION",
    "STUB_DEFAULT",
    "STUB_DESCRIPTOR",
    "Backend",
    "BackendDescriptor",
    "CacheEntry",
    "CommandBackend",
    "Explanation",
    "ExplanationCache",
    "FinetuneJobSpec",
    "HttpBackend",
    "PromptTemplate",
    "StubBackend",
    "build_job",
    "build_prompt",
    "cache_key",
    "export_finetune_job",
    "generate_explanation",
    "generate_many",
    "get_template",
    "load_finetune_job",
    "lookup_explanation",
    "make_backend",
    "normalize_explanation",
    "resolve_cache_path",
    "stub_explain",
]
