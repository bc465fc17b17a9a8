"""cohpres: rewriting toolkit for presentations of (monoidal) categories
modulo an equational system on objects."""

from .core import (
    CellStep,
    CellTrace,
    CohpresError,
    MorGen,
    ParseError,
    Path,
    Presentation,
    Relation,
    RelationInstance,
    RewriteStep,
    TypeCheckError,
    WeightSpec,
    WeightTerm,
    compose,
    parse_path,
    parse_presentation,
    parse_word,
    print_presentation,
    tensor_ctx,
    validate,
)

__all__ = [
    "CellStep",
    "CellTrace",
    "CohpresError",
    "MorGen",
    "ParseError",
    "Path",
    "Presentation",
    "Relation",
    "RelationInstance",
    "RewriteStep",
    "TypeCheckError",
    "WeightSpec",
    "WeightTerm",
    "compose",
    "parse_path",
    "parse_presentation",
    "parse_word",
    "print_presentation",
    "tensor_ctx",
    "validate",
]

__version__ = "0.1.0"
