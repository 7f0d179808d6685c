"""Exact semistability toolkit for rational conical polyhedral complexes.

Thin wrapper around the C++ core: documents are canonical JSON strings in
the semistable/v1 format; see the repository README for the schema.
"""

from ._core import (  # noqa: F401
    PreconditionFailed,
    SchemaError,
    ToolkitError,
    __version__,
    canonicalize,
    check,
    classify,
    equidimensionalize,
    hnf,
    pipeline,
    recipe_8_2,
    reduce_fibers,
    resolve,
    simplicialize,
    star_subdivision,
    validate,
    verify_certificates,
)

__all__ = [
    "PreconditionFailed",
    "SchemaError",
    "ToolkitError",
    "canonicalize",
    "check",
    "classify",
    "equidimensionalize",
    "hnf",
    "pipeline",
    "recipe_8_2",
    "reduce_fibers",
    "resolve",
    "simplicialize",
    "star_subdivision",
    "validate",
    "verify_certificates",
]
