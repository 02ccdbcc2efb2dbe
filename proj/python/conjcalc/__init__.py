"""Conjugate calculus for convex functions on R^n with n <= 3."""

from ._conjcalc import (
    AffineFn,
    DimensionMismatch,
    Error,
    GridAxis,
    GridFn,
    Halfspace,
    ImproperFunction,
    InvalidArgument,
    InvalidOperator,
    MixedRepresentation,
    NoMinorant,
    PointIndicatorFn,
    PolyhedralFn,
    PreservingOp,
    ReversingOp,
    SchemaError,
    apply_preserving,
    apply_reversing,
    biconjugate,
    classify_involution,
    compose,
    compose_reversing,
    conjugate,
    conjugate_value,
    counterexample_flip,
    document_functions,
    dualize,
    from_reversing,
    invert,
    legendre_llt,
    legendre_naive,
    leq,
    lift_flip,
    parameter_distance,
    run_suite,
    to_reversing,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
