"""Exponential-sum parameter recovery from values and iterated integrals."""

from ._expsum import (
    ComplexRatesError,
    CriterionResult,
    DenseSignal,
    DuplicateRatesError,
    FormatError,
    GeneratedModel,
    GeneratorSpec,
    InsufficientRecordsError,
    Model,
    MomentTable,
    MonicPolynomial,
    NonConvergenceError,
    RecoveryMode,
    RecoveryProblem,
    RecoveryResult,
    SampleRecord,
    ShiftTooSmallError,
    SingularMatrixError,
    Term,
    VerifyReport,
    VerifyTerm,
    evaluate,
    exact_records,
    generate,
    ingest_records,
    integrals_from_moments,
    iterated_integral_exact,
    iterated_quadrature_oracle,
    moment_exact,
    moments_from_signal,
    poly_roots,
    recover,
    selftest,
    verify_overdetermined,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
