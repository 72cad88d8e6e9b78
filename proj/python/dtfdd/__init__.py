"""D-TFDD link-level simulator (Python bindings over the C++ core)."""

from ._dtfdd import (
    ContractViolation,
    InsufficientData,
    SpecError,
    UnknownIciScheduler,
    __version__,
    capacity,
    decide_known,
    erlang_cdf,
    erlang_pdf,
    fit_diversity,
    outage_known_ici_asymptotic,
    outage_unknown_ici_asymptotic,
    run_experiment,
    simulate,
    validate_spec,
)

__all__ = [
    "ContractViolation",
    "InsufficientData",
    "SpecError",
    "UnknownIciScheduler",
    "__version__",
    "capacity",
    "decide_known",
    "erlang_cdf",
    "erlang_pdf",
    "fit_diversity",
    "outage_known_ici_asymptotic",
    "outage_unknown_ici_asymptotic",
    "run_experiment",
    "simulate",
    "validate_spec",
]
