"""Solver options shared by the QP, IPM and CLI layers."""

from dataclasses import asdict, dataclass, fields, replace
from typing import Optional

from .errors import InputError

TRACE_MODES = ("none", "csv", "jsonl")


@dataclass(frozen=True)
class SolverOptions:
    alpha: float = 0.1
    delta: float = 1e-6
    max_iters: Optional[int] = None
    oracle_derivatives: bool = False
    # relative imaginary residue tolerated on a restriction's roots
    imag_tol: float = 1e-7
    # e' is accepted only if its smallest eigenvalue relative to e exceeds this
    interior_tol: float = 1e-12
    residual_tol: float = 1e-8
    fd_grad_step: float = 1e-5
    fd_hess_step: float = 1e-4
    trace: str = "jsonl"
    debug: bool = False

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise InputError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.delta > 0.0:
            raise InputError(f"delta must be positive, got {self.delta}")
        if self.max_iters is not None and self.max_iters < 1:
            raise InputError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.trace not in TRACE_MODES:
            raise InputError(f"trace must be one of {TRACE_MODES}, got {self.trace!r}")
        for name in ("imag_tol", "interior_tol", "residual_tol", "fd_grad_step", "fd_hess_step"):
            if not getattr(self, name) > 0.0:
                raise InputError(f"{name} must be positive")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InputError(f"unknown solver option(s): {sorted(unknown)}")
        return cls(**data)

    def with_overrides(self, **overrides):
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})
