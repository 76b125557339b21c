"""Numerical tolerances shared by every module.

The defaults live in one frozen dataclass so the CLI can echo and override
them (``--tol NAME=VALUE``) without threading a dozen keyword arguments
through each call site.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

DEFAULT_SEED = 42


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-12
    hermitian_reject: float = 1e-8
    psd: float = 1e-10
    trace: float = 1e-10
    norm: float = 1e-12
    eig_floor: float = 1e-14
    degeneracy: float = 1e-8
    grad: float = 1e-9
    lambda_cap: float = 1e3
    min_eig: float = 1e-10
    unique: float = 1e-10
    cauchy: float = 1e-4
    commutator: float = 1e-8
    necessary: float = 1e-8
    lanczos: float = 1e-8

    def with_overrides(self, overrides: dict[str, float]) -> "Tolerances":
        known = {f.name for f in dataclasses.fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise KeyError(f"unknown tolerance(s): {sorted(unknown)}; known: {sorted(known)}")
        return dataclasses.replace(self, **{k: float(v) for k, v in overrides.items()})

    def as_dict(self) -> dict[str, float]:
        return dataclasses.asdict(self)


TOL = Tolerances()
