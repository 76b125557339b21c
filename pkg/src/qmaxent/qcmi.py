"""Region partitions and conditional mutual information of spin-chain states."""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .config import DEFAULT_SEED, TOL
from .operators import SiteStructure, entropy_of_spectrum, partial_trace, partial_trace_pure
from .spin import IsingParams, build_ising, ground_state_lanczos

__all__ = [
    "RegionPartition",
    "QcmiResult",
    "default_partition",
    "qcmi",
    "mutual_information",
    "region_entropy",
    "qcmi_sweep",
    "crossing_detect",
    "Crossing",
    "DegenerateCurvesWarning",
]

SCHEMES = ("ring4", "line3", "line4", "custom")
MAX_DENSE_REGION = 12


class DegenerateCurvesWarning(UserWarning):
    pass


def _adjacent(x: Sequence[int], y: Sequence[int], n: int, periodic: bool) -> bool:
    ys = set(y)
    for s in x:
        for t in (s - 1, s + 1):
            if periodic:
                t %= n
            if t in ys:
                return True
    return False


@dataclass(frozen=True)
class RegionPartition:
    """Labelled blocks of an ``n_sites`` chain.

    ``B`` may be given as one block or as ``B1`` and ``B2``; :attr:`b` is
    their union.  ``periodic`` decides which sites count as neighbours when
    checking that ``A`` and ``C`` are separated.
    """

    n_sites: int
    blocks: Mapping[str, tuple[int, ...]]
    scheme: str = "custom"
    periodic: bool = False
    allow_adjacent: bool = False

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        blocks = {k: tuple(sorted(int(s) for s in v)) for k, v in self.blocks.items()}
        object.__setattr__(self, "blocks", blocks)
        seen: set[int] = set()
        for label, sites in blocks.items():
            for s in sites:
                if not 0 <= s < self.n_sites:
                    raise ValueError(f"block {label} has site {s} outside 0..{self.n_sites - 1}")
                if s in seen:
                    raise ValueError(f"site {s} belongs to more than one block")
                seen.add(s)
        for label in ("A", "C"):
            if not blocks.get(label):
                raise ValueError(f"partition needs a nonempty block {label}")
        if not self.b:
            raise ValueError("partition needs a nonempty B")
        if self.scheme in ("ring4", "line3") and len(seen) != self.n_sites:
            raise ValueError(f"{self.scheme} partitions must cover every site")
        if not self.allow_adjacent and _adjacent(self.a, self.c, self.n_sites, self.periodic):
            raise ValueError("regions A and C are adjacent; pass allow_adjacent=True to permit this")

    @property
    def a(self) -> tuple[int, ...]:
        return self.blocks["A"]

    @property
    def b(self) -> tuple[int, ...]:
        parts = [self.blocks.get(k, ()) for k in ("B", "B1", "B2")]
        return tuple(sorted(s for p in parts for s in p))

    @property
    def c(self) -> tuple[int, ...]:
        return self.blocks["C"]

    @property
    def d(self) -> tuple[int, ...]:
        return self.blocks.get("D", ())

    @property
    def abc(self) -> tuple[int, ...]:
        return tuple(sorted(self.a + self.b + self.c))

    def to_dict(self) -> dict:
        return {"n_sites": self.n_sites, "scheme": self.scheme, "periodic": self.periodic, "blocks": {k: list(v) for k, v in self.blocks.items()}}


def default_partition(n: int, scheme: str = "ring4", periodic: bool | None = None, allow_adjacent: bool = False) -> RegionPartition:
    """Quarter-based partitions of an ``n``-site chain (``n`` divisible by 4).

    ``ring4``: A, B1, C, B2 around a ring.  ``line3``: A is the first quarter,
    B the middle half, C the last quarter.  ``line4``: quarters A, B, C, D.
    """
    if scheme not in ("ring4", "line3", "line4"):
        raise ValueError(f"no default blocks for scheme {scheme!r}")
    if n % 4:
        raise ValueError(f"default {scheme} blocks need n divisible by 4, got {n}; pass explicit blocks")
    q = n // 4
    quarters = [tuple(range(i * q, (i + 1) * q)) for i in range(4)]
    if scheme == "ring4":
        blocks = {"A": quarters[0], "B1": quarters[1], "C": quarters[2], "B2": quarters[3]}
        periodic = True if periodic is None else periodic
    elif scheme == "line3":
        blocks = {"A": quarters[0], "B": quarters[1] + quarters[2], "C": quarters[3]}
        periodic = False if periodic is None else periodic
    else:
        blocks = {"A": quarters[0], "B": quarters[1], "C": quarters[2], "D": quarters[3]}
        periodic = False if periodic is None else periodic
    return RegionPartition(n, blocks, scheme=scheme, periodic=periodic, allow_adjacent=allow_adjacent)


def _is_pure(state: np.ndarray) -> bool:
    return state.ndim == 1


def region_entropy(state, sites: Sequence[int], n: int, use_complement: bool = True) -> float:
    """Entropy in bits of the reduced state on ``sites``.

    For a pure global ``state`` the smaller of the region and its
    complement is diagonalized.
    """
    state = np.asarray(state)
    st = SiteStructure(n)
    sites = sorted(set(int(s) for s in sites))
    if not sites:
        return 0.0
    if _is_pure(state):
        if use_complement:
            rest = [s for s in range(n) if s not in sites]
            if len(rest) < len(sites):
                sites = rest
            if not sites:
                return 0.0
        rdm = partial_trace_pure(state, sites, st)
    else:
        if len(sites) > MAX_DENSE_REGION:
            raise ValueError(f"mixed-state regions are limited to {MAX_DENSE_REGION} sites")
        rdm = partial_trace(state, sites, st) if len(sites) < n else state
    return entropy_of_spectrum(np.linalg.eigvalsh((rdm + rdm.conj().T) / 2))


@dataclass
class QcmiResult:
    lam: float
    n: int
    value_bits: float
    entropies: dict = field(default_factory=dict)

    def row(self) -> list:
        e = self.entropies
        return [self.n, self.lam, self.value_bits, e["AB"], e["BC"], e["B"], e["ABC"]]


def _check_state(state: np.ndarray, n: int) -> None:
    dim = 2**n
    if state.shape not in ((dim,), (dim, dim)):
        raise ValueError(f"state of shape {state.shape} does not match a {n}-site partition")


def qcmi(state, partition: RegionPartition, lam: float = float("nan"), method: str = "auto") -> QcmiResult:
    """``I(A:C|B) = S(AB) + S(BC) - S(B) - S(ABC)`` in bits.

    ``method='complement'`` (the default for pure states) evaluates each
    entropy on the smaller side of its cut; ``'direct'`` always traces out
    the complement explicitly.
    """
    state = np.asarray(state)
    n = partition.n_sites
    _check_state(state, n)
    if method not in ("auto", "complement", "direct"):
        raise ValueError(f"unknown method {method!r}")
    use_complement = method != "direct"
    a, b, c = partition.a, partition.b, partition.c
    if not _is_pure(state) and len(a + b + c) > MAX_DENSE_REGION:
        raise ValueError(f"mixed-state input is limited to |ABC| <= {MAX_DENSE_REGION}")
    ent = {
        "AB": region_entropy(state, a + b, n, use_complement),
        "BC": region_entropy(state, b + c, n, use_complement),
        "B": region_entropy(state, b, n, use_complement),
        "ABC": region_entropy(state, a + b + c, n, use_complement),
    }
    value = ent["AB"] + ent["BC"] - ent["B"] - ent["ABC"]
    return QcmiResult(lam=lam, n=n, value_bits=float(value), entropies=ent)


def mutual_information(state, x: Sequence[int], y: Sequence[int], n: int) -> float:
    """``I(X:Y) = S(X) + S(Y) - S(XY)`` in bits."""
    state = np.asarray(state)
    _check_state(state, n)
    return region_entropy(state, x, n) + region_entropy(state, y, n) - region_entropy(state, tuple(x) + tuple(y), n)


def qcmi_sweep(
    template: IsingParams,
    lambda_grid: Sequence[float],
    scheme: str | RegionPartition = "ring4",
    field_name: str = "lambda_x",
    seed: int = DEFAULT_SEED,
    tol: float = TOL.lanczos,
    workers: int = 1,
) -> list[QcmiResult]:
    """Ground-state ``I(A:C|B)`` along a grid of one Ising field parameter.

    Without a longitudinal field the ground state lies in the even sector of
    the global spin flip; the iteration is confined there so the exponentially
    small splitting in the ordered phase cannot mix the two lowest states.
    """
    grid = [float(x) for x in lambda_grid]
    if not grid:
        raise ValueError("empty parameter grid")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("parameter grid must be strictly ascending")
    if field_name not in ("lambda_x", "lambda_z"):
        raise ValueError("field_name must be 'lambda_x' or 'lambda_z'")
    if isinstance(scheme, RegionPartition):
        partition = scheme
    else:
        partition = default_partition(template.n, scheme, periodic=template.boundary == "periodic")

    def point(lam: float) -> QcmiResult:
        params = replace(template, **{field_name: lam})
        sector = 1 if params.lambda_z == 0 else None
        try:
            _, psi = ground_state_lanczos(build_ising(params), tol=tol, seed=seed, sector=sector)
        except RuntimeError as exc:
            raise type(exc)(f"{field_name}={lam}: {exc}") from exc
        return qcmi(psi, partition, lam=lam)

    if workers > 1:
        # every point uses its own seeded start vector, so results do not depend on scheduling
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(point, grid))
    return [point(lam) for lam in grid]


@dataclass(frozen=True)
class Crossing:
    sizes: tuple[int, int]
    lam: float


def crossing_detect(curves: Mapping[int, Sequence[QcmiResult]], zero_tol: float = 1e-9) -> list[Crossing]:
    """Sign changes of ``I_{n2} - I_{n1}`` for adjacent sizes, located by linear interpolation.

    Differences below ``zero_tol`` count as ties rather than sign changes;
    identical curves raise a :class:`DegenerateCurvesWarning` and yield nothing.
    """
    sizes = sorted(curves)
    grids = {n: [r.lam for r in curves[n]] for n in sizes}
    for n in sizes[1:]:
        if not np.allclose(grids[n], grids[sizes[0]], rtol=0, atol=1e-12):
            raise ValueError(f"curve for n={n} uses a different parameter grid")
    found = []
    for n1, n2 in zip(sizes, sizes[1:]):
        lam = np.array(grids[n1])
        diff = np.array([r2.value_bits - r1.value_bits for r1, r2 in zip(curves[n1], curves[n2])])
        sign = np.where(np.abs(diff) < zero_tol, 0, np.sign(diff))
        if not sign.any():
            warnings.warn(f"curves for n={n1} and n={n2} coincide; no crossing defined", DegenerateCurvesWarning, stacklevel=2)
            continue
        nz = np.flatnonzero(sign)
        for i, j in zip(nz, nz[1:]):
            if sign[i] != sign[j]:
                if j == i + 1:
                    x = lam[i] - diff[i] * (lam[j] - lam[i]) / (diff[j] - diff[i])
                else:
                    # a run of ties between opposite signs: take its midpoint
                    x = 0.5 * (lam[i + 1] + lam[j - 1])
                found.append(Crossing((n1, n2), float(x)))
    return found
