"""Bipartite splittings of multipartite states and a product-eigenbasis oracle."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .linalg import EPS_NULL, eig_hermitian
from .maps import EnceMapSpec
from .measures import measure_Q_tilde
from .states import DensityMatrix, regroup, trace_out

GAP_TOL = 1e-8
SCHMIDT_TOL = 1e-9
OVERLAP_TOL = 1e-9
COMMUTATOR_TOL = 1e-9


@dataclass(frozen=True)
class SplittingSpec:
    """A cut ``left | right`` of subsystems; ``left`` always contains subsystem 0."""

    left: tuple[int, ...]
    right: tuple[int, ...]

    def __post_init__(self):
        left, right = tuple(sorted(self.left)), tuple(sorted(self.right))
        if not left or not right or set(left) & set(right):
            raise ParameterError(f"invalid splitting {left}|{right}")
        if 0 not in left:
            left, right = right, left
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    @property
    def m(self) -> int:
        return len(self.left) + len(self.right)

    def label(self) -> str:
        names = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
        if self.m <= len(names):
            return "".join(names[i] for i in self.left) + "|" + "".join(names[i] for i in self.right)
        return ",".join(map(str, self.left)) + "|" + ",".join(map(str, self.right))


class PEStatus(str, enum.Enum):
    HAS_PE = "HasPE"
    NO_PE = "NoPE"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class PEVerdict:
    status: PEStatus
    witness: str | None = None
    splitting: SplittingSpec | None = None
    details: tuple["PEVerdict", ...] = field(default=(), repr=False)


def enumerate_bipartitions(m: int) -> list[SplittingSpec]:
    """All 2**(m-1) - 1 cuts of ``m`` subsystems, each listed once."""
    if m < 2:
        raise ParameterError(f"need at least two subsystems, got {m}")
    rest = range(1, m)
    out = []
    for r in range(0, m - 1):
        for extra in itertools.combinations(rest, r):
            left = (0,) + extra
            right = tuple(i for i in range(m) if i not in left)
            out.append(SplittingSpec(left, right))
    return out


def _as_splitting(rho: DensityMatrix, splitting) -> SplittingSpec:
    if splitting is None:
        if rho.n_subsystems != 2:
            raise ParameterError("a splitting is required for states with more than two subsystems")
        return SplittingSpec((0,), (1,))
    if not isinstance(splitting, SplittingSpec):
        splitting = SplittingSpec(*splitting)
    if sorted(splitting.left + splitting.right) != list(range(rho.n_subsystems)):
        raise ParameterError(f"splitting {splitting.label()} does not cover {rho.n_subsystems} subsystems")
    return splitting


@dataclass
class AggregateResult:
    value: float
    aggregator: str
    map: EnceMapSpec
    table: list[tuple[SplittingSpec, float]]

    @property
    def summary(self) -> dict[str, float]:
        vals = [v for _, v in self.table]
        return {"min": min(vals), "max": max(vals), "avg": float(np.mean(vals))}


_AGGREGATORS = {"min": min, "max": max, "avg": lambda v: float(np.mean(v))}


def aggregate_measure(rho: DensityMatrix, kind, aggregator: str = "avg", x: float | None = None) -> AggregateResult:
    """Q_tilde on every bipartite cut, combined by min, max or avg."""
    if aggregator not in _AGGREGATORS:
        raise ParameterError(f"aggregator must be one of {sorted(_AGGREGATORS)}")
    table = []
    spec = None
    for sp in enumerate_bipartitions(rho.n_subsystems):
        res = measure_Q_tilde(regroup(rho, sp.left, sp.right), kind, x)
        spec = res.map
        table.append((sp, res.value))
    value = _AGGREGATORS[aggregator]([v for _, v in table])
    return AggregateResult(value, aggregator, spec, table)


def _cluster(factors: list[np.ndarray]):
    """Group unit vectors equal up to phase; fail if two are neither equal nor orthogonal."""
    reps: list[np.ndarray] = []
    labels = []
    for k, f in enumerate(factors):
        overlaps = [abs(np.vdot(r, f)) for r in reps]
        same = [i for i, o in enumerate(overlaps) if o >= 1 - OVERLAP_TOL]
        if len(same) == 1 and all(o <= OVERLAP_TOL for i, o in enumerate(overlaps) if i != same[0]):
            labels.append(same[0])
        elif not same and all(o <= OVERLAP_TOL for o in overlaps):
            reps.append(f)
            labels.append(len(reps) - 1)
        else:
            worst = max((o for o in overlaps if OVERLAP_TOL < o < 1 - OVERLAP_TOL), default=max(overlaps))
            return None, f"factor of eigenvector {k} has overlap {worst:.3e} with an earlier factor"
    return labels, None


def pe_oracle_bipartite(rho: DensityMatrix, splitting=None) -> PEVerdict:
    """Decide whether ``rho`` has a product eigenbasis across ``splitting``.

    A state with a product eigenbasis commutes with both marginals (embedded
    as rho_A (x) I and I (x) rho_B); a nonzero commutator is a NoPE
    certificate even for degenerate spectra. Beyond that the check needs the
    nonzero eigenvalues pairwise separated (and separated from zero) by more
    than ``GAP_TOL`` relative to the largest, else the verdict is
    Indeterminate. The kernel is ignored: product eigenvectors that cluster
    into two orthonormal families can always be completed to a full grid.
    """
    sp = _as_splitting(rho, splitting)
    bi = regroup(rho, sp.left, sp.right)
    dl, dr = bi.dims
    M = bi.matrix
    for name, marg in (
        ("left", np.kron(trace_out(M, (dl, dr), [1]), np.eye(dr))),
        ("right", np.kron(np.eye(dl), trace_out(M, (dl, dr), [0]))),
    ):
        comm = np.max(np.abs(M @ marg - marg @ M))
        if comm > COMMUTATOR_TOL:
            return PEVerdict(PEStatus.NO_PE, f"state does not commute with its {name} marginal (|[rho, marginal]| = {comm:.3e})", sp)
    spec = eig_hermitian(M, want_vectors=True)
    w, V = spec.values, spec.vectors
    scale = max(float(w[0]), 1e-300)
    nz = w > EPS_NULL * max(1.0, float(w[0]))
    wn = w[nz]
    gaps = -np.diff(wn) if len(wn) > 1 else np.array([])
    if not nz.all():
        gaps = np.append(gaps, wn[-1])
    if len(gaps) and gaps.min() < GAP_TOL * scale:
        i = int(np.argmin(gaps))
        return PEVerdict(PEStatus.INDETERMINATE, f"eigenvalue gap {gaps[i]:.3e} at index {i} below threshold", sp)

    lefts, rights = [], []
    for k in np.flatnonzero(nz):
        u, s, vh = np.linalg.svd(V[:, k].reshape(dl, dr))
        if s[0] < 1 - SCHMIDT_TOL:
            return PEVerdict(
                PEStatus.NO_PE, f"eigenvector {k} (eigenvalue {w[k]:.6g}) has Schmidt coefficients {np.round(s, 6).tolist()}", sp
            )
        lefts.append(u[:, 0])
        rights.append(vh[0].conj())
    la, why = _cluster(lefts)
    if la is None:
        return PEVerdict(PEStatus.NO_PE, "left " + why, sp)
    lb, why = _cluster(rights)
    if lb is None:
        return PEVerdict(PEStatus.NO_PE, "right " + why, sp)
    if len(set(zip(la, lb))) != len(la):
        return PEVerdict(PEStatus.NO_PE, "two eigenvectors share the same product factors", sp)
    return PEVerdict(PEStatus.HAS_PE, None, sp)


def fully_product_check(rho: DensityMatrix) -> PEVerdict:
    """Product eigenbasis for every bipartite cut, equivalently a fully product eigenbasis."""
    verdicts = tuple(pe_oracle_bipartite(rho, sp) for sp in enumerate_bipartitions(rho.n_subsystems))
    no = [v for v in verdicts if v.status is PEStatus.NO_PE]
    if no:
        return PEVerdict(PEStatus.NO_PE, f"{no[0].splitting.label()}: {no[0].witness}", None, verdicts)
    ind = [v for v in verdicts if v.status is PEStatus.INDETERMINATE]
    if ind:
        return PEVerdict(PEStatus.INDETERMINATE, f"{ind[0].splitting.label()}: {ind[0].witness}", None, verdicts)
    return PEVerdict(PEStatus.HAS_PE, None, None, verdicts)
