"""Density matrices with subsystem structure.

Subsystem order is row-major: the leftmost entry of ``dims`` is the most
significant index of the matrix. Bipartite states have ``dims == (dA, dB)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DimMismatchError,
    NonSquareError,
    NotPSDError,
    ParameterError,
    StateFormatError,
    TraceNotOneError,
)
from .linalg import EPS_ORTH, EPS_PSD, as_matrix, eig_hermitian, hermitian_part

EPS_TRACE = 1e-9

KET0 = np.array([1.0, 0.0], dtype=complex)
KET1 = np.array([0.0, 1.0], dtype=complex)
KETPLUS = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    dims: tuple[int, ...]
    matrix: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_subsystems(self) -> int:
        return len(self.dims)

    def spectrum(self):
        return eig_hermitian(self.matrix)


def _check_dims(dims) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise ParameterError(f"subsystem dimensions must be positive integers, got {dims}")
    return dims


def validate(dims: Sequence[int], matrix) -> DensityMatrix:
    """Check the density-matrix invariants and return the validated state.

    Raises the specific violation: DimMismatchError, NonHermitianError,
    TraceNotOneError or NotPSDError.
    """
    dims = _check_dims(dims)
    try:
        M = as_matrix(matrix)
    except NonSquareError as exc:
        raise DimMismatchError(str(exc)) from exc
    D = math.prod(dims)
    if M.shape[0] != D:
        raise DimMismatchError(f"matrix side {M.shape[0]} does not match product of dims {dims} = {D}")
    M = hermitian_part(M)
    tr = np.trace(M).real
    if abs(tr - 1.0) > EPS_TRACE:
        raise TraceNotOneError(f"trace is {tr:.12g}, expected 1")
    lo = eig_hermitian(M).values[-1]
    if lo < -EPS_PSD:
        raise NotPSDError(f"smallest eigenvalue {lo:.3e} is below -{EPS_PSD:g}")
    return DensityMatrix(dims, M)


# ---------------------------------------------------------------- reshaping


def trace_out(matrix: np.ndarray, dims: Sequence[int], traced: Iterable[int]) -> np.ndarray:
    """Partial trace of an arbitrary operator; returns the reduced matrix."""
    dims = tuple(dims)
    m = len(dims)
    traced = sorted(set(traced))
    if any(i < 0 or i >= m for i in traced):
        raise ParameterError(f"subsystem index out of range for {m} subsystems: {traced}")
    kept = [i for i in range(m) if i not in traced]
    if not kept:
        raise ParameterError("at least one subsystem must be kept")
    t = np.asarray(matrix).reshape(dims + dims)
    # trace the highest indices first so remaining axis numbers stay valid
    for i in reversed(traced):
        cur = t.ndim // 2
        t = np.trace(t, axis1=i, axis2=i + cur)
    dk = math.prod(dims[i] for i in kept)
    return t.reshape(dk, dk)


def permute_subsystems(matrix: np.ndarray, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors so that new subsystem k is old subsystem ``order[k]``."""
    dims = tuple(dims)
    m = len(dims)
    order = list(order)
    if sorted(order) != list(range(m)):
        raise ParameterError(f"{order} is not a permutation of {m} subsystems")
    D = math.prod(dims)
    t = np.asarray(matrix).reshape(dims + dims)
    t = t.transpose(order + [m + i for i in order])
    return t.reshape(D, D)


def partial_trace(rho: DensityMatrix, traced_subsystems: Iterable[int]) -> DensityMatrix:
    traced = sorted(set(traced_subsystems))
    red = trace_out(rho.matrix, rho.dims, traced)
    kept = tuple(d for i, d in enumerate(rho.dims) if i not in traced)
    return DensityMatrix(kept, (red + red.conj().T) / 2)


def regroup(rho: DensityMatrix, left: Sequence[int], right: Sequence[int]) -> DensityMatrix:
    """Flatten a multipartite state into the bipartite cut ``left | right``."""
    left, right = list(left), list(right)
    if not left or not right or sorted(left + right) != list(range(rho.n_subsystems)):
        raise ParameterError(f"{left}|{right} is not a bipartition of {rho.n_subsystems} subsystems")
    M = permute_subsystems(rho.matrix, rho.dims, left + right)
    dl = math.prod(rho.dims[i] for i in left)
    dr = math.prod(rho.dims[i] for i in right)
    return DensityMatrix((dl, dr), M)


def tensor(rho: DensityMatrix, sigma: DensityMatrix) -> DensityMatrix:
    return DensityMatrix(rho.dims + sigma.dims, np.kron(rho.matrix, sigma.matrix))


def apply_local_unitary(rho: DensityMatrix, U, subsystem: int) -> DensityMatrix:
    """Conjugate ``rho`` by ``U`` acting on one subsystem."""
    U = as_matrix(U)
    if not 0 <= subsystem < rho.n_subsystems:
        raise ParameterError(f"subsystem {subsystem} out of range")
    d = rho.dims[subsystem]
    if U.shape[0] != d:
        raise ParameterError(f"unitary of size {U.shape[0]} does not act on subsystem of dimension {d}")
    if np.max(np.abs(U @ U.conj().T - np.eye(d))) > EPS_ORTH:
        raise ParameterError("operator is not unitary")
    left = math.prod(rho.dims[:subsystem])
    right = math.prod(rho.dims[subsystem + 1 :])
    full = np.kron(np.kron(np.eye(left), U), np.eye(right))
    M = full @ rho.matrix @ full.conj().T
    return DensityMatrix(rho.dims, (M + M.conj().T) / 2)


# ---------------------------------------------------------------- named states


def _proj(*kets) -> np.ndarray:
    v = kets[0]
    for k in kets[1:]:
        v = np.kron(v, k)
    return np.outer(v, v.conj())


def bell_projector() -> np.ndarray:
    psi = (np.kron(KET0, KET0) + np.kron(KET1, KET1)) / math.sqrt(2)
    return np.outer(psi, psi.conj())


@dataclass(frozen=True)
class NamedStateSpec:
    name: str
    params: Mapping[str, float] = field(default_factory=dict)


def _pseudo_entangled(params):
    p = float(params.get("p", 1.0))
    if not 0.0 < p <= 1.0:
        raise ParameterError(f"pseudo_entangled requires 0 < p <= 1, got {p}")
    return (2, 2), (1 - p) * np.eye(4) / 4 + p * bell_projector()


def _maximally_mixed(params):
    dims = (int(params.get("dA", 2)), int(params.get("dB", 2)))
    D = math.prod(_check_dims(dims))
    return dims, np.eye(D, dtype=complex) / D


NAMED_STATES = {
    "pseudo_entangled": _pseudo_entangled,
    "zero_plus": lambda _: ((2, 2), (_proj(KET0, KET0) + _proj(KETPLUS, KETPLUS)) / 2),
    "bell": lambda _: ((2, 2), bell_projector()),
    "classical_cc": lambda _: ((2, 2), (_proj(KET0, KET0) + _proj(KET1, KET1)) / 2),
    "one_way_cc": lambda _: ((2, 2), (_proj(KET0, KET0) + _proj(KET1, KETPLUS)) / 2),
    "tripartite_cex": lambda _: ((2, 2, 2), (_proj(KET0, KET0, KET0) + _proj(KET1, KETPLUS, KET1)) / 2),
    "maximally_mixed": _maximally_mixed,
}

# parameters each family understands; anything else is rejected
_ALLOWED_PARAMS = {"pseudo_entangled": {"p"}, "maximally_mixed": {"dA", "dB"}}


def make_named_state(spec: NamedStateSpec | str, **params: float) -> DensityMatrix:
    """Build one of the named example states.

    ``make_named_state("pseudo_entangled", p=0.5)`` and
    ``make_named_state(NamedStateSpec("pseudo_entangled", {"p": 0.5}))`` are equivalent.
    """
    if isinstance(spec, str):
        spec = NamedStateSpec(spec, params)
    if spec.name not in NAMED_STATES:
        raise ParameterError(f"unknown state {spec.name!r}; choose from {sorted(NAMED_STATES)}")
    extra = set(spec.params) - _ALLOWED_PARAMS.get(spec.name, set())
    if extra:
        raise ParameterError(f"state {spec.name!r} takes no parameter(s) {sorted(extra)}")
    dims, M = NAMED_STATES[spec.name](spec.params)
    return validate(dims, M)


def make_1wcc(basis_side: str, blocks: Sequence) -> DensityMatrix:
    """Sum of |i><i| (x) block_i with the computational basis on ``basis_side``.

    ``basis_side`` is "A" (basis on the left factor) or "B" (mirrored).
    """
    side = basis_side.upper()
    if side not in ("A", "B"):
        raise ParameterError(f"basis_side must be 'A' or 'B', got {basis_side!r}")
    blocks = [as_matrix(b) for b in blocks]
    if not blocks:
        raise ParameterError("need at least one block")
    d_other = blocks[0].shape[0]
    if any(b.shape[0] != d_other for b in blocks):
        raise ParameterError("all blocks must have the same size")
    n = len(blocks)
    for i, b in enumerate(blocks):
        lo = eig_hermitian(b).values[-1]
        if lo < -EPS_PSD:
            raise NotPSDError(f"block {i} has eigenvalue {lo:.3e}")
    M = np.zeros((n * d_other, n * d_other), dtype=complex)
    for i, b in enumerate(blocks):
        e = np.zeros((n, n))
        e[i, i] = 1.0
        M += np.kron(e, b) if side == "A" else np.kron(b, e)
    dims = (n, d_other) if side == "A" else (d_other, n)
    tr = np.trace(M).real
    if abs(tr - 1.0) > EPS_TRACE:
        raise TraceNotOneError(f"block traces sum to {tr:.12g}, expected 1")
    return validate(dims, M)


# ---------------------------------------------------------------- random states


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_unitary(d: int, seed=None) -> np.ndarray:
    """Haar-distributed unitary from the phase-corrected QR of a Ginibre matrix."""
    rng = _rng(seed)
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_probabilities(n: int, seed=None) -> np.ndarray:
    u = _rng(seed).uniform(size=n)
    return u / u.sum()


def random_density(dims: Sequence[int], seed=None, spectrum: Sequence[float] | None = None) -> DensityMatrix:
    """Random state U diag(spectrum) U^dagger with Haar U; deterministic per seed."""
    dims = _check_dims(dims)
    D = math.prod(dims)
    rng = _rng(seed)
    if spectrum is None:
        lam = random_probabilities(D, rng)
    else:
        lam = np.asarray(spectrum, dtype=float)
        if lam.shape != (D,) or np.any(lam < 0) or abs(lam.sum() - 1) > EPS_TRACE:
            raise ParameterError(f"spectrum must be {D} nonnegative numbers summing to 1")
    U = random_unitary(D, rng)
    M = (U * lam) @ U.conj().T
    return validate(dims, (M + M.conj().T) / 2)


def _spread_probabilities(n: int, rng, gap: float) -> np.ndarray:
    """Random distinct probabilities whose sorted neighbours differ by at least ``gap``."""
    if gap * n * (n - 1) / 2 >= 1:
        raise ParameterError(f"{n} eigenvalues cannot all be separated by {gap}")
    u = np.sort(rng.uniform(size=n))
    g = 1.01 * gap
    c = g * u.sum() / (1 - g * n * (n - 1) / 2)
    v = u + c * np.arange(n)
    return rng.permutation(v / v.sum())


def random_pe_state(dims_A: int, dims_B: int, seed=None, nondegenerate: bool = False) -> DensityMatrix:
    """Random state with a product eigenbasis: sum_jk e_jk |a_j><a_j| (x) |b_k><b_k|.

    With ``nondegenerate`` the grid of eigenvalues is pairwise separated by at least 1e-4.
    """
    rng = _rng(seed)
    dA, dB = int(dims_A), int(dims_B)
    _check_dims((dA, dB))
    if nondegenerate:
        e = _spread_probabilities(dA * dB, rng, 1e-4)
    else:
        e = random_probabilities(dA * dB, rng)
    UA = random_unitary(dA, rng)
    UB = random_unitary(dB, rng)
    U = np.kron(UA, UB)
    M = (U * e) @ U.conj().T
    return validate((dA, dB), (M + M.conj().T) / 2)


def random_fully_product_state(dims: Sequence[int], seed=None, nondegenerate: bool = False) -> DensityMatrix:
    """Random m-partite state diagonal in a product of local orthonormal bases."""
    dims = _check_dims(dims)
    rng = _rng(seed)
    D = math.prod(dims)
    e = _spread_probabilities(D, rng, 1e-4) if nondegenerate else random_probabilities(D, rng)
    U = np.eye(1)
    for d in dims:
        U = np.kron(U, random_unitary(d, rng))
    M = (U * e) @ U.conj().T
    return validate(dims, (M + M.conj().T) / 2)


def random_1wcc(d_basis: int, d_other: int, seed=None, basis_side: str = "A") -> DensityMatrix:
    """Random one-way classically correlated state with random (generically noncommuting) blocks."""
    rng = _rng(seed)
    w = random_probabilities(d_basis, rng)
    blocks = [wi * random_density((d_other,), rng).matrix for wi in w]
    return make_1wcc(basis_side, blocks)


# ---------------------------------------------------------------- text format


def format_state(rho: DensityMatrix) -> str:
    """Serialize: ``dims:`` header, then one line of real/imag pairs per matrix row."""
    lines = ["dims: " + " ".join(str(d) for d in rho.dims)]
    for row in rho.matrix:
        lines.append(" ".join(f"{z.real:.17g} {z.imag:.17g}" for z in row))
    return "\n".join(lines) + "\n"


def parse_state(text: str) -> DensityMatrix:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise StateFormatError("empty state file")
    head = lines[0].split(":", 1)
    if len(head) != 2 or head[0].strip() != "dims":
        raise StateFormatError(f"first line must be 'dims: d1 ... dm', got {lines[0]!r}")
    try:
        dims = tuple(int(t) for t in head[1].split())
    except ValueError as exc:
        raise StateFormatError(f"bad dims line {lines[0]!r}") from exc
    if not dims or any(d < 1 for d in dims):
        raise StateFormatError(f"bad dims {dims}")
    D = math.prod(dims)
    rows = lines[1:]
    if len(rows) != D:
        raise StateFormatError(f"expected {D} matrix rows, found {len(rows)}")
    M = np.empty((D, D), dtype=complex)
    for i, ln in enumerate(rows):
        try:
            vals = [float(t) for t in ln.split()]
        except ValueError as exc:
            raise StateFormatError(f"row {i + 1}: non-numeric entry") from exc
        if len(vals) != 2 * D:
            raise StateFormatError(f"row {i + 1}: expected {2 * D} numbers, found {len(vals)}")
        M[i] = np.array(vals[0::2]) + 1j * np.array(vals[1::2])
    if not np.all(np.isfinite(M)):
        raise StateFormatError("non-finite entries")
    return validate(dims, M)


def read_state(path) -> DensityMatrix:
    return parse_state(Path(path).read_text())


def write_state(rho: DensityMatrix, path) -> None:
    Path(path).write_text(format_state(rho))
