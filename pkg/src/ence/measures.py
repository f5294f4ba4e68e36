"""Spectrum-comparison measures of nonclassical correlation.

``measure_D`` is the L1 distance between the sorted spectra of a state and
its image under a one-sided EnCE map.  ``measure_Q`` is the negative log2 of
a normalized fidelity between the same spectra and is subadditive for both
map families; ``measure_Q_tilde`` averages its two one-sided versions.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateImageError, NumericalError, ParameterError
from .linalg import EPS_NULL, Spectrum, eig_hermitian
from .maps import EnceMapSpec, MapKind, Side, apply_ence
from .states import DensityMatrix

DETECT_THRESHOLD = 1e-7
_CLAMP = 1e-12


class MeasureKind(str, enum.Enum):
    D = "D"
    Q = "Q"
    Q_TILDE = "Q_tilde"
    WEIGHTED = "Weighted"


@dataclass(frozen=True, eq=False)
class MeasureResult:
    measure: MeasureKind
    map: EnceMapSpec | WeightedMeasureSpec
    side: str
    value: float
    spectrum_in: Spectrum
    spectrum_out: Spectrum
    diagnostics: dict = field(default_factory=dict)

    def detected(self, threshold: float = DETECT_THRESHOLD) -> bool:
        return self.value > threshold


@dataclass(frozen=True)
class WeightedMeasureSpec:
    """Positive weights over Q_tilde terms, e.g. ((transpose, 1.0), (power x=2, 1.0))."""

    terms: tuple[tuple[EnceMapSpec, float], ...]

    def __post_init__(self):
        terms = tuple((spec, float(w)) for spec, w in self.terms)
        if not terms:
            raise ParameterError("weighted measure needs at least one term")
        for spec, w in terms:
            if not (w > 0 and math.isfinite(w)):
                raise ParameterError(f"weights must be positive, got {w}")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def standard(cls, w_transpose: float = 1.0, power_terms: Sequence[tuple[float, float]] = ((2.0, 1.0),)):
        """Transpose term plus one term per ``(x, weight)`` pair."""
        terms = [(EnceMapSpec.transpose(), w_transpose)]
        terms += [(EnceMapSpec.power(x), w) for x, w in power_terms]
        return cls(tuple(terms))

    def label(self) -> str:
        return " + ".join(f"{w:g}*{spec.label()}" for spec, w in self.terms)


def _clamp(value: float) -> float:
    if not math.isfinite(value):
        raise NumericalError(f"measure evaluated to {value}")
    if value < -_CLAMP:
        raise NumericalError(f"measure evaluated to {value:.3e} < 0")
    return 0.0 if value <= 0 else float(value)


def measure_D(rho: DensityMatrix, spec: EnceMapSpec) -> MeasureResult:
    """Sum of |e_s - e'_s| over descending-sorted signed spectra.

    Vanishes for states with a product eigenbasis; a zero value does not
    certify one.
    """
    s_in = rho.spectrum()
    s_out = eig_hermitian(apply_ence(rho, spec).matrix)
    value = float(np.sum(np.abs(s_in.values - s_out.values)))
    return MeasureResult(MeasureKind.D, spec, spec.side.value, _clamp(value), s_in, s_out)


def _null_to_zero(v: np.ndarray) -> np.ndarray:
    cutoff = EPS_NULL * max(1.0, float(v.max(initial=0.0)))
    return np.where(v > cutoff, v, 0.0)


def log_fidelity(e: np.ndarray, e_mapped: np.ndarray) -> float:
    """-log2 of sum_s sqrt(e_s * |e'_s|) / sqrt(sum_s |e'_s|), both sorted descending.

    ``e`` is clamped at zero and renormalized to a probability vector so the
    Cauchy-Schwarz bound keeps the result nonnegative. Entries of either
    spectrum below the null threshold count as exact zeros; otherwise solver
    noise of ~1e-17 enters through the square root at the 1e-9 level.
    """
    p = np.sort(_null_to_zero(np.clip(np.asarray(e, dtype=float), 0.0, None)))[::-1]
    p = p / p.sum()
    q = np.sort(_null_to_zero(np.abs(np.asarray(e_mapped, dtype=float))))[::-1]
    total = q.sum()
    if not total > 0:
        raise DegenerateImageError("mapped spectrum is identically zero")
    fid = np.sum(np.sqrt(p * q)) / math.sqrt(total)
    return -math.log2(fid)


def measure_Q(rho: DensityMatrix, spec: EnceMapSpec) -> MeasureResult:
    s_in = rho.spectrum()
    s_out = eig_hermitian(apply_ence(rho, spec).matrix)
    value = _clamp(log_fidelity(s_in.values, s_out.values))
    abs_out = np.sort(np.abs(s_out.values))[::-1]
    return MeasureResult(
        MeasureKind.Q, spec, spec.side.value, value, s_in, s_out, {"abs_spectrum_out": abs_out}
    )


def _as_spec(kind, x=None) -> EnceMapSpec:
    if isinstance(kind, EnceMapSpec):
        return kind
    kind = MapKind(kind)
    return EnceMapSpec.transpose() if kind is MapKind.TRANSPOSE else EnceMapSpec.power(x if x is not None else 2.0)


def measure_Q_tilde(rho: DensityMatrix, kind: EnceMapSpec | MapKind | str, x: float | None = None) -> MeasureResult:
    """Average of the right- and left-side Q values for one map family.

    ``spectrum_out`` holds the right-side image; the left-side result is in
    ``diagnostics["left"]``.
    """
    spec = _as_spec(kind, x)
    right = measure_Q(rho, spec.with_side(Side.RIGHT))
    left = measure_Q(rho, spec.with_side(Side.LEFT))
    value = _clamp((right.value + left.value) / 2)
    return MeasureResult(
        MeasureKind.Q_TILDE,
        spec.with_side(Side.RIGHT),
        "average",
        value,
        right.spectrum_in,
        right.spectrum_out,
        {"Q_R": right.value, "Q_L": left.value, "right": right, "left": left},
    )


def weighted_measure(rho: DensityMatrix, spec: WeightedMeasureSpec) -> MeasureResult:
    """Positive combination of Q_tilde terms; nonzero whenever any term is."""
    parts = [(measure_Q_tilde(rho, term), w) for term, w in spec.terms]
    value = _clamp(sum(w * r.value for r, w in parts))
    first = parts[0][0]
    return MeasureResult(
        MeasureKind.WEIGHTED,
        spec,
        "n/a",
        value,
        first.spectrum_in,
        first.spectrum_out,
        {"components": [(term.label(), w, r.value) for (term, w), (r, _) in zip(spec.terms, parts)]},
    )
