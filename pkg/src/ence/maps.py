"""One-sided EnCE maps on bipartite states.

Two families are provided: the partial transposition and the nonlinear
power map P_x, built from two applications of the generalized power
Gamma_x.  Both leave the spectrum of any state with a product eigenbasis
unchanged, so a spectrum change certifies nonclassical correlation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NotBipartiteError, ParameterError
from .linalg import eig_hermitian, left_modulus, pseudo_power
from .states import DensityMatrix, trace_out

DEFAULT_X = 2.0


class Side(str, enum.Enum):
    RIGHT = "right"
    LEFT = "left"

    @classmethod
    def parse(cls, value) -> "Side":
        if isinstance(value, cls):
            return value
        v = str(value).lower()
        aliases = {"r": "right", "b": "right", "l": "left", "a": "left"}
        try:
            return cls(aliases.get(v, v))
        except ValueError:
            raise ParameterError(f"side must be 'right' or 'left', got {value!r}") from None


class MapKind(str, enum.Enum):
    TRANSPOSE = "transpose"
    POWER = "power"


@dataclass(frozen=True)
class EnceMapSpec:
    """Which map to apply (transpose or P_x) and on which factor."""

    kind: MapKind = MapKind.TRANSPOSE
    x: float | None = None
    side: Side = Side.RIGHT

    def __post_init__(self):
        object.__setattr__(self, "kind", MapKind(self.kind))
        object.__setattr__(self, "side", Side.parse(self.side))
        if self.kind is MapKind.POWER:
            x = DEFAULT_X if self.x is None else float(self.x)
            check_power_parameter(x)
            object.__setattr__(self, "x", x)
        elif self.x is not None:
            raise ParameterError("the transpose map takes no parameter x")

    @classmethod
    def transpose(cls, side=Side.RIGHT) -> "EnceMapSpec":
        return cls(MapKind.TRANSPOSE, None, side)

    @classmethod
    def power(cls, x: float = DEFAULT_X, side=Side.RIGHT) -> "EnceMapSpec":
        return cls(MapKind.POWER, x, side)

    def with_side(self, side) -> "EnceMapSpec":
        return EnceMapSpec(self.kind, self.x, side)

    def label(self) -> str:
        return "T" if self.kind is MapKind.TRANSPOSE else f"P_{self.x:g}"


@dataclass(frozen=True, eq=False)
class MappedState:
    """Image of a bipartite state; Hermitian, but not necessarily PSD or unit trace."""

    dims: tuple[int, ...]
    matrix: np.ndarray = field(repr=False)

    def spectrum(self):
        return eig_hermitian(self.matrix)


def check_power_parameter(x: float) -> None:
    if not math.isfinite(x):
        raise ParameterError(f"x must be finite, got {x}")
    if abs(x) <= 1e-12 or abs(x - 1) <= 1e-12:
        raise ParameterError(f"P_x requires x not in {{0, 1}}, got {x}")


def _bipartite_dims(state) -> tuple[int, int]:
    if len(state.dims) != 2:
        raise NotBipartiteError(f"expected a bipartite state, got dims {state.dims}")
    return state.dims


def partial_transpose(rho: DensityMatrix | MappedState, side=Side.RIGHT) -> MappedState:
    dA, dB = _bipartite_dims(rho)
    t = rho.matrix.reshape(dA, dB, dA, dB)
    if Side.parse(side) is Side.RIGHT:
        t = t.transpose(0, 3, 2, 1)
    else:
        t = t.transpose(2, 1, 0, 3)
    return MappedState((dA, dB), t.reshape(dA * dB, dA * dB))


def _gamma_matrix(M: np.ndarray, dims: tuple[int, int], side: Side, x: float) -> np.ndarray:
    dA, dB = dims
    if side is Side.RIGHT:
        marginal = trace_out(M, dims, [0])
        factor = np.kron(np.eye(dA), pseudo_power(marginal, x - 1))
    else:
        marginal = trace_out(M, dims, [1])
        factor = np.kron(pseudo_power(marginal, x - 1), np.eye(dB))
    K = M @ factor
    return left_modulus(K)


def gamma_x(rho: DensityMatrix | MappedState, side=Side.RIGHT, x: float = DEFAULT_X) -> MappedState:
    """Generalized one-sided power sqrt((rho (I (x) sigma^(x-1))) (h.c.)).

    ``sigma`` is the marginal on the mapped side; for ``side="left"`` the
    roles of the factors are mirrored. The input may be unnormalized.
    """
    dims = _bipartite_dims(rho)
    x = float(x)
    if not math.isfinite(x):
        raise ParameterError(f"x must be finite, got {x}")
    return MappedState(dims, _gamma_matrix(rho.matrix, dims, Side.parse(side), x))


def p_x(rho: DensityMatrix | MappedState, side=Side.RIGHT, x: float = DEFAULT_X) -> MappedState:
    """Gamma_{1/x} applied after Gamma_x on the same side; fixes every product-eigenbasis state."""
    x = float(x)
    check_power_parameter(x)
    side = Side.parse(side)
    return gamma_x(gamma_x(rho, side, x), side, 1.0 / x)


def apply_ence(rho: DensityMatrix, spec: EnceMapSpec) -> MappedState:
    if spec.kind is MapKind.TRANSPOSE:
        return partial_transpose(rho, spec.side)
    return p_x(rho, spec.side, spec.x)
