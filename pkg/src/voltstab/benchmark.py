"""DC tunnel-diode benchmark: source, series resistor, capacitor parallel to a diode.

    C dV/dt = -h(V) - V/R + V1/R,   h(V) = a V^5 + b V^4 + c V^3 + d V^2 + e V

Equilibria are the intersections of the diode characteristic with the load
line ``(V1 - V)/R``. A crossing is stable when the right-hand side decreases
through it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from voltstab import numerics

# Reference quintic and resistance. With r = 0.02 the load line crosses h
# only once; r = 0.2 gives the three crossings near 0.2, 0.5 and 0.9 that the
# benchmark_fig4 and benchmark_fig6 scenarios use.
H_COEFFS = (218.6576, -539.0593, 517.9071, -246.6894, 52.5842)
TABLE_R = 0.02
EQUILIBRIA_R = 0.2

MARGINAL_TOL = 1e-9


class Stability(enum.Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    MARGINAL = "Marginal"


@dataclass(frozen=True)
class BenchmarkParams:
    """Circuit constants; ``h_coeffs`` is ``(a, b, c, d, e)``, highest power first."""

    v1: float = 1.0
    r: float = TABLE_R
    c: float = 10.0
    h_coeffs: tuple[float, float, float, float, float] = H_COEFFS

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"r must be positive, got {self.r}")
        if not self.c > 0:
            raise ValueError(f"c must be positive, got {self.c}")
        coeffs = tuple(float(k) for k in self.h_coeffs)
        if len(coeffs) != 5:
            raise ValueError(f"h_coeffs needs five coefficients, got {len(coeffs)}")
        object.__setattr__(self, "h_coeffs", coeffs)

    def h_ascending(self) -> list[float]:
        return [0.0, *reversed(self.h_coeffs)]


@dataclass(frozen=True)
class EquilibriumReport:
    v_eq: float
    classification: Stability


def h(params: BenchmarkParams, v2: float) -> float:
    acc = 0.0
    for k in params.h_coeffs:
        acc = (acc + k) * v2
    return acc


def h_slope(params: BenchmarkParams, v2: float) -> float:
    a, b, c, d, e = params.h_coeffs
    return (((5 * a * v2 + 4 * b) * v2 + 3 * c) * v2 + 2 * d) * v2 + e


def benchmark_derivative(params: BenchmarkParams, v2: float) -> float:
    return (-h(params, v2) - v2 / params.r + params.v1 / params.r) / params.c


def equilibrium_polynomial(params: BenchmarkParams) -> numerics.Polynomial:
    """``h(V) + V/R - V1/R`` in ascending coefficients."""
    coeffs = params.h_ascending()
    coeffs[0] -= params.v1 / params.r
    coeffs[1] += 1.0 / params.r
    return numerics.Polynomial(coeffs)


def classify_stability(params: BenchmarkParams, v_eq: float) -> Stability:
    """Sign of the slope of ``h + V/R`` at an equilibrium; positive means stable."""
    slope = h_slope(params, v_eq) + 1.0 / params.r
    if abs(slope) < MARGINAL_TOL:
        return Stability.MARGINAL
    return Stability.STABLE if slope > 0 else Stability.UNSTABLE


def benchmark_equilibria(params: BenchmarkParams) -> list[EquilibriumReport]:
    roots = numerics.real_roots(equilibrium_polynomial(params), 0.0, 1.5 * params.v1)
    return [EquilibriumReport(v, classify_stability(params, v)) for v in roots]
