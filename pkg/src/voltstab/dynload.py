"""Generic dynamic recovery load attached to the two-node circuit.

The load draws ``x * Pt(V)`` and ``y * Qt(V)`` at any instant; the internal
states recover towards the steady-state characteristics ``Ps(V) = P0 V**a``
and ``Qs(V) = Q0 V**b``:

    dx/dt = (Ps(V) - x * Pt(V)) / Tp
    dy/dt = (Qs(V) - y * Qt(V)) / Tq

``Pt`` and ``Qt`` are quadratics. Substituting the instantaneous load into
the two-node voltage equation gives a quartic in ``V`` whose coefficients
depend on ``(x, y)``; a root-selection policy picks the operating voltage.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from voltstab import numerics
from voltstab.errors import DomainError, NoRealPositiveRoot
from voltstab.powerflow import NetworkParams, PowerPoint

PT_COEFFS = (-0.08, 0.96, 0.12)
QT_COEFFS = (3.255, -3.49, 1.155)

# Log-spaced scan grid for equilibria; the low-voltage equilibrium of the
# reference parameters sits four decades below the high one.
EQ_SCAN_POINTS = 10_000
EQ_SCAN_FLOOR = 1e-8


class RootPolicy(enum.Enum):
    MAXIMUM = "maximum"
    MINIMUM = "minimum"


class RegionClass(enum.Enum):
    TWO_ROOTS = "TwoRoots"
    FEWER_ROOTS = "FewerRoots"


@dataclass(frozen=True)
class DlLoadParams:
    """Dynamic load parameters.

    ``pt_coeffs`` and ``qt_coeffs`` are in descending order ``(c2, c1, c0)``.
    The reference values below are the published approximations; note that
    ``Qt(1) = 0.92``.
    """

    p0: float = 1.0
    q0: float = 1.0
    a: float = 0.5625
    b: float = 3.0
    tp: float = 1.0
    tq: float = 1.0
    pt_coeffs: tuple[float, float, float] = PT_COEFFS
    qt_coeffs: tuple[float, float, float] = QT_COEFFS

    def __post_init__(self):
        for name in ("p0", "q0", "a", "b", "tp", "tq"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite, got {getattr(self, name)}")
        if not (self.tp > 0 and self.tq > 0):
            raise ValueError(f"time constants must be positive (tp={self.tp}, tq={self.tq})")
        if not (self.p0 >= 0 and self.q0 >= 0):
            raise ValueError(f"nominal powers must be non-negative (p0={self.p0}, q0={self.q0})")
        for name in ("pt_coeffs", "qt_coeffs"):
            coeffs = tuple(float(c) for c in getattr(self, name))
            if len(coeffs) != 3:
                raise ValueError(f"{name} needs three coefficients, got {len(coeffs)}")
            object.__setattr__(self, name, coeffs)


@dataclass(frozen=True)
class LoadState:
    x: float
    y: float


def ps(params: DlLoadParams, v2: float) -> float:
    if v2 < 0:
        raise DomainError(f"Ps needs v2 >= 0, got {v2}")
    return params.p0 * v2**params.a


def qs(params: DlLoadParams, v2: float) -> float:
    if v2 < 0:
        raise DomainError(f"Qs needs v2 >= 0, got {v2}")
    return params.q0 * v2**params.b


def pt(params: DlLoadParams, v2: float) -> float:
    c2, c1, c0 = params.pt_coeffs
    return (c2 * v2 + c1) * v2 + c0


def qt(params: DlLoadParams, v2: float) -> float:
    d2, d1, d0 = params.qt_coeffs
    return (d2 * v2 + d1) * v2 + d0


def load_power(params: DlLoadParams, state: LoadState, v2: float) -> PowerPoint:
    return PowerPoint(state.x * pt(params, v2), state.y * qt(params, v2))


def state_derivative(params: DlLoadParams, state: LoadState, v2: float) -> tuple[float, float]:
    dx = (ps(params, v2) - state.x * pt(params, v2)) / params.tp
    dy = (qs(params, v2) - state.y * qt(params, v2)) / params.tq
    return dx, dy


def steady_state(params: DlLoadParams, v2: float) -> LoadState:
    """Load state that is at rest when the terminal voltage is ``v2``."""
    return LoadState(ps(params, v2) / pt(params, v2), qs(params, v2) / qt(params, v2))


def coupled_coefficients(params: DlLoadParams, net: NetworkParams, state: LoadState) -> list[float]:
    """Ascending coefficients of the voltage quartic with the load substituted in.

    General-impedance form; for ``r == x`` it coincides with the two-node
    equation used everywhere else.
    """
    c2, c1, c0 = params.pt_coeffs
    d2, d1, d0 = params.qt_coeffs
    x, y = state.x, state.y
    # P(V) = p0 + p1 V + p2 V^2 and Q(V) likewise.
    p_0, p_1, p_2 = x * c0, x * c1, x * c2
    q_0, q_1, q_2 = y * d0, y * d1, y * d2
    r, xl = net.r, net.x
    z2 = r * r + xl * xl
    # 2 V^2 (r P + x Q)
    l0, l1, l2 = 2 * (r * p_0 + xl * q_0), 2 * (r * p_1 + xl * q_1), 2 * (r * p_2 + xl * q_2)
    # (r^2 + x^2)(P^2 + Q^2)
    s0 = p_0 * p_0 + q_0 * q_0
    s1 = 2 * (p_0 * p_1 + q_0 * q_1)
    s2 = p_1 * p_1 + q_1 * q_1 + 2 * (p_0 * p_2 + q_0 * q_2)
    s3 = 2 * (p_1 * p_2 + q_1 * q_2)
    s4 = p_2 * p_2 + q_2 * q_2
    return [
        z2 * s0,
        z2 * s1,
        l0 - net.v1 * net.v1 + z2 * s2,
        l1 + z2 * s3,
        1.0 + l2 + z2 * s4,
    ]


def coupled_residual(params: DlLoadParams, net: NetworkParams, state: LoadState, v2: float) -> float:
    return numerics.horner(coupled_coefficients(params, net, state), v2)


def admissible_voltages(params: DlLoadParams, net: NetworkParams, state: LoadState) -> list[float]:
    """Distinct real roots ``V > 0`` of the coupled quartic with non-negative real power."""
    net.require_equal_rx()
    coeffs = coupled_coefficients(params, net, state)
    roots = numerics.real_roots(coeffs, 0.0, 2.0 * net.v1)
    return [v for v in roots if v > 0.0 and state.x * pt(params, v) >= 0.0]


def coupled_voltage(
    params: DlLoadParams,
    net: NetworkParams,
    state: LoadState,
    policy: RootPolicy = RootPolicy.MAXIMUM,
) -> float:
    """Operating voltage for the load state under the selection policy.

    Raises ``NoRealPositiveRoot`` when the state lies outside the feasible
    power-flow region.
    """
    roots = admissible_voltages(params, net, state)
    if not roots:
        raise NoRealPositiveRoot(f"no real positive voltage for x={state.x:.12g}, y={state.y:.12g}")
    return roots[-1] if policy is RootPolicy.MAXIMUM else roots[0]


def equilibrium_residual(params: DlLoadParams, net: NetworkParams, v2: float) -> float:
    """Voltage equation evaluated with the load at its steady-state characteristic."""
    p, q = ps(params, v2), qs(params, v2)
    u = v2 * v2
    return u * u + (2 * (net.r * p + net.x * q) - net.v1**2) * u + (net.r**2 + net.x**2) * (p * p + q * q)


def dl_equilibria(params: DlLoadParams, net: NetworkParams) -> list[float]:
    """Equilibrium voltages in ``[0, 1.5 * v1]``, ascending.

    ``0.0`` is included when both exponents are positive, so that every term
    of the equilibrium condition vanishes there.
    """
    net.require_equal_rx()
    grid = np.geomspace(EQ_SCAN_FLOOR, 1.5 * net.v1, EQ_SCAN_POINTS)
    vals = [equilibrium_residual(params, net, float(v)) for v in grid]

    def f(v: float) -> float:
        return equilibrium_residual(params, net, v)

    found: list[float] = []
    for i in range(len(grid) - 1):
        f0, f1 = vals[i], vals[i + 1]
        if f0 == 0.0:
            found.append(float(grid[i]))
        elif (f0 < 0.0) != (f1 < 0.0) and f1 != 0.0:
            found.append(numerics.bisect_refine(f, (float(grid[i]), float(grid[i + 1])), tol=0.0))
    if vals[-1] == 0.0:
        found.append(float(grid[-1]))
    if params.a > 0 and params.b > 0:
        found.insert(0, 0.0)
    return found


@dataclass(frozen=True)
class RegionGrid:
    xs: np.ndarray
    ys: np.ndarray
    valid: np.ndarray  # bool, shape (len(ys), len(xs))

    def classify(self, i: int, j: int) -> RegionClass:
        return RegionClass.TWO_ROOTS if self.valid[j, i] else RegionClass.FEWER_ROOTS


def classify_state(params: DlLoadParams, net: NetworkParams, state: LoadState) -> RegionClass:
    """Two admissible voltages (tangent double roots count once) or fewer."""
    if len(admissible_voltages(params, net, state)) == 2:
        return RegionClass.TWO_ROOTS
    return RegionClass.FEWER_ROOTS


def _scan_rows(args) -> list[list[bool]]:
    params, net, xs, ys = args
    return [
        [classify_state(params, net, LoadState(float(x), float(y))) is RegionClass.TWO_ROOTS for x in xs]
        for y in ys
    ]


def valid_region_scan(
    params: DlLoadParams,
    net: NetworkParams,
    x_range: tuple[float, float] = (0.0, 3.0),
    y_range: tuple[float, float] = (0.0, 3.0),
    resolution: int | tuple[int, int] = 101,
    jobs: int = 1,
) -> RegionGrid:
    """Classify a uniform grid of load states.

    ``jobs > 1`` splits the rows over a process pool; the result does not
    depend on the worker count.
    """
    nx, ny = (resolution, resolution) if isinstance(resolution, int) else resolution
    if nx < 2 or ny < 2:
        raise ValueError("region scan needs at least two points per axis")
    for lo, hi in (x_range, y_range):
        if lo < 0 or hi < lo:
            raise ValueError(f"scan ranges must be non-negative and ordered, got ({lo}, {hi})")
    xs = np.linspace(x_range[0], x_range[1], nx)
    ys = np.linspace(y_range[0], y_range[1], ny)
    if jobs <= 1:
        rows = _scan_rows((params, net, xs, ys))
    else:
        from concurrent.futures import ProcessPoolExecutor

        chunks = [c for c in np.array_split(ys, jobs) if len(c)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = pool.map(_scan_rows, [(params, net, xs, c) for c in chunks])
            rows = [row for part in parts for row in part]
    return RegionGrid(xs, ys, np.array(rows, dtype=bool))


def fan_states(params: DlLoadParams, net: NetworkParams, points: Sequence[tuple[float, float]]) -> list[LoadState]:
    """Keep the candidate initial states that lie in the two-root region."""
    out = []
    for x, y in points:
        s = LoadState(x, y)
        if classify_state(params, net, s) is RegionClass.TWO_ROOTS:
            out.append(s)
    return out
