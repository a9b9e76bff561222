"""Power-flow algebra of the two-node circuit: infinite bus -- line -- load.

With the sending-end angle at zero and a line whose resistance equals its
reactance, the receiving-end voltage magnitude ``V`` satisfies

    V**4 + (2*R*(P + Q) - V1**2) * V**2 + 2*R**2 * (P**2 + Q**2) = 0,

a quadratic in ``u = V**2``. All quantities are per-unit.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

from voltstab.errors import DomainError, InvalidNetwork

DISCRIMINANT_TOL = 1e-12


@dataclass(frozen=True)
class NetworkParams:
    v1: float = 1.0
    r: float = 0.02
    x: float = 0.02
    delta1: float = 0.0

    def __post_init__(self):
        if not self.v1 > 0:
            raise InvalidNetwork(f"v1 must be positive, got {self.v1}")
        if not self.r > 0:
            raise InvalidNetwork(f"r must be positive, got {self.r}")
        if not self.x >= 0:
            raise InvalidNetwork(f"x must be non-negative, got {self.x}")
        if self.delta1 != 0.0:
            raise InvalidNetwork("the sending-end angle is the reference and must be 0")

    def require_equal_rx(self) -> None:
        if self.r != self.x:
            raise InvalidNetwork(
                f"two-node voltage equation assumes r == x (got r={self.r}, x={self.x})"
            )


@dataclass(frozen=True)
class PowerPoint:
    p2: float
    q2: float


@dataclass(frozen=True)
class VoltageSolutions:
    roots: tuple[float, ...] = ()

    def __len__(self) -> int:
        return len(self.roots)

    def __iter__(self):
        return iter(self.roots)

    @property
    def upper(self) -> float | None:
        return self.roots[-1] if self.roots else None

    @property
    def lower(self) -> float | None:
        return self.roots[0] if self.roots else None


@dataclass(frozen=True)
class PvPoint:
    p2: float
    v_upper: float | None
    v_lower: float | None

    @property
    def present(self) -> bool:
        return self.v_upper is not None


def voltage_residual(net: NetworkParams, power: PowerPoint, v2: float) -> float:
    """Left-hand side of the voltage equation, zero at a solution."""
    r = net.r
    p, q = power.p2, power.q2
    u = v2 * v2
    return u * u + (2 * r * (p + q) - net.v1**2) * u + 2 * r * r * (p * p + q * q)


def solve_voltage(net: NetworkParams, power: PowerPoint) -> VoltageSolutions:
    """Real non-negative receiving-end voltages for a fixed load (closed form in V**2)."""
    net.require_equal_rx()
    r, p, q = net.r, power.p2, power.q2
    b = 2 * r * (p + q) - net.v1**2
    c = 2 * r * r * (p * p + q * q)
    disc = b * b - 4 * c
    if disc < -DISCRIMINANT_TOL:
        return VoltageSolutions(())
    if abs(disc) <= DISCRIMINANT_TOL:
        us = [-b / 2]
    else:
        s = math.sqrt(disc)
        # Cancellation-free pair: u1 * u2 = c.
        big = -(b + math.copysign(s, b)) / 2
        small = c / big if big != 0.0 else 0.0
        us = [small, big]
    roots = sorted({math.sqrt(u) + 0.0 for u in us if u >= 0.0})
    return VoltageSolutions(tuple(roots))


def voltage_angle(net: NetworkParams, p2: float, v2: float) -> float:
    """Receiving-end angle in radians.

    Uses ``V2**2`` in the arccos numerator; that is the form for which the
    angle reproduces the load power when fed back through the line. The
    principal arccos branch is the right one for any load with
    ``q2 > -v2**2 / (2*r)``.
    """
    net.require_equal_rx()
    if not v2 > 0:
        raise DomainError(f"voltage angle needs v2 > 0, got {v2}")
    arg = (math.sqrt(2) * net.r * p2 + (math.sqrt(2) / 2) * v2 * v2) / (net.v1 * v2)
    if arg > 1.0 or arg < -1.0:
        # Allow rounding noise at the nose, where the argument sits at exactly 1.
        if abs(arg) - 1.0 > 1e-12:
            raise DomainError(f"arccos argument {arg:.15g} outside [-1, 1]: point is off the power-flow surface")
        arg = max(-1.0, min(1.0, arg))
    return -math.pi / 4 + math.acos(arg)


def complex_power_at_node2(net: NetworkParams, v2: float, delta2: float) -> PowerPoint:
    """Complex power delivered into Node 2 through the line, split into (P, Q)."""
    z = complex(net.r, net.x)
    if z == 0:
        raise DomainError("line impedance is zero")
    v1 = cmath.rect(net.v1, net.delta1)
    vr = cmath.rect(v2, delta2)
    s = vr * ((v1 - vr) / z).conjugate()
    return PowerPoint(s.real, s.imag)


def pv_curve(net: NetworkParams, k: float, p2_samples: Sequence[float]) -> list[PvPoint]:
    """Voltage branches versus real power at a fixed ratio ``k = Q/P``.

    At the nose the two branches coincide and both fields carry the same
    voltage; beyond it both are ``None``.
    """
    if not math.isfinite(k):
        raise ValueError(f"power factor ratio must be finite, got {k}")
    out = []
    for p in p2_samples:
        if p < 0:
            raise ValueError(f"p2 samples must be non-negative, got {p}")
        sol = solve_voltage(net, PowerPoint(p, k * p))
        out.append(PvPoint(float(p), sol.upper, sol.lower))
    return out
