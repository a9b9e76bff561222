"""Polynomial real-root extraction and scalar bracketing kernels.

Coefficient sequences are in ascending degree order throughout
(``c[0] + c[1]*v + c[2]*v**2 + ...``), matching ``numpy.polynomial``.

Roots are found as eigenvalues of the companion matrix and then certified
by locating a sign change in a tight neighbourhood of each candidate. The
companion matrix is upper Hessenberg, so LAPACK ``dgeev`` is called directly;
``numpy.linalg.eigvals`` costs three times as much per call, and the
simulation engine performs four solves per time step.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.linalg import lapack

from voltstab.errors import DegenerateInput, NoSignChange

IMAG_TOL = 1e-9
MERGE_TOL = 1e-12
MAX_DEGREE = 6

_dgeev = lapack.dgeev
_SUBDIAGONAL = {}


def _subdiagonal(n: int) -> np.ndarray:
    m = _SUBDIAGONAL.get(n)
    if m is None:
        m = np.zeros((n, n), order="F")
        for i in range(1, n):
            m[i, i - 1] = 1.0
        _SUBDIAGONAL[n] = m
    return m


@dataclass(frozen=True)
class Polynomial:
    """Real polynomial with ascending-degree coefficients."""

    coeffs: tuple[float, ...]

    def __init__(self, coeffs: Iterable[float]):
        c = [float(a) for a in coeffs]
        while len(c) > 1 and c[-1] == 0.0:
            c.pop()
        if not c:
            c = [0.0]
        if len(c) - 1 > MAX_DEGREE:
            raise ValueError(f"degree {len(c) - 1} exceeds supported maximum {MAX_DEGREE}")
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, v):
        if isinstance(v, np.ndarray):
            return np.polynomial.polynomial.polyval(v, self.coeffs)
        return horner(self.coeffs, v)

    def derivative(self) -> "Polynomial":
        return Polynomial([k * a for k, a in enumerate(self.coeffs)][1:] or [0.0])

    def is_zero(self) -> bool:
        return all(a == 0.0 for a in self.coeffs)


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"bracket needs lo <= hi, got [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo


def horner(coeffs: Sequence[float], v: float) -> float:
    acc = 0.0
    for a in reversed(coeffs):
        acc = acc * v + a
    return acc


def _companion_eigenvalues(c: list[float]) -> list[tuple[float, float]]:
    n = len(c) - 1
    lead = c[-1]
    m = _subdiagonal(n).copy(order="F")
    m[:, n - 1] = [-a / lead for a in c[:-1]]
    wr, wi, _, _, info = _dgeev(m, compute_vl=0, compute_vr=0)
    if info != 0:
        # QR iteration did not converge; fall back to the balanced numpy path.
        ev = np.linalg.eigvals(m)
        return list(zip(ev.real.tolist(), ev.imag.tolist()))
    return list(zip(wr.tolist(), wi.tolist()))


def _polish(c: list[float], r: float) -> float:
    """Refine a candidate root by finding and shrinking a sign-change bracket."""
    fr = horner(c, r)
    if fr == 0.0:
        return r
    # Residual already at the rounding-error floor of Horner evaluation.
    ar = abs(r)
    mag = 0.0
    for a in reversed(c):
        mag = mag * ar + abs(a)
    if abs(fr) <= 4 * len(c) * sys.float_info.epsilon * mag:
        return r
    scale = max(abs(r), 1e-300)
    step = scale * 4.0 * sys.float_info.epsilon
    limit = max(scale, 1.0) * 1e-6
    first = True
    while step <= limit:
        lo, hi = r - step, r + step
        flo = horner(c, lo)
        if (flo < 0.0) != (fr < 0.0) or flo == 0.0:
            if first:
                # Already certified to within a few ulps.
                return lo if abs(flo) < abs(fr) else r
            return _bisect_poly(c, lo, r, flo, fr)
        fhi = horner(c, hi)
        if (fhi < 0.0) != (fr < 0.0) or fhi == 0.0:
            if first:
                return hi if abs(fhi) < abs(fr) else r
            return _bisect_poly(c, r, hi, fr, fhi)
        step *= 16.0
        first = False
    # Even-multiplicity root (no sign change nearby): a few Newton steps.
    dc = [k * a for k, a in enumerate(c)][1:]
    x = r
    for _ in range(8):
        d = horner(dc, x)
        if d == 0.0:
            break
        xn = x - horner(c, x) / d
        if abs(xn - x) > limit:
            break
        x = xn
    return x if abs(horner(c, x)) <= abs(fr) else r


def _bisect_poly(c: list[float], lo: float, hi: float, flo: float, fhi: float) -> float:
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = horner(c, mid)
        if fm == 0.0:
            return mid
        if (fm < 0.0) == (flo < 0.0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    return lo if abs(flo) <= abs(fhi) else hi


def real_roots(p: Polynomial | Sequence[float], lo: float, hi: float) -> list[float]:
    """All real roots of ``p`` in ``[lo, hi]``, ascending and deduplicated.

    Roots at exactly zero are deflated before the eigenvalue solve so that
    polynomials with vanishing constant terms report ``0.0`` exactly.
    """
    if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
        raise ValueError(f"invalid interval [{lo}, {hi}]")
    c = list(p.coeffs) if isinstance(p, Polynomial) else [float(a) for a in p]
    while c and c[-1] == 0.0:
        c.pop()
    if not c:
        raise DegenerateInput("all polynomial coefficients are zero")

    roots: list[float] = []
    zero_mult = 0
    while len(c) > 1 and c[0] == 0.0:
        c.pop(0)
        zero_mult += 1
    if zero_mult and lo <= 0.0 <= hi:
        roots.append(0.0)

    n = len(c) - 1
    if n == 1:
        r = -c[0] / c[1]
        if lo <= r <= hi:
            roots.append(r)
    elif n >= 2:
        slack = 1e-9 * max(1.0, abs(lo), abs(hi))
        lo_s, hi_s = lo - slack, hi + slack
        for re, im in _companion_eigenvalues(c):
            if -IMAG_TOL < im < IMAG_TOL and lo_s <= re <= hi_s:
                r = _polish(c, re)
                if r < lo:
                    r = lo
                elif r > hi:
                    r = hi
                roots.append(r)

    roots.sort()
    merged: list[float] = []
    for r in roots:
        if merged and r - merged[-1] <= MERGE_TOL:
            continue
        merged.append(r)
    return merged


def bisect_refine(
    f: Callable[[float], float],
    bracket: Bracket | tuple[float, float],
    tol: float = 1e-14,
) -> float:
    """Bisection on a sign-change bracket.

    Stops when ``|f(root)| <= tol`` or the bracket has shrunk to 1e-14 wide
    (or stopped shrinking in floating point).
    """
    lo, hi = (bracket.lo, bracket.hi) if isinstance(bracket, Bracket) else bracket
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo < 0.0) == (fhi < 0.0):
        raise NoSignChange(f"f({lo})={flo:g} and f({hi})={fhi:g} have the same sign")
    while hi - lo > 1e-14:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        if abs(fm) <= tol:
            return mid
        if (fm < 0.0) == (flo < 0.0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    return lo if abs(flo) <= abs(fhi) else hi


def grid_sign_scan_oracle(
    f: Callable,
    interval: tuple[float, float],
    n: int,
    *,
    vectorized: bool = True,
) -> list[Bracket]:
    """Brute-force root brackets from a uniform grid of ``n`` samples.

    Test oracle only. Each sub-interval whose endpoint values change sign is
    returned; a sample that is exactly zero becomes a degenerate bracket.
    ``f`` is evaluated on the whole grid array at once unless
    ``vectorized=False``.
    """
    if n < 2:
        raise ValueError("grid scan needs at least two samples")
    lo, hi = interval
    grid = np.linspace(lo, hi, n)
    if vectorized:
        vals = np.asarray(f(grid), dtype=float)
    else:
        vals = np.array([f(float(v)) for v in grid])
    sign = np.sign(vals)
    out: list[Bracket] = []
    for i in np.flatnonzero(sign == 0.0):
        out.append(Bracket(float(grid[i]), float(grid[i])))
    for i in np.flatnonzero(sign[:-1] * sign[1:] < 0.0):
        out.append(Bracket(float(grid[i]), float(grid[i + 1])))
    out.sort(key=lambda b: b.lo)
    return out
