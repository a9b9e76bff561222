"""Fixed-step time-domain simulation of the two models.

The dynamic-load model is a semi-explicit index-1 DAE: the load states
``(x, y)`` are integrated with classical RK4 and the voltage is re-solved
from the algebraic constraint at every stage. The benchmark is a scalar ODE
in ``V2``. Disturbances are additive parameter steps that take effect on the
first step boundary at or after their time stamp.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from voltstab import benchmark as bm
from voltstab import dynload as dl
from voltstab.errors import ConfigError, InvalidNetwork, NoRealPositiveRoot, UnknownTarget
from voltstab.powerflow import NetworkParams, voltage_angle

DEFAULT_DT = 0.001
DEFAULT_STRIDE = 10

DL_TARGETS = ("p0", "q0", "v1", "r", "x")
BENCHMARK_TARGETS = ("v1", "r", "c")


class ModelKind(enum.Enum):
    DYNAMIC_LOAD = "dynamic_load"
    BENCHMARK = "benchmark"


class Status(enum.Enum):
    COMPLETED = "Completed"
    TERMINATED_NO_ROOT = "TerminatedNoRoot"


@dataclass(frozen=True)
class SteadyStateAt:
    """Start the load states at rest for the given voltage."""

    v2: float


@dataclass(frozen=True)
class InitialVoltage:
    """Initial capacitor voltage of the benchmark."""

    v2: float


Initial = Union[dl.LoadState, SteadyStateAt, InitialVoltage]


@dataclass(frozen=True)
class Disturbance:
    at_time: float
    target: str
    delta: float

    def __post_init__(self):
        if not self.at_time >= 0:
            raise ConfigError(f"disturbance time must be non-negative, got {self.at_time}")


@dataclass(frozen=True)
class Scenario:
    model: ModelKind
    initial: Initial
    duration: float
    dt: float = DEFAULT_DT
    network: NetworkParams | None = None
    load: dl.DlLoadParams | None = None
    bench: bm.BenchmarkParams | None = None
    policy: dl.RootPolicy = dl.RootPolicy.MAXIMUM
    disturbances: tuple[Disturbance, ...] = ()
    output_stride: int = DEFAULT_STRIDE

    def __post_init__(self):
        object.__setattr__(self, "disturbances", tuple(self.disturbances))
        validate_scenario(self)

    def replace(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class TrajectorySample:
    t: float
    v2: float
    p2: float
    q2: float
    delta2: float | None = None
    x: float | None = None
    y: float | None = None


@dataclass(frozen=True)
class SimulationOutcome:
    status: Status
    samples: list[TrajectorySample] = field(default_factory=list)
    terminated_at: float | None = None

    @property
    def completed(self) -> bool:
        return self.status is Status.COMPLETED

    @property
    def final(self) -> TrajectorySample:
        return self.samples[-1]


def validate_scenario(s: Scenario) -> None:
    if not (math.isfinite(s.duration) and s.duration > 0):
        raise ConfigError(f"duration must be positive, got {s.duration}")
    if not (math.isfinite(s.dt) and s.dt > 0):
        raise ConfigError(f"dt must be positive, got {s.dt}")
    if s.dt > s.duration:
        raise ConfigError(f"dt ({s.dt}) exceeds duration ({s.duration})")
    if s.output_stride < 1:
        raise ConfigError(f"output_stride must be at least 1, got {s.output_stride}")
    times = [d.at_time for d in s.disturbances]
    if times != sorted(times):
        raise ConfigError("disturbances must be sorted by time")

    if s.model is ModelKind.DYNAMIC_LOAD:
        if s.network is None or s.load is None:
            raise ConfigError("a dynamic-load scenario needs [network] and [load]")
        if not isinstance(s.initial, (dl.LoadState, SteadyStateAt)):
            raise ConfigError("a dynamic-load scenario starts from x, y or a steady-state voltage")
        targets = DL_TARGETS
    else:
        if s.bench is None:
            raise ConfigError("a benchmark scenario needs [benchmark]")
        if not isinstance(s.initial, InitialVoltage):
            raise ConfigError("a benchmark scenario starts from an initial voltage")
        targets = BENCHMARK_TARGETS
    for d in s.disturbances:
        if d.target not in targets:
            raise ConfigError(f"disturbance target {d.target!r} is not one of {', '.join(targets)}")

    # Replay the parameter steps so an invalid intermediate network is caught
    # before any time is spent integrating.
    if s.model is ModelKind.DYNAMIC_LOAD:
        try:
            s.network.require_equal_rx()
            params = (s.network, s.load)
            for at_time in sorted(set(times)):
                for d in s.disturbances:
                    if d.at_time == at_time:
                        params = apply_disturbance(params, d)
                params[0].require_equal_rx()
        except (InvalidNetwork, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
    else:
        try:
            params = s.bench
            for d in s.disturbances:
                params = apply_disturbance(params, d)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def apply_disturbance(params, disturbance: Disturbance):
    """Return ``params`` with the target field stepped by ``delta``.

    ``params`` is either a ``BenchmarkParams`` or a ``(NetworkParams,
    DlLoadParams)`` pair; the same shape comes back.
    """
    target, delta = disturbance.target, disturbance.delta
    if isinstance(params, bm.BenchmarkParams):
        if target not in BENCHMARK_TARGETS:
            raise UnknownTarget(target)
        return dataclasses.replace(params, **{target: getattr(params, target) + delta})
    net, load = params
    if target in ("p0", "q0"):
        return net, dataclasses.replace(load, **{target: getattr(load, target) + delta})
    if target in ("v1", "r", "x"):
        return dataclasses.replace(net, **{target: getattr(net, target) + delta}), load
    raise UnknownTarget(target)


def rk4_step(
    f: Callable[[float, np.ndarray], np.ndarray],
    state: np.ndarray,
    t: float,
    dt: float,
    k1: np.ndarray | None = None,
) -> np.ndarray:
    """One classical fourth-order Runge-Kutta step of ``dstate/dt = f(t, state)``.

    ``k1`` may be passed in when ``f(t, state)`` is already known.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if k1 is None:
        k1 = f(t, state)
    k2 = f(t + 0.5 * dt, state + (0.5 * dt) * k1)
    k3 = f(t + 0.5 * dt, state + (0.5 * dt) * k2)
    k4 = f(t + dt, state + dt * k3)
    return state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def dl_evaluator(load: dl.DlLoadParams, net: NetworkParams, policy: dl.RootPolicy):
    """Right-hand side for the load states with the voltage solved per call."""

    def f(t: float, s: np.ndarray) -> np.ndarray:
        st = dl.LoadState(float(s[0]), float(s[1]))
        v = dl.coupled_voltage(load, net, st, policy)
        return np.array(dl.state_derivative(load, st, v))

    return f


def benchmark_evaluator(bench: bm.BenchmarkParams):
    def f(t: float, s: np.ndarray) -> np.ndarray:
        return np.array([bm.benchmark_derivative(bench, float(s[0]))])

    return f


def _boundary_step(at_time: float, dt: float) -> int:
    # First grid index k with k*dt >= at_time, tolerant of representation error.
    return max(0, math.ceil(at_time / dt - 1e-9))


def _dl_sample(t, s, load, net, policy) -> TrajectorySample:
    st = dl.LoadState(float(s[0]), float(s[1]))
    v = dl.coupled_voltage(load, net, st, policy)
    pw = dl.load_power(load, st, v)
    try:
        delta = voltage_angle(net, pw.p2, v)
    except ValueError:
        delta = math.nan
    return TrajectorySample(t, v, pw.p2, pw.q2, delta, st.x, st.y)


def _bench_sample(t, s, bench) -> TrajectorySample:
    v = float(s[0])
    # Power delivered into Node 2 through the series resistor.
    return TrajectorySample(t, v, v * (bench.v1 - v) / bench.r, 0.0)


def initial_state(s: Scenario) -> np.ndarray:
    init = s.initial
    if s.model is ModelKind.BENCHMARK:
        return np.array([float(init.v2)])
    if isinstance(init, SteadyStateAt):
        st = dl.steady_state(s.load, init.v2)
        return np.array([st.x, st.y])
    return np.array([float(init.x), float(init.y)])


def run_simulation(scenario: Scenario) -> SimulationOutcome:
    """Integrate the scenario from t = 0 to its duration.

    Loss of an admissible voltage root ends the run with
    ``TerminatedNoRoot``; the step in which it happened is discarded and the
    last completed state is the final sample.
    """
    s = scenario
    dt = s.dt
    n_steps = max(1, round(s.duration / dt))
    pending = {}
    for d in s.disturbances:
        pending.setdefault(_boundary_step(d.at_time, dt), []).append(d)

    if s.model is ModelKind.DYNAMIC_LOAD:
        params = (s.network, s.load)

        def make(p):
            return dl_evaluator(p[1], p[0], s.policy)

        def sample(t, st, p):
            return _dl_sample(t, st, p[1], p[0], s.policy)
    else:
        params = s.bench

        def make(p):
            return benchmark_evaluator(p)

        def sample(t, st, p):
            return _bench_sample(t, st, p)

    state = initial_state(s)
    f = make(params)
    samples: list[TrajectorySample] = []
    try:
        samples.append(sample(0.0, state, params))
    except NoRealPositiveRoot as exc:
        raise ConfigError(f"initial state has no admissible voltage: {exc}") from exc

    k1 = None
    for k in range(n_steps):
        t = k * dt
        if k in pending:
            for d in pending[k]:
                params = apply_disturbance(params, d)
            f = make(params)
            k1 = None
        try:
            if k1 is None:
                k1 = f(t, state)
        except NoRealPositiveRoot:
            # A network step moved the current state out of the feasible region.
            return SimulationOutcome(Status.TERMINATED_NO_ROOT, samples, terminated_at=t)
        try:
            new_state = rk4_step(f, state, t, dt, k1=k1)
            # The end-of-step state must admit a voltage too; its derivative is
            # the next step's first stage.
            k1 = f(t + dt, new_state)
        except NoRealPositiveRoot:
            if samples[-1].t != t:
                samples.append(sample(t, state, params))
            return SimulationOutcome(Status.TERMINATED_NO_ROOT, samples, terminated_at=t)
        state = new_state
        if (k + 1) % s.output_stride == 0 or k + 1 == n_steps:
            samples.append(sample((k + 1) * dt, state, params))
    return SimulationOutcome(Status.COMPLETED, samples)
