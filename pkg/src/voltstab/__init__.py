"""Voltage stability of a two-node circuit with a dynamic recovery load.

Modules:

* ``powerflow``  two-node power-flow algebra and P-V curves
* ``dynload``    dynamic load model, coupled voltage solve, equilibria, region scan
* ``benchmark``  tunnel-diode benchmark circuit
* ``simcore``    fixed-step RK4 simulation with step disturbances
* ``numerics``   polynomial root finding and bracketing kernels
* ``scenario_file`` / ``cli``  scenario files and the ``voltstab`` command
"""

from voltstab.benchmark import (
    BenchmarkParams,
    EquilibriumReport,
    Stability,
    benchmark_derivative,
    benchmark_equilibria,
    classify_stability,
    h,
)
from voltstab.dynload import (
    DlLoadParams,
    LoadState,
    RegionClass,
    RootPolicy,
    coupled_voltage,
    dl_equilibria,
    load_power,
    ps,
    pt,
    qs,
    qt,
    state_derivative,
    steady_state,
    valid_region_scan,
)
from voltstab.errors import (
    ConfigError,
    DegenerateInput,
    DomainError,
    InvalidNetwork,
    NoRealPositiveRoot,
    NoSignChange,
    UnknownTarget,
    VoltstabError,
)
from voltstab.powerflow import (
    NetworkParams,
    PowerPoint,
    VoltageSolutions,
    complex_power_at_node2,
    pv_curve,
    solve_voltage,
    voltage_angle,
)
from voltstab.scenario_file import dump_scenario, load_scenario, parse_scenario, shipped_path
from voltstab.simcore import (
    Disturbance,
    InitialVoltage,
    ModelKind,
    Scenario,
    SimulationOutcome,
    Status,
    SteadyStateAt,
    TrajectorySample,
    apply_disturbance,
    rk4_step,
    run_simulation,
)

__version__ = "0.1.0"
