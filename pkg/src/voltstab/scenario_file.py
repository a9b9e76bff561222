"""Scenario files: TOML documents that map one-to-one onto ``Scenario``.

See ``scenarios/SCHEMA.md`` for the layout. Unknown sections and keys are
rejected, and every diagnostic carries the line it was traced to.
"""

from __future__ import annotations

import re
from importlib import resources
from pathlib import Path
from typing import Any

import tomli
import tomli_w

from voltstab import benchmark as bm
from voltstab import dynload as dl
from voltstab.errors import ConfigError
from voltstab.powerflow import NetworkParams
from voltstab.simcore import (
    DEFAULT_DT,
    DEFAULT_STRIDE,
    Disturbance,
    InitialVoltage,
    ModelKind,
    Scenario,
    SteadyStateAt,
)

SHIPPED = ("benchmark_fig4", "benchmark_fig6", "dl_fig5", "dl_case1", "dl_case2", "dl_case3")

_SECTIONS = {
    "model": {"kind", "policy"},
    "network": {"v1", "r", "x"},
    "load": {"p0", "q0", "a", "b", "tp", "tq", "pt_coeffs", "qt_coeffs"},
    "benchmark": {"v1", "r", "c", "h_coeffs"},
    "simulation": {
        "duration",
        "dt",
        "output_stride",
        "initial_x",
        "initial_y",
        "steady_state_v2",
        "initial_v2",
    },
    "disturbance": {"at_time", "target", "delta"},
}

_HEADER = re.compile(r"^\s*(\[\[?)\s*([A-Za-z0-9_.-]+)\s*\]\]?")
_KEY = re.compile(r"^\s*([A-Za-z0-9_-]+)\s*=")


class _Locator:
    """Line numbers of section headers and keys in the raw text."""

    def __init__(self, text: str):
        self.lines: dict[tuple[str, int, str | None], int] = {}
        section, index = "", 0
        counts: dict[str, int] = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            m = _HEADER.match(line)
            if m:
                section = m.group(2)
                if m.group(1) == "[[":
                    index = counts.get(section, 0)
                    counts[section] = index + 1
                else:
                    index = 0
                self.lines.setdefault((section, index, None), lineno)
                continue
            m = _KEY.match(line)
            if m:
                self.lines.setdefault((section, index, m.group(1)), lineno)

    def line(self, section: str, key: str | None = None, index: int = 0) -> int | None:
        return self.lines.get((section, index, key)) or self.lines.get((section, index, None))


class _Reader:
    def __init__(self, doc: dict, loc: _Locator, source: str | None):
        self.doc = doc
        self.loc = loc
        self.source = source

    def error(self, msg: str, section: str = "", key: str | None = None, index: int = 0) -> ConfigError:
        return ConfigError(msg, self.loc.line(section, key, index) if section else None, self.source)

    def number(self, table: dict, section: str, key: str, default: Any = None, index: int = 0):
        if key not in table:
            if default is None:
                raise self.error(f"missing required key '{key}' in [{section}]", section, None, index)
            return default
        v = table[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise self.error(f"'{key}' must be a number, got {v!r}", section, key, index)
        return float(v)

    def coeffs(self, table: dict, section: str, key: str, n: int, default):
        if key not in table:
            return default
        v = table[key]
        if not isinstance(v, list) or len(v) != n or any(isinstance(a, bool) or not isinstance(a, (int, float)) for a in v):
            raise self.error(f"'{key}' must be a list of {n} numbers", section, key)
        return tuple(float(a) for a in v)


def parse_scenario(text: str, source: str | None = None) -> Scenario:
    loc = _Locator(text)
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        line = getattr(exc, "lineno", None)
        if line is None:
            m = re.search(r"line (\d+)", str(exc))
            line = int(m.group(1)) if m else None
        msg = getattr(exc, "msg", None) or re.sub(r"\s*\(at line \d+, column \d+\)", "", str(exc))
        raise ConfigError(f"TOML syntax error: {msg}", line, source) from None
    rd = _Reader(doc, loc, source)

    for section, body in doc.items():
        if section not in _SECTIONS:
            raise rd.error(f"unknown section [{section}]", section)
        entries = body if section == "disturbance" else [body]
        if section == "disturbance" and not isinstance(body, list):
            raise rd.error("disturbances are written as [[disturbance]] array entries", section)
        if section != "disturbance" and not isinstance(body, dict):
            raise rd.error(f"[{section}] must be a table", section)
        for i, entry in enumerate(entries):
            for key in entry:
                if key not in _SECTIONS[section]:
                    raise rd.error(f"unknown key '{key}' in [{section}]", section, key, i)

    model_t = doc.get("model")
    if model_t is None:
        raise ConfigError("missing [model] section", None, source)
    kind_s = model_t.get("kind")
    try:
        kind = ModelKind(kind_s)
    except ValueError:
        raise rd.error(f"model kind must be 'dynamic_load' or 'benchmark', got {kind_s!r}", "model", "kind") from None

    sim = doc.get("simulation")
    if sim is None:
        raise ConfigError("missing [simulation] section", None, source)
    duration = rd.number(sim, "simulation", "duration")
    dt = rd.number(sim, "simulation", "dt", DEFAULT_DT)
    stride = sim.get("output_stride", DEFAULT_STRIDE)
    if isinstance(stride, bool) or not isinstance(stride, int):
        raise rd.error(f"'output_stride' must be an integer, got {stride!r}", "simulation", "output_stride")

    disturbances = []
    for i, d in enumerate(doc.get("disturbance", [])):
        target = d.get("target")
        if not isinstance(target, str):
            raise rd.error("disturbance needs a string 'target'", "disturbance", "target", i)
        try:
            disturbances.append(
                Disturbance(
                    rd.number(d, "disturbance", "at_time", index=i),
                    target,
                    rd.number(d, "disturbance", "delta", index=i),
                )
            )
        except ConfigError as exc:
            if exc.line is None:
                raise rd.error(exc.message, "disturbance", "at_time", i) from None
            raise

    initial_keys = {k for k in ("initial_x", "initial_y", "steady_state_v2", "initial_v2") if k in sim}
    fields: dict[str, Any] = {}
    if kind is ModelKind.DYNAMIC_LOAD:
        for sec in ("benchmark",):
            if sec in doc:
                raise rd.error(f"[{sec}] does not apply to a dynamic_load model", sec)
        policy_s = model_t.get("policy", dl.RootPolicy.MAXIMUM.value)
        try:
            fields["policy"] = dl.RootPolicy(policy_s)
        except ValueError:
            raise rd.error(f"policy must be 'maximum' or 'minimum', got {policy_s!r}", "model", "policy") from None
        net_t = doc.get("network")
        load_t = doc.get("load")
        if net_t is None or load_t is None:
            raise ConfigError("a dynamic_load scenario needs [network] and [load]", loc.line("model"), source)
        defaults = NetworkParams()
        try:
            fields["network"] = NetworkParams(
                rd.number(net_t, "network", "v1", defaults.v1),
                rd.number(net_t, "network", "r", defaults.r),
                rd.number(net_t, "network", "x", defaults.x),
            )
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise rd.error(str(exc), "network") from None
        ld = dl.DlLoadParams()
        try:
            fields["load"] = dl.DlLoadParams(
                p0=rd.number(load_t, "load", "p0", ld.p0),
                q0=rd.number(load_t, "load", "q0", ld.q0),
                a=rd.number(load_t, "load", "a", ld.a),
                b=rd.number(load_t, "load", "b", ld.b),
                tp=rd.number(load_t, "load", "tp", ld.tp),
                tq=rd.number(load_t, "load", "tq", ld.tq),
                pt_coeffs=rd.coeffs(load_t, "load", "pt_coeffs", 3, ld.pt_coeffs),
                qt_coeffs=rd.coeffs(load_t, "load", "qt_coeffs", 3, ld.qt_coeffs),
            )
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise rd.error(str(exc), "load") from None
        if initial_keys == {"initial_x", "initial_y"}:
            initial = dl.LoadState(
                rd.number(sim, "simulation", "initial_x"), rd.number(sim, "simulation", "initial_y")
            )
        elif initial_keys == {"steady_state_v2"}:
            initial = SteadyStateAt(rd.number(sim, "simulation", "steady_state_v2"))
        else:
            raise rd.error(
                "a dynamic_load scenario needs either initial_x and initial_y, or steady_state_v2",
                "simulation",
            )
    else:
        for sec in ("network", "load"):
            if sec in doc:
                raise rd.error(f"[{sec}] does not apply to a benchmark model", sec)
        if "policy" in model_t:
            raise rd.error("policy does not apply to a benchmark model", "model", "policy")
        bench_t = doc.get("benchmark")
        if bench_t is None:
            raise ConfigError("a benchmark scenario needs [benchmark]", loc.line("model"), source)
        bd = bm.BenchmarkParams()
        try:
            fields["bench"] = bm.BenchmarkParams(
                v1=rd.number(bench_t, "benchmark", "v1", bd.v1),
                r=rd.number(bench_t, "benchmark", "r", bd.r),
                c=rd.number(bench_t, "benchmark", "c", bd.c),
                h_coeffs=rd.coeffs(bench_t, "benchmark", "h_coeffs", 5, bd.h_coeffs),
            )
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise rd.error(str(exc), "benchmark") from None
        if initial_keys != {"initial_v2"}:
            raise rd.error("a benchmark scenario needs initial_v2 (and nothing else)", "simulation")
        initial = InitialVoltage(rd.number(sim, "simulation", "initial_v2"))

    try:
        return Scenario(
            model=kind,
            initial=initial,
            duration=duration,
            dt=dt,
            disturbances=tuple(disturbances),
            output_stride=stride,
            **fields,
        )
    except ConfigError as exc:
        section = "disturbance" if "disturbance" in exc.message else "simulation"
        raise rd.error(exc.message, section) from None


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read scenario: {exc.strerror}", None, str(path)) from None
    except UnicodeDecodeError:
        raise ConfigError("scenario is not valid UTF-8", None, str(path)) from None
    return parse_scenario(text, str(path))


def scenario_to_dict(s: Scenario) -> dict:
    doc: dict[str, Any] = {"model": {"kind": s.model.value}}
    sim: dict[str, Any] = {"duration": s.duration, "dt": s.dt, "output_stride": s.output_stride}
    if s.model is ModelKind.DYNAMIC_LOAD:
        doc["model"]["policy"] = s.policy.value
        doc["network"] = {"v1": s.network.v1, "r": s.network.r, "x": s.network.x}
        ld = s.load
        doc["load"] = {
            "p0": ld.p0,
            "q0": ld.q0,
            "a": ld.a,
            "b": ld.b,
            "tp": ld.tp,
            "tq": ld.tq,
            "pt_coeffs": list(ld.pt_coeffs),
            "qt_coeffs": list(ld.qt_coeffs),
        }
        if isinstance(s.initial, SteadyStateAt):
            sim["steady_state_v2"] = s.initial.v2
        else:
            sim["initial_x"] = s.initial.x
            sim["initial_y"] = s.initial.y
    else:
        b = s.bench
        doc["benchmark"] = {"v1": b.v1, "r": b.r, "c": b.c, "h_coeffs": list(b.h_coeffs)}
        sim["initial_v2"] = s.initial.v2
    doc["simulation"] = sim
    if s.disturbances:
        doc["disturbance"] = [
            {"at_time": d.at_time, "target": d.target, "delta": d.delta} for d in s.disturbances
        ]
    return doc


def dump_scenario(s: Scenario) -> str:
    return tomli_w.dumps(scenario_to_dict(s))


def shipped_path(name: str) -> Path:
    """Filesystem path of one of the scenario files bundled with the package."""
    if name not in SHIPPED:
        raise KeyError(f"no shipped scenario named {name!r}; choose from {', '.join(SHIPPED)}")
    return Path(str(resources.files("voltstab") / "scenarios" / f"{name}.scenario"))
