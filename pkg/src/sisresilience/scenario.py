"""Scenario documents (TOML) and the figure presets.

A scenario file looks like::

    name = "fig2b"
    control_time = 5000
    master_seed = 1
    replicates = 20

    [topology]
    kind = "lattice"
    width = 100
    height = 100
    boundary = "periodic"

    [params]
    tau = 0.5
    j_local = 1.05

    [seeding]
    mode = "fraction"
    value = 0.5

Unknown keys are rejected. Sweep files add a ``[sweep]`` table.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, fields
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
import tomli_w

from .dynamics import PerceptionParams, RunConfig, SeedingSpec
from .errors import InvalidSpecError, ScenarioParseError, ScenarioValidationError
from .sweeps import AXES, SweepSpec
from .topology import LatticeSpec, ScaleFreeSpec, build_lattice, build_scale_free, load_edge_list

_NAME_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")


@dataclass(frozen=True)
class EdgeListSpec:
    path: str
    node_count: int | None = None


@dataclass(frozen=True)
class SweepSection:
    axis: str
    grid: tuple = ()
    bracket: tuple | None = None
    survival_horizon: int = 2000
    bisection_tolerance: float = 0.005


@dataclass(frozen=True)
class Scenario:
    name: str
    topology: LatticeSpec | ScaleFreeSpec | EdgeListSpec
    params: PerceptionParams
    seeding: SeedingSpec = SeedingSpec()
    control_time: int = 1000
    master_seed: int = 0
    replicates: int = 1
    stop_on_eradication: bool = True
    output_dir: str = ""
    formats: tuple = ("csv", "json")
    assumptions: tuple = ()
    sweep: SweepSection | None = None

    def __post_init__(self):
        if not self.name or not _NAME_RE.match(self.name):
            raise ScenarioValidationError(f"name {self.name!r} must be non-empty and filesystem-safe")
        if self.control_time < 1:
            raise ScenarioValidationError("control_time must be >= 1")
        if self.replicates < 1:
            raise ScenarioValidationError("replicates must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise ScenarioValidationError("master_seed must be a 64-bit unsigned integer")
        bad = set(self.formats) - {"csv", "json"}
        if bad:
            raise ScenarioValidationError(f"unsupported output formats {sorted(bad)}")

    def build_topology(self, base_dir=None):
        spec = self.topology
        if isinstance(spec, LatticeSpec):
            return build_lattice(spec)
        if isinstance(spec, ScaleFreeSpec):
            return build_scale_free(spec)
        path = Path(spec.path)
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        return load_edge_list(path, spec.node_count)

    def run_config(self, topology=None, base_dir=None):
        return RunConfig(
            topology=topology if topology is not None else self.build_topology(base_dir),
            params=self.params,
            seeding=self.seeding,
            control_time=self.control_time,
            master_seed=self.master_seed,
            stop_on_eradication=self.stop_on_eradication,
        )

    def sweep_spec(self, config=None, base_dir=None):
        if self.sweep is None:
            raise ScenarioValidationError("scenario has no [sweep] table")
        s = self.sweep
        return SweepSpec(
            base=config if config is not None else self.run_config(base_dir=base_dir),
            axis=s.axis,
            grid=s.grid,
            bracket=s.bracket,
            replicates=self.replicates,
            survival_horizon=s.survival_horizon,
            bisection_tolerance=s.bisection_tolerance,
        )


_TOP_KEYS = {"name", "control_time", "master_seed", "replicates", "stop_on_eradication",
             "assumptions", "topology", "params", "seeding", "outputs", "sweep"}
_TOPOLOGY_KEYS = {
    "lattice": {"kind", "width", "height", "boundary"},
    "scale_free": {"kind", "node_count", "edges_per_node", "seed"},
    "edge_list": {"kind", "path", "node_count"},
}
_PARAM_KEYS = {f.name for f in fields(PerceptionParams)}
_SEEDING_KEYS = {"mode", "value"}
_OUTPUT_KEYS = {"directory", "formats"}
_SWEEP_KEYS = {"axis", "grid", "bracket", "survival_horizon", "bisection_tolerance"}


def _locate(text, key):
    pat = re.compile(rf"^\s*{re.escape(key)}\s*=", re.M)
    m = pat.search(text)
    if m is None:
        m = re.search(rf"^\s*\[\s*{re.escape(key)}\s*\]", text, re.M)
    if m is None:
        return None, None
    line = text.count("\n", 0, m.start()) + 1
    col = m.start() - (text.rfind("\n", 0, m.start()) + 1) + 1 + (len(m.group(0)) - len(m.group(0).lstrip()))
    return line, col


def _check_keys(table, allowed, where, text):
    for key in table:
        if key not in allowed:
            line, col = _locate(text, key)
            raise ScenarioParseError(f"unknown key {key!r} in {where}", line, col)


def _require(table, key, where):
    if key not in table:
        raise ScenarioValidationError(f"missing required key {key!r} in {where}")
    return table[key]


def _int(value, key):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioValidationError(f"{key} must be an integer")
    return value


def _float(value, key):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioValidationError(f"{key} must be a number")
    return float(value)


def _bool(value, key):
    if not isinstance(value, bool):
        raise ScenarioValidationError(f"{key} must be true or false")
    return value


def _str(value, key):
    if not isinstance(value, str):
        raise ScenarioValidationError(f"{key} must be a string")
    return value


def _table(doc, key, text, required=True):
    if key not in doc:
        if required:
            raise ScenarioValidationError(f"missing required table [{key}]")
        return None
    value = doc[key]
    if not isinstance(value, dict):
        line, col = _locate(text, key)
        raise ScenarioParseError(f"{key!r} must be a table", line, col)
    return value


def _parse_topology(t, text):
    kind = _str(_require(t, "kind", "[topology]"), "topology.kind")
    if kind not in _TOPOLOGY_KEYS:
        raise ScenarioValidationError(f"topology.kind must be one of {sorted(_TOPOLOGY_KEYS)}")
    _check_keys(t, _TOPOLOGY_KEYS[kind], "[topology]", text)
    if kind == "lattice":
        spec = LatticeSpec(
            width=_int(_require(t, "width", "[topology]"), "topology.width"),
            height=_int(_require(t, "height", "[topology]"), "topology.height"),
            boundary=_str(t.get("boundary", "periodic"), "topology.boundary"),
        )
    elif kind == "scale_free":
        spec = ScaleFreeSpec(
            node_count=_int(_require(t, "node_count", "[topology]"), "topology.node_count"),
            edges_per_node=_int(_require(t, "edges_per_node", "[topology]"), "topology.edges_per_node"),
            seed=_int(t.get("seed", 0), "topology.seed"),
        )
    else:
        n = t.get("node_count")
        return EdgeListSpec(_str(_require(t, "path", "[topology]"), "topology.path"),
                            None if n is None else _int(n, "topology.node_count"))
    spec.validate()
    return spec


def _parse_sweep(s, text):
    _check_keys(s, _SWEEP_KEYS, "[sweep]", text)
    axis = _str(_require(s, "axis", "[sweep]"), "sweep.axis")
    if axis not in AXES:
        raise ScenarioValidationError(f"sweep.axis must be one of {AXES}")
    grid = tuple(_float(v, "sweep.grid") for v in s.get("grid", []))
    bracket = s.get("bracket")
    if bracket is not None:
        if not isinstance(bracket, list) or len(bracket) != 2:
            raise ScenarioValidationError("sweep.bracket must be [lo, hi]")
        bracket = (_float(bracket[0], "sweep.bracket"), _float(bracket[1], "sweep.bracket"))
        if not bracket[0] < bracket[1]:
            raise ScenarioValidationError("sweep.bracket requires lo < hi")
    if not grid and bracket is None:
        raise ScenarioValidationError("sweep needs a non-empty grid or a bracket")
    horizon = _int(s.get("survival_horizon", 2000), "sweep.survival_horizon")
    tol = _float(s.get("bisection_tolerance", 0.005), "sweep.bisection_tolerance")
    if horizon < 1:
        raise ScenarioValidationError("sweep.survival_horizon must be >= 1")
    if tol <= 0:
        raise ScenarioValidationError("sweep.bisection_tolerance must be > 0")
    return SweepSection(axis, grid, bracket, horizon, tol)


def parse_scenario(text: str) -> Scenario:
    """Parse and fully validate a scenario document."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+), column (\d+)", str(exc))
        line, col = (int(m.group(1)), int(m.group(2))) if m else (None, None)
        raise ScenarioParseError(f"malformed scenario document: {exc}", line, col) from None
    _check_keys(doc, _TOP_KEYS, "top level", text)
    try:
        topo = _parse_topology(_table(doc, "topology", text), text)
        p = _table(doc, "params", text)
        _check_keys(p, _PARAM_KEYS, "[params]", text)
        params = PerceptionParams(
            tau=_float(_require(p, "tau", "[params]"), "params.tau"),
            **{k: (_bool(v, k) if k == "normalize_global" else _float(v, f"params.{k}"))
               for k, v in p.items() if k != "tau"},
        )
        s = _table(doc, "seeding", text, required=False) or {}
        _check_keys(s, _SEEDING_KEYS, "[seeding]", text)
        seeding = SeedingSpec(
            mode=_str(s.get("mode", "fraction"), "seeding.mode"),
            value=_float(s.get("value", 0.1), "seeding.value"),
        )
        o = _table(doc, "outputs", text, required=False) or {}
        _check_keys(o, _OUTPUT_KEYS, "[outputs]", text)
        formats = o.get("formats", ["csv", "json"])
        if not isinstance(formats, list):
            raise ScenarioValidationError("outputs.formats must be a list")
        sw = _table(doc, "sweep", text, required=False)
        assumptions = doc.get("assumptions", [])
        if not isinstance(assumptions, list):
            raise ScenarioValidationError("assumptions must be a list of strings")
        return Scenario(
            name=_str(_require(doc, "name", "top level"), "name"),
            topology=topo,
            params=params,
            seeding=seeding,
            control_time=_int(doc.get("control_time", 1000), "control_time"),
            master_seed=_int(doc.get("master_seed", 0), "master_seed"),
            replicates=_int(doc.get("replicates", 1), "replicates"),
            stop_on_eradication=_bool(doc.get("stop_on_eradication", True), "stop_on_eradication"),
            output_dir=_str(o.get("directory", ""), "outputs.directory"),
            formats=tuple(_str(f, "outputs.formats") for f in formats),
            assumptions=tuple(_str(a, "assumptions") for a in assumptions),
            sweep=None if sw is None else _parse_sweep(sw, text),
        )
    except InvalidSpecError as exc:
        raise ScenarioValidationError(str(exc)) from None


def scenario_to_dict(sc: Scenario) -> dict:
    t = sc.topology
    if isinstance(t, LatticeSpec):
        topo = {"kind": "lattice", "width": t.width, "height": t.height, "boundary": t.boundary}
    elif isinstance(t, ScaleFreeSpec):
        topo = {"kind": "scale_free", "node_count": t.node_count, "edges_per_node": t.edges_per_node, "seed": t.seed}
    else:
        topo = {"kind": "edge_list", "path": t.path}
        if t.node_count is not None:
            topo["node_count"] = t.node_count
    p = sc.params
    doc = {
        "name": sc.name,
        "control_time": sc.control_time,
        "master_seed": sc.master_seed,
        "replicates": sc.replicates,
        "stop_on_eradication": sc.stop_on_eradication,
        "assumptions": list(sc.assumptions),
        "topology": topo,
        "params": {
            "tau": p.tau, "j_local": p.j_local, "w_global": p.w_global,
            "mu": p.mu, "omega0": p.omega0, "normalize_global": p.normalize_global,
        },
        "seeding": {"mode": sc.seeding.mode, "value": float(sc.seeding.value)},
        "outputs": {"directory": sc.output_dir, "formats": list(sc.formats)},
    }
    if sc.sweep is not None:
        s = sc.sweep
        sw = {"axis": s.axis}
        if s.grid:
            sw["grid"] = list(s.grid)
        if s.bracket is not None:
            sw["bracket"] = list(s.bracket)
        sw["survival_horizon"] = s.survival_horizon
        sw["bisection_tolerance"] = s.bisection_tolerance
        doc["sweep"] = sw
    return doc


def serialize_scenario(sc: Scenario) -> str:
    return tomli_w.dumps(scenario_to_dict(sc))


def load_scenario(path) -> Scenario:
    return parse_scenario(Path(path).read_text(encoding="utf-8"))


FIGURES = ("fig2a", "fig2b", "fig3", "fig4a", "fig4b")

_LATTICE = LatticeSpec(100, 100, "periodic")
_COMMON_ASSUMPTIONS = (
    "periodic boundary (not stated in the source)",
    "control_time=5000 and master_seed=1 are tool defaults",
)


def reproduce(figure_id: str, *, replicates=20, master_seed=1, control_time=5000) -> Scenario:
    """Preset scenario for one of the reproduced figures."""
    presets = {
        "fig2a": (PerceptionParams(tau=0.135), SeedingSpec("fraction", 0.5), ()),
        "fig2b": (PerceptionParams(tau=0.5, j_local=1.05), SeedingSpec("fraction", 0.5), ()),
        "fig3": (PerceptionParams(tau=0.5, w_global=0.002, mu=1.0), SeedingSpec("fraction", 0.1), ()),
        "fig4a": (PerceptionParams(tau=0.5, w_global=0.05, mu=0.02), SeedingSpec("fraction", 0.1),
                  ("initial infected fraction 0.1 borrowed from fig3 (not stated for fig4)",
                   "tau=0.5 and J=0 carried over from fig3 (not restated for fig4)")),
        "fig4b": (PerceptionParams(tau=0.5, w_global=0.035, mu=0.02), SeedingSpec("fraction", 0.1),
                  ("initial infected fraction 0.1 borrowed from fig3 (not stated for fig4)",
                   "tau=0.5 and J=0 carried over from fig3 (not restated for fig4)")),
    }
    if figure_id not in presets:
        raise ScenarioValidationError(f"unknown figure {figure_id!r}; choose from {FIGURES}")
    params, seeding, extra = presets[figure_id]
    return Scenario(
        name=figure_id,
        topology=_LATTICE,
        params=params,
        seeding=seeding,
        control_time=control_time,
        master_seed=master_seed,
        replicates=replicates,
        output_dir=f"out/{figure_id}",
        assumptions=_COMMON_ASSUMPTIONS + extra,
    )
