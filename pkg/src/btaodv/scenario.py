"""Line-oriented scenario files and the built-in scenarios.

One directive per line, `#` starts a comment::

    param <key> <value>
    piconet <pid> master <id> slaves <id,...>
    flow <src> <dst> start <ms> stop <ms> rate <pps> size <bytes>
    migrate <node> to <pid> at <ms>
    leave <node> from <pid> at <ms>
    static <node> dest <id> via <id> at <ms>
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

from .aodv import AodvConfig
from .baseband import MAX_PAYLOAD
from .simkernel import SimConfig, Simulator, TrafficFlow
from .topology import Scatternet, TopologyError


class ScenarioError(Exception):
    def __init__(self, line: int, msg: str) -> None:
        super().__init__(f"line {line}: {msg}")
        self.line = line
        self.msg = msg


class ScenarioSyntaxError(ScenarioError):
    pass


class ScenarioSemanticError(ScenarioError):
    pass


@dataclass(frozen=True)
class PiconetDef:
    pid: str
    master: int
    slaves: tuple[int, ...]


@dataclass(frozen=True)
class FlowDef:
    flow: TrafficFlow


@dataclass(frozen=True)
class MigrateDef:
    node: int
    pid: str
    at_ms: float


@dataclass(frozen=True)
class LeaveDef:
    node: int
    pid: str
    at_ms: float


@dataclass(frozen=True)
class StaticDef:
    node: int
    dest: int
    via: int
    at_ms: float


@dataclass
class Scenario:
    config: SimConfig
    params: dict[str, str] = field(default_factory=dict)
    directives: list = field(default_factory=list)
    lines: list[int] = field(default_factory=list, compare=False, repr=False)

    @property
    def piconets(self) -> list[PiconetDef]:
        return [d for d in self.directives if isinstance(d, PiconetDef)]

    @property
    def flows(self) -> list[TrafficFlow]:
        return [d.flow for d in self.directives if isinstance(d, FlowDef)]

    def scatternet(self) -> Scatternet:
        net = Scatternet()
        for p in self.piconets:
            net.add_piconet(p.master, list(p.slaves), p.pid)
        return net


_INT_PARAMS = {
    "num_nodes": "num_nodes",
    "queue_length": "queue_length",
    "seed": "seed",
    "until": "until_ms",
    "bridge_window": "bridge_window_slots",
    "control_hop_slots": "control_hop_slots",
    "housekeeping_ms": "housekeeping_ms",
    "node_traversal_ms": "node_traversal_ms",
    "jitter_us": "jitter_us",
}
_STR_PARAMS = ("routing", "basic_rate", "data_rate", "channel", "propagation", "mac", "antenna")
_AODV_PARAMS = {f.name for f in fields(AodvConfig)}


def _apply_param(cfg: SimConfig, key: str, value: str, line: int) -> SimConfig:
    try:
        if key in _INT_PARAMS:
            v = int(value)
            if v < 0 or (key in ("num_nodes", "queue_length", "bridge_window", "control_hop_slots", "housekeeping_ms") and v == 0):
                raise ValueError
            return replace(cfg, **{_INT_PARAMS[key]: v})
        if key in _AODV_PARAMS:
            v = int(value)
            if v < 0:
                raise ValueError
            return replace(cfg, aodv=replace(cfg.aodv, **{key: v}))
        if key == "area":
            x, y = value.lower().split("x")
            return replace(cfg, area=(int(x), int(y)))
    except ValueError:
        raise ScenarioSemanticError(line, f"bad value {value!r} for param {key}") from None
    if key in _STR_PARAMS:
        if key == "routing" and value.upper() != "AODV":
            raise ScenarioSemanticError(line, f"only AODV routing is supported, got {value}")
        return replace(cfg, **{key: value})
    raise ScenarioSemanticError(line, f"unknown param {key!r}")


def _int(tok: str, line: int) -> int:
    try:
        v = int(tok)
    except ValueError:
        raise ScenarioSyntaxError(line, f"expected an integer, got {tok!r}") from None
    if v < 0:
        raise ScenarioSemanticError(line, f"negative value {v}")
    return v


def _num(tok: str, line: int) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise ScenarioSyntaxError(line, f"expected a number, got {tok!r}") from None
    if v < 0:
        raise ScenarioSemanticError(line, f"negative value {tok}")
    return int(v) if v.is_integer() else v


def _expect(toks: list[str], pattern: list[str | None], line: int, usage: str) -> list[str]:
    """Match keyword positions of `pattern` (None = value slot); return the values."""
    if len(toks) != len(pattern):
        raise ScenarioSyntaxError(line, f"expected `{usage}`")
    vals = []
    for tok, want in zip(toks, pattern):
        if want is None:
            vals.append(tok)
        elif tok != want:
            raise ScenarioSyntaxError(line, f"expected `{usage}`")
    return vals


def _parse_line(toks: list[str], line: int):
    head = toks[0]
    if head == "param":
        if len(toks) != 3:
            raise ScenarioSyntaxError(line, "expected `param <key> <value>`")
        return ("param", toks[1], toks[2])
    if head == "piconet":
        usage = "piconet <pid> master <id> slaves <id,...>"
        if len(toks) == 4:
            pid, master = _expect(toks, ["piconet", None, "master", None], line, usage)
            slaves: tuple[int, ...] = ()
        else:
            pid, master, sl = _expect(toks, ["piconet", None, "master", None, "slaves", None], line, usage)
            slaves = () if sl == "-" else tuple(_int(s, line) for s in sl.split(",") if s != "")
        return PiconetDef(pid, _int(master, line), slaves)
    if head == "flow":
        usage = "flow <src> <dst> start <ms> stop <ms> rate <pps> size <bytes>"
        src, dst, start, stop, rate, size = _expect(
            toks, ["flow", None, None, "start", None, "stop", None, "rate", None, "size", None], line, usage)
        return FlowDef(TrafficFlow(_int(src, line), _int(dst, line), _num(start, line), _num(stop, line),
                                   _num(rate, line), _int(size, line)))
    if head == "migrate":
        node, pid, at = _expect(toks, ["migrate", None, "to", None, "at", None], line, "migrate <node> to <pid> at <ms>")
        return MigrateDef(_int(node, line), pid, _num(at, line))
    if head == "leave":
        node, pid, at = _expect(toks, ["leave", None, "from", None, "at", None], line, "leave <node> from <pid> at <ms>")
        return LeaveDef(_int(node, line), pid, _num(at, line))
    if head == "static":
        node, dest, via, at = _expect(toks, ["static", None, "dest", None, "via", None, "at", None], line,
                                      "static <node> dest <id> via <id> at <ms>")
        return StaticDef(_int(node, line), _int(dest, line), _int(via, line), _num(at, line))
    raise ScenarioSyntaxError(line, f"unknown directive {head!r}")


def parse_scenario(text: str) -> Scenario:
    cfg = SimConfig()
    params: dict[str, str] = {}
    directives: list = []
    lines: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        toks = raw.split("#", 1)[0].split()
        if not toks:
            continue
        item = _parse_line(toks, lineno)
        if isinstance(item, tuple):
            _, key, value = item
            cfg = _apply_param(cfg, key, value, lineno)
            params[key] = value
        else:
            directives.append(item)
            lines.append(lineno)
    if not directives and not params:
        raise ScenarioSyntaxError(1, "empty scenario")
    scenario = Scenario(cfg, params, directives, lines)
    _validate(scenario)
    return scenario


def _validate(sc: Scenario) -> None:
    net = Scatternet()
    last_piconet_line = 1
    pics = [(d, ln) for d, ln in zip(sc.directives, sc.lines) if isinstance(d, PiconetDef)]
    if not pics:
        raise ScenarioSemanticError(sc.lines[0] if sc.lines else 1, "scenario defines no piconets")
    for d, ln in pics:
        try:
            net.add_piconet(d.master, list(d.slaves), d.pid)
        except (TopologyError, ValueError) as e:
            raise ScenarioSemanticError(ln, f"{type(e).__name__}: {e}") from None
        last_piconet_line = ln
    if "num_nodes" in sc.params and len(net.nodes()) != sc.config.num_nodes:
        raise ScenarioSemanticError(last_piconet_line,
                                    f"num_nodes is {sc.config.num_nodes} but piconets define {len(net.nodes())} nodes")
    if not net.is_connected():
        raise ScenarioSemanticError(last_piconet_line, "scatternet is not connected")

    def known(node: int, ln: int) -> None:
        if node not in net:
            raise ScenarioSemanticError(ln, f"unknown node {node}")

    for d, ln in zip(sc.directives, sc.lines):
        if isinstance(d, FlowDef):
            f = d.flow
            known(f.src, ln)
            known(f.dst, ln)
            if f.src == f.dst:
                raise ScenarioSemanticError(ln, "flow source equals destination")
            if f.start_ms >= f.stop_ms:
                raise ScenarioSemanticError(ln, "flow start must precede stop")
            if f.rate_pps <= 0:
                raise ScenarioSemanticError(ln, "flow rate must be positive")
            if f.payload > MAX_PAYLOAD:
                raise ScenarioSemanticError(ln, f"payload {f.payload} exceeds {MAX_PAYLOAD} bytes (no fragmentation)")
        elif isinstance(d, (MigrateDef, LeaveDef)):
            known(d.node, ln)
            if d.pid not in net.piconets:
                raise ScenarioSemanticError(ln, f"unknown piconet {d.pid}")
        elif isinstance(d, StaticDef):
            for n in (d.node, d.dest, d.via):
                known(n, ln)


def _fmt_num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(x)


def format_scenario(sc: Scenario) -> str:
    out = [f"param {k} {v}" for k, v in sc.params.items()]
    for d in sc.directives:
        if isinstance(d, PiconetDef):
            line = f"piconet {d.pid} master {d.master}"
            if d.slaves:
                line += " slaves " + ",".join(map(str, d.slaves))
            out.append(line)
        elif isinstance(d, FlowDef):
            f = d.flow
            out.append(f"flow {f.src} {f.dst} start {_fmt_num(f.start_ms)} stop {_fmt_num(f.stop_ms)} "
                       f"rate {_fmt_num(f.rate_pps)} size {f.payload}")
        elif isinstance(d, MigrateDef):
            out.append(f"migrate {d.node} to {d.pid} at {_fmt_num(d.at_ms)}")
        elif isinstance(d, LeaveDef):
            out.append(f"leave {d.node} from {d.pid} at {_fmt_num(d.at_ms)}")
        elif isinstance(d, StaticDef):
            out.append(f"static {d.node} dest {d.dest} via {d.via} at {_fmt_num(d.at_ms)}")
    return "\n".join(out) + "\n"


def build_simulation(sc: Scenario, seed: int | None = None, **overrides) -> Simulator:
    cfg = sc.config
    if seed is not None:
        cfg = replace(cfg, seed=seed)
    if overrides:
        cfg = replace(cfg, **overrides)
    sim = Simulator(sc.scatternet(), cfg)
    for d in sc.directives:
        if isinstance(d, FlowDef):
            sim.attach_flow(d.flow)
        elif isinstance(d, MigrateDef):
            sim.apply_migration(d.node, d.pid, d.at_ms)
        elif isinstance(d, LeaveDef):
            sim.apply_leave(d.node, d.pid, d.at_ms)
        elif isinstance(d, StaticDef):
            sim.inject_static_routes([(d.node, d.dest, d.via)], d.at_ms)
    return sim


MIGRATION_SCATTERNET = """\
# 20 nodes in three piconets (masters 1, 12, 17). Piconet 2 hosts the two
# bridges (8 and 11) that keep the scatternet connected. At 500 ms master 1
# also joins piconets 3 and 2 as a slave, opening a 3-hop shortcut for the
# flow 3 -> 19; at 1250 ms it drops out of piconet 3 again.
param num_nodes 20
param area 500x400
param routing AODV
param queue_length 50
param basic_rate 5MB
param data_rate 10MB
piconet P1 master 1 slaves 2,3,4,5,6,7,8
piconet P2 master 12 slaves 13,14,15,16,8,11
piconet P3 master 17 slaves 18,19,0,9,10,11
migrate 1 to P3 at 500
migrate 1 to P2 at 500
flow 3 19 start 500 stop 1900 rate 20 size 256
leave 1 from P3 at 1250
"""

TRIANGLE = """\
# Routers 1, 2, 3 form a triangle; node 10 stands for network 10 behind
# router 3, node 0 is a host on router 1.
param num_nodes 5
piconet PA master 1 slaves 2,0
piconet PB master 2 slaves 3
piconet PC master 3 slaves 1,10
flow 0 10 start 100 stop 1000 rate 20 size 64
"""

TRIANGLE_LOOP = TRIANGLE + """\
# misconfigured static tables: 1 -> 2 -> 3 -> 1 for destination 10
static 1 dest 10 via 2 at 0
static 2 dest 10 via 3 at 0
static 3 dest 10 via 1 at 0
"""

BUILTINS = {
    "paper-scatternet": MIGRATION_SCATTERNET,
    "fig3-loop": TRIANGLE_LOOP,
    "fig3-aodv": TRIANGLE,
}
