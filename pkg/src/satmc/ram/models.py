"""Single-satellite and constellation models.

Both models are generated as text in the modelling language and then
parsed, so the bundled ``.ctmc`` files and the builders can never drift
apart. Parameters become named constants, which lets sweeps override
them without regenerating the source (``n`` and ``m`` excepted: they
shape the constellation's command list).
"""

from __future__ import annotations

from scipy.optimize import brentq

from ..checker import reward_query
from ..ctmc import build_state_space
from ..lang.ast import ModelAst
from ..lang.parser import parse_model
from ..lang.printer import format_literal
from .params import RamParams

# state numbering of the single-satellite model
NORMAL, PLANNED, UNPLANNED, FAILED, REPAIR, REPLACE, MANUFACTURE, LAUNCH = range(8)


def _const(name: str, value: float, comment: str) -> str:
    return f"const double {name} = {format_literal(float(value))};".ljust(36) + f"// {comment}"


def single_satellite_source(params: RamParams = RamParams()) -> str:
    p = params
    return "\n".join(
        [
            "// Single navigation satellite (times in hours, rates per hour).",
            "// s: 0 normal, 1 planned interruption, 2 unplanned interruption, 3 failed,",
            "//    4 on-orbit repair, 5 replacement decision, 6 manufacture, 7 launch/positioning",
            "ctmc",
            "",
            _const("r", p.r, "design reliability over MTBF"),
            _const("MTBF", p.MTBF, "mean time between failures"),
            _const("MTTR", p.MTTR, "mean time to repair"),
            _const("t_u", p.t_u, "mean time to unplanned interruption"),
            _const("t_p", p.t_p, "mean time to planned interruption"),
            _const("d_u", p.d_u, "unplanned interruption duration"),
            _const("o", p.d_p, "planned interruption duration"),
            _const("p_b", p.p_b, "on-orbit resolution probability"),
            _const("t_r", p.t_r, "decision time for a new satellite"),
            _const("t_d", p.t_d, "manufacture time"),
            _const("t_e", p.t_e, "unused by this model"),
            _const("p_y", p.p_y, "launch success probability"),
            _const("t_k", p.t_k, "positioning time"),
            _const("T", p.T, "mission time"),
            "",
            "const double lambda = -ln(r)/MTBF;",
            "const double mu = 1/MTTR;",
            "",
            "module satellite",
            "    s : [0..7] init 0;",
            "",
            "    []  s=0 -> 1/t_p : (s'=1);",
            "    []  s=1 -> 1/o : (s'=0);",
            "    [u] s=0 -> 1/t_u : (s'=2);",
            "    []  s=2 -> 1/d_u : (s'=0);",
            "    []  s=0 -> lambda : (s'=3);",
            "    [d] s=3 -> p_b*mu : (s'=4);",
            "    []  s=3 -> (1-p_b)*mu : (s'=5);",
            "    []  s=4 -> p_b*mu : (s'=0);",
            "    [f] s=4 -> (1-p_b)*mu : (s'=5);",
            "    []  s=5 -> 1/t_r : (s'=6);",
            "    [g] s=6 -> p_y/t_d : (s'=7);",
            "    [e] s=6 -> (1-p_y)/t_d : (s'=6);",
            "    []  s=7 -> 1/t_k : (s'=0);",
            "endmodule",
            "",
            'rewards "num_replace"',
            "    [g] true : 1;",
            "endrewards",
            "",
            'rewards "num_launch_fail"',
            "    [e] true : 1;",
            "endrewards",
            "",
            'rewards "num_repair"',
            "    [d] true : 1;",
            "endrewards",
            "",
            'rewards "num_repair_fail"',
            "    [f] true : 1;",
            "endrewards",
            "",
            'rewards "num_unplanned"',
            "    [u] true : 1;",
            "endrewards",
            "",
            'rewards "availability"',
            "    s=0 : 1;",
            "endrewards",
            "",
            'label "normal" = s=0;',
            'label "failed" = s=3;',
            'label "replacing" = s=5;',
            "",
        ]
    )


def constellation_source(params: RamParams | None = None) -> str:
    p = params if params is not None else RamParams.constellation()
    n, m = p.n, p.m
    lines = [
        "// Constellation of n operational satellites with m spares.",
        "// s counts failed satellites; a single repair facility.",
        "ctmc",
        "",
        f"const int n = {n};".ljust(36) + "// orbital slots (structural)",
        f"const int m = {m};".ljust(36) + "// spares (structural)",
        _const("r", p.r, "design reliability over MTBF"),
        _const("MTBF", p.MTBF, "mean time between failures"),
        _const("MTTR", p.MTTR, "mean time to repair"),
        _const("T", p.T, "mission time"),
        "",
        "const double lambda = -ln(r)/MTBF;",
        "const double mu = 1/MTTR;",
        "",
        "module constellation",
        "    s : [0..n+m] init 0;",
        "",
        "    [a1] s<m -> n*lambda : (s'=s+1);",
        "    [a2] s=m -> n*lambda : (s'=s+1);",
        "    [a3] s>m & s<n+m -> (n+m-s)*lambda : (s'=s+1);",
    ]
    lines += [f"    [b{i}] s={i} -> mu : (s'={i - 1});" for i in range(1, n + m + 1)]
    lines += [
        "endmodule",
        "",
        'rewards "num_fail"',
        "    [a2] true : 1;",
        "endrewards",
        "",
        'rewards "num_repair"',
    ]
    lines += [f"    [b{i}] true : 1;" for i in range(1, n + m + 1)]
    lines += [
        "endrewards",
        "",
        'rewards "availability"',
        "    s<=m : 1;",
        "endrewards",
        "",
        'label "full" = s<=m;',
        "",
    ]
    return "\n".join(lines)


def build_single_satellite_model(params: RamParams = RamParams()) -> ModelAst:
    return parse_model(single_satellite_source(params))


def build_constellation_model(params: RamParams | None = None) -> ModelAst:
    return parse_model(constellation_source(params))


def satellite_availability(params: RamParams, eps: float = 1e-10) -> float:
    """Fraction of the mission spent in the normal state."""
    c = build_state_space(build_single_satellite_model(params))
    return reward_query(c, "availability", params.T, eps) / params.T


def calibrate_interruptions(
    params: RamParams = RamParams(),
    crossing_duration: float = 16.0,
    crossing_level: float = 0.995,
    target_hours: float = 129378.0,
) -> tuple[float, float]:
    """Choose the unknown interruption durations ``(d_u, d_p)``.

    ``d_u`` puts availability at ``crossing_level`` when planned
    interruptions last ``crossing_duration`` hours; with that ``d_u``,
    ``d_p`` makes the expected up-time over ``T`` equal ``target_hours``.
    """
    d_u = brentq(
        lambda x: satellite_availability(params.replace(d_u=x, d_p=crossing_duration)) - crossing_level,
        0.01,
        48.0,
        xtol=1e-8,
    )
    d_p = brentq(
        lambda x: satellite_availability(params.replace(d_u=d_u, d_p=x)) - target_hours / params.T,
        0.01,
        48.0,
        xtol=1e-8,
    )
    return d_u, d_p
