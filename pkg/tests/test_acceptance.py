"""Acceptance suite: one PASS/FAIL line per criterion.

Reference anchors carry reconstruction tolerances; the solver itself is
held to 1e-8 or tighter in the closed-form and structural criteria.
"""

import math

import numpy as np

from satmc import numerics
from satmc.checker import check
from satmc.ctmc import Ctmc, RewardStructure, build_state_space, embedded_matrix
from satmc.lang import parse_model
from satmc.ram.experiments import bundled_manifests, crossing, load_manifest, run_experiment_sweep, run_manifest
from satmc.ram.models import calibrate_interruptions, constellation_source, satellite_availability
from satmc.ram.params import RamParams
from satmc.sim import SimConfig, estimate_query

from conftest import two_state
from test_ctmc import random_chain

# fixed before any simulation was run
SIM_SEED = 20261018
SIM_REPS = 10**6

SATELLITE_ANCHORS = [
    ("P=?[F<=129600 s=5]", 0.0771, 0.004),
    ('R{"num_replace"}=?[C<=129600]', 0.08, 0.004),
    ('R{"num_unplanned"}=?[C<=129600]', 29.95, 0.3),
    ('R{"num_repair"}=?[C<=129600]', 0.18, 0.01),
    ('R{"num_repair_fail"}=?[C<=129600]', 0.036, 0.002),
]
CONSTELLATION_ANCHORS = [
    ("P=?[F<=129600 s=4]", 0.01171, 0.15 * 0.01171),
    ('R{"num_repair"}=?[C<=129600]', 5.18, 0.10 * 5.18),
    ('R{"availability"}=?[C<=129600]/129600', 0.99958, 5e-4),
]
INCONSISTENT_S6 = ("P=?[F<=129600 s=6]", 0.0796)


def report(capsys, number, title, failures):
    with capsys.disabled():
        status = "PASS" if not failures else "FAIL"
        print(f"\n[criterion {number}] {status}: {title}")
        for line in failures:
            print(f"    {line}")
    assert not failures, failures


def anchor_failures(c, anchors):
    failures = []
    for query, target, tol in anchors:
        value = check(c, query).value
        if abs(value - target) > tol:
            failures.append(f"{query} = {value:.6g}, expected {target} +/- {tol:.3g}")
    return failures


def test_criterion_1_single_satellite_anchors(satellite, capsys):
    report(capsys, 1, "single-satellite reference values", anchor_failures(satellite, SATELLITE_ANCHORS))


def test_criterion_2_constellation_anchors(constellation, capsys):
    failures = anchor_failures(constellation, CONSTELLATION_ANCHORS)
    s4 = check(constellation, "P=?[F<=129600 s=4]").value
    s6 = check(constellation, INCONSISTENT_S6[0]).value
    if not s6 <= s4:
        failures.append(f"P[F s=6] = {s6:.6g} exceeds P[F s=4] = {s4:.6g}")
    table = run_experiment_sweep(
        constellation_source(), ['R{"availability"}=?[C<=T]/T'], ["MTTR=0.1:3600:72"]
    )
    x, y = table.column('R{"availability"}=?[C<=T]/T')
    mttr = crossing(x, y, 0.9999)
    if abs(mttr - 2520) > 252:
        failures.append(f"availability crosses 0.9999 at MTTR = {mttr:.1f} h, expected 2520 +/- 252")
    with capsys.disabled():
        print(f"\n    note: P[F s=6] = {s6:.4g} vs reference {INCONSISTENT_S6[1]} (inconsistent with s=4, not matched)")
        print(f"    note: 0.9999 availability crossing at MTTR = {mttr:.1f} h")
    report(capsys, 2, "constellation reference values", failures)


def test_criterion_3_calibration(capsys):
    d_u, d_p = calibrate_interruptions()
    params = RamParams(d_u=d_u, d_p=d_p)
    x = np.arange(1, 49, 3.0)
    y = [satellite_availability(params.replace(d_p=o)) for o in x]
    failures = []
    o_star = crossing(x, y, 0.995)
    if abs(o_star - 16) > 2:
        failures.append(f"availability crosses 0.995 at o = {o_star:.2f} h, expected 16 +/- 2")
    default = satellite_availability(params)
    if abs(default - 129378 / 129600) > 0.002:
        failures.append(f"default availability {default:.6f} is not within 0.002 of {129378 / 129600:.6f}")
    with capsys.disabled():
        print(f"\n    note: d_u = {d_u:.5f} h, d_p = {d_p:.5f} h, crossing at o = {o_star:.3f} h")
    report(capsys, 3, "interruption-duration calibration", failures)


def test_criterion_4_simulation_oracle(satellite, constellation, capsys):
    cfg = SimConfig(SIM_REPS, seed=SIM_SEED, confidence=0.99)
    failures = []
    jobs = [(satellite, q) for q, _, _ in SATELLITE_ANCHORS]
    jobs += [(constellation, q) for q, _, _ in CONSTELLATION_ANCHORS]
    jobs.append((constellation, INCONSISTENT_S6[0]))
    for c, query in jobs:
        exact = check(c, query).value
        est = estimate_query(c, query, cfg)
        if not est.contains(exact):
            failures.append(f"{query}: analytic {exact:.6g} outside 99% CI [{est.ci_low:.6g}, {est.ci_high:.6g}]")
    report(capsys, 4, f"analytic values inside simulation 99% CIs ({SIM_REPS} replications)", failures)


def test_criterion_5_closed_forms(capsys):
    failures = []

    def expect(name, got, want):
        if abs(got - want) > 1e-8:
            failures.append(f"{name}: {got!r} vs {want!r}")

    c = two_state(1.0, 1.0)
    expect("transient P(down, t=1)", numerics.transient_distribution(c, 1.0)[1], 0.5 * (1 - math.exp(-2)))
    pi = numerics.steady_state(two_state(1.0, 3.0))
    expect("steady state up", pi[0], 0.75)
    expect("steady state down", pi[1], 0.25)
    expect("cumulative up-time t=1", numerics.cumulative_reward(c, c.reward("up"), 1.0), 0.5 + 0.25 * (1 - math.exp(-2)))
    up_fail = Ctmc.from_rates([(0, 1, 1.0)], num_states=2)
    expect("reachability P[F<=2 fail]", check(up_fail, "P=?[F<=2 s=1]").value, 1 - math.exp(-2))
    report(capsys, 5, "closed-form suite to 1e-8", failures)


def test_criterion_6_structural(satellite, constellation, capsys):
    failures = []
    chains = [satellite, constellation] + [random_chain(s) for s in range(100)]
    for i, c in enumerate(chains):
        P = embedded_matrix(c).toarray()
        live = ~c.absorbing
        if np.max(np.abs(P[live].sum(axis=1) - 1)) > 1e-12:
            failures.append(f"embedded matrix of chain {i} not stochastic")
    eps = numerics.DEFAULT_EPS
    for s in range(100):
        c = random_chain(s)
        rng = np.random.default_rng(1000 + s)
        t1, t2 = rng.uniform(0.05, 3.0, size=2)
        direct = numerics.transient_distribution(c, t1 + t2, eps)
        if abs(direct.sum() - 1) > 1e-10:
            failures.append(f"seed {s}: transient mass {direct.sum()!r}")
        chained = numerics.transient_distribution(c, t2, eps, start=numerics.transient_distribution(c, t1, eps))
        if np.max(np.abs(direct - chained)) > 1e-9:
            failures.append(f"seed {s}: Chapman-Kolmogorov gap {np.max(np.abs(direct - chained)):.3g}")
        factor = float(rng.uniform(0.1, 10.0))
        scaled = numerics.transient_distribution(c.scaled(factor), (t1 + t2) / factor, eps)
        if np.max(np.abs(direct - scaled)) > 1e-9:
            failures.append(f"seed {s}: time rescaling gap {np.max(np.abs(direct - scaled)):.3g}")
        ones = RewardStructure("one", np.ones(c.num_states))
        t = t1 * 100
        if abs(numerics.cumulative_reward(c, ones, t, eps) - t) > eps * t:
            failures.append(f"seed {s}: all-ones reward differs from t")
    for c in (satellite, constellation):
        p = numerics.transient_distribution(c, 129600.0, eps)
        if abs(p.sum() - 1) > 1e-10:
            failures.append(f"model transient mass {p.sum()!r}")
    merged = "ctmc module m x:[0..2] init 0; [] x=0 -> 0.5:(x'=0) + 0.8:(x'=1); [] x=1 -> 1:(x'=0); endmodule"
    split = "ctmc module m x:[0..2] init 0; [] x=0 -> 0.5:(x'=0); [] x=0 -> 0.8:(x'=1); [] x=1 -> 1:(x'=0); endmodule"
    a, b = build_state_space(parse_model(merged)), build_state_space(parse_model(split))
    if not np.array_equal(a.rates.toarray(), b.rates.toarray()):
        failures.append("merged and split commands give different rate matrices")
    report(capsys, 6, "structural and property suite", failures)


def test_criterion_7_manifest_determinism(capsys):
    failures = []
    for name in bundled_manifests():
        for digits in (6, 17):
            first = {k: t.to_csv(digits) for k, t in run_manifest(load_manifest(name)).items()}
            second = {k: t.to_csv(digits) for k, t in run_manifest(load_manifest(name)).items()}
            if first != second:
                failures.append(f"{name}: CSV output differs between runs ({digits} digits)")
    report(capsys, 7, "byte-identical manifest CSVs", failures)
