"""Acceptance gate: one test per claim, each printing a pass/fail line.

Run with `pytest -s tests/test_acceptance.py` to see the per-criterion
lines; the whole module takes a few minutes, dominated by the thousand
rank-one oracle runs and the twenty-field sweep.
"""

import time
import warnings

import numpy as np
import pytest

import gluecount
from gluecount.background import make_background, targets
from gluecount.instanton import TwoPointConfig, direction_ratio
from gluecount.linalg3 import StratumTag, classify_stratum, singular_values
from gluecount.rank_one import OutcomeKind, oracle_rank_one, solve_rank_one
from gluecount.rotations import rotation_distance
from gluecount.solver import (
    SolverConfig,
    compare_solution_sets,
    enumerate_solutions,
    oracle_enumerate,
    orientation_sign,
    reference_case,
    solve_magnitude,
)

SEEDS = (1, 2, 10, 11, 13, 16, 17, 18, 19, 24, 26, 28, 32, 39, 41, 43, 44, 49, 50, 56)
L_VALUES = (0.2, 0.1, 0.05)
AMPLITUDE = 0.25
ORACLE_CELLS = ((1, 0.1), (2, 0.1), (10, 0.05), (11, 0.2), (13, 0.1))


def report(criterion: int, name: str, detail: str = ""):
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE {criterion} {name}: PASS{suffix}")


@pytest.fixture(scope="module")
def fields():
    check_points = [np.array([s * l, 0, 0, 0.0]) for l in L_VALUES for s in (1, -1)]
    return {seed: make_background(seed, degree=2, amplitude=AMPLITUDE, check_points=check_points) for seed in SEEDS}


@pytest.fixture(scope="module")
def sweep(fields):
    """Records and targets for every (seed, L) cell of the acceptance grid."""
    t0 = time.perf_counter()
    cells = {}
    with warnings.catch_warnings():
        warnings.simplefilter("error", gluecount.CountAnomalyWarning)
        for seed, field in fields.items():
            for L in L_VALUES:
                cfg = TwoPointConfig(L)
                cells[(seed, L)] = (
                    enumerate_solutions(field, cfg, SolverConfig()),
                    targets(field, cfg),
                )
    cells["elapsed"] = time.perf_counter() - t0
    return cells


def test_criterion_1_lemma_reproduction():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20260801)
    checked = 0
    while checked < 1000:
        m = rng.uniform(-1.0, 1.0, (3, 3))
        if classify_stratum(m).tag != StratumTag.GENERIC:
            continue
        sv = singular_values(m)
        outcome = solve_rank_one(m)
        assert outcome.kind == OutcomeKind.TWO_DISTINCT and len(outcome.pairs) == 2
        for pair in outcome.pairs:
            assert abs(pair.s - sv[1]) / sv[1] <= 1e-9
            assert pair.residual <= 1e-9 * sv[0]
        found = oracle_rank_one(m, 1000, np.random.default_rng((20260801, checked)))
        assert len(found) == 2
        for pair in found:
            assert min(float(rotation_distance(pair.m, c.m)) for c in outcome.pairs) < 1e-6
        for pair in outcome.pairs:
            assert min(float(rotation_distance(pair.m, f.m)) for f in found) < 1e-6
        checked += 1
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0
    report(1, "lemma reproduction", f"1000 matrices, oracle 1000 starts each, {elapsed:.0f} s")


def test_criterion_2_coalescence_rate():
    eps_values = [10.0**-k for k in range(2, 7)]
    separations = []
    for eps in eps_values:
        outcome = solve_rank_one(np.diag([2.0 + eps, 2.0, 1.0]))
        assert outcome.kind == OutcomeKind.TWO_DISTINCT
        separations.append(float(rotation_distance(outcome.pairs[0].m, outcome.pairs[1].m)))
    constants = [s / np.sqrt(e) for s, e in zip(separations, eps_values)]
    assert max(constants) <= 3.0 * min(constants)
    slope = float(np.polyfit(np.log(eps_values), np.log(separations), 1)[0])
    assert abs(slope - 0.5) <= 0.15
    report(2, "coalescence rate", f"log-log slope {slope:.3f}")


def test_criterion_3_six_solutions(sweep):
    for seed in SEEDS:
        for L in L_VALUES:
            records, _ = sweep[(seed, L)]
            counts = {p: sum(1 for r in records if r.pairing == p) for p in ((1, 1), (1, 2), (2, 1), (2, 2))}
            assert len(records) == 6, (seed, L, len(records))
            assert counts == {(1, 1): 1, (1, 2): 2, (2, 1): 2, (2, 2): 1}, (seed, L, counts)
    assert sweep["elapsed"] < 600.0
    report(3, "six solutions per cell", f"20 fields x 3 L, sweep {sweep['elapsed']:.0f} s")


def test_criterion_4_scale_law(sweep):
    sc = SolverConfig()
    worst = {L: 0.0 for L in L_VALUES}
    for seed in SEEDS:
        for L in L_VALUES:
            records, td = sweep[(seed, L)]
            cutoff = sc.K * L**sc.alpha
            for r in records:
                assert r.gluing.scale <= cutoff * (1 + 1e-12)
                y_i_sq = float(np.sum(r.gluing.center[1:] ** 2))
                ratio = r.gluing.scale / ((L**2 + y_i_sq) * np.sqrt(td.s_p))
                worst[L] = max(worst[L], abs(ratio - 1.0))
    assert worst[0.05] <= 0.25 and worst[0.05] >= -0.2  # ratio within [0.8, 1.25]
    assert worst[0.05] < worst[0.1] < worst[0.2]
    report(4, "small-bubble scale law", f"max |ratio-1| {worst[0.2]:.3f} -> {worst[0.1]:.3f} -> {worst[0.05]:.3f}")


def test_criterion_5_orientation(fields, sweep):
    for seed in SEEDS:
        for L in L_VALUES:
            records, _ = sweep[(seed, L)]
            signs = {r.sign for r in records}
            assert signs == {1}, (seed, L, signs)
    field, cfg, rec = reference_case(0.1)
    assert orientation_sign(field, cfg, rec) == 1
    report(5, "uniform positive orientation", "all signs +1 incl. reference configuration")


def test_criterion_6_oracle_completeness(fields, sweep):
    for seed, L in ORACLE_CELLS:
        cfg = TwoPointConfig(L)
        structured, _ = sweep[(seed, L)]
        oracle = oracle_enumerate(
            fields[seed], cfg, SolverConfig(), n_starts=10_000,
            rng=np.random.default_rng((777, seed)),
        )
        diffs = compare_solution_sets(structured, oracle, tol=1e-6)
        assert not diffs, (seed, L, diffs)
    report(6, "oracle completeness", f"{len(ORACLE_CELLS)} cells, 10^4 starts, identical sets")


def test_criterion_7_direction_ratio_asymptotics():
    cfg = TwoPointConfig(0.1)
    rng = np.random.default_rng(7)
    ratios = (1e-1, 1e-2, 1e-3)
    slopes = []
    for _ in range(20):
        d = rng.standard_normal(3)
        d /= np.linalg.norm(d)
        near = []
        far = []
        for rho in ratios:
            y_near = np.concatenate([[0.0], d * rho * cfg.L])
            g = direction_ratio(cfg, y_near)
            near.append(float(np.linalg.norm(g - np.concatenate([[-1.0], -2.0 * y_near[1:] / cfg.L]))))
            y_far = np.concatenate([[0.0], d * cfg.L / rho])
            g = direction_ratio(cfg, y_far)
            far.append(
                float(np.linalg.norm(g - np.concatenate([[1.0], -2.0 * cfg.L * y_far[1:] / float(y_far[1:] @ y_far[1:])])))
            )
        for rem in (near, far):
            slopes.append(float(np.polyfit(np.log(ratios), np.log(rem), 1)[0]))
    assert all(abs(s - 2.0) <= 0.1 for s in slopes)
    report(7, "direction-ratio asymptotics", f"slopes within {max(abs(s - 2.0) for s in slopes):.3f} of 2")


def test_criterion_8_magnitude_root_structure():
    s = 1.0
    L = 0.05
    cfg = TwoPointConfig(L)
    threshold_sq = 0.25 / s - L**2  # |y_I|^2 at the double root
    below = np.array([np.sqrt(threshold_sq * (1 - 1e-6)), 0, 0])
    above = np.array([np.sqrt(threshold_sq * (1 + 1e-6)), 0, 0])
    at = np.array([np.sqrt(threshold_sq * (1 - 1e-11)), 0, 0])
    assert len(solve_magnitude(cfg, s, s, below)) == 2
    assert len(solve_magnitude(cfg, s, s, above)) == 0
    merged = solve_magnitude(cfg, s, s, at)
    assert len(merged) == 1  # normalized discriminant within 1e-9 of zero
    rng = np.random.default_rng(8)
    for _ in range(500):
        sv = float(rng.uniform(0.1, 4.0))
        y_i = rng.uniform(-1.5, 1.5, 3)
        n_roots = len(solve_magnitude(cfg, sv, sv, y_i))
        inside = L**2 + float(y_i @ y_i) < 0.25 / sv
        disc_margin = abs(L**2 + float(y_i @ y_i) - 0.25 / sv) * 4.0 * sv
        if disc_margin > 1e-8:
            assert n_roots == (2 if inside else 0)
    report(8, "magnitude root structure", "two roots inside, none outside, merged at threshold")


def test_criterion_9_out_of_scope_not_exposed():
    # global topological pairings (boundary-integral values, homology
    # multiplicities) need data this artifact deliberately does not model:
    # everything here is pointwise curvature algebra plus local counting
    exposed = {name.lower() for name in dir(gluecount)}
    for module in ("linalg3", "rotations", "rank_one", "instanton", "background", "solver", "cli"):
        exposed |= {name.lower() for name in dir(getattr(gluecount, module))}
    forbidden = ("de_rham", "derham", "simple_type", "moduli", "homology", "intersection_pairing")
    offenders = [n for n in exposed if any(f in n for f in forbidden)]
    assert not offenders, offenders
    report(9, "out-of-scope surfaces absent", "no global-invariant API exposed")
