"""Acceptance gate: every criterion at its stated tolerance, one line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
PASS lines with runtimes.
"""

import json
import time

import numpy as np
import pytest
from scipy.optimize import brentq

import fracmax as fm
from fracmax import (Exponent, apq_constant, build_grid, build_grid_family, conjugate,
                     cz_constant, cz_decompose, cz_stack, cz_verify,
                     derived_measures, dual_constants, dyadic_fractional_maximal,
                     fractional_maximal, luxemburg_norm, modular, verify_grid,
                     weighted_dyadic_maximal)
from fracmax.cli import main
from fracmax.experiments import ExperimentConfig, growth_factors, run_necessity, run_strong
from fracmax.generators import (cantor_space, eta_shift, line_space,
                                log_holder_exponent, power_weight,
                                random_metric_space)
from fracmax.norms import luxemburg_norm_rows
from fracmax.spaces import ball_system
from fracmax.weights import a_infty_diagnostics


def report(name, elapsed, budget, detail=""):
    print(f"[PASS] {name}: {elapsed:.1f}s (budget {budget:.0f}s) {detail}")
    assert elapsed < budget


def small_pool(seed):
    return [line_space(12), line_space(24), cantor_space(4),
            random_metric_space(10, seed=seed), random_metric_space(16, seed=seed + 1),
            line_space(64)]


def test_criterion_1_exact_constant_lemmas():
    t0 = time.time()
    rng = np.random.default_rng(101)
    pool = small_pool(7)

    holder_checked = 0
    while holder_checked < 1000:
        space = pool[holder_checked % len(pool)]
        n = space.n
        p = Exponent(rng.uniform(1.0, 3.5, n)) if holder_checked % 3 else \
            Exponent.constant(float(rng.uniform(1.0, 3.0)), n)
        pc = conjugate(p)
        rows = rng.random((25, n)) * rng.uniform(0.1, 10.0)
        f_norms = luxemburg_norm_rows(space, p, rows[:13])
        g_norms = luxemburg_norm_rows(space, pc, rows[12:])
        for i in range(12):
            f, g = rows[i], rows[13 + i]
            lhs = float((np.abs(f * g) * space.mass).sum())
            assert lhs <= 4.0 * f_norms[i] * g_norms[1 + i] * (1 + 1e-9), \
                "generalized Holder bound with constant 4 violated"
            holder_checked += 1

    subset_checked = 0
    configs = 0
    while subset_checked < 1000:
        space = pool[configs % 4]  # keep it at n <= 24 for the ball sweep
        n = space.n
        configs += 1
        p = Exponent(rng.uniform(1.2, 3.0, n))
        eta = float(rng.uniform(0.0, 0.8 / p.p_plus))
        q = eta_shift(p, eta)
        w = rng.uniform(0.3, 3.0, n)
        res = apq_constant(space, p, q, w)
        sys = ball_system(space)
        order = rng.permutation(len(sys.balls))
        for bi in order[:10]:
            b = sys.balls[bi]
            members = np.asarray(b.members)
            row_b = np.zeros((1, n))
            row_b[0, members] = w[members]
            nb = luxemburg_norm_rows(space, q, row_b)[0]
            for _ in range(4):
                pick = rng.random(len(members)) < 0.5
                if not pick.any():
                    continue
                sub = members[pick]
                row_e = np.zeros((1, n))
                row_e[0, sub] = w[sub]
                ne = luxemburg_norm_rows(space, q, row_e)[0]
                lhs = (space.mass[sub].sum() / b.measure) ** (1.0 - eta)
                assert lhs <= 16.0 * res.value * ne / nb * (1 + 1e-9), \
                    "subset norm bound with constant 16 violated"
                subset_checked += 1
    report("criterion 1 (Holder x4, subset x16)", time.time() - t0, 60,
           f"{holder_checked}+{subset_checked} cases")


def test_criterion_2_luxemburg_oracles():
    t0 = time.time()
    rng = np.random.default_rng(202)
    pool = small_pool(9)

    checked = 0
    while checked < 1000:
        space = pool[checked % len(pool)]
        n = space.n
        pc = float(rng.uniform(1.0, 4.0))
        p = Exponent.constant(pc, n)
        rows = rng.random((20, n)) * rng.uniform(0.05, 20.0)
        norms = luxemburg_norm_rows(space, p, rows)
        oracle = ((rows ** pc) @ space.mass) ** (1.0 / pc)
        assert np.abs(norms - oracle).max() <= 1e-9 * oracle.max(), \
            "constant-exponent closed form mismatch"
        checked += 20

    sp2 = fm.build_space([[0.0, 1.0], [1.0, 0.0]], [1.0, 1.0])
    p12 = Exponent(np.array([1.0, 2.0]))
    got = luxemburg_norm(sp2, p12, [1.0, 1.0])
    oracle = brentq(lambda t: 1.0 / t + 1.0 / t ** 2 - 1.0, 1.0, 4.0, xtol=1e-14)
    assert abs(got - oracle) <= 1e-10 * oracle, "independent root-finder mismatch"

    unit_checked = 0
    for k in range(300):
        space = pool[k % len(pool)]
        p = Exponent(rng.uniform(1.0, 3.5, space.n))
        f = rng.random(space.n) * rng.uniform(0.1, 10.0)
        norm = luxemburg_norm(space, p, f)
        assert abs(modular(space, p, f / norm) - 1.0) <= 1e-9, "unit-ball property"
        unit_checked += 1
    report("criterion 2 (Luxemburg oracles)", time.time() - t0, 10,
           f"{checked} closed-form + {unit_checked} unit-ball cases")


def test_criterion_3_grid_certification():
    t0 = time.time()
    for n in (8, 32, 64, 128):
        space = line_space(n)
        for seed in range(5):
            rep = verify_grid(build_grid(space, 2.0, seed=seed))
            assert rep.ok, (n, seed, rep.witnesses)
    report("criterion 3 (grid properties 1-5)", time.time() - t0, 30,
           "n in {8,32,64,128} x 5 seeds")


def test_criterion_4_cz_certificates():
    t0 = time.time()
    rng = np.random.default_rng(404)
    spaces = [line_space(32), line_space(128), cantor_space(5),
              random_metric_space(24, seed=11)]
    grids = [build_grid(sp, 2.0, seed=i) for i, sp in enumerate(spaces)]

    done = 0
    while done < 200:
        gi = done % len(grids)
        grid, sp = grids[gi], spaces[gi]
        f = rng.random(sp.n) * (rng.random(sp.n) < 0.5)
        sigma = 0.25 + rng.random(sp.n)
        eta = float(rng.uniform(0.0, 0.75))
        mx = weighted_dyadic_maximal(grid, eta, sigma, f).values.max()
        if mx <= 0:
            continue
        lam = float(mx) * float(rng.uniform(0.05, 0.95))
        rep = cz_verify(cz_decompose(grid, eta, sigma, f, lam))
        assert rep.ok, rep.witnesses
        done += 1

    stacks = 0
    while stacks < 50:
        gi = stacks % len(grids)
        grid, sp = grids[gi], spaces[gi]
        f = rng.random(sp.n) * (rng.random(sp.n) < 0.6)
        if not f.any():
            continue
        sigma = 0.25 + rng.random(sp.n)
        eta = float(rng.uniform(0.0, 0.6))
        st = cz_stack(grid, eta, sigma, f)  # a = 2 * C_cz by default
        assert st.a == pytest.approx(2.0 * st.c_cz)
        rep = cz_verify(st)
        assert rep.ok, rep.witnesses
        stacks += 1
    report("criterion 4 (CZ certificates)", time.time() - t0, 60,
           f"{done} decompositions + {stacks} stacks")


def brute_force_values(space, eta, f):
    v = np.abs(np.asarray(f, dtype=float)) * space.mass
    masks, seen = [], set()
    for c in range(space.n):
        for r in list(np.unique(space.dist[c])) + [2.0 * space.diameter() + 1.0]:
            mask = space.dist[c] < r
            if not mask.any():
                continue
            key = mask.tobytes()
            if key in seen:
                continue
            seen.add(key)
            masks.append(mask)
    masks = np.array(masks)
    vals = (masks.astype(np.float64) @ space.mass) ** (eta - 1.0) \
        * (masks.astype(np.float64) @ v)
    return np.where(masks, vals[:, None], -np.inf).max(axis=0)


def test_criterion_5_maximal_oracle_and_domination():
    t0 = time.time()
    rng = np.random.default_rng(505)
    spaces = [line_space(64), random_metric_space(48, seed=5), cantor_space(6)]
    done = 0
    while done < 100:
        sp = spaces[done % len(spaces)]
        eta = (0.0, 0.3, 0.6)[done % 3]
        f = rng.random(sp.n)
        got = fractional_maximal(sp, eta, f).values
        assert (got == brute_force_values(sp, eta, f)).all(), "oracle mismatch"
        done += 1

    for eta in (0.0, 0.25):
        lows, highs = [], []
        for n in (32, 64, 128):
            sp = line_space(n)
            fam = build_grid_family(sp, 6, seed=1)
            lo, hi = np.inf, 0.0
            for _ in range(8):
                f = rng.random(n)
                mball = fractional_maximal(sp, eta, f).values
                total = np.zeros(n)
                for g in fam:
                    total += dyadic_fractional_maximal(g, eta, f).values
                ratio = total / mball
                lo, hi = min(lo, ratio.min()), max(hi, ratio.max())
            assert np.isfinite(lo) and np.isfinite(hi) and lo > 0
            lows.append(lo)
            highs.append(hi / 6.0)
        assert max(lows) / min(lows) <= 2.0, "domination lower constant drifts"
        assert max(highs) / min(highs) <= 2.0, "domination upper constant drifts"
    report("criterion 5 (maximal oracle + domination)", time.time() - t0, 120,
           f"{done} exact matches")


def test_criterion_6_weight_identities():
    t0 = time.time()
    rng = np.random.default_rng(606)
    pool = [line_space(8), line_space(12), cantor_space(3),
            random_metric_space(8, seed=3), random_metric_space(12, seed=4)]

    for k in range(500):
        space = pool[k % len(pool)]
        n = space.n
        p = Exponent(rng.uniform(1.2, 3.0, n))
        eta = float(rng.uniform(0.0, 0.8 / p.p_plus))
        q = eta_shift(p, eta)
        w = rng.uniform(0.25, 4.0, n)
        a, b = dual_constants(space, p, q, w)
        assert abs(a - b) <= 1e-9 * max(a, b), "duality identity"

    # unit weight at constant exponents: product of exact powers of mu(B);
    # asserted at solver precision since the norm path is iterative by design
    for pc, qc in ((2.0, 2.0), (2.0, 4.0), (1.5, 3.0)):
        for space in pool[:3]:
            val = apq_constant(space, Exponent.constant(pc, space.n),
                               Exponent.constant(qc, space.n), np.ones(space.n)).value
            assert abs(val - 1.0) <= 1e-11, f"[1] constant for p={pc}, q={qc}"

    finite_checked = 0
    for k in range(30):
        space = pool[k % len(pool)]
        p = Exponent(rng.uniform(1.2, 2.6, space.n))
        eta = float(rng.uniform(0.0, 0.5 / p.p_plus))
        q = eta_shift(p, eta)
        w = np.exp(rng.uniform(-1.0, 1.0, space.n))
        if not np.isfinite(apq_constant(space, p, q, w).value):
            continue
        rec = derived_measures(space, p, q, w)
        assert a_infty_diagnostics(space, rec.W_atoms, seed=k).finite
        assert a_infty_diagnostics(space, rec.sigma_atoms, seed=k).finite
        finite_checked += 1
    report("criterion 6 (weight identities)", time.time() - t0, 120,
           f"500 duality + {finite_checked} diagnostics")


def test_criterion_7_theorem_reproduction():
    t0 = time.time()
    sizes = (32, 64, 128, 256)
    kw = dict(space_kind="line", sizes=sizes, seed=0, n_indicators=24, n_random=16)

    bounded_weights = [{"type": "constant"}, {"type": "power", "a": 0.2, "base_point": 0}]
    for spec in bounded_weights:
        rep = run_strong(ExperimentConfig(weight_spec=spec, **kw))
        ns = [r["n"] for r in rep["rows"]]
        for key in ("strong_ratio", "weak_ratio"):
            g = growth_factors(ns, [r[key] for r in rep["rows"]])
            assert max(g) < 1.5, (spec, key, g)

    failing = {"type": "power", "a": -1.2, "base_point": 0}
    rep = run_strong(ExperimentConfig(weight_spec=failing, **kw))
    ns = [r["n"] for r in rep["rows"]]
    for key in ("apq", "strong_ratio"):
        g = growth_factors(ns, [r[key] for r in rep["rows"]])
        assert min(g) >= 1.5, (key, g)

    for spec in bounded_weights:
        rep = run_necessity(ExperimentConfig(weight_spec=spec, **kw))
        cs = [r["c_nec"] for r in rep["rows"]]
        assert np.isfinite(cs).all()
        assert max(cs) / min(cs) <= 2.0, cs
    report("criterion 7 (strong/weak/necessity sweeps)", time.time() - t0, 600,
           f"sizes {sizes}")


def test_criterion_8_determinism(tmp_path):
    t0 = time.time()
    args = ["verify-all", "--sizes", "8,16", "--seed", "3", "--no-plot"]
    assert main([*args, "--out", str(tmp_path / "run1")]) == 0
    assert main([*args, "--out", str(tmp_path / "run2")]) == 0
    reports = []
    for d in ("run1", "run2"):
        payload = json.loads((tmp_path / d / "verify_all.json").read_text())
        payload.pop("timings")
        reports.append(json.dumps(payload, sort_keys=True).encode())
    assert reports[0] == reports[1], "verify-all reports differ byte for byte"
    csvs = [(tmp_path / d / "verify_all.csv").read_bytes() for d in ("run1", "run2")]
    assert csvs[0] == csvs[1]
    report("criterion 8 (determinism)", time.time() - t0, 120, "byte-identical")
