import numpy as np
import pytest

from fracmax import (Exponent, ValidationError, a_infty_diagnostics, apq_constant,
                     apq_dyadic_constant, build_grid, conjugate, derived_measures,
                     dual_constants, enumerate_balls, extremal_test_functions,
                     luxemburg_norm, specialized_constants)
from fracmax.generators import (eta_shift, line_space, log_holder_exponent,
                                power_weight, random_metric_space)
from fracmax.norms import luxemburg_norm_rows
from tests.conftest import corpus_cases


def test_unit_weight_constant_exponents(two_point, three_line):
    p2 = Exponent.constant(2.0, 2)
    assert apq_constant(two_point, p2, p2, np.ones(2)).value == pytest.approx(1.0, abs=1e-11)
    p = Exponent.constant(2.0, 3)
    q = Exponent.constant(4.0, 3)
    assert apq_constant(three_line, p, q, np.ones(3)).value == pytest.approx(1.0, abs=1e-11)


def test_two_point_worked_value(two_point):
    # 3 balls; the full ball attains (1/2) * sqrt(5) * sqrt(5/4) = 5/4
    p2 = Exponent.constant(2.0, 2)
    res = apq_constant(two_point, p2, p2, np.array([1.0, 2.0]))
    assert res.value == pytest.approx(1.25, rel=1e-10)
    assert set(res.witness.members) == {0, 1}


def test_unit_weight_finite_for_log_holder_families():
    for n in (16, 32):
        sp = line_space(n)
        p = log_holder_exponent(sp, 2.0, 0.6, 0)
        q = eta_shift(p, 0.2)
        val = apq_constant(sp, p, q, np.ones(n)).value
        assert np.isfinite(val) and val >= 1.0 - 1e-9


def test_duality_exact(two_point):
    p2 = Exponent.constant(2.0, 2)
    a, b = dual_constants(two_point, p2, p2, np.array([1.0, 2.0]))
    assert a == pytest.approx(1.25, rel=1e-10)
    assert a == pytest.approx(b, rel=1e-9)


def test_duality_random_cases():
    for space, p, q, w, eta in corpus_cases(seed=21, n_cases=8):
        a, b = dual_constants(space, p, q, w)
        assert a == pytest.approx(b, rel=1e-9)


def test_dyadic_constant_bounded_by_cover_chain():
    # cube products are controlled by the ball constant through the outer-ball
    # mass overhead of the grid
    for space, p, q, w, eta in corpus_cases(seed=22, n_cases=6):
        grid = build_grid(space, 2.0, seed=1)
        ball_c = apq_constant(space, p, q, w).value
        dy = apq_dyadic_constant(grid, p, q, w).value
        overhead = 1.0
        for cube in grid.cubes:
            from fracmax.spaces import ball as mk_ball
            outer = mk_ball(space, cube.center,
                            grid.c_d * grid.scale(cube.gen) * (1 + 1e-9))
            mu_q = space.mass[cube.members].sum()
            overhead = max(overhead, outer.measure / mu_q)
        assert dy <= overhead ** (1.0 - eta) * ball_c * (1 + 1e-9)


def test_dyadic_constant_trivial_cases(two_point):
    p2 = Exponent.constant(2.0, 2)
    g = build_grid(two_point, 2.0, seed=0)
    assert apq_dyadic_constant(g, p2, p2, np.ones(2)).value == pytest.approx(1.0, abs=1e-11)
    sp1 = line_space(1)
    g1 = build_grid(sp1)
    assert apq_dyadic_constant(g1, Exponent.constant(2.0, 1), Exponent.constant(2.0, 1),
                               np.ones(1)).value == pytest.approx(1.0, abs=1e-11)


def test_aligned_grid_unit_weight(line8):
    g = build_grid(line8, 2.0, seed=7)
    p2 = Exponent.constant(2.0, 8)
    assert apq_dyadic_constant(g, p2, p2, np.ones(8)).value == pytest.approx(1.0, abs=1e-11)


def test_specialized_constants_match_closed_forms(three_line):
    p2 = Exponent.constant(2.0, 3)
    out = specialized_constants(three_line, p2, p2, np.ones(3))
    assert out["apq"] == pytest.approx(1.0, abs=1e-11)
    assert out["classical_apq"] == pytest.approx(1.0, abs=1e-12)
    assert out["classical_ap_of_power_measure"] == pytest.approx(1.0, abs=1e-12)
    rng = np.random.default_rng(4)
    w = rng.uniform(0.5, 2.0, 3)
    p, q = Exponent.constant(2.0, 3), Exponent.constant(4.0, 3)
    out = specialized_constants(three_line, p, q, w)
    assert out["apq"] == pytest.approx(out["classical_apq"], rel=1e-9)


def test_embedding_with_fitted_constant():
    # self-pair constants embed into the fractional constant up to a
    # generalized-Holder allowance of 8
    for space, p, q, w, eta in corpus_cases(seed=23, n_cases=8):
        out = specialized_constants(space, p, q, w)
        assert out["a_q_self"] <= 8.0 * out["apq"] * (1 + 1e-9)
        assert out["a_pprime_dual_self"] <= 8.0 * out["apq"] * (1 + 1e-9)


def test_derived_measures(two_point):
    p2, q2 = Exponent.constant(2.0, 2), Exponent.constant(2.0, 2)
    rec = derived_measures(two_point, p2, q2, np.ones(2))
    assert rec.W_atoms == pytest.approx(two_point.mass)
    assert rec.sigma_atoms == pytest.approx(two_point.mass)
    rec = derived_measures(two_point, p2, q2, np.array([1.0, 2.0]))
    assert rec.W_atoms == pytest.approx([1.0, 4.0])
    assert rec.sigma_atoms == pytest.approx([1.0, 0.25])
    # p == 1 switches sigma to the reciprocal-weight convention
    p1 = Exponent.constant(1.0, 2)
    rec = derived_measures(two_point, p1, p1, np.array([2.0, 4.0]))
    assert rec.sigma_atoms == pytest.approx([0.5, 0.25])


def test_derived_measures_overflow_guard(two_point):
    p = Exponent.constant(1.001, 2)  # conjugate exponent ~1001
    with pytest.raises(ValidationError, match="atom"):
        derived_measures(two_point, p, p, np.array([1e-300, 1.0]))


def test_a_infty_identity_measure(three_line):
    rep = a_infty_diagnostics(three_line, three_line.mass)
    assert rep.delta == 1.0 and rep.epsilon == 1.0
    assert rep.c1 == pytest.approx(1.0)
    assert rep.c2 == pytest.approx(1.0)


def test_a_infty_single_point():
    sp = line_space(1)
    rep = a_infty_diagnostics(sp, sp.mass * 3.0)
    assert rep.c1 == pytest.approx(1.0) and rep.c2 == pytest.approx(1.0)
    assert rep.doubling_of_weight == 1.0


def test_a_infty_two_point_exhaustive(two_point):
    p2 = Exponent.constant(2.0, 2)
    rec = derived_measures(two_point, p2, p2, np.array([1.0, 2.0]))
    rep = a_infty_diagnostics(two_point, rec.W_atoms)
    assert rep.finite


def test_w_and_sigma_in_a_infty_for_corpus():
    for space, p, q, w, eta in corpus_cases(seed=24, n_cases=8):
        if not np.isfinite(apq_constant(space, p, q, w).value):
            continue
        rec = derived_measures(space, p, q, w)
        assert a_infty_diagnostics(space, rec.W_atoms).finite
        assert a_infty_diagnostics(space, rec.sigma_atoms).finite


def test_subset_norm_bound_constant_sixteen():
    rng = np.random.default_rng(31)
    for space, p, q, w, eta in corpus_cases(seed=25, n_cases=6):
        apq = apq_constant(space, p, q, w)
        for b in enumerate_balls(space)[:12]:
            members = np.asarray(b.members)
            row_b = np.zeros((1, space.n))
            row_b[0, members] = w[members]
            nb = luxemburg_norm_rows(space, q, row_b)[0]
            for _ in range(4):
                pick = rng.random(len(members)) < 0.5
                if not pick.any():
                    continue
                sub = members[pick]
                row_e = np.zeros((1, space.n))
                row_e[0, sub] = w[sub]
                ne = luxemburg_norm_rows(space, q, row_e)[0]
                lhs = (space.mass[sub].sum() / b.measure) ** (1.0 - eta)
                assert lhs <= 16.0 * apq.value * ne / nb * (1 + 1e-9)


def test_subset_ratio_power_bound_stable():
    # (mu(E)/mu(B))^(1-eta) <= C * (W(E)/W(B))^(1/q_plus), fitted C stable
    rng = np.random.default_rng(33)
    fits = []
    for n in (16, 32, 64):
        sp = line_space(n)
        p = log_holder_exponent(sp, 2.0, 0.5, 0)
        q = eta_shift(p, 0.2)
        w = power_weight(sp, 0.2)
        rec = derived_measures(sp, p, q, w)
        worst = 0.0
        for b in enumerate_balls(sp)[::3]:
            members = np.asarray(b.members)
            w_b = rec.W_atoms[members].sum()
            for _ in range(6):
                pick = rng.random(len(members)) < 0.5
                if not pick.any():
                    continue
                lhs = (sp.mass[members[pick]].sum() / b.measure) ** 0.8
                rhs = (rec.W_atoms[members[pick]].sum() / w_b) ** (1.0 / q.p_plus)
                worst = max(worst, lhs / rhs)
        fits.append(worst)
    assert all(np.isfinite(fits))
    assert max(fits) / min(fits) < 2.0


def test_norm_vs_w_bridge_for_large_balls():
    # balls with ||w chi_B|| >= 1: the norm is comparable to W(B)^(1/q_inf)
    fits = []
    for n in (16, 32, 64):
        sp = line_space(n)
        p = log_holder_exponent(sp, 2.0, 0.4, 0)
        q = eta_shift(p, 0.1)
        w = 1.0 + power_weight(sp, 0.3)
        rec = derived_measures(sp, p, q, w)
        worst = 1.0
        for b in enumerate_balls(sp):
            members = np.asarray(b.members)
            row = np.zeros((1, n))
            row[0, members] = w[members]
            nb = luxemburg_norm_rows(sp, q, row)[0]
            if nb < 1.0:
                continue
            bridge = rec.W_atoms[members].sum() ** (1.0 / q.p_inf)
            worst = max(worst, nb / bridge, bridge / nb)
        fits.append(worst)
    assert max(fits) / min(fits) < 2.0


def test_exponent_oscillation_sups_stable():
    # sup over balls of mu(B)^(p_-(B)-p_+(B)) and of the norm analogue stay
    # bounded across refinements for log-Holder families
    mu_sups, norm_sups = [], []
    for n in (32, 64, 128):
        sp = line_space(n)
        p = log_holder_exponent(sp, 2.0, 0.5, 0)
        w = power_weight(sp, 0.2)
        worst_mu, worst_norm = 0.0, 0.0
        balls = enumerate_balls(sp)
        rows = np.zeros((len(balls), n))
        for i, b in enumerate(balls):
            rows[i, np.asarray(b.members)] = w[np.asarray(b.members)]
        norms = luxemburg_norm_rows(sp, p, rows)
        for i, b in enumerate(balls):
            pmin, pmax = p.values[np.asarray(b.members)].min(), p.values[np.asarray(b.members)].max()
            worst_mu = max(worst_mu, b.measure ** (pmin - pmax))
            worst_norm = max(worst_norm, norms[i] ** (pmin - pmax))
        mu_sups.append(worst_mu)
        norm_sups.append(worst_norm)
    assert max(mu_sups) / min(mu_sups) < 2.0
    assert max(norm_sups) / min(norm_sups) < 2.0


def test_extremal_functions_shapes(two_point):
    p2 = Exponent.constant(2.0, 2)
    w = np.array([1.0, 2.0])
    from fracmax.spaces import ball as mk_ball
    b = mk_ball(two_point, 0, 2.0)
    fam = extremal_test_functions(two_point, p2, w, b)
    names = {tf.name for tf in fam}
    assert "indicator_ball" in names
    ext = [tf for tf in fam if tf.name.startswith("extremal")][0]
    lam = np.sqrt(15.0) / 2.0  # scalar solve of (1 + 1/4)/t^2 = 1/3
    assert ext.values == pytest.approx([1.0 / lam, 0.25 / lam], rel=1e-9)
    # unit weight, constant exponent: extremal is proportional to the indicator
    fam1 = extremal_test_functions(two_point, p2, np.ones(2), b)
    ext1 = [tf for tf in fam1 if tf.name.startswith("extremal")][0]
    assert ext1.values[0] == pytest.approx(ext1.values[1], rel=1e-12)
    with pytest.raises(ValidationError, match="nonempty"):
        extremal_test_functions(two_point, p2, w, mk_ball(two_point, 0, 0.0))
