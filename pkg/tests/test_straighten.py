import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kobon.published import TAN_FORM, TAN_FORM_TRIANGLES, load_table, tan_form
from kobon.straighten import (
    F,
    LineSet,
    PenaltyConfig,
    S,
    align,
    crossing_params,
    fit,
    format_lines,
    geometric_orbit,
    geometric_triangles,
    induced_table,
    initial_guess,
    lineset_to_tan,
    parse_lines,
    reflect_lines,
    relabeled,
    shift_lines,
    tan_form_fit,
    tan_to_lineset,
    target,
    target_gradient,
    verify_fit,
)
from kobon.table import canonicalize, count_triangles, orbit, parse_table, reverse_all, validate

from conftest import optimal_tables


def random_lines(seed, n=None):
    rng = np.random.default_rng(seed)
    n = n or int(rng.integers(3, 9))
    a = -np.sort(rng.uniform(0.01, math.pi - 0.01, n))
    return LineSet(a, rng.uniform(-3, 3, n))


# F and S ------------------------------------------------------------------

def test_F_concurrent_at_origin():
    ls = LineSet([-0.3, -1.2, -2.5], [0, 0, 0])
    assert F(1, 2, 3, ls) == 0.0


@settings(max_examples=1000, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_F_symmetries(seed):
    ls = random_lines(seed)
    rng = np.random.default_rng(seed + 1)
    i, j, k = (int(x) + 1 for x in rng.choice(ls.n, 3, replace=False))
    f = F(i, j, k, ls)
    scale = max(1.0, abs(f))
    assert abs(F(j, k, i, ls) - f) <= 1e-12 * scale
    assert abs(F(k, i, j, ls) - f) <= 1e-12 * scale
    assert abs(F(i, k, j, ls) + f) <= 1e-12 * scale


def test_F_scales_with_offsets():
    ls = random_lines(7, 6)
    big = LineSet(ls.angles, 2.5 * ls.offsets)
    assert F(1, 3, 5, big) == pytest.approx(2.5 * F(1, 3, 5, ls), rel=1e-12)


def test_S_examples():
    assert S(1, 2, 3, 5) == 1.0
    assert S(2, 1, 3, 5) == -1.0
    assert S(3, 2, 1, 5) == 1.0


@pytest.mark.parametrize("seed", range(40))
def test_sign_predicts_crossing_order(seed):
    ls = random_lines(seed)
    n = ls.n
    for r in range(1, n + 1):
        t = crossing_params(ls, r)
        for l1 in range(1, n + 1):
            for l2 in range(1, n + 1):
                if len({r, l1, l2}) < 3:
                    continue
                after = t[l2 - 1] > t[l1 - 1]
                assert after == (S(r, l1, l2, n) * F(r, l1, l2, ls) < 0)


@pytest.mark.parametrize("seed", range(40))
def test_induced_table_of_random_lines_is_valid(seed):
    ls = random_lines(seed)
    t = induced_table(ls)
    assert validate(t).ok
    assert verify_fit(ls, t).passed
    assert len(geometric_triangles(ls)) == len(count_triangles(t))


def test_induced_table_is_stable_under_small_perturbation():
    ls = random_lines(3, 8)
    t = induced_table(ls)
    jiggle = LineSet(ls.angles + 1e-9, ls.offsets - 1e-9)
    assert canonicalize(induced_table(jiggle)) == canonicalize(t)


def test_three_generic_lines():
    ls = LineSet([-0.5, -1.6, -2.6], [0.3, -0.2, 0.1])
    t = induced_table(ls)
    assert canonicalize(t) == canonicalize(parse_table("[[3,2],[3,1],[2,1]]"))


def test_induced_parallels_and_groups():
    par = LineSet([-0.4, -0.4, -1.5, -2.4], [-0.5, 0.5, 0.1, 0.2])
    t = induced_table(par)
    assert not t.is_complete and validate(t, allow_parallel=True).ok
    assert 2 not in t.row(1)
    grp = LineSet([-0.2, -1.0, -1.8, -2.6], [1.0, 0.0, 0.0, 0.0])
    g = induced_table(grp)
    assert g.has_groups and validate(g).ok


def test_relabeled_is_noop_when_ordered():
    ls = random_lines(11)
    assert relabeled(ls) == ls


# initial guess and target --------------------------------------------------

def test_initial_guess_values():
    g = initial_guess(3)
    assert np.allclose(g.angles, [-math.pi / 6, -math.pi / 2, -5 * math.pi / 6])
    assert np.allclose(g.offsets, [-0.1, 0.1, -0.1])
    g5 = initial_guess(5)
    assert g5.angles[0] == pytest.approx(-math.pi / 10)
    assert g5.angles[4] == pytest.approx(-9 * math.pi / 10)
    for n in range(2, 30):
        assert np.all(np.diff(initial_guess(n).angles) < 0)


def test_target_of_initial_guess_positive(tables5):
    assert target(initial_guess(5), tables5[0]) > 0


def test_target_zero_on_margin_realization(tables5):
    res = fit(tables5[0])
    assert res.satisfied
    assert target(res.lines, tables5[0]) == 0.0


@pytest.mark.parametrize("seed", range(25))
def test_gradient_matches_finite_differences(seed):
    table = load_table("fig4_1") if seed % 2 else optimal_tables(9).tables[0]
    rng = np.random.default_rng(seed)
    n = table.n
    ls = LineSet(initial_guess(n).angles + rng.uniform(-0.05, 0.05, n), rng.uniform(-0.5, 0.5, n))
    cfg = PenaltyConfig()
    g = target_gradient(ls, table, cfg)
    x = ls.to_vector()
    h = 1e-6
    num = np.zeros_like(x)
    for k in range(len(x)):
        e = np.zeros_like(x)
        e[k] = h
        num[k] = (target(LineSet.from_vector(x + e), table, cfg)
                  - target(LineSet.from_vector(x - e), table, cfg)) / (2 * h)
    assert np.linalg.norm(num - g) <= 1e-5 * max(1.0, np.linalg.norm(g))


def test_target_nonnegative():
    table = load_table("fig4_2")
    for seed in range(20):
        ls = random_lines(seed, 13)
        assert target(ls, table) >= 0


# tan form ----------------------------------------------------------------

def test_tan_form_5_lines_match_table(tables5):
    ls = tan_to_lineset(*tan_form("A1"))
    rep = verify_fit(ls, tables5[0])
    assert rep.passed and rep.min_slack > 0
    assert rep.geometric_triangles == 5


def test_tan_form_9_lines():
    t9 = optimal_tables(9).tables[0]
    rep = verify_fit(tan_to_lineset(*tan_form("A3")), t9)
    assert rep.passed and rep.geometric_triangles == 21


@pytest.mark.parametrize("name", sorted(TAN_FORM))
def test_tan_form_triangle_counts(name):
    ls = tan_to_lineset(*tan_form(name))
    t = induced_table(ls)
    assert len(count_triangles(t)) == TAN_FORM_TRIANGLES[name]
    assert verify_fit(ls, t).passed


def test_tan_form_7_lines_up_to_relabeling():
    t7 = optimal_tables(7, (3, 6)).tables[0]
    ls = tan_to_lineset(*tan_form("A2"))
    assert induced_table(ls) == reverse_all(t7)
    assert verify_fit(align(ls, t7), t7).passed


def test_tan_roundtrip():
    m, c = tan_form("A4")
    delta = 0.1
    m2, c2 = lineset_to_tan(tan_to_lineset(m, c, delta), delta)
    assert np.allclose(m2, m, atol=1e-9)
    assert np.allclose(c2[1:], c[1:], atol=1e-9)


@pytest.mark.parametrize("name", ["A1", "A2", "A3"])
def test_tan_form_fit(name):
    m, c = tan_form(name)
    t = induced_table(tan_to_lineset(m, c))
    res = tan_form_fit(t, c)
    assert res.satisfied
    n = t.n
    m2, c2 = lineset_to_tan(res.lines, math.pi / (4 * n))
    assert np.allclose(c2[1:], c[1:], atol=1e-9)
    assert m2[0] == pytest.approx(0.0, abs=1e-12)
    assert np.all(np.sign(m2[1:]) == np.sign(m[1:]))


def test_tan_form_fit_rejects_bad_slots(tables5):
    with pytest.raises(ValueError):
        tan_form_fit(tables5[0], [0, 1, 1, 2, 3])
    with pytest.raises(ValueError):
        tan_form_fit(tables5[0], [1, 2, 3, 4, 5])


# verify -----------------------------------------------------------------

def test_perturbation_breaks_verification(tables5):
    ls = tan_to_lineset(*tan_form("A1"))
    c = np.array(ls.offsets)
    c[2] += 10
    rep = verify_fit(LineSet(ls.angles, c), tables5[0])
    assert not rep.passed and rep.violations


def test_verify_margin_threshold(tables5):
    ls = tan_to_lineset(*tan_form("A1"))
    rep = verify_fit(ls, tables5[0], eps=1e3)
    assert not rep.constraints_ok


# fitting ----------------------------------------------------------------

@pytest.mark.parametrize("n,L", [(3, ()), (5, ()), (7, (3, 6)), (9, ())])
def test_fit_small_optimal(n, L):
    table = optimal_tables(n, L).tables[0]
    res = fit(table)
    assert res.satisfied and res.restarts <= 20
    assert res.report.geometric_triangles == len(count_triangles(table))
    assert induced_table(res.lines) == table


@pytest.mark.parametrize("k", [1, 2, 3])
def test_fit_fig4(k):
    table = load_table(f"fig4_{k}")
    res = fit(table)
    assert res.satisfied and res.report.geometric_triangles == 47


def test_fit_margins_respect_config():
    table = load_table("fig4_1")
    cfg = PenaltyConfig(ineq_eps=0.01, ineq_max=5.0)
    res = fit(table, cfg)
    assert res.satisfied
    assert res.report.min_slack >= 0


def test_fit_parallel_and_group_tables():
    for name in ("fig1b", "fig1c"):
        t = load_table(name)
        res = fit(t)
        assert res.satisfied
        assert induced_table(res.lines, 1e-6) == t


def test_fit_rotation_tying_is_exact():
    table = optimal_tables(15, rot=5).tables[0]
    res = fit(table, PenaltyConfig(rot=5))
    assert res.satisfied
    ls = res.lines
    psi = math.pi * 4 / 5
    rot = relabeled(LineSet(ls.angles + psi, ls.offsets))
    assert np.allclose(rot.to_vector(), ls.to_vector(), atol=1e-12)
    assert np.all(-ls.angles[:3] <= math.pi / 5)


def test_fit_mirror_tying_is_exact():
    table = load_table("fig4_2")
    res = fit(table, PenaltyConfig(mirror=True))
    assert res.satisfied
    ls = res.lines
    ref = relabeled(LineSet(2 * ls.angles[0] - ls.angles, ls.offsets))
    assert np.allclose(ref.to_vector(), ls.to_vector(), atol=1e-12)


def test_fit_rejects_symmetry_with_parallels():
    with pytest.raises(ValueError):
        fit(load_table("fig1b"), PenaltyConfig(mirror=True))


def test_parallel_jobs_match_sequential():
    table = load_table("fig4_3")
    cfg = PenaltyConfig(restarts=3)
    a = fit(table, cfg)
    b = fit(table, cfg, jobs=2)
    assert a.satisfied and b.satisfied
    assert np.array_equal(a.lines.to_vector(), b.lines.to_vector())


def test_penalty_config_validation():
    with pytest.raises(ValueError):
        PenaltyConfig(ineq_eps=1.0, ineq_max=0.5)
    with pytest.raises(ValueError):
        PenaltyConfig(rot=4)
    lo, hi = PenaltyConfig().angle_bounds(8)
    assert lo == pytest.approx(math.pi / 32) and hi == pytest.approx(3 * math.pi / 8)


# relabeling geometry -------------------------------------------------------

def test_geometric_orbit_matches_table_orbit():
    ls = tan_to_lineset(*tan_form("A5"))
    base = induced_table(ls)
    forms = {t.rows for t in orbit(base)}
    got = set()
    for cand in geometric_orbit(ls):
        assert cand.ordered()
        got.add(induced_table(cand).rows)
    assert got == forms


def test_shift_and_reflect_generators():
    ls = random_lines(5, 7)
    cur = ls
    for _ in range(2 * ls.n):
        cur = shift_lines(cur)
    assert induced_table(cur) == induced_table(ls)
    assert induced_table(reflect_lines(reflect_lines(ls))) == induced_table(ls)


def test_align_published_5_lines_to_fig4():
    ls = tan_to_lineset(*tan_form("A5"))
    t = load_table("fig4_2")
    got = align(ls, t)
    assert got is not None and verify_fit(got, t).passed
    assert align(ls, load_table("fig4_1")) is None


def test_lines_text_roundtrip():
    ls = random_lines(2)
    assert parse_lines(format_lines(ls)) == ls
    assert np.array_equal(
        parse_lines(format_lines(ls)).to_vector(), ls.to_vector())
    with pytest.raises(ValueError):
        parse_lines("2 0.1 0.2\n")
