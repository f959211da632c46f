"""Unit tests for analysis module."""

import numpy as np

from wtv1d import analysis, core, wtv

import pytest


STEP = {'jumps': [0.0], 'values': [-1, 1]}


def ramp(n):
    return core.sample(core.make_grid(-1, 1, n), '2*x')


def solved_ramp(n=256):
    f = ramp(n)
    alpha = core.realize_weight(core.AbsValue(0.2, 0.3), f.grid)
    return f, alpha, wtv.solve_wtv(f, alpha)


def test_certificate_passes():
    """A solver output should pass with and without its dual."""
    f, alpha, solution = solved_ramp()
    report = analysis.verify_kkt(f, solution.u, alpha)
    assert report.passed
    assert report.jump_edges > 0
    assert report.box_location == -1
    assert analysis.verify_kkt(f, solution.u, alpha, v=solution.v).passed
    assert report.to_dict()['passed']
    assert set(report.to_dict()['residuals']) == \
        {'boundary', 'linkage', 'box', 'sign'}


def test_certificate_nearly_constant():
    """Tiny wiggles on a flat solution should not trigger the sign condition."""
    grid = core.make_grid(-1, 1, 64)
    f = core.sample(grid, '2*x + 0.3')
    alpha = core.realize_weight(core.Scalar(3.0), grid)
    wiggle = 1e-9 * (-1.0) ** np.arange(grid.n)
    u = core.Signal(grid, f.values.mean() + wiggle)
    report = analysis.verify_kkt(f, u, alpha)
    assert report.jump_edges == 0
    assert report.sign_violation == 0.0
    assert report.passed


def test_certificate_rejects_perturbation():
    """Moving one cell should break the boundary condition."""
    f, alpha, solution = solved_ramp()
    values = solution.u.values.copy()
    values[40] += 0.01
    report = analysis.verify_kkt(f, core.Signal(f.grid, values), alpha)
    assert not report.passed
    assert not report.verdicts['boundary']


def test_certificate_sign_failure():
    """u = f keeps v at zero, which misses -alpha at the jump."""
    grid = core.make_grid(-1, 1, 8)
    f = core.sample(grid, STEP)
    alpha = core.realize_weight(core.Scalar(0.1), grid)
    report = analysis.verify_kkt(f, f, alpha)
    assert report.verdicts == {'boundary': True, 'linkage': True,
                               'box': True, 'sign': False}
    assert report.sign_location == 3
    assert report.sign_violation == pytest.approx(0.1)
    assert report.worst()[0] == 'sign'


def test_certificate_invalid():
    """Should reject a dual of the wrong size and unknown modes."""
    f, alpha, solution = solved_ramp(16)
    with pytest.raises(ValueError):
        analysis.verify_kkt(f, solution.u, alpha, v=np.zeros(16))
    with pytest.raises(ValueError):
        analysis.verify_kkt(f, solution.u, alpha, mode='l1')


def test_build_certificate():
    """The rebuilt certificate should vanish at both ends at an optimum."""
    f, alpha, solution = solved_ramp()
    v = analysis.build_certificate(f, solution.u, alpha)
    assert v.shape == (f.grid.n + 1,)
    assert v[0] == 0.0
    assert abs(v[-1]) <= analysis.default_tolerances(f, alpha).boundary


def test_tv_and_maximum_principle():
    """Doubling the data should violate both bounds."""
    f = ramp(32)
    doubled = f * 2.0
    assert analysis.tv_bound_check(f, f).holds
    assert not analysis.tv_bound_check(f, doubled).holds
    assert analysis.maximum_principle_check(f, f * 0.5).holds
    assert not analysis.maximum_principle_check(f, doubled).holds


def step_case(n=64, value=0.25):
    grid = core.make_grid(-1, 1, n)
    f = core.sample(grid, STEP)
    spec = core.Scalar(value)
    return analysis.CorpusCase(f, spec, core.realize_weight(spec, grid))


def test_jump_estimates_report():
    """The shrunk step should respect the bound and the direction of f."""
    case = step_case()
    u = wtv.solve_wtv(case.f, case.alpha).u
    table = analysis.jump_estimates_report(case.f, u, case.alpha)
    assert len(table) == case.f.grid.n - 1
    assert list(table.columns[:3]) == ['edge', 'x', 'du']
    assert table['direction_checked'].sum() == 1
    assert analysis.jump_estimates_hold(table)
    reversed_u = core.Signal(u.grid, -u.values)
    assert not analysis.jump_estimates_hold(
        analysis.jump_estimates_report(case.f, reversed_u, case.alpha))


def test_property_suite_on_step():
    """Every check should pass on a shrunk step."""
    verdict = analysis.run_property_suite([step_case(), step_case(value=0.5)])
    assert verdict['cases'] == 2
    assert verdict['passed']
    assert set(verdict['properties']) == set(analysis.SUITE_CHECKS)
    assert all(entry['checked'] == 2 for entry in verdict['properties'].values())


def test_monotone_run_profile():
    """Above f, u should fall then rise; a tent does the opposite."""
    grid = core.make_grid(-1, 1, 8)
    zero = core.Signal(grid, np.zeros(8))
    valley = core.Signal(grid, [3, 2, 1, 0.5, 0.5, 1, 2, 3])
    profile = analysis.monotone_run_profile(zero, valley)
    assert profile.holds
    assert profile.runs == (analysis.Run('above', 0, 8, 1, True),)
    tent = core.Signal(grid, [0, 1, 2, 3, 3, 2, 1, 0])
    profile = analysis.monotone_run_profile(zero, tent)
    assert not profile.holds
    assert profile.runs[0].start == 1 and profile.runs[0].stop == 7


def test_large_gradient_plateau_check():
    """A jump where alpha towers over its neighbours should be reported."""
    f = ramp(8)
    alpha = core.realize_weight(
        core.Sampled((0.1, 0.1, 0.1, 5.0, 0.1, 0.1, 0.1)), f.grid)
    step = core.sample(f.grid, STEP)
    report = analysis.large_gradient_plateau_check(f, step, alpha)
    assert report.checked == 1
    assert report.violations == ((3, 0.0, 2.0),)
    flat = core.Signal(f.grid, np.zeros(8))
    assert analysis.large_gradient_plateau_check(f, flat, alpha).holds


def test_boundary_plateau_check():
    """A large weight at the ends should forbid jumps next to them."""
    f = ramp(8)
    alpha = core.realize_weight(core.Scalar(1.0), f.grid)
    report = analysis.boundary_plateau_check(f, f, alpha)
    assert report.checked == 2
    assert [item[0] for item in report.violations] == [0, 6]
    small = core.realize_weight(core.Scalar(0.1), f.grid)
    assert analysis.boundary_plateau_check(f, f, small).checked == 0


def test_negative_kink_plateau_check():
    """A downward kink larger than the data jump should forbid a jump."""
    f = ramp(8)
    alpha = core.realize_weight(
        core.PiecewiseAffine((-1, 0, 1), (0, 1, 0)), f.grid)
    assert alpha.dprime()[3] == pytest.approx(-2.0)
    step = core.sample(f.grid, STEP)
    report = analysis.negative_kink_plateau_check(f, step, alpha)
    assert report.checked == 1
    assert report.violations[0][0] == 3
    sampled = core.realize_weight(core.Sampled((1.0,) * 7), f.grid)
    assert analysis.negative_kink_plateau_check(f, step, sampled) == \
        core.EdgeReport(0)


def test_random_corpus_reproducible():
    """The same seed should give the same corpus, weights in [0, 2 range(f)]."""
    grid = core.make_grid(-1, 1, 128)
    first = analysis.random_corpus(np.random.default_rng(3), grid, 5)
    second = analysis.random_corpus(np.random.default_rng(3), grid, 5)
    assert len(first) == 5
    for a, b in zip(first, second):
        assert np.array_equal(a.f.values, b.f.values)
        assert a.spec == b.spec
        top = 2 * (a.f.values.max() - a.f.values.min())
        assert a.alpha.edge_values.min() >= 0
        assert a.alpha.edge_values.max() <= top + 1e-12


def test_smallest_flattening_scalar():
    """A unit step on (-1, 1) flattens at alpha = 1."""
    f = core.sample(core.make_grid(-1, 1, 64), STEP)
    assert analysis.smallest_flattening_scalar(f, 1) == \
        pytest.approx(1.0, abs=1e-6)
    assert analysis.smallest_flattening_scalar(f, 2) == 0.0
    with pytest.raises(ValueError):
        analysis.smallest_flattening_scalar(f, 0)


def test_pc_exact_recovery():
    """Tent weights should recover the step exactly; a scalar loses contrast."""
    result = analysis.pc_exact_recovery(STEP, '0.3*sin(2*pi*x)', [0.0],
                                        compare_scalar=True)
    scale = 1 + np.abs(result.f.values).max()
    assert result.error <= 1e-6 * scale
    assert result.solution.converged
    assert result.scalar_alpha > 0
    assert result.contrast_loss > 0


def test_pc_exact_recovery_invalid():
    """Should reject jumps off the edges and noise with nonzero mean."""
    with pytest.raises(ValueError):
        analysis.pc_exact_recovery(STEP, '0*x', [0.0001])
    with pytest.raises(ValueError):
        analysis.pc_exact_recovery(STEP, '0.1 + 0*x', [0.0])
    with pytest.raises(ValueError):
        analysis.monotone_recovery_weight([(-1, 0), (0, 1)], 1.0, skew=1.0)


def test_semigroup_reports():
    """The weighted-first order should pass and the counterexample separate."""
    f = ramp(256)
    alpha = core.realize_weight(core.AbsValue(0.2, 0.3), f.grid)
    assert analysis.semigroup_report(f, alpha, 0.2)['passed']
    report = analysis.noncommuting_report()
    assert report['order'] == 'scalar-first'
    assert report['passed']


def test_spike_pair_separates():
    """Two spiked weights with a constant sum should not compose."""
    f, alpha1, alpha2 = analysis.spike_semigroup_pair(512)
    total = core.add_weights(alpha1, alpha2).edge_values
    assert np.allclose(total, total[0], rtol=0, atol=1e-12)
    result = wtv.semigroup_compose(f, alpha1, alpha2)
    assert np.abs(result.one_shot.u.values).max() <= 1e-9
    center = f.grid.nearest_edge(0.0)
    assert core.edge_differences(result.intermediate.u)[center] > 1.0
    assert abs(result.two_step.u.values[center]) <= 1e-9
    assert result.distance > 0.5
    report = analysis.spike_pair_report(512)
    assert report['passed']


def test_unknown_spike_kind():
    """Should reject spike kinds other than up and down."""
    with pytest.raises(ValueError):
        analysis.spike_fixture('sideways')
    with pytest.raises(ValueError):
        analysis.table1_fixtures(100)


if __name__ == '__main__':
    pytest.main()
