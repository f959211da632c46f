"""Unit tests for wfid module."""

import numpy as np

from wtv1d import analysis, core, wfid, wtv

import pytest


def ramp(n):
    return core.sample(core.make_grid(-1, 1, n), '2*x')


def constant_weight(grid, value):
    return core.realize_fidelity_weight(core.Scalar(value), grid)


def test_unit_weight_matches_wtv():
    """w = 1 should reproduce the weighted-TV solve with alpha = 1."""
    f = core.sample(core.make_grid(-1, 1, 256), 'sin(3*pi*x) + 2*x')
    fid = wfid.solve_wfid(f, constant_weight(f.grid, 1.0))
    reg = wtv.solve_wtv(f, core.realize_weight(core.Scalar(1.0), f.grid))
    assert fid.converged
    assert fid.floor_used == pytest.approx(1e-8)
    assert np.allclose(fid.u.values, reg.u.values, rtol=0, atol=1e-12)


def test_constant_weight_scaling():
    """w = s should act like alpha = 1 / s."""
    f = core.sample(core.make_grid(-1, 1, 256), 'sin(3*pi*x) + 2*x')
    fid = wfid.solve_wfid(f, constant_weight(f.grid, 4.0))
    reg = wtv.solve_wtv(f, core.realize_weight(core.Scalar(0.25), f.grid))
    assert np.allclose(fid.u.values, reg.u.values, rtol=0, atol=1e-9)
    assert fid.modulus == pytest.approx(4.0 * f.grid.h)


def test_floored_masses():
    """Cells with w = 0 should be raised to the floor."""
    grid = core.make_grid(-1, 1, 4)
    w = core.realize_fidelity_weight(core.Sampled((0.0, 2.0, 4.0, 0.0)), grid)
    mass, floor = wfid.floored_masses(w, floor_ratio=0.25)
    assert floor == 1.0
    assert mass.tolist() == [0.5, 1.0, 2.0, 0.5]
    with pytest.raises(ValueError):
        wfid.floored_masses(w, floor_ratio=0.0)
    zero = core.realize_fidelity_weight(core.Sampled((0.0,) * 4), grid)
    with pytest.raises(ValueError):
        wfid.floored_masses(zero)


def test_linkage_indexing():
    """Node j + 1 should follow node j by the mass of cell j times f_j - u_j."""
    f = core.sample(core.make_grid(-1, 1, 64), 'sin(3*pi*x) + 2*x')
    w = core.realize_fidelity_weight(core.AbsValue(1.0, 0.5), f.grid)
    solution = wfid.solve_wfid(f, w)
    mass = f.grid.h * w.cell_values
    residual = mass * (f.values - solution.u.values)
    assert solution.v[0] == 0.0 and solution.v[-1] == 0.0
    assert solution.v[1] == pytest.approx(residual[0], abs=1e-12)
    assert np.allclose(np.diff(solution.v), residual, rtol=0, atol=1e-12)


def test_weak_duality():
    """The dual value should bound the objective from below."""
    f = ramp(256)
    w = core.realize_fidelity_weight(core.AbsValue(4.0, 1.0), f.grid)
    solution = wfid.solve_wfid(f, w)
    primal = wfid.objective_wfid(f, w, solution.u)
    dual = wfid.dual_objective_wfid(f, w, solution.v)
    assert dual <= primal + 1e-12
    assert primal - dual <= 1e-9 * (1 + abs(primal))


def test_clamp_form():
    """f = 2x with w = 10 should be clamped symmetrically."""
    f = ramp(1024)
    solution = wfid.solve_wfid(f, constant_weight(f.grid, 10.0))
    form = wfid.clamp_form_check(solution.u, f)
    assert form.is_clamp
    assert form.x1 < 0 < form.x2
    plateau = 1 - 1 / np.sqrt(10)
    assert form.x2 == pytest.approx(plateau, abs=5 * f.grid.h)
    assert abs(form.x1 + form.x2) <= 10 * f.grid.h


def test_clamp_form_decreasing_data():
    """Decreasing data should be handled like increasing data."""
    f = core.sample(core.make_grid(-1, 1, 512), '-2*x')
    solution = wfid.solve_wfid(f, constant_weight(f.grid, 10.0))
    form = wfid.clamp_form_check(solution.u, f)
    assert form.is_clamp
    assert form.x1 < form.x2


def test_clamp_form_constant_solution():
    """Without contact both ends should meet at the crossing."""
    f = ramp(512)
    solution = wfid.solve_wfid(f, constant_weight(f.grid, 0.5))
    form = wfid.clamp_form_check(solution.u, f)
    assert form.is_clamp
    assert form.x1 == form.x2
    assert abs(form.x1) <= f.grid.h


def test_clamp_form_rejects():
    """Should flag non-clamp signals and reject non-monotone data."""
    f = ramp(16)
    bumpy = core.Signal(f.grid, np.where(np.arange(16) % 2, 1.0, -1.0))
    assert not wfid.clamp_form_check(bumpy, f).is_clamp
    with pytest.raises(ValueError):
        wfid.clamp_form_check(f, bumpy)


@pytest.mark.parametrize('value, constant, sufficient', [
    (0.2, True, True), (0.5, True, False), (10.0, False, False)])
def test_constant_solution_condition(value, constant, sufficient):
    """The crossing value should decide constancy for f = 2x."""
    f = ramp(512)
    w = constant_weight(f.grid, value)
    condition = wfid.constant_solution_condition(w, 2.0)
    assert condition.predicts_constant == constant
    assert condition.sufficient == sufficient
    assert condition.phi1_b == pytest.approx(-4 * value)
    assert condition.k == pytest.approx(-value)
    u = wfid.solve_wfid(f, w).u.values
    assert (u.max() - u.min() <= 1e-9) == constant


def test_constant_solution_condition_invalid():
    """A vanishing weight should be rejected."""
    grid = core.make_grid(-1, 1, 8)
    zero = core.realize_fidelity_weight(core.Sampled((0.0,) * 8), grid)
    with pytest.raises(ValueError):
        wfid.constant_solution_condition(zero, 1.0)


def test_families():
    """Both families should put weight on balls around the centers."""
    grid = core.make_grid(-1, 1, 64)
    dense = wfid.concentrating_family(grid, [0.0], 4)
    light = wfid.vanishing_mass_family(grid, [0.0], 4)
    inside = np.abs(grid.centers) < 0.25
    assert np.all(dense.cell_values[inside] == 16.0)
    assert np.all(dense.cell_values[~inside] == 0.0)
    assert np.all(light.cell_values[inside] == 1 / 16)
    assert not dense.symbolic


def test_pc_limit_recovery():
    """Errors should shrink as the weights concentrate at the jump."""
    results = wfid.pc_limit_recovery({'jumps': [0.0], 'values': [-1, 1]},
                                     '0.2*sin(pi*x)', [0.0], [4, 8, 16, 32])
    errors = [result.error for result in results]
    assert all(b <= a for a, b in zip(errors, errors[1:]))
    assert errors[-1] <= errors[0] / 2
    assert [result.level for result in results] == [4, 8, 16, 32]


@pytest.mark.parametrize('eta, jumps, levels', [
    ('0.1 + 0*x', [0.0], [4, 8]),
    ('0*x', [0.0], [8, 4]),
    ('0*x', [0.0], [4, 1000]),
    ('0*x', [], [4]),
    ('0*x', [0.0], [0, 4]),
])
def test_pc_limit_recovery_invalid(eta, jumps, levels):
    """Should reject noise at the jumps and bad level sequences."""
    with pytest.raises(ValueError):
        wfid.pc_limit_recovery({'jumps': [0.0], 'values': [-1, 1]}, eta,
                               jumps, levels)


def test_pc_limit_recovery_unknown_family():
    """Should reject unknown weight families."""
    with pytest.raises(ValueError):
        wfid.pc_limit_recovery({'jumps': [0.0], 'values': [-1, 1]}, '0*x',
                               [0.0], [4], family='uniform')


def step_data(n=256):
    grid = core.make_grid(-1, 1, n)
    return core.sample(grid, lambda x: np.where(x < 0, -1.0, 1.0) + 0.3 * x)


def test_fid_jump_reports():
    """u should jump only where f jumps, and stay inside the data jump."""
    f = step_data()
    w = constant_weight(f.grid, 5.0)
    u = wfid.solve_wfid(f, w).u
    containment = wfid.fid_jump_containment(u, f, w)
    assert containment.holds
    assert containment.checked == f.grid.n - 1
    clamp = wfid.fid_jump_clamp_report(u, f, w)
    assert clamp.holds
    assert clamp.checked >= 1


def test_fid_jump_containment_flags():
    """A jump of u where f is smooth should be reported."""
    f = ramp(16)
    u = core.sample(f.grid, {'jumps': [0.0], 'values': [-1, 1]})
    w = constant_weight(f.grid, 1.0)
    report = wfid.fid_jump_containment(u, f, w, tol=0.5)
    assert not report.holds
    assert report.violations[0][0] == 7


def test_fid_jump_clamp_flags():
    """A jump overshooting the data jump should be reported."""
    grid = core.make_grid(-1, 1, 8)
    f = core.sample(grid, {'jumps': [0.0], 'values': [0, 1]})
    u = core.sample(grid, {'jumps': [0.0], 'values': [-0.5, 1.5]})
    report = wfid.fid_jump_clamp_report(u, f)
    assert report.checked == 1
    assert report.violations == ((3, 0.0, 0.5),)


def test_locally_constant_report():
    """Du should vanish where u stays on one side of f."""
    f = ramp(512)
    w = constant_weight(f.grid, 10.0)
    u = wfid.solve_wfid(f, w).u
    report = wfid.locally_constant_report(u, f, w)
    assert report.holds
    assert report.checked > 0
    assert not wfid.locally_constant_report(f * 0.5, f, w).holds


def test_certificate_for_fidelity_solution():
    """Fidelity solves should pass the certificate with the solver's floor."""
    grid = core.make_grid(-1, 1, 256)
    f = core.sample(grid, 'sin(2*pi*x)')
    w = wfid.concentrating_family(grid, [-0.5, 0.5], 8)
    solution = wfid.solve_wfid(f, w)
    assert analysis.verify_kkt(f, solution.u, w, mode='wfid').passed


if __name__ == '__main__':
    pytest.main()
