import numpy as np
import pytest

from polar_scaling import power_iteration as pi
from polar_scaling.errors import ConvergenceError, DomainError
from polar_scaling.scalar_bounds import classic_lower, g_diag_closed


def test_make_grid():
    assert np.allclose(pi.make_grid(2, "uniform"), [0, 0.5, 1])
    assert np.allclose(pi.make_grid(2, "chebyshev"), [0, 0.5, 1])
    c = pi.make_grid(4, "chebyshev")
    assert np.allclose(c, [0, (1 - np.sqrt(2) / 2) / 2, 0.5, (1 + np.sqrt(2) / 2) / 2, 1])
    assert c[0] == 0.0 and c[-1] == 1.0
    for bad in [(1, "uniform"), (10, "legendre")]:
        with pytest.raises(DomainError):
            pi.make_grid(*bad)


def test_lin_eval():
    g = pi.init_h0(pi.make_grid(50))
    assert pi.lin_eval(g, g.nodes[7]) == g.values[7]
    mid = 0.5 * (g.nodes[7] + g.nodes[8])
    assert pi.lin_eval(g, mid) == pytest.approx(0.5 * (g.values[7] + g.values[8]))
    with pytest.raises(DomainError):
        pi.lin_eval(g, 1.5)


def test_lin_eval_fine_grid_accuracy():
    g = pi.init_h0(pi.make_grid(10**5))
    # node gaps are at most pi/(2 ell); h0'' is moderate near 0.3
    assert abs(pi.lin_eval(g, 0.3) - pi.h0(0.3)) <= 10 * (np.pi / 2e5) ** 2


def test_init_h0():
    g = pi.init_h0(pi.make_grid(100))
    assert g.values[0] == 0.0 and g.values[-1] == 0.0
    assert np.all(g.values[1:-1] > 0)


def test_h0_quotient():
    lam = pi.classic_quotient(pi.init_h0(pi.make_grid(10**4)))
    assert lam == pytest.approx(0.87, abs=0.005)


class Peak:
    """Grid whose argmax is at 0.5."""

    g = pi.Grid1(np.array([0, 0.25, 0.5, 0.75, 1.0]), np.array([0, 0.5, 1.0, 0.5, 0]))


def test_argmax_y_cases():
    assert pi.argmax_y(Peak.g, 0.9) == pytest.approx(0.9 * np.sqrt(2 - 0.81))
    assert pi.argmax_y(Peak.g, 0.1) == pytest.approx(0.19)
    # x = 0.3: range [0.4064, 0.51] holds the argmax
    assert pi.argmax_y(Peak.g, 0.3) == 0.5
    # x = 0.5: range [0.6614, 0.75] lies above 0.5, so the lower clamp applies
    assert pi.argmax_y(Peak.g, 0.5) == pytest.approx(0.5 * np.sqrt(1.75))


def test_argmax_z_cases():
    x = np.linspace(0.01, 0.99, 99)
    assert np.array_equal(pi.argmax_z(Peak.g, x, classic_lower), pi.argmax_y(Peak.g, x))
    assert pi.argmax_z(Peak.g, 0.9, g_diag_closed) == pytest.approx(0.9 * (1 + np.sqrt(5 - 3.6)) / 2)
    assert pi.argmax_z(Peak.g, 1e-9, g_diag_closed) < 1e-8
    z = pi.argmax_z(Peak.g, x, g_diag_closed)
    assert np.all((g_diag_closed(x) <= z) & (z <= 2 * x - x * x))


def test_range_sup_matches_brute_force(rng):
    nodes = pi.make_grid(40)
    g = pi.Grid1(nodes, np.concatenate([[0], rng.uniform(0, 1, 39), [0]]))
    lo = rng.uniform(0, 1, 300)
    hi = np.minimum(1.0, lo + rng.uniform(0, 0.5, 300))
    got = pi.range_sup(g, lo, hi)
    for a, b, v in zip(lo, hi, got):
        fine = np.linspace(a, b, 4001)
        inside = nodes[(nodes >= a) & (nodes <= b)]
        brute = np.interp(np.concatenate([fine, inside]), nodes, g.values).max()
        assert v == pytest.approx(brute, abs=1e-12)


def test_unimodal():
    assert pi.is_unimodal(np.array([0, 1, 2, 2, 1, 0]))
    assert not pi.is_unimodal(np.array([0, 2, 1, 2, 0]))


def test_classic_reproduces_4695():
    grid, rep = pi.classic_iterate(pi.make_grid(2000))
    assert rep.mu_upper == pytest.approx(4.695, abs=1e-3)
    assert rep.final_delta <= 1e-15
    assert rep.iterations < 400
    assert grid.values[0] == grid.values[-1] == 0.0


def test_scale_invariance():
    nodes = pi.make_grid(1000)
    _, a = pi.classic_iterate(nodes)
    h = pi.init_h0(nodes)
    _, b = pi.classic_iterate(nodes, init=pi.Grid1(nodes, 37.5 * h.values))
    assert abs(a.lam - b.lam) <= 1e-12


def test_residual_at_fixed_point():
    nodes = pi.make_grid(1000)
    grid, rep = pi.classic_iterate(nodes)
    again, rep2 = pi.classic_iterate(nodes, init=grid, max_iter=1)
    assert np.max(np.abs(again.values - grid.values)) <= 1e-15 * 2
    assert rep2.iterations == 1


def test_iteration_limit():
    with pytest.raises(ConvergenceError) as info:
        pi.classic_iterate(pi.make_grid(500), max_iter=3)
    grid, rep = info.value.best
    assert rep.iterations == 3 and np.isfinite(rep.mu_upper)
    with pytest.raises(ConvergenceError):
        pi.twostate_iterate(pi.make_grid(500), g_diag_closed, max_iter=3)


def test_twostate_classic_degenerates():
    nodes = pi.make_grid(2000)
    _, classic = pi.classic_iterate(nodes)
    (s, p), two = pi.twostate_iterate(nodes, classic_lower)
    assert two.mu_upper == pytest.approx(classic.mu_upper, abs=1e-6)
    assert np.max(np.abs(s.values - p.values)) <= 1e-9


def test_twostate_closed_form_and_ordering():
    nodes = pi.make_grid(20000)
    (s, p), rep = pi.twostate_iterate(nodes, g_diag_closed)
    assert rep.mu_upper == pytest.approx(4.61126, abs=2e-3)
    assert rep.lam == max(rep.lambda_s, rep.lambda_p)
    assert np.all(s.values >= p.values - 1e-9)
    gap = s.values - p.values
    # the states split once diag(x) passes the argmax of phi_s (x ~ 0.42)
    assert np.all(gap[(nodes > 0.43) & (nodes < 0.99)] > 0)
    assert np.all(gap[nodes < 0.4] == 0)


def test_mu_from_lambda():
    assert pi.mu_from_lambda(0.5) == 1.0
    assert pi.mu_from_lambda(2 ** (-1 / 4.63)) == pytest.approx(4.63)
    assert pi.mu_from_lambda(0.860714) == pytest.approx(4.62125, abs=1e-4)
    for bad in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(DomainError):
            pi.mu_from_lambda(bad)


def test_dump(tmp_path):
    grid, _ = pi.classic_iterate(pi.make_grid(50))
    f = tmp_path / "h.csv"
    pi.write_dump(f, [grid], ["h"])
    rows = f.read_text().splitlines()
    assert rows[0] == "node,h" and len(rows) == 52
