import numpy as np
import pytest

from polar_scaling import envelope as env
from polar_scaling.errors import ConvergenceError, DomainError, MemoryBudgetError
from polar_scaling.meshio import read_mesh, write_mesh
from polar_scaling.errors import CacheCorruptionError
from polar_scaling.scalar_bounds import g_diag_closed, g_tri


@pytest.fixture(scope="module")
def env20():
    m = env.init_mesh(20, g_tri)
    return m, env.tc_converge(m, method="graham-axes")


def profile_mesh(n, prof, axis=0):
    v = np.zeros((n + 1,) * 3)
    shape = [1, 1, 1]
    shape[axis] = n + 1
    v += np.asarray(prof, float).reshape(shape)
    return env.Mesh3(n, v)


def test_init_mesh():
    m = env.init_mesh(2, g_tri)
    assert m.values.shape == (3, 3, 3)
    assert m.values[0, 0, 0] == 0.0 and m.values[2, 2, 2] == 1.0
    assert not env.init_mesh(5, lambda x, y, z: 0.0 * x).values.any()
    with pytest.raises(DomainError):
        env.init_mesh(1, g_tri)
    with pytest.raises(MemoryBudgetError):
        env.init_mesh(200, g_tri, budget=10**6)


def test_residual_examples():
    assert env.convexity_residual(profile_mesh(2, [0, 0, 0]))[0] == 0.0
    r, axis, loc = env.convexity_residual(profile_mesh(2, [0, 1, 0]))
    assert r == 2.0 and axis == "x" and loc[0] == 1
    r, axis, loc = env.convexity_residual(profile_mesh(2, [0, 1, 0], axis=2))
    assert axis == "z" and loc[2] == 1


def test_descend_sweep_examples(rng):
    m, changed = env.descend_sweep(profile_mesh(2, [0, 0.25, 1]))
    assert changed == 0
    m, changed = env.descend_sweep(profile_mesh(2, [0, 1, 0]))
    assert not m.values.any()
    noisy = env.Mesh3(6, rng.uniform(0, 1, (7, 7, 7)))
    assert np.all(env.descend_sweep(noisy)[0].values <= noisy.values)


def test_graham_examples():
    out = env.convexify_axis_graham([0, 0.25, 0.5, 0.75, 1], [0, 2, 1, 3, 0])
    assert np.allclose(out, 0.0)
    assert np.allclose(env.convexify_axis_graham([0, 0.5, 1], [0, 0.25, 1]), [0, 0.25, 1])
    assert np.allclose(env.convexify_axis_graham([0, 0.5, 1], [1, 0, 1]), [1, 0, 1])


def brute_lower_hull(xs, v):
    """Max over support lines below all points, evaluated at each node."""
    out = np.full(len(v), -np.inf)
    for i in range(len(xs)):
        for j in range(i + 1, len(xs)):
            slope = (v[j] - v[i]) / (xs[j] - xs[i])
            line = v[i] + slope * (xs - xs[i])
            if np.all(line <= v + 1e-12):
                out = np.maximum(out, line)
    return np.maximum(out, -np.inf)


def test_graham_matches_brute_force(rng):
    for _ in range(50):
        xs = np.sort(np.concatenate([[0, 1], rng.uniform(0, 1, 8)]))
        v = rng.uniform(0, 1, xs.size)
        got = env.convexify_axis_graham(xs, v)
        assert np.allclose(got, brute_lower_hull(xs, v), atol=1e-12)


def test_tc_constant_and_idempotent(env20):
    c = env.Mesh3(4, np.full((5, 5, 5), 0.3))
    assert np.array_equal(env.tc_converge(c).values, c.values)
    m, e = env20
    assert env.convexity_residual(e)[0] <= 1e-13
    assert np.all(e.values <= m.values)
    again = env.tc_converge(e)
    assert np.max(np.abs(again.values - e.values)) <= 1e-13


def test_methods_agree(env20):
    m, e = env20
    j = env.tc_converge(m, method="jacobi-descend")
    assert np.max(np.abs(j.values - e.values)) <= 1e-10


def test_order_independence(env20):
    m, e = env20
    other = env.tc_converge(m, method="graham-axes", order=(2, 1, 0))
    assert np.max(np.abs(other.values - e.values)) <= 10 * 1e-13


def test_iteration_cap():
    m = env.init_mesh(10, g_tri)
    with pytest.raises(ConvergenceError) as info:
        env.tc_converge(m, method="jacobi-descend", max_passes=2)
    assert info.value.best is not None and info.value.residual > 0


def test_dominance_over_convex_minorants(rng):
    n = 6
    x, y, z = env.mesh_axes(n)
    G = env.Mesh3(n, rng.uniform(0, 1, (n + 1,) * 3))
    e = env.tc_converge(G)
    for _ in range(30):
        # separable convex pieces summed are tri-convex; shift below G
        a, b, c = rng.uniform(-1, 1, 3)
        theta = a * (x - rng.uniform()) ** 2 + b * np.abs(y - 0.5) + c * z ** 2
        theta = np.broadcast_to(np.where(True, theta, 0), G.values.shape).copy()
        theta = env.tc_converge(env.Mesh3(n, theta)).values
        theta -= np.max(theta - G.values)
        assert np.all(theta <= e.values + 1e-12)


def test_trilinear_examples(env20):
    m, _ = env20
    for idx in [(0, 0, 0), (3, 7, 11), (20, 20, 20), (20, 0, 13)]:
        p = np.array(idx) / 20
        assert env.trilinear_eval(m, *p) == m.values[idx]
    ones = env.Mesh3(4, np.ones((5, 5, 5)))
    assert env.trilinear_eval(ones, 0.125, 0.375, 0.625) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        env.trilinear_eval(ones, 1.2, 0.0, 0.0)


def test_interpolant_of_envelope_is_tri_convex(env20, rng):
    _, e = env20
    pts = rng.uniform(0.05, 0.95, (10**4, 3))
    h = rng.uniform(0, 0.05, 10**4)
    for a in range(3):
        lo, hi = pts.copy(), pts.copy()
        lo[:, a] -= h
        hi[:, a] += h
        mid = env.trilinear_eval(e, *pts.T)
        assert np.all(env.trilinear_eval(e, *lo.T) + env.trilinear_eval(e, *hi.T) >= 2 * mid - 1e-12)


def test_envelope_diag_below_g_at_mesh_curve_points(env20):
    _, e = env20
    # x with sqrt(x) and x both on the mesh: x = (k/20)^2 with k^2 divisible by 20
    x = (np.array([0, 10, 20]) / 20) ** 2
    assert np.all(env.diag_eval(e, x) <= g_diag_closed(x) + 1e-12)


def test_raw_envelope_interpolant_can_exceed_g(env20):
    # between mesh points the interpolant of a convex function lies above it,
    # so the uncertified envelope is not a lower bound off the mesh
    _, e = env20
    x = 0.001
    assert env.diag_eval(e, x) > g_diag_closed(x) + 1e-4


def test_cache_round_trip(tmp_path, env20):
    _, e = env20
    p = tmp_path / "m.mesh"
    write_mesh(p, e, 1e-13)
    back = read_mesh(p, {"n": 20, "kind": e.kind})
    assert np.array_equal(back.values, e.values)
    head = p.read_bytes().split(b"\n", 1)[0]
    assert b'"version": 1' in head
    assert len(p.read_bytes()) == len(head) + 1 + 21**3 * 8
    p.write_bytes(p.read_bytes()[:-8])
    with pytest.raises(CacheCorruptionError):
        read_mesh(p)
    p.write_bytes(b"not json\n")
    with pytest.raises(CacheCorruptionError):
        read_mesh(p)
