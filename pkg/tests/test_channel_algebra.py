import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polar_scaling.channel_algebra import (BscMix, bhattacharyya, canonicalize, make_bec,
                                           make_bsc, parallel, random_mix, serial)
from polar_scaling.errors import DomainError
from polar_scaling.scalar_bounds import f_serial


def same_law(m1, m2, tol=1e-12):
    """Equal as mixtures up to float noise: same Z and same crossover moments."""
    checks = [bhattacharyya(m1) - bhattacharyya(m2)]
    for k in (0, 1, 2, 3):
        checks.append(np.dot(m1.weights, m1.crossovers**k) - np.dot(m2.weights, m2.crossovers**k))
    return bool(np.max(np.abs(checks)) <= tol)


def atoms(m):
    return [(round(a.weight, 12), round(a.crossover, 12)) for a in m.atoms]


@pytest.mark.parametrize("p, expect", [(0, 0), (0.5, 0.5), (0.9, 0.1)])
def test_make_bsc(p, expect):
    m = make_bsc(p)
    assert len(m) == 1
    assert m.atoms[0].weight == 1.0
    assert m.atoms[0].crossover == pytest.approx(expect)


def test_make_bec():
    assert atoms(make_bec(0)) == [(1.0, 0.0)]
    assert atoms(make_bec(1)) == [(1.0, 0.5)]
    assert atoms(make_bec(0.3)) == [(0.7, 0.0), (0.3, 0.5)]


@pytest.mark.parametrize("bad", [-0.1, 1.5, float("nan")])
def test_domain_errors(bad):
    with pytest.raises(DomainError):
        make_bsc(bad)
    with pytest.raises(DomainError):
        make_bec(bad)


def test_canonicalize_examples():
    assert atoms(canonicalize(BscMix.from_arrays([0.5, 0.5], [0.2, 0.8]))) == [(1.0, 0.2)]
    assert atoms(canonicalize(BscMix.from_arrays([0.3, 0.7], [0.1, 0.1]))) == [(1.0, 0.1)]
    m = canonicalize(BscMix.from_arrays([1.0], [0.3]))
    assert canonicalize(m) == m


def test_canonical_form_invariants(rng):
    for _ in range(200):
        w = rng.dirichlet(np.ones(6))
        w[rng.integers(6)] = 0.0
        w /= w.sum()
        m = canonicalize(BscMix.from_arrays(w, rng.uniform(0, 1, 6)))
        assert np.all(np.diff(m.crossovers) > 0)
        assert np.all(m.weights > 0)
        assert np.all(m.crossovers <= 0.5)
        assert abs(m.weights.sum() - 1.0) <= 1e-12
        assert canonicalize(m) == m


def test_serial_examples():
    assert atoms(serial(make_bsc(0.1), make_bsc(0))) == [(1.0, 0.1)]
    assert bhattacharyya(serial(make_bec(0.5), make_bec(0.5))) == pytest.approx(0.75, abs=1e-14)
    assert atoms(serial(make_bsc(0.1), make_bsc(0.2))) == [(1.0, 0.26)]


def test_parallel_examples(rng):
    for _ in range(20):
        assert atoms(parallel(make_bsc(0), random_mix(rng, 4))) == [(1.0, 0.0)]
    assert bhattacharyya(parallel(make_bsc(0.1), make_bsc(0.1))) == pytest.approx(0.36, abs=1e-14)
    assert bhattacharyya(parallel(make_bec(0.4), make_bec(0.5))) == pytest.approx(0.2, abs=1e-14)


def test_parallel_of_jammed_channels_skips_empty_branch():
    m = parallel(make_bsc(0.5), make_bsc(0.0))
    assert np.all(np.isfinite(m.crossovers))


def test_bhattacharyya_examples():
    assert bhattacharyya(make_bsc(0)) == 0.0
    assert bhattacharyya(make_bec(0.3)) == pytest.approx(0.3, abs=1e-15)
    assert bhattacharyya(make_bsc(0.1)) == pytest.approx(2 * np.sqrt(0.09), abs=1e-15)


mixes = st.integers(1, 4).flatmap(
    lambda k: st.tuples(st.lists(st.floats(0.01, 1.0), min_size=k, max_size=k),
                        st.lists(st.floats(0.0, 1.0), min_size=k, max_size=k))
).map(lambda wp: canonicalize(BscMix.from_arrays(np.array(wp[0]) / sum(wp[0]), wp[1])))


@settings(max_examples=150, deadline=None)
@given(mixes, mixes)
def test_combination_properties(a, b):
    za, zb = bhattacharyya(a), bhattacharyya(b)
    assert abs(bhattacharyya(parallel(a, b)) - za * zb) <= 1e-10
    zs = bhattacharyya(serial(a, b))
    assert f_serial(za, zb) - 1e-10 <= zs
    assert zs <= bhattacharyya(serial(make_bec(za), make_bec(zb))) + 1e-10
    assert same_law(serial(a, b), serial(b, a))
    assert same_law(parallel(a, b), parallel(b, a))
    assert len(serial(a, b)) <= len(a) * len(b)
    assert len(parallel(a, b)) <= 2 * len(a) * len(b)
