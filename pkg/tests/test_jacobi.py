import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gemcsm.jacobi import (
    PAIRS,
    absolute_to_jacobi,
    exchange_p23,
    kinetic_weights,
    pair_vector,
    transform,
)
from gemcsm.units import make_mass_config

betas = st.floats(min_value=0.02, max_value=50)
sets = st.sampled_from([1, 2, 3])


def jacobi_by_definition(c, positions, masses):
    """Pair vector ``r_j - r_i`` and spectator relative to the pair's centre of mass."""
    i, j = PAIRS[c]
    ri, rj, rk = positions[i - 1], positions[j - 1], positions[c - 1]
    mi, mj = masses[i - 1], masses[j - 1]
    return np.array([rj - ri, rk - (mi * ri + mj * rj) / (mi + mj)])


@given(betas, sets, st.lists(st.floats(-5, 5), min_size=3, max_size=3))
def test_absolute_to_jacobi_matches_definition(beta, c, pos):
    cfg = make_mass_config(beta)
    pos = np.array(pos)
    got = absolute_to_jacobi(c, cfg) @ pos
    assert np.allclose(got[:2], jacobi_by_definition(c, pos, cfg.masses), atol=1e-12)
    assert got[2] == pytest.approx(np.dot(cfg.masses, pos) / sum(cfg.masses), abs=1e-12)


@given(betas, sets, sets, st.lists(st.floats(-5, 5), min_size=3, max_size=3))
def test_transform_substitution(beta, c1, c2, pos):
    cfg = make_mass_config(beta)
    pos = np.array(pos)
    x1 = jacobi_by_definition(c1, pos, cfg.masses)
    x2 = jacobi_by_definition(c2, pos, cfg.masses)
    assert np.allclose(transform(c1, c2, cfg) @ x1, x2, atol=1e-11)


@given(betas, sets, sets)
def test_transform_unit_determinant(beta, c1, c2):
    assert abs(np.linalg.det(transform(c1, c2, make_mass_config(beta)))) == pytest.approx(1.0, rel=1e-12)


@given(betas, st.sampled_from([2, 3]))
def test_exchange_is_involution(beta, c):
    p = exchange_p23(make_mass_config(beta), c)
    assert np.allclose(p @ p, np.eye(2), atol=1e-12)


def test_exchange_and_transform_at_equal_masses():
    cfg = make_mass_config(1.0)
    assert np.allclose(exchange_p23(cfg), [[0.5, -1.0], [-0.75, -0.5]])
    assert np.allclose(transform(2, 3, cfg), [[-0.5, 1.0], [-0.75, -0.5]])


@given(betas)
def test_exchange_maps_set_two_into_set_three(beta):
    # swapping the bosons turns (r_31, R_2) into (-r_21, R_3) = (-(−r_12), R_3)
    cfg = make_mass_config(beta)
    p = exchange_p23(cfg)
    t = transform(2, 3, cfg)
    assert np.allclose(p[0], -t[0], atol=1e-12)
    assert np.allclose(p[1], t[1], atol=1e-12)


@given(betas, sets)
def test_kinetic_energy_invariant(beta, c):
    # inverse-mass metric is diagonal in every Jacobi set, with entries 2 * weights
    cfg = make_mass_config(beta)
    j = absolute_to_jacobi(c, cfg)
    metric = j @ np.diag(1.0 / np.array(cfg.masses)) @ j.T
    w = kinetic_weights(c, cfg)
    assert np.allclose(metric[:2, :2], np.diag(2 * w), rtol=1e-12, atol=1e-12)


@given(betas, sets, st.lists(st.floats(-5, 5), min_size=3, max_size=3))
def test_pair_vectors(beta, c, pos):
    cfg = make_mass_config(beta)
    pos = np.array(pos)
    x = jacobi_by_definition(c, pos, cfg.masses)
    for i, j in [(1, 2), (3, 1), (2, 3), (2, 1)]:
        assert pair_vector(c, (i, j), cfg) @ x == pytest.approx(pos[j - 1] - pos[i - 1], abs=1e-11)


@given(betas)
def test_bx_pair_kinetic_weight_is_mass_independent(beta):
    cfg = make_mass_config(beta)
    assert kinetic_weights(3, cfg)[0] == pytest.approx(1.0, rel=1e-14)
    assert kinetic_weights(2, cfg)[0] == pytest.approx(1.0, rel=1e-14)


def test_bad_set():
    with pytest.raises(ValueError):
        absolute_to_jacobi(4, make_mass_config(1.0))
    with pytest.raises(ValueError):
        pair_vector(1, (1, 1), make_mass_config(1.0))
