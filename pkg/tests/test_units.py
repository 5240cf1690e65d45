import math

import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import constants

from gemcsm.units import (
    ComplexEnergy,
    DomainError,
    Physical,
    Scaling,
    convert_energy,
    lifetime_seconds,
    make_mass_config,
    tilde_factor,
    width_to_lifetime,
)

betas = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False)


@given(betas)
def test_pair_reduced_mass_is_one_half(beta):
    cfg = make_mass_config(beta)
    assert cfg.mu_pair_prime == pytest.approx(0.5, rel=1e-14)
    assert cfg.mu_pair(1, 2) == cfg.mu_pair(1, 3) == cfg.mu_pair_prime
    assert cfg.m_b_prime / cfg.m_x_prime == pytest.approx(beta, rel=1e-14)


def test_mass_values_at_beta_one():
    cfg = make_mass_config(1.0)
    assert (cfg.m_x_prime, cfg.m_b_prime) == (1.0, 1.0)
    assert cfg.mu_third_prime(1) == pytest.approx(2.0 / 3.0)


def test_spectator_reduced_mass_at_beta_twenty():
    # m_x' = 21/40, m_b' = 21/2 => m_x (2 m_b) / (m_x + 2 m_b)
    cfg = make_mass_config(20.0)
    assert cfg.mu_third_prime(1) == pytest.approx(21.0 / 41.0, rel=1e-14)


@pytest.mark.parametrize("beta", [0.0, -1.0, math.inf, math.nan])
def test_invalid_mass_ratio(beta):
    with pytest.raises(DomainError):
        make_mass_config(beta)


def test_tilde_factor_examples():
    assert tilde_factor(make_mass_config(1.0)) == pytest.approx(4.0)
    e = convert_energy(ComplexEnergy(-0.1, 0.0), Scaling.PRIME, Scaling.TILDE, make_mass_config(20.0))
    assert e.e_r == pytest.approx(-0.21)


@given(betas)
def test_tilde_factor_formula(beta):
    assert tilde_factor(make_mass_config(beta)) == pytest.approx(2.0 * (1.0 + beta) / beta, rel=1e-13)


# the joule unit is ~1e-22, so keep inputs clear of the subnormal range
moderate = st.floats(-50, 50).filter(lambda x: x == 0 or abs(x) > 1e-200)


@given(betas, moderate, moderate.map(abs), st.sampled_from([1, 3]))
def test_conversion_round_trip(beta, e_r, gamma, dim):
    cfg = make_mass_config(beta)
    phys = Physical(r0=1e-9, m_x=1e-26)
    e = ComplexEnergy(e_r, gamma)
    for kind in (Scaling.TILDE, phys):
        back = convert_energy(convert_energy(e, Scaling.PRIME, kind, cfg, dim), kind, Scaling.PRIME, cfg, dim)
        assert back.e_r == pytest.approx(e_r, rel=1e-12, abs=1e-300)
        assert back.gamma == pytest.approx(gamma, rel=1e-12, abs=1e-300)


def test_conversion_rejects_non_finite():
    with pytest.raises(DomainError):
        convert_energy(ComplexEnergy(math.nan, 0.0), Scaling.PRIME, Scaling.TILDE, make_mass_config(1.0))


def test_physical_energy_unit():
    phys = Physical(r0=2e-9, m_x=3e-26)
    beta = 4.0
    mu = 3e-26 * 4.0 / 5.0
    e3 = constants.hbar**2 / (2 * mu * 4e-18)
    assert phys.energy_unit(beta, 3) == pytest.approx(e3, rel=1e-14)
    assert phys.energy_unit(beta, 1) == pytest.approx(2 * e3, rel=1e-14)


def test_width_from_complex_energy():
    assert ComplexEnergy.from_complex(-1 - 0.005j).gamma == pytest.approx(0.01)
    assert ComplexEnergy(-1.0, 0.01).value == pytest.approx(-1 - 0.005j)


def test_lifetime():
    assert width_to_lifetime(1e-6, dimension=1) == pytest.approx(1e6)
    assert width_to_lifetime(1e-6, dimension=3) == pytest.approx(2e6)
    assert width_to_lifetime(0.0) == math.inf
    with pytest.raises(DomainError):
        width_to_lifetime(-1e-3)
    with pytest.raises(DomainError):
        width_to_lifetime(math.nan)


@given(st.floats(1e-12, 1e3), st.sampled_from([1, 3]))
def test_lifetime_times_width_consistent_with_energy_unit(gamma, dim):
    # τ Γ = ħ in physical units, whatever the scaling
    phys = Physical(r0=1e-8, m_x=7e-27)
    beta = 2.5
    tau = lifetime_seconds(width_to_lifetime(gamma, dim), phys.r0, phys.m_x, beta)
    width_joule = gamma * phys.energy_unit(beta, dim)
    assert tau * width_joule == pytest.approx(constants.hbar, rel=1e-12)
