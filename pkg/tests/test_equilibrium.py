import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ionchain import equilibrium
from ionchain.constants import ATOMIC_MASS


def test_two_ions_closed_form():
    u = equilibrium.solve_equilibrium(2)
    expected = 2.0 ** (-2.0 / 3.0)
    assert abs(u[0] + expected) < 1e-12
    assert abs(u[1] - expected) < 1e-12


def test_three_ions_closed_form():
    u = equilibrium.solve_equilibrium(3)
    expected = (5.0 / 4.0) ** (1.0 / 3.0)
    assert abs(u[1]) < 1e-12
    assert abs(u[2] - expected) < 1e-12


def test_single_ion_sits_at_origin():
    u = equilibrium.solve_equilibrium(1)
    assert u.shape == (1,)
    assert u[0] == 0.0


@settings(max_examples=12, deadline=None)
@given(n=st.integers(min_value=2, max_value=12))
def test_solution_properties(n):
    u = equilibrium.solve_equilibrium(n)
    # ascending, reflection-antisymmetric, force balance
    assert np.all(np.diff(u) > 0.0)
    assert np.max(np.abs(u + u[::-1])) < 1e-9
    assert np.max(np.abs(equilibrium.equilibrium_residual(u))) < 1e-10


def test_spacing_shrinks_toward_the_centre():
    u = equilibrium.solve_equilibrium(8)
    gaps = np.diff(u)
    half = gaps[: gaps.size // 2]
    assert np.all(np.diff(half) < 0.0)
    assert np.max(np.abs(gaps - gaps[::-1])) < 1e-9


def test_residual_rejects_coincident_ions():
    with pytest.raises(ValueError, match="degenerate"):
        equilibrium.equilibrium_residual(np.array([-1.0, 0.5, 0.5]))


def test_invalid_ion_count():
    with pytest.raises(ValueError):
        equilibrium.solve_equilibrium(0)


def test_species_registry():
    be = equilibrium.species("Be9")
    assert be.name == "Be9"
    assert 8.9 * ATOMIC_MASS < be.mass < 9.1 * ATOMIC_MASS
    with pytest.raises(ValueError, match="unknown species"):
        equilibrium.species("Xe999")


def test_species_validation():
    with pytest.raises(ValueError):
        equilibrium.IonSpecies(name="bad", mass=-1.0)
    with pytest.raises(ValueError):
        equilibrium.IonSpecies(name="bad", mass=1e-26, charge=0.0)


def test_length_scale_frequency_scaling():
    ion = equilibrium.species("Ca40")
    omega = 2.0 * np.pi * 1.0e6
    # ell ~ omega^(-2/3): an 8-fold frequency raise shrinks ell 4-fold
    ratio = equilibrium.length_scale(ion, omega) / equilibrium.length_scale(ion, 8 * omega)
    assert abs(ratio - 4.0) < 1e-12
    with pytest.raises(ValueError):
        equilibrium.length_scale(ion, 0.0)


def test_trap_config_validation():
    ion = equilibrium.species("Ca40")
    with pytest.raises(ValueError):
        equilibrium.TrapConfig(n_ions=0, ion=ion, omega3=1e6, alpha=0.1)
    with pytest.raises(ValueError):
        equilibrium.TrapConfig(n_ions=2, ion=ion, omega3=1e6, alpha=-0.1)


def test_build_chain_scales_positions():
    ion = equilibrium.species("Sr88")
    config = equilibrium.TrapConfig(
        n_ions=2, ion=ion, omega3=2.0 * np.pi * 1.0e6, alpha=0.1)
    chain = equilibrium.build_chain(config)
    assert chain.n_ions == 2
    assert np.allclose(chain.positions_m(), chain.u * chain.ell)
    assert 1e-7 < chain.ell < 1e-5


def test_chain_validation_rejects_bad_positions():
    with pytest.raises(ValueError, match="increasing"):
        equilibrium.EquilibriumChain(u=np.array([0.6, -0.6]), ell=1e-6)
    with pytest.raises(ValueError, match="force balance"):
        equilibrium.EquilibriumChain(u=np.array([-0.5, 0.5]), ell=1e-6)


def test_positions_are_read_only():
    chain = equilibrium.EquilibriumChain(
        u=equilibrium.solve_equilibrium(3), ell=1e-6)
    with pytest.raises(ValueError):
        chain.u[0] = 0.0
