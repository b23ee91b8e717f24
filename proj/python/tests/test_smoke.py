"""Smoke tests for the python bindings."""

import math

import numpy as np
import pytest

import icsim


TWO_PI = 2.0 * math.pi


def paper_trap(alpha=None):
    trap = icsim.TrapConfig()
    trap.rf_voltage = 340.0
    trap.dc_voltage = 26.5
    trap.radial_extent = 460e-6
    trap.axial_extent = 335e-6
    trap.drive_frequency = TWO_PI * 21e6
    trap.geometric_factor = 0.12
    trap.radial_asymmetry = 1.02
    if alpha is not None:
        trap.dc_voltage = icsim.dc_voltage_for_alpha(
            alpha, trap, icsim.IonSpecies.ytterbium_171()
        )
    return trap


def test_mathieu_parameter():
    yb = icsim.IonSpecies.ytterbium_171()
    coeff = icsim.mathieu_coefficients(paper_trap(), yb)
    assert coeff.q_x == pytest.approx(0.10, abs=0.005)
    assert coeff.a_x + coeff.a_y + coeff.a_z == 0.0


def test_secular_frequencies_and_alpha():
    yb = icsim.IonSpecies.ytterbium_171()
    freqs = icsim.secular_frequencies(paper_trap(alpha=2.0), yb)
    assert freqs.alpha == pytest.approx(2.0, rel=1e-9)
    assert freqs.omega_z == pytest.approx(TWO_PI * 900e3, rel=0.02)


def test_lamb_dicke():
    yb = icsim.IonSpecies.ytterbium_171()
    eta = icsim.lamb_dicke(yb, math.radians(53.0), TWO_PI * 900e3)
    assert eta == pytest.approx(0.16, abs=0.005)


def test_two_ion_equilibrium_spacing():
    yb = icsim.IonSpecies.ytterbium_171()
    model = icsim.PotentialModel(
        TWO_PI * 450e3, TWO_PI * 470e3, TWO_PI * 900e3, yb, 2
    )
    config = icsim.find_equilibrium(model, seed=1)
    assert config.converged
    spacing = np.linalg.norm(config.positions[0] - config.positions[1])
    assert spacing == pytest.approx(5.88e-6, rel=0.01)


def test_crystal_classification_and_modes():
    yb = icsim.IonSpecies.ytterbium_171()
    trap = paper_trap(alpha=2.0)
    model = icsim.pseudo_model(trap, yb, 7)
    config = icsim.find_equilibrium(model, seed=3)
    assert icsim.classify(config, model) == icsim.Phase.Radial2D

    spectrum = icsim.pseudopotential_modes(config, model, icsim.ModeSubspace.Axial)
    # COM is the highest axial mode and equals omega_z
    assert spectrum.frequencies[-1] == pytest.approx(model.omega_z, rel=1e-9)


def test_mathieu_exponent():
    assert icsim.mathieu_exponent(0.04, 0.0) == pytest.approx(0.2, rel=1e-10)
    beta = icsim.mathieu_exponent(0.0, 0.10)
    assert beta == pytest.approx(math.sqrt(0.005), abs=2e-4)


def test_sideband_ratio_and_conversions():
    yb = icsim.IonSpecies.ytterbium_171()
    assert icsim.ratio_to_nbar(5.0 / 7.0) == pytest.approx(2.5, abs=1e-12)
    with pytest.raises(icsim.IcsimError):
        icsim.ratio_to_nbar(1.5)
    t_rate, s_e = icsim.heating_conversions(100.0, TWO_PI * 900e3, yb)
    assert s_e == pytest.approx(2.65e-12, rel=0.05)
    assert t_rate == pytest.approx(100.0 * icsim.hbar * TWO_PI * 900e3 / icsim.boltzmann)


def test_voigt_round_trip():
    yb = icsim.IonSpecies.ytterbium_171()
    theta = math.radians(45.0)
    grid = np.linspace(-TWO_PI * 250e6, TWO_PI * 250e6, 401)
    detunings, counts = icsim.voigt_profile(grid, 30e-3, 3e-3, theta, yb, 0.3)
    t_r, sigma = icsim.fit_voigt(
        detunings, counts, icsim.lorentz_fwhm(yb, 0.3), theta, 3e-3, yb
    )
    assert t_r == pytest.approx(30e-3, rel=0.05)
    assert sigma >= 0.0
