import numpy as np
import pytest

from nqglab.errors import NqgError
from nqglab.lattice import (
    Grid,
    expectation_position,
    free_dispersion_width,
    gaussian_packet,
    inner_product,
    norm,
)
from nqglab.potential import NewtonianSource, PotentialField, sample_potential, zero_potential
from nqglab.propagator import evolve
from nqglab.reference import (
    crank_nicolson_evolve,
    dense_hamiltonian,
    spectral_second_derivative_matrix,
)


def test_trig_matrix_agrees_with_fourier_second_derivative():
    # the closed-form dense matrix must act like the spectral d^2/dx^2
    g = Grid(1, 128, 25.0)
    x = g.axis_coordinates()
    f = np.exp(-0.5 * (x / 2.0) ** 2) * np.cos(1.3 * x)
    d2 = spectral_second_derivative_matrix(g)
    k = 2.0 * np.pi * np.fft.fftfreq(g.n, d=g.spacing)
    via_fft = np.real(np.fft.ifft(-(k**2) * np.fft.fft(f)))
    assert np.max(np.abs(d2 @ f - via_fft)) <= 1e-9


def test_dense_hamiltonian_is_symmetric():
    g = Grid(1, 64, 20.0)
    v = sample_potential(g, [NewtonianSource((0.0,), 5.0, 0.5)], 1.0)
    h = dense_hamiltonian(v, 1.0)
    assert np.max(np.abs(h - h.T)) <= 1e-12


def test_crank_nicolson_is_unitary():
    g = Grid(1, 256, 40.0)
    psi = gaussian_packet(g, [0.0], 1.0, [0.5])
    v = sample_potential(g, [NewtonianSource((-2.0,), 50.0, 0.5)], 1.0)
    out = crank_nicolson_evolve(psi, v, 0.5, 1e-3, 1.0)
    assert abs(norm(out) - 1.0) <= 1e-11


def test_crank_nicolson_free_packet_matches_analytic_dispersion():
    g = Grid(1, 256, 40.0)
    sigma0, m, t = 1.0, 1.0, 1.0
    out = crank_nicolson_evolve(
        gaussian_packet(g, [0.0], sigma0), zero_potential(g), t, 5e-4, m
    )
    x = g.axis_coordinates()
    density = np.abs(out.amplitudes) ** 2 * g.cell_volume
    spread = float(np.sqrt(np.sum(x**2 * density) - np.sum(x * density) ** 2))
    assert spread == pytest.approx(free_dispersion_width(sigma0, t, m), abs=1e-6)


def test_crank_nicolson_oscillator_center_tracks_classical_motion():
    g = Grid(1, 256, 30.0)
    x = g.axis_coordinates()
    v = PotentialField(g, 0.5 * x**2)
    psi0 = gaussian_packet(g, [1.5], np.sqrt(0.5))
    out = crank_nicolson_evolve(psi0, v, np.pi / 2.0, 5e-4, 1.0)
    assert abs(expectation_position(out)[0]) <= 1e-4  # cos(pi/2) = 0


def test_two_methods_agree_on_a_short_run():
    # miniature of the two-solver comparison: same grid, independent steppers
    g = Grid(1, 256, 40.0)
    psi = gaussian_packet(g, [0.0], 1.0)
    v = sample_potential(g, [NewtonianSource((-2.0,), 50.0, 0.5)], 1.0)
    a = evolve(psi, v, 0.25, 1e-4, 1.0)
    b = crank_nicolson_evolve(psi, v, 0.25, 5e-5, 1.0)
    assert abs(inner_product(a, b)) >= 1.0 - 1e-8


def test_reference_solver_is_one_dimensional_only():
    g = Grid(2, 64, 32.0)
    psi = gaussian_packet(g, [0.0, 0.0], 1.5)
    with pytest.raises(NqgError, match="one-dimensional"):
        crank_nicolson_evolve(psi, zero_potential(g), 0.1, 1e-3, 1.0)


def test_last_step_shortening_matches_exact_span():
    g = Grid(1, 128, 30.0)
    psi = gaussian_packet(g, [0.0], 1.0)
    v = zero_potential(g)
    direct = crank_nicolson_evolve(psi, v, 0.25, 1e-3, 1.0)
    odd = crank_nicolson_evolve(psi, v, 0.25, 2e-3, 1.0)  # 125 steps: last is half
    assert abs(inner_product(direct, odd)) >= 1.0 - 1e-9
