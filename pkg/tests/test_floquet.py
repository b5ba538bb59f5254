import math
import warnings

import numpy as np
import pytest
from scipy.special import jv

from floquet_lindblad.errors import AliasingWarning, InvalidInputError
from floquet_lindblad.floquet import (
    PeriodicMatrixFunction,
    coefficients_from_grid,
    floquet_decompose,
    fourier_coefficients,
    propagate_fundamental,
    reconstruct,
    reduce_to_zone,
    shifted_exponents,
    unitary_floquet,
)

from conftest import SX, SZ
from oracles import rk4_matrix_ode


def test_fourier_coefficients_examples():
    T = 2.0
    c = fourier_coefficients(lambda t: SX, T, 3)
    assert np.allclose(c[0], SX) and all(np.allclose(c[n], 0, atol=1e-15) for n in c if n)
    w = 2 * math.pi / T
    c = fourier_coefficients(lambda t: np.exp(3j * w * t) * np.eye(2), T, 4)
    assert np.allclose(c[3], np.eye(2), atol=1e-14)
    assert np.allclose(c[-3], 0, atol=1e-14)


def test_fourier_coefficients_bessel():
    # exp(i z sin t) = sum_n J_n(z) exp(i n t)
    z = 0.7
    c = fourier_coefficients(lambda t: np.array([[np.exp(1j * z * math.sin(t))]]), 2 * math.pi, 8, 64)
    for n in range(-6, 7):
        assert c[n][0, 0] == pytest.approx(jv(n, z), abs=1e-14)
    assert jv(0, z) == pytest.approx(0.8812009, abs=1e-7)


def test_aliasing_warning_and_too_few_points():
    samples = np.stack([np.array([[np.exp(1j * 3 * 2 * math.pi * k / 16)]]) for k in range(16)])
    with pytest.warns(AliasingWarning):
        coefficients_from_grid(samples, 3)
    with pytest.raises(InvalidInputError):
        fourier_coefficients(lambda t: SX, 1.0, 4, quadrature_points=8)


def test_reconstruct_round_trip():
    coeffs = {-1: 0.5 * SX, 0: SZ, 2: 0.25j * SX}
    f = PeriodicMatrixFunction(1.3, coeffs)
    back = fourier_coefficients(f, 1.3, 4, 32)
    for n in range(-4, 5):
        assert np.allclose(back[n], coeffs.get(n, 0), atol=1e-14)
    assert np.allclose(reconstruct(coeffs, 1.3, 0.0), 0.5 * SX + SZ + 0.25j * SX)


def test_periodic_function_json_round_trip():
    f = PeriodicMatrixFunction(0.7, {0: SZ, 1: 0.1 * SX, -1: 0.1 * SX})
    g = PeriodicMatrixFunction.from_json(f.to_json())
    assert g.period == f.period
    for t in (0.0, 0.13, 0.5):
        assert np.array_equal(f(t), g(t))


def test_propagate_fundamental_closed_forms():
    A = PeriodicMatrixFunction.constant(1.0, np.zeros((2, 2)))
    assert np.allclose(propagate_fundamental(A, 2.5), np.eye(2))
    # scalar alpha(t) = cos(2 pi t): Phi(t) = exp(sin(2 pi t) / (2 pi))
    alpha = PeriodicMatrixFunction(1.0, {1: np.array([[0.5]]), -1: np.array([[0.5]])})
    t = 0.37
    assert propagate_fundamental(alpha, t)[0, 0] == pytest.approx(
        math.exp(math.sin(2 * math.pi * t) / (2 * math.pi)), abs=1e-10
    )


def test_floquet_constant_generator():
    B0 = np.array([[-0.2, 1.0], [-1.0, -0.1]], dtype=complex)
    dec = floquet_decompose(PeriodicMatrixFunction.constant(1.0, B0))
    assert np.allclose(dec.generator, B0, atol=1e-10)
    assert np.allclose(dec.periodic_part(0.4), np.eye(2), atol=1e-10)


def test_floquet_random_periodic_factorization():
    rng = np.random.default_rng(5)
    coeffs = {0: 0.3 * rng.normal(size=(2, 2))}
    c1 = 0.2 * (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    coeffs[1], coeffs[-1] = c1, c1.conj()
    A = PeriodicMatrixFunction(1.0, coeffs)
    dec = floquet_decompose(A, steps_per_period=1024)
    for t in np.linspace(0, 1, 32, endpoint=False):
        ref = rk4_matrix_ode(A, np.eye(2), t, 2048) if t > 0 else np.eye(2)
        assert np.allclose(dec.fundamental(t), ref, atol=1e-9)
        assert np.allclose(dec.periodic_part(t + 1.0), dec.periodic_part(t), atol=1e-10)
    assert np.allclose(np.sort_complex(np.exp(dec.exponents)), np.sort_complex(np.linalg.eigvals(dec.monodromy)), atol=1e-10)


def test_shifted_exponents_layout():
    out = shifted_exponents([-0.5, -1.0], 2.0, 2)
    assert out.shape == (2, 5)
    assert out[0, 2] == -0.5 and out[1, 4] == -1.0 + 4j


def test_reduce_to_zone():
    w = 3.0
    assert np.allclose(reduce_to_zone(np.array([0.5, 2.0, -1.6, 1.5]), w), [0.5, -1.0, 1.4, 1.5])


def test_unitary_floquet_sigma_z_drive(drive_floquet):
    uf = drive_floquet
    assert np.allclose(uf.hbar, 0.5 * SZ, atol=1e-8)
    z = 0.7 / (2 * 3.0)
    # p_t = exp(-i z sin(Omega t) sigma_z)
    for n in range(-5, 6):
        expected = np.diag([jv(n, -z), jv(n, z)])
        assert np.allclose(uf.p.coefficient(n), expected, atol=1e-8)
    for t in (0.0, 0.3, 1.7):
        assert np.allclose(uf.propagator(t), uf.solution(t), atol=1e-9)


def test_unitary_floquet_constant_hamiltonian():
    h = np.array([[0.3, 0.1], [0.1, -0.2]], dtype=complex)
    uf = unitary_floquet(PeriodicMatrixFunction.constant(2.0, h))
    assert np.allclose(uf.hbar, h, atol=1e-10)
    assert np.allclose(uf.p(0.77), np.eye(2), atol=1e-10)


def test_unitary_floquet_circular_drive():
    # H_t = w0/2 sz + lam/2 (cos(Om t) sx + sin(Om t) sy); rotating frame is exact
    w0, lam, Om = 1.0, 0.4, 2.5
    sp = np.array([[0, 1], [0, 0]], dtype=complex)
    H = PeriodicMatrixFunction(2 * math.pi / Om, {0: 0.5 * w0 * SZ, 1: 0.5 * lam * sp.T, -1: 0.5 * lam * sp})
    uf = unitary_floquet(H)
    r = 0.5 * math.hypot(w0 - Om, lam)
    expected = np.sort(reduce_to_zone(np.array([r + Om / 2, -r + Om / 2]), Om))
    assert np.allclose(np.sort(uf.quasienergies), expected, atol=1e-9)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert np.allclose(uf.propagator(1.1), uf.solution(1.1), atol=1e-9)


def test_unitary_floquet_rejects_non_hermitian():
    with pytest.raises(InvalidInputError):
        unitary_floquet(PeriodicMatrixFunction.constant(1.0, np.array([[0, 1], [0, 0]], dtype=complex)))


def test_tail_decay_of_smooth_drive(drive_floquet):
    norms = [np.max(np.abs(drive_floquet.p.coefficient(n))) for n in range(0, 6)]
    assert all(a > b for a, b in zip(norms, norms[1:]))
