import math

import numpy as np
import pytest
from scipy.special import jv

from floquet_lindblad.errors import InvalidInputError
from floquet_lindblad.floquet import PeriodicMatrixFunction, UnitaryFloquet, unitary_floquet
from floquet_lindblad.lifting import (
    GeneralizedState,
    block_convolve,
    conjugation_bandwidth,
    contraction_counterexample,
    generalized_lindbladian,
    lift_function,
    lifted_adjoint,
    lifted_conjugation,
    lifted_evaluation_residual,
    lifted_semigroup_factorized,
    lifted_trace,
    lindbladian_function,
    lm_component_identity_check,
    match_ladder,
    number_matrix,
    q_antisymmetry_check,
    right_shift_lifted,
    shift_matrix,
    spectral_ladder,
    tail_sums,
    truncation_diagnostics,
)
from floquet_lindblad.linalg import dissipator_superop, matrix_exp
from floquet_lindblad.wcl import BathSpectrum, DaviesGenerator, davies_generator, decompose_jumps

from conftest import SM, SX, SZ
from oracles import trapezoid_average


def test_shift_and_number_operators():
    N = 3
    assert np.array_equal(shift_matrix(0, N), np.eye(7))
    e = np.zeros(7)
    e[N + 1] = 1
    assert np.array_equal(shift_matrix(2, N) @ e, np.eye(7)[N + 3])
    prod = shift_matrix(1, N) @ shift_matrix(-1, N)
    assert prod[0, 0] == 0 and np.allclose(np.diag(prod)[1:], 1)
    Fz, F2 = number_matrix(N), shift_matrix(2, N)
    assert np.allclose(Fz @ F2 - F2 @ Fz, 2 * F2)
    with pytest.raises(InvalidInputError):
        shift_matrix(7, N)


def test_lift_function_examples():
    op = lift_function({0: np.eye(4)}, 2, 1.0)
    assert np.allclose(op.matrix, np.eye(20))
    A = {1: np.full((4, 4), 2.0), -1: np.full((4, 4), 3.0)}
    op = lift_function(A, 2, 1.0)
    assert np.allclose(op.block(1, 0), 2.0) and np.allclose(op.block(0, 1), 3.0)
    assert np.allclose(op.block(0, 0), 0)


def test_generalized_lindbladian_zero_and_n0():
    L = generalized_lindbladian({0: np.zeros((4, 4))}, 2, 2 * math.pi)
    assert np.allclose(np.sort(np.linalg.eigvals(L.matrix).imag), np.repeat(np.arange(-2, 3), 4))
    L0 = generalized_lindbladian({0: dissipator_superop(SM)}, 0, 1.0)
    assert np.allclose(L0.matrix, dissipator_superop(SM))


def amplitude_damping(gamma=0.3, w0=1.0, T=2.0):
    uf = unitary_floquet(PeriodicMatrixFunction.constant(T, 0.5 * w0 * SZ))
    K = gamma * dissipator_superop(SM)
    return uf, DaviesGenerator(K=K, hbar=uf.hbar)


def test_ladder_amplitude_damping():
    uf, dg = amplitude_damping()
    H = PeriodicMatrixFunction.constant(uf.period, uf.hbar)
    lad = spectral_ladder(dg, uf, 3, H=H, margin=0)
    assert len(lad.rows) == 28
    xi = np.linalg.eigvals(dg.lbar)
    expected = np.concatenate([xi - 1j * n * uf.omega for n in range(-3, 4)])
    assert np.max(match_ladder(expected, lad.eigenvalues)) < 1e-12
    assert lad.max_residual < 1e-12


def test_factorized_semigroup_trivial_p():
    uf, dg = amplitude_damping()
    N, tau = 3, 0.7
    W = lifted_semigroup_factorized(uf, dg, tau, N)
    L = generalized_lindbladian({0: dg.lbar}, N, uf.period)
    assert np.allclose(W.matrix, matrix_exp(tau * L.matrix), atol=1e-12)
    assert np.allclose(lifted_semigroup_factorized(uf, dg, 0.0, N).matrix, np.eye(W.matrix.shape[0]))


def test_lifted_trace_and_state_examples():
    T = 1.5
    f = lambda t: np.diag([0.5 + 0.3 * math.cos(2 * math.pi * t / T), 0.5 - 0.3 * math.cos(2 * math.pi * t / T)])
    s = GeneralizedState.from_function(f, T, 4)
    avg = trapezoid_average(lambda t: np.trace(f(t)), T)
    assert lifted_trace(s) == pytest.approx(avg, abs=1e-14)
    rho = np.diag([0.2, 0.8])
    e = GeneralizedState.embed(rho, 2, T)
    assert np.allclose(e.evaluate(0.3), rho) and lifted_trace(e) == pytest.approx(1.0)
    back = GeneralizedState.from_vector(s.vector(), 4, 2, T)
    assert np.array_equal(back.blocks, s.blocks)


def test_lifted_adjoint_and_convolution(drive_floquet):
    uf = drive_floquet
    N = 10
    p = GeneralizedState(np.stack([uf.p.coefficient(n) for n in range(-N, N + 1)]), uf.period)
    prod = block_convolve(lifted_adjoint(p), p)
    assert np.allclose(prod.block(0), np.eye(2), atol=1e-10)
    assert max(np.max(np.abs(prod.block(n))) for n in range(-5, 6) if n) < 1e-10
    z = 0.7 / 6
    assert np.allclose(p.block(1), np.diag([jv(1, -z), jv(1, z)]), atol=1e-8)


def test_right_shift_examples():
    T, N = 2.0, 3
    s = GeneralizedState.from_function(lambda t: np.diag([math.sin(math.pi * t), 1.0]), T, N)
    shifted = right_shift_lifted(0.4, N, T, 4).apply(s)
    assert np.allclose(shifted.evaluate(1.1), s.evaluate(0.7), atol=1e-12)
    assert np.allclose(right_shift_lifted(T, N, T, 4).matrix, np.eye(28), atol=1e-12)


def test_evaluation_homomorphism(benchmark):
    L = benchmark.model.L
    s = GeneralizedState.embed(np.diag([0.3, 0.7]), 12, L.period)
    times = np.linspace(0, L.period, 32, endpoint=False)
    assert lifted_evaluation_residual(L, s, times) < 1e-12


def test_lm_identity_examples(benchmark):
    uf, dg, H = benchmark.uf, benchmark.dg, benchmark.config.hamiltonian
    for m in (0, 1, -3):
        assert lm_component_identity_check(m, dg, uf, H) < 1e-8
    ufc, dgc = amplitude_damping()
    Hc = PeriodicMatrixFunction.constant(ufc.period, ufc.hbar)
    assert lm_component_identity_check(0, dgc, ufc, Hc) < 1e-12
    assert lm_component_identity_check(2, dgc, ufc, Hc) < 1e-12


def test_q_antisymmetry_examples(benchmark):
    ufc, _ = amplitude_damping()
    assert q_antisymmetry_check(ufc, 4) == 0.0
    # single harmonic p_t = diag(exp(i Omega t), 1): band-limited, so exact
    T = 1.0
    p = PeriodicMatrixFunction(T, {0: np.diag([0.0, 1.0]).astype(complex), 1: np.diag([1.0, 0.0]).astype(complex)})
    uf1 = UnitaryFloquet(p=p, hbar=np.zeros((2, 2), dtype=complex), quasienergies=np.zeros(2), solution=None)
    assert q_antisymmetry_check(uf1, 5, margin=2) < 1e-14
    assert q_antisymmetry_check(benchmark.uf, 8, margin=3) <= 1e-7


def test_lifted_conjugation_is_inverse_on_interior(benchmark):
    N = 14
    Pl, Pd = lifted_conjugation(benchmark.uf, N)
    bw = conjugation_bandwidth(benchmark.uf, 1e-12)
    prod = (Pl @ Pd).interior(bw)
    assert np.allclose(prod, np.eye(prod.shape[0]), atol=1e-10)


def test_truncation_diagnostics_examples(benchmark):
    ufc, dgc = amplitude_damping()
    d0 = truncation_diagnostics(ufc, dgc, 4, H=PeriodicMatrixFunction.constant(ufc.period, ufc.hbar))
    assert max(d0["P_tail"]) < 1e-12 and d0["L_reconstruction_error"] < 1e-12
    d = truncation_diagnostics(benchmark.uf, benchmark.dg, 10, H=benchmark.config.hamiltonian)
    tails = d["P_tail"]
    assert all(a >= b for a, b in zip(tails, tails[1:]))
    assert d["Pdot_residual"] < 1e-6
    assert tail_sums({0: np.eye(2), 3: 0.5 * np.eye(2), -5: 0.1 * np.eye(2)}, 4) == pytest.approx([0.6, 0.6, 0.1, 0.1])


def test_contraction_counterexample():
    out = contraction_counterexample(2.0)
    assert out["l2_norm"] == pytest.approx(1.0, abs=1e-10)
    assert out["max_value"] == pytest.approx(math.sqrt(30) / 4, abs=1e-10)
    assert out["argmax"] == pytest.approx(1.0)
    t1, t2 = out["exceeds_one_on"]
    assert t1 + t2 == pytest.approx(2.0)
    assert out["constant_state_isometry"] and not out["pointwise_contraction"]


def test_davies_ladder_residuals_interior(benchmark):
    b = benchmark
    bw = conjugation_bandwidth(b.uf)
    lad = spectral_ladder(b.dg, b.uf, b.N, H=b.config.hamiltonian, margin=bw)
    assert lad.max_residual < 1e-6
    lines = lad.to_csv().splitlines()
    assert lines[0] == "j,n,re_lambda,im_lambda,residual"
    assert len(lines) == 1 + 4 * (2 * (b.N - bw) + 1)


def test_flat_bath_factorization_matches_dense(benchmark):
    uf = benchmark.uf
    dg = davies_generator(decompose_jumps([SX], uf, 4), BathSpectrum.flat(0.05))
    N, tau = 10, 0.5 * uf.period
    L = generalized_lindbladian(lindbladian_function(dg, uf, benchmark.config.hamiltonian), N)
    W = lifted_semigroup_factorized(uf, dg, tau, N)
    diff = L.expm(tau).interior(3) - W.interior(3)
    assert np.max(np.abs(diff)) < 1e-6
