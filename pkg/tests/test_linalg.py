import json
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from floquet_lindblad.errors import BranchCutError, DecompositionError, IllConditionedWarning, InvalidInputError
from floquet_lindblad.linalg import (
    apply_superop,
    choi_matrix,
    choi_min_eig,
    dissipator_superop,
    eig_general,
    hamiltonian_superop,
    matrix_exp,
    matrix_from_json,
    matrix_log_principal,
    matrix_to_json,
    operator_norm,
    random_density_matrix,
    sandwich_superop,
    superop_from_function,
    tp_residual,
    trace_norm,
    unvec,
    vec,
)

from conftest import SX, SZ
from oracles import jacobi_singular_values

complex_entries = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


def matrices(d):
    return st.lists(complex_entries, min_size=d * d, max_size=d * d).map(
        lambda xs: np.array(xs, dtype=complex).reshape(d, d)
    )


def test_trace_norm_examples():
    assert trace_norm(np.eye(3)) == pytest.approx(3.0, abs=1e-14)
    assert trace_norm(SX) == pytest.approx(2.0, abs=1e-14)
    assert trace_norm(np.zeros((2, 2))) == 0.0
    assert trace_norm(np.array([[0, 2], [0, 0]])) == pytest.approx(2.0, abs=1e-14)


def test_trace_norm_matches_jacobi_oracle():
    rng = np.random.default_rng(7)
    for d in (2, 3, 5):
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        s = jacobi_singular_values(a)
        assert trace_norm(a) == pytest.approx(s.sum(), rel=1e-12)
        assert operator_norm(a) == pytest.approx(s[0], rel=1e-12)


def test_vectorization_convention():
    rng = np.random.default_rng(1)
    l, a, r = (rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)) for _ in range(3))
    assert np.allclose(sandwich_superop(l, r) @ vec(a), vec(l @ a @ r), atol=1e-12)
    assert np.array_equal(unvec(vec(a)), a)


def test_matrix_exp_closed_forms():
    assert np.allclose(matrix_exp(np.zeros((2, 2))), np.eye(2))
    t = 0.83
    expected = math.cos(t) * np.eye(2) - 1j * math.sin(t) * SX
    assert np.allclose(matrix_exp(-1j * t * SX), expected, atol=1e-14)
    nil = np.array([[0, 1], [0, 0]], dtype=complex)
    assert np.allclose(matrix_exp(nil), np.eye(2) + nil, atol=1e-15)


def test_matrix_log_round_trip():
    rng = np.random.default_rng(3)
    b = 0.3 * (rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    assert np.allclose(matrix_log_principal(matrix_exp(b)), b, atol=1e-12)
    assert np.allclose(matrix_log_principal(np.eye(3)), 0, atol=1e-15)


def test_matrix_log_branch_cut():
    with pytest.raises(BranchCutError):
        matrix_log_principal(-np.eye(2))
    out = matrix_log_principal(-np.eye(2), branch_nudge=True)
    assert np.allclose(out, 1j * math.pi * np.eye(2), atol=1e-7)
    with pytest.raises(DecompositionError):
        matrix_log_principal(np.diag([1.0, 0.0]))


def test_choi_examples():
    ident = np.eye(4)
    assert np.allclose(np.linalg.eigvalsh(choi_matrix(ident)), [0, 0, 0, 2], atol=1e-14)
    transpose = superop_from_function(lambda a: a.T, 2)
    assert choi_min_eig(transpose) == pytest.approx(-1.0, abs=1e-14)
    assert choi_min_eig(sandwich_superop(SZ, SZ)) >= -1e-14


def test_generators_are_trace_annihilating():
    v = np.array([[0, 1], [0, 0]], dtype=complex)
    assert tp_residual(dissipator_superop(v), target=0.0) < 1e-15
    assert tp_residual(hamiltonian_superop(SZ), target=0.0) < 1e-15
    rho = np.diag([0.25, 0.75]).astype(complex)
    out = apply_superop(dissipator_superop(v), rho)
    assert np.allclose(out, np.diag([0.75, -0.75]))


def test_eig_general_order_and_phase():
    lam, vecs = eig_general(np.diag([1.0, 3.0, 2.0]))
    assert np.allclose(lam, [3, 2, 1])
    for k in range(3):
        assert np.linalg.norm(vecs[:, k]) == pytest.approx(1.0)
        first = vecs[np.flatnonzero(np.abs(vecs[:, k]) > 1e-12)[0], k]
        assert first.imag == 0 and first.real > 0


def test_eig_general_warns_on_defective_matrix():
    with pytest.warns(IllConditionedWarning):
        eig_general(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_matrix_json_round_trip_is_bit_exact():
    rng = np.random.default_rng(11)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    back = matrix_from_json(json.loads(json.dumps(matrix_to_json(a))))
    assert np.array_equal(back, a)
    with pytest.raises(InvalidInputError):
        matrix_from_json({"rows": 3, "re": [[1, 0], [0, 1]]})


def test_non_finite_input_rejected():
    with pytest.raises(InvalidInputError):
        trace_norm(np.array([[np.nan, 0], [0, 1]]))


@settings(max_examples=200, deadline=None)
@given(matrices(3), matrices(3))
def test_norm_inequalities_property(a, b):
    tn = trace_norm
    assert operator_norm(a) <= tn(a) * (1 + 1e-12) + 1e-12
    assert tn(a @ b) <= operator_norm(a) * tn(b) * (1 + 1e-10) + 1e-10


@settings(max_examples=50, deadline=None)
@given(matrices(2))
def test_conjugation_is_cp_property(a):
    assert choi_min_eig(sandwich_superop(a, a.conj().T)) >= -1e-9 * (1 + operator_norm(a) ** 2)


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_trace_pairing_property(seed):
    rng = np.random.default_rng(seed)
    rho = random_density_matrix(rng, 3)
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.eigvalsh(rho).min() >= -1e-12
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert trace_norm(rho) == pytest.approx(1.0, abs=1e-12)
