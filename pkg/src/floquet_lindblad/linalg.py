"""Dense matrix and superoperator primitives.

Operators are plain ``numpy`` complex arrays of shape ``(d, d)``.  Superoperators
are ``(d**2, d**2)`` arrays acting on column-stacked matrices::

    A = [[a, b],
         [c, d]]      ->   vec(A) = (a, c, b, d)^T

so that ``vec(l @ a @ r) = kron(r.T, l) @ vec(a)``.  Every superoperator in the
package follows this convention.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import (
    BranchCutError,
    DecompositionError,
    DimensionMismatchError,
    IllConditionedWarning,
    InvalidInputError,
    NumericRangeError,
)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# raising / lowering with respect to SIGMA_Z eigenvalues (+1 is the upper level)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)

BRANCH_NUDGE_ANGLE = 1e-8


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances shared by the structural checks."""

    structural: float = 1e-9
    psd: float = 1e-10
    cluster: float = 1e-9
    branch_cut: float = 1e-10

    @classmethod
    def from_dict(cls, data: dict | None) -> "Tolerances":
        if not data:
            return cls()
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidInputError(f"unknown tolerance keys: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in data.items()})


DEFAULT_TOL = Tolerances()


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a finite square complex array or raise InvalidInputError."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInputError(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return m


def vec(a: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(a).reshape(-1, order="F")


def unvec(v: np.ndarray, d: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    if d is None:
        d = int(round(np.sqrt(v.size)))
    if d * d != v.size:
        raise DimensionMismatchError(f"cannot unvec a vector of length {v.size}")
    return v.reshape((d, d), order="F")


def superop_dim(S: np.ndarray) -> int:
    n = S.shape[0]
    d = int(round(np.sqrt(n)))
    if d * d != n or S.shape != (n, n):
        raise DimensionMismatchError(f"not a superoperator shape: {S.shape}")
    return d


def apply_superop(S: np.ndarray, a: np.ndarray) -> np.ndarray:
    d = np.asarray(a).shape[0]
    return unvec(S @ vec(a), d)


def identity_superop(d: int) -> np.ndarray:
    return np.eye(d * d, dtype=complex)


# --------------------------------------------------------------------------- predicates


def is_hermitian(a: np.ndarray, tol: float = DEFAULT_TOL.structural) -> bool:
    a = np.asarray(a)
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol)


def is_unitary(a: np.ndarray, tol: float = DEFAULT_TOL.structural) -> bool:
    a = np.asarray(a)
    eye = np.eye(a.shape[0])
    return bool(np.max(np.abs(a @ a.conj().T - eye), initial=0.0) <= tol)


def is_positive_semidefinite(a: np.ndarray, tol: float = DEFAULT_TOL.psd) -> bool:
    a = np.asarray(a)
    if not is_hermitian(a, max(tol, DEFAULT_TOL.structural)):
        return False
    return bool(np.linalg.eigvalsh(0.5 * (a + a.conj().T)).min() >= -tol)


def is_density_matrix(rho: np.ndarray, tol: float = DEFAULT_TOL.structural) -> bool:
    rho = np.asarray(rho)
    return (
        is_hermitian(rho, tol)
        and is_positive_semidefinite(rho, tol)
        and abs(np.trace(rho) - 1.0) <= tol
    )


def check_density_matrix(rho, tol: float = DEFAULT_TOL.structural) -> np.ndarray:
    rho = as_matrix(rho, "density matrix")
    if not is_density_matrix(rho, tol):
        raise InvalidInputError("not a density matrix (Hermitian, PSD, unit trace)")
    return rho


# --------------------------------------------------------------------------- norms


def trace_norm(a: np.ndarray) -> float:
    """Sum of singular values, tr sqrt(a^dagger a)."""
    a = as_matrix(a)
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


def operator_norm(a: np.ndarray) -> float:
    """Largest singular value (norm induced by the Euclidean vector norm)."""
    a = as_matrix(a)
    return float(np.linalg.svd(a, compute_uv=False)[0]) if a.size else 0.0


# --------------------------------------------------------------------------- exp / log


def matrix_exp(a: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling and squaring with Pade approximants."""
    a = as_matrix(a)
    with np.errstate(over="ignore", invalid="ignore"):
        out = scipy.linalg.expm(a)
    if not np.all(np.isfinite(out)):
        raise NumericRangeError("matrix exponential overflowed")
    return out


def matrix_log_principal(
    a: np.ndarray,
    branch_nudge: bool = False,
    cut_tol: float = DEFAULT_TOL.branch_cut,
) -> np.ndarray:
    """Principal matrix logarithm, eigenvalue imaginary parts in (-pi, pi].

    Eigenvalues within ``cut_tol`` of the negative real axis raise
    :class:`BranchCutError` unless ``branch_nudge`` is set, in which case the
    spectrum is rotated by ``exp(-1j*eps)`` before the logarithm and the
    rotation is added back, mapping such eigenvalues to imaginary part ``+pi``.
    """
    a = as_matrix(a)
    d = a.shape[0]
    if d == 0:
        return a.copy()
    s = np.linalg.svd(a, compute_uv=False)
    if s[-1] <= np.finfo(float).eps * d * s[0]:
        raise DecompositionError("matrix is singular; logarithm undefined")
    lam = np.linalg.eigvals(a)
    on_cut = (lam.real < 0) & (np.abs(lam.imag) <= cut_tol)
    if np.any(on_cut):
        if not branch_nudge:
            raise BranchCutError(
                f"eigenvalue(s) {lam[on_cut]} on the negative real axis; "
                "pass branch_nudge=True to select the +pi branch"
            )
        eps = BRANCH_NUDGE_ANGLE
        out = scipy.linalg.logm(a * np.exp(-1j * eps)) + 1j * eps * np.eye(d)
    else:
        out = scipy.linalg.logm(a)
    out = np.asarray(out, dtype=complex)
    if not np.all(np.isfinite(out)):
        raise DecompositionError("matrix logarithm did not converge")
    return out


# --------------------------------------------------------------------------- superoperators


def sandwich_superop(l: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Superoperator of ``a -> l @ a @ r``."""
    l = np.asarray(l, dtype=complex)
    r = np.asarray(r, dtype=complex)
    if l.shape != r.shape:
        raise DimensionMismatchError(f"shapes {l.shape} and {r.shape} differ")
    return np.kron(r.T, l)


def left_superop(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    return sandwich_superop(a, np.eye(a.shape[0]))


def right_superop(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    return sandwich_superop(np.eye(a.shape[0]), a)


def ad_superop(h: np.ndarray) -> np.ndarray:
    """Superoperator of ``a -> [h, a]``."""
    return left_superop(h) - right_superop(h)


def hamiltonian_superop(h: np.ndarray) -> np.ndarray:
    """``-i ad h``."""
    return -1j * ad_superop(h)


def dissipator_superop(v: np.ndarray, w: np.ndarray | None = None) -> np.ndarray:
    """Superoperator of ``a -> v a w^dag - 1/2 {w^dag v, a}``; ``w`` defaults to ``v``."""
    v = np.asarray(v, dtype=complex)
    w = v if w is None else np.asarray(w, dtype=complex)
    wd = w.conj().T
    wdv = wd @ v
    return sandwich_superop(v, wd) - 0.5 * (left_superop(wdv) + right_superop(wdv))


def trace_functional(d: int) -> np.ndarray:
    """Row vector ``t`` with ``t @ vec(a) == tr(a)``."""
    return vec(np.eye(d)).astype(complex)


def tp_residual(S: np.ndarray, target: float = 1.0) -> float:
    """``max |S^dag(I) - target*I|`` in vectorized form.

    ``target=1`` tests trace preservation of a map; ``target=0`` tests that a
    generator annihilates the trace.
    """
    d = superop_dim(S)
    t = trace_functional(d)
    return float(np.max(np.abs(t @ S - target * t)))


def choi_matrix(S: np.ndarray) -> np.ndarray:
    """Choi matrix ``sum_ij |i><j| (x) S(|i><j|)``; PSD iff ``S`` is CP."""
    S = np.asarray(S, dtype=complex)
    d = superop_dim(S)
    choi = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            image = unvec(S[:, i + j * d], d)
            choi[i * d:(i + 1) * d, j * d:(j + 1) * d] = image
    return choi


def choi_min_eig(S: np.ndarray) -> float:
    c = choi_matrix(S)
    return float(np.linalg.eigvalsh(0.5 * (c + c.conj().T)).min())


def superop_from_function(f, d: int) -> np.ndarray:
    """Tabulate a linear map on d x d matrices as a superoperator."""
    S = np.zeros((d * d, d * d), dtype=complex)
    for k in range(d * d):
        e = np.zeros(d * d, dtype=complex)
        e[k] = 1.0
        S[:, k] = vec(f(unvec(e, d)))
    return S


# --------------------------------------------------------------------------- eigen


def _fix_phase(v: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    idx = np.flatnonzero(np.abs(v) > rtol * np.max(np.abs(v)))
    if idx.size == 0:
        return v
    c = v[idx[0]]
    return v * (abs(c) / c)


def eig_general(m: np.ndarray, cond_limit: float = 1e8):
    """Eigenvalues and unit right eigenvectors with a deterministic order.

    Eigenvalues are sorted by real part descending, then imaginary part
    ascending.  Each eigenvector has unit norm and its first non-negligible
    component real and positive.  An ill-conditioned eigenbasis (defective or
    nearly defective matrix) raises :class:`IllConditionedWarning`.
    """
    m = as_matrix(m)
    try:
        lam, vecs = np.linalg.eig(m)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(f"eigensolver failed: {exc}") from exc
    order = np.lexsort((lam.imag, -lam.real))
    lam = lam[order]
    vecs = vecs[:, order]
    for k in range(vecs.shape[1]):
        col = vecs[:, k] / np.linalg.norm(vecs[:, k])
        vecs[:, k] = _fix_phase(col)
    cond = eigenbasis_condition(vecs)
    if cond > cond_limit:
        warnings.warn(
            f"eigenbasis condition number {cond:.3e} exceeds {cond_limit:.1e}",
            IllConditionedWarning,
            stacklevel=2,
        )
    return lam, vecs


def eigenbasis_condition(vecs: np.ndarray) -> float:
    s = np.linalg.svd(vecs, compute_uv=False)
    if s[-1] == 0:
        return float("inf")
    return float(s[0] / s[-1])


# --------------------------------------------------------------------------- bases


def hermitian_basis(d: int) -> list[np.ndarray]:
    """Orthonormal Hermitian basis ``I/sqrt(d), F_1, ..., F_{d^2-1}``.

    The traceless elements are the generalized Gell-Mann matrices scaled so
    that ``tr(F_a F_b) = delta_ab``.
    """
    basis = [np.eye(d, dtype=complex) / np.sqrt(d)]
    for j in range(d):
        for k in range(j + 1, d):
            s = np.zeros((d, d), dtype=complex)
            s[j, k] = s[k, j] = 1 / np.sqrt(2)
            a = np.zeros((d, d), dtype=complex)
            a[j, k] = -1j / np.sqrt(2)
            a[k, j] = 1j / np.sqrt(2)
            basis += [s, a]
    for l in range(1, d):
        diag = np.zeros(d, dtype=complex)
        diag[:l] = 1
        diag[l] = -l
        basis.append(np.diag(diag) / np.sqrt(l * (l + 1)))
    return basis


# --------------------------------------------------------------------------- random


def random_matrix(rng: np.random.Generator, d: int) -> np.ndarray:
    return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))


def random_hermitian(rng: np.random.Generator, d: int) -> np.ndarray:
    a = random_matrix(rng, d)
    return 0.5 * (a + a.conj().T)


def random_density_matrix(rng: np.random.Generator, d: int) -> np.ndarray:
    g = random_matrix(rng, d)
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


# --------------------------------------------------------------------------- serialization


def matrix_to_json(a: np.ndarray) -> dict:
    a = np.asarray(a, dtype=complex)
    return {"rows": int(a.shape[0]), "re": a.real.tolist(), "im": a.imag.tolist()}


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        rows = int(obj["rows"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"malformed matrix object: {exc}") from exc
    if re.shape != (rows, rows) or im.shape != (rows, rows):
        raise InvalidInputError(
            f"matrix declares {rows} rows but re/im have shapes {re.shape}, {im.shape}"
        )
    return as_matrix(re + 1j * im)


def stack(mats: Sequence[np.ndarray]) -> np.ndarray:
    return np.stack([np.asarray(m, dtype=complex) for m in mats])
