"""Fourier lifting of periodic superoperator dynamics to a static block problem.

A generalized state is the list of Fourier components ``f_n`` (``|n| <= N``) of a
``T``-periodic matrix function.  A lifted operator ``sum_k A_k (x) F_k`` acts on
it as a block-Toeplitz matrix whose ``(m, n)`` block is ``A_{m-n}``.  Vectors are
laid out block by block, ``index = (n + N) d^2 + i``, so ``A (x) F`` is stored as
``np.kron(F, A)``.

Identities of the infinite ladder only survive truncation on the interior
window ``|n| <= N - M`` where ``M`` is the operative Fourier bandwidth.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DimensionMismatchError, InvalidInputError, TruncationWarning
from .floquet import PeriodicMatrixFunction, UnitaryFloquet, fourier_coefficients
from .linalg import (
    eig_general,
    eigenbasis_condition,
    hamiltonian_superop,
    matrix_exp,
    unvec,
    vec,
)
from .model import FactorizedModel, conjugation_coefficients
from .wcl import DaviesGenerator, full_lindbladian_at

BANDWIDTH_TOL = 1e-6

# --------------------------------------------------------------------------- ladder operators


def shift_matrix(n: int, N: int) -> np.ndarray:
    """Truncated ``F_n: e_m -> e_{m+n}``; images outside the window are dropped."""
    if abs(n) > 2 * N:
        raise InvalidInputError(f"|n|={abs(n)} exceeds 2N={2 * N}")
    return np.eye(2 * N + 1, k=-n, dtype=complex)


def number_matrix(N: int) -> np.ndarray:
    """``F_z = diag(-N, ..., N)``."""
    return np.diag(np.arange(-N, N + 1)).astype(complex)


def window(N: int) -> np.ndarray:
    return np.arange(-N, N + 1)


# --------------------------------------------------------------------------- states


@dataclass(frozen=True, eq=False)
class GeneralizedState:
    """Fourier components ``f_n`` for ``n = -N..N``, stored as an array ``(2N+1, d, d)``."""

    blocks: np.ndarray
    period: float

    def __post_init__(self):
        b = np.asarray(self.blocks)
        if b.ndim != 3 or b.shape[0] % 2 != 1 or b.shape[1] != b.shape[2]:
            raise DimensionMismatchError(f"blocks must have shape (2N+1, d, d), got {b.shape}")

    @property
    def N(self) -> int:
        return (self.blocks.shape[0] - 1) // 2

    @property
    def dim(self) -> int:
        return self.blocks.shape[1]

    @property
    def omega(self) -> float:
        return 2 * math.pi / self.period

    def block(self, n: int) -> np.ndarray:
        return self.blocks[n + self.N]

    def evaluate(self, t: float) -> np.ndarray:
        """``f(t) = sum_n f_n exp(i n Omega t)``."""
        phases = np.exp(1j * self.omega * window(self.N) * t)
        return np.tensordot(phases, self.blocks, axes=1)

    def vector(self) -> np.ndarray:
        return np.concatenate([vec(b) for b in self.blocks])

    def edge_mass(self, margin: int) -> float:
        """Fraction of the Frobenius mass carried by blocks with ``|n| > N - margin``."""
        norms = np.sum(np.abs(self.blocks) ** 2, axis=(1, 2))
        total = norms.sum()
        if total == 0:
            return 0.0
        edge = np.abs(window(self.N)) > self.N - margin
        return float(math.sqrt(norms[edge].sum() / total))

    @classmethod
    def from_vector(cls, v: np.ndarray, N: int, d: int, period: float) -> "GeneralizedState":
        v = np.asarray(v, dtype=complex)
        if v.shape != ((2 * N + 1) * d * d,):
            raise DimensionMismatchError(f"vector length {v.shape} does not match N={N}, d={d}")
        blocks = np.stack([unvec(c, d) for c in v.reshape(2 * N + 1, d * d)])
        return cls(blocks, period)

    @classmethod
    def embed(cls, rho: np.ndarray, N: int, period: float) -> "GeneralizedState":
        """``rho (x) e_0``: the constant function ``t -> rho``."""
        rho = np.asarray(rho, dtype=complex)
        blocks = np.zeros((2 * N + 1,) + rho.shape, dtype=complex)
        blocks[N] = rho
        return cls(blocks, period)

    @classmethod
    def from_function(
        cls, f: Callable[[float], np.ndarray], period: float, N: int, quadrature_points: int | None = None
    ) -> "GeneralizedState":
        coeffs = fourier_coefficients(f, period, N, quadrature_points)
        return cls(np.stack([coeffs[n] for n in window(N)]), period)


def lifted_trace(s: GeneralizedState) -> complex:
    """Period average of ``tr f(t)``, that is ``tr f_0``."""
    return complex(np.trace(s.block(0)))


def lifted_adjoint(s: GeneralizedState) -> GeneralizedState:
    """Pointwise adjoint: ``(f^#)_n = (f_{-n})^dag``."""
    return GeneralizedState(s.blocks[::-1].conj().transpose(0, 2, 1).copy(), s.period)


def block_convolve(s: GeneralizedState, r: GeneralizedState, tol: float = 1e-12) -> GeneralizedState:
    """Pointwise product: ``(fg)_m = sum_k f_k g_{m-k}``, truncated to the window of ``s``."""
    if s.N != r.N or s.dim != r.dim:
        raise DimensionMismatchError("states must share truncation and dimension")
    N, d = s.N, s.dim
    full = np.zeros((4 * N + 1, d, d), dtype=complex)
    for i in range(2 * N + 1):
        for j in range(2 * N + 1):
            full[i + j] += s.blocks[i] @ r.blocks[j]
    kept = full[N : 3 * N + 1]
    dropped = np.concatenate([full[:N], full[3 * N + 1 :]])
    scale = max(1.0, float(np.max(np.abs(kept))))
    if dropped.size and float(np.max(np.abs(dropped))) > tol * scale:
        warnings.warn(
            f"product bandwidth exceeds N={N}; dropped components up to "
            f"{float(np.max(np.abs(dropped))):.3e}",
            TruncationWarning,
            stacklevel=2,
        )
    return GeneralizedState(kept.copy(), s.period)


# --------------------------------------------------------------------------- lifted operators


@dataclass(frozen=True, eq=False)
class LiftedOperator:
    """Dense block operator on ``(2N+1)`` blocks of length ``dsq``."""

    matrix: np.ndarray
    N: int
    dsq: int
    period: float

    @property
    def omega(self) -> float:
        return 2 * math.pi / self.period

    def block(self, m: int, n: int) -> np.ndarray:
        i, j = (m + self.N) * self.dsq, (n + self.N) * self.dsq
        return self.matrix[i : i + self.dsq, j : j + self.dsq]

    def apply(self, s: GeneralizedState) -> GeneralizedState:
        if s.N != self.N or s.dim**2 != self.dsq:
            raise DimensionMismatchError("state does not match operator layout")
        return GeneralizedState.from_vector(self.matrix @ s.vector(), self.N, s.dim, self.period)

    def compose(self, other: "LiftedOperator") -> "LiftedOperator":
        if (other.N, other.dsq) != (self.N, self.dsq):
            raise DimensionMismatchError("operators do not share a layout")
        return LiftedOperator(self.matrix @ other.matrix, self.N, self.dsq, self.period)

    def __matmul__(self, other: "LiftedOperator") -> "LiftedOperator":
        return self.compose(other)

    def interior_indices(self, margin: int) -> np.ndarray:
        keep = np.abs(window(self.N)) <= self.N - margin
        return np.flatnonzero(np.repeat(keep, self.dsq))

    def interior(self, margin: int) -> np.ndarray:
        idx = self.interior_indices(margin)
        return self.matrix[np.ix_(idx, idx)]

    def expm(self, tau: float) -> "LiftedOperator":
        return LiftedOperator(matrix_exp(tau * self.matrix), self.N, self.dsq, self.period)


def _as_coeffs(A) -> tuple[dict[int, np.ndarray], float | None]:
    if isinstance(A, PeriodicMatrixFunction):
        return A.coeffs, A.period
    return dict(A), None


def lift_function(A, N: int, period: float | None = None) -> LiftedOperator:
    """``sum_k A_k (x) F_k``: block ``(m, n)`` equals ``A_{m-n}``."""
    coeffs, p = _as_coeffs(A)
    period = period if period is not None else p
    if period is None:
        raise InvalidInputError("period required when lifting a bare coefficient dict")
    dsq = np.asarray(next(iter(coeffs.values()))).shape[0]
    M = np.zeros(((2 * N + 1) * dsq,) * 2, dtype=complex)
    for k in sorted(coeffs):
        if abs(k) <= 2 * N:
            M += np.kron(shift_matrix(k, N), coeffs[k])
    return LiftedOperator(M, N, dsq, period)


def generalized_lindbladian(L, N: int, period: float | None = None) -> LiftedOperator:
    """``sum_k L_k (x) F_k - i Omega I (x) F_z``."""
    base = lift_function(L, N, period)
    dsq = base.dsq
    drift = np.kron(number_matrix(N), np.eye(dsq))
    return LiftedOperator(base.matrix - 1j * base.omega * drift, N, dsq, base.period)


def right_shift_lifted(tau: float, N: int, period: float, dsq: int) -> LiftedOperator:
    """``I (x) exp(-i tau Omega F_z)``, the lift of ``f -> f(. - tau)``."""
    omega = 2 * math.pi / period
    phases = np.exp(-1j * tau * omega * window(N))
    return LiftedOperator(np.kron(np.diag(phases), np.eye(dsq)), N, dsq, period)


# --------------------------------------------------------------------------- Floquet pieces


def _pieces(uf, dg=None):
    """``(P_n, Pinv_n, Lbar, period)`` from a model or a ``(UnitaryFloquet, DaviesGenerator)`` pair."""
    if isinstance(uf, FactorizedModel):
        return uf.P.coeffs, uf.P_inv.coeffs, uf.lbar, uf.period
    P, Pinv = conjugation_coefficients(uf)
    return P, Pinv, (dg.lbar if dg is not None else None), uf.period


def conjugation_bandwidth(uf, rel_tol: float = BANDWIDTH_TOL) -> int:
    """Operative bandwidth of ``P_t`` at relative level ``rel_tol``."""
    P, _, _, period = _pieces(uf)
    return PeriodicMatrixFunction(period, P).operative_bandwidth(rel_tol)


def default_truncation(uf) -> int:
    return max(8, 2 * conjugation_bandwidth(uf) + 2)


def lindbladian_function(dg: DaviesGenerator, uf: UnitaryFloquet, H: PeriodicMatrixFunction) -> PeriodicMatrixFunction:
    """``L_t`` with coefficients ``-i ad H_m + sum_{a+b=m} P_a K Pinv_b``."""
    return FactorizedModel.from_davies(uf, dg, H).L


def lifted_conjugation(uf, N: int) -> tuple[LiftedOperator, LiftedOperator]:
    """``(P~, P~^dag)``, the lifts of ``P_t`` and of ``P_t^{-1}`` (its adjoint when ``p_t`` is unitary)."""
    P, Pinv, _, period = _pieces(uf)
    return lift_function(P, N, period), lift_function(Pinv, N, period)


def lifted_semigroup_factorized(uf, dg: DaviesGenerator | None, tau: float, N: int) -> LiftedOperator:
    """``P~ (exp(tau Lbar) (x) exp(-i tau Omega F_z)) P~^dag``."""
    if tau < 0:
        raise InvalidInputError("tau must be non-negative")
    _, _, lbar, period = _pieces(uf, dg)
    Pl, Pd = lifted_conjugation(uf, N)
    phases = np.exp(-2j * math.pi * tau / period * window(N))
    middle = np.kron(np.diag(phases), matrix_exp(tau * lbar))
    return LiftedOperator(Pl.matrix @ middle @ Pd.matrix, N, Pl.dsq, period)


# --------------------------------------------------------------------------- spectral ladder


@dataclass(frozen=True, eq=False)
class SpectralLadder:
    base_eigenvalues: np.ndarray
    base_eigenvectors: np.ndarray
    omega: float
    N: int
    margin: int
    rows: list[tuple[int, int, complex, float]] = field(default_factory=list)
    condition: float = 1.0

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([r[2] for r in self.rows])

    @property
    def max_residual(self) -> float:
        return max((r[3] for r in self.rows), default=0.0)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["j", "n", "re_lambda", "im_lambda", "residual"])
        for j, n, lam, res in self.rows:
            w.writerow([j, n, "%.17g" % lam.real, "%.17g" % lam.imag, "%.17g" % res])
        return buf.getvalue()


def ladder_eigenvector(uf_P: dict[int, np.ndarray], phi: np.ndarray, n: int, N: int) -> np.ndarray:
    """``P~ (phi (x) e_n)``: block ``m`` is ``P_{m-n} phi``."""
    dsq = phi.shape[0]
    out = np.zeros((2 * N + 1) * dsq, dtype=complex)
    for m in window(N):
        c = uf_P.get(int(m - n))
        if c is not None:
            i = (m + N) * dsq
            out[i : i + dsq] = c @ phi
    return out


def spectral_ladder(
    dg: DaviesGenerator | None,
    uf,
    N: int,
    H: PeriodicMatrixFunction | None = None,
    margin: int | None = None,
) -> SpectralLadder:
    """Point spectrum ``xi_j - i n Omega`` of the generalized Lindbladian.

    Residuals ``|L~ phi - lambda phi| / |phi|`` are measured against the
    truncated ``L~`` when ``L_t`` is available: ``uf`` is a
    :class:`FactorizedModel`, or the drive ``H`` is given.
    """
    P, _, lbar, period = _pieces(uf, dg)
    omega = 2 * math.pi / period
    xi, vecs = eig_general(lbar)
    if margin is None:
        margin = conjugation_bandwidth(uf)
    if isinstance(uf, FactorizedModel):
        Lt = generalized_lindbladian(uf.L, N)
    elif H is not None:
        Lt = generalized_lindbladian(lindbladian_function(dg, uf, H), N)
    else:
        Lt = None
    rows = []
    for n in range(-(N - margin), N - margin + 1):
        for j in range(len(xi)):
            lam = xi[j] - 1j * n * omega
            res = float("nan")
            if Lt is not None:
                phi = ladder_eigenvector(P, vecs[:, j], n, N)
                res = float(np.linalg.norm(Lt.matrix @ phi - lam * phi) / np.linalg.norm(phi))
            rows.append((j, n, complex(lam), res))
    return SpectralLadder(
        base_eigenvalues=xi,
        base_eigenvectors=vecs,
        omega=omega,
        N=N,
        margin=margin,
        rows=rows,
        condition=eigenbasis_condition(vecs),
    )


def match_ladder(predicted: np.ndarray, computed: np.ndarray) -> np.ndarray:
    """Relative distance ``|lambda - nearest| / max(1, |lambda|)`` for each predicted value."""
    computed = np.asarray(computed)
    out = np.empty(len(predicted))
    for i, lam in enumerate(predicted):
        out[i] = np.min(np.abs(computed - lam)) / max(1.0, abs(lam))
    return out


# --------------------------------------------------------------------------- identities


def lm_component_identity_check(
    m: int,
    dg: DaviesGenerator,
    uf: UnitaryFloquet,
    H: PeriodicMatrixFunction,
    quadrature_points: int = 256,
) -> float:
    """``|L_m - sum_n P_n (Lbar + i n Omega) Pinv_{m-n}|_max`` with ``L_m`` by quadrature of ``L_t``."""
    times = np.arange(quadrature_points) * (uf.period / quadrature_points)
    phases = np.exp(-1j * m * uf.omega * times)
    Lm = sum(ph * full_lindbladian_at(t, dg, uf, H) for ph, t in zip(phases, times)) / quadrature_points
    P, Pinv = conjugation_coefficients(uf)
    lbar = dg.lbar
    eye = np.eye(lbar.shape[0])
    rhs = np.zeros_like(lbar)
    for n in sorted(P):
        c = Pinv.get(m - n)
        if c is not None:
            rhs = rhs + P[n] @ (lbar + 1j * n * uf.omega * eye) @ c
    return float(np.max(np.abs(Lm - rhs)))


def q_antisymmetry_check(uf: UnitaryFloquet, N: int, margin: int | None = None) -> float:
    """Interior ``|P~ Q^dag + Q P~^dag|_max`` with ``Q = i Omega sum_n n P_n (x) F_n``.

    The default margin is the bandwidth of ``P_t`` at ``1e-12`` relative level,
    since ``Q`` weights the tail coefficients by ``n Omega``.
    """
    P, Pinv = conjugation_coefficients(uf)
    if margin is None:
        margin = min(N, PeriodicMatrixFunction(uf.period, P).operative_bandwidth(1e-12))
    Q = {n: 1j * uf.omega * n * c for n, c in P.items()}
    # lift of the pointwise adjoint of Pdot_t: coefficient k is i k Omega Pinv_k
    Qd = {k: 1j * uf.omega * k * c for k, c in Pinv.items()}
    Pl = lift_function(P, N, uf.period)
    Pd = lift_function(Pinv, N, uf.period)
    Ql = lift_function(Q, N, uf.period)
    Qdl = lift_function(Qd, N, uf.period)
    total = Pl @ Qdl
    total = LiftedOperator(total.matrix + (Ql @ Pd).matrix, N, Pl.dsq, uf.period)
    inner = total.interior(margin)
    return float(np.max(np.abs(inner))) if inner.size else 0.0


def lifted_evaluation_residual(
    A: PeriodicMatrixFunction, s: GeneralizedState, times
) -> float:
    """``max_t |evaluate(A~ s, t) - A_t(evaluate(s, t))|``."""
    out = lift_function(A, s.N).apply(s)
    d = s.dim
    res = 0.0
    for t in times:
        direct = unvec(A(t) @ vec(s.evaluate(t)), d)
        res = max(res, float(np.max(np.abs(out.evaluate(t) - direct))))
    return res


# --------------------------------------------------------------------------- diagnostics


def tail_sums(coeffs: dict[int, np.ndarray], M_max: int) -> list[float]:
    """``sum_{|n| > M} |c_n|_max`` for ``M = 1..M_max``."""
    norms = {n: float(np.max(np.abs(c))) for n, c in coeffs.items()}
    return [sum(v for n, v in norms.items() if abs(n) > M) for M in range(1, M_max + 1)]


def pdot_residual(uf: UnitaryFloquet, H: PeriodicMatrixFunction, times, h: float | None = None) -> float:
    """Central-difference ``dP_t/dt`` against ``-i ad(H_t - P_t(Hbar)) P_t``."""
    h = h if h is not None else uf.period * 1e-4
    res = 0.0
    for t in times:
        def P(s):
            p = uf.p(s)
            return np.kron(p.conj(), p)

        fd = (P(t + h) - P(t - h)) / (2 * h)
        p = uf.p(t)
        heff = H(t) - p @ uf.hbar @ p.conj().T
        exact = hamiltonian_superop(heff) @ P(t)
        res = max(res, float(np.max(np.abs(fd - exact))))
    return res


def truncation_diagnostics(
    uf: UnitaryFloquet,
    dg: DaviesGenerator,
    N: int,
    H: PeriodicMatrixFunction | None = None,
    grid_points: int = 64,
) -> dict:
    """Tail sums, reconstruction errors and the ``dP/dt`` identity residual."""
    P, Pinv = conjugation_coefficients(uf)
    times = np.arange(grid_points) * (uf.period / grid_points)
    window_P = {n: c for n, c in P.items() if abs(n) <= N}
    rec_P = 0.0
    for t in times:
        p = uf.p(t)
        exact = np.kron(p.conj(), p)
        approx = sum(c * np.exp(1j * n * uf.omega * t) for n, c in window_P.items())
        rec_P = max(rec_P, float(np.max(np.abs(approx - exact))))
    report = {
        "N": N,
        "p_bandwidth": uf.p.operative_bandwidth(BANDWIDTH_TOL),
        "P_bandwidth": PeriodicMatrixFunction(uf.period, P).operative_bandwidth(BANDWIDTH_TOL),
        "p_tail": tail_sums(uf.p.coeffs, N),
        "P_tail": tail_sums(P, N),
        "p_truncation_error": uf.p.truncation_error,
        "P_reconstruction_error": rec_P,
    }
    if H is not None:
        L = lindbladian_function(dg, uf, H)
        window_L = {n: c for n, c in L.coeffs.items() if abs(n) <= N}
        rec_L = 0.0
        for t in times:
            approx = sum(c * np.exp(1j * n * uf.omega * t) for n, c in window_L.items())
            rec_L = max(rec_L, float(np.max(np.abs(approx - L(t)))))
        report["L_tail"] = tail_sums(L.coeffs, N)
        report["L_reconstruction_error"] = rec_L
        report["Pdot_residual"] = pdot_residual(uf, H, times[:8])
    return report


# --------------------------------------------------------------------------- counterexample


def contraction_counterexample(period: float = 1.0) -> dict:
    """Multiplication by ``xi(t) = -(sqrt(30)/T^2)(t - T) t``.

    Its mean square over a period is 1, so it maps constant states
    isometrically in the period-averaged norm, while its peak value
    ``sqrt(30)/4`` exceeds 1, so it is not a pointwise trace-norm contraction.
    The values are computed exactly from the polynomial.
    """
    T = float(period)
    c = math.sqrt(30) / T**2
    xi = np.polynomial.Polynomial([0.0, c * T, -c])
    sq = (xi * xi).integ()
    l2 = math.sqrt((sq(T) - sq(0.0)) / T)
    crit = xi.deriv().roots()
    candidates = [0.0, T] + [float(r.real) for r in np.atleast_1d(crit) if 0 <= r.real <= T]
    peak = max(float(xi(s)) for s in candidates)
    above = (xi - 1.0).roots()
    above = sorted(float(r.real) for r in above if abs(r.imag) < 1e-14)
    return {
        "l2_norm": l2,
        "max_value": peak,
        "argmax": float(candidates[int(np.argmax([xi(s) for s in candidates]))]),
        "exceeds_one_on": above,
        "constant_state_isometry": abs(l2 - 1.0) <= 1e-10,
        "pointwise_contraction": peak <= 1.0,
    }
