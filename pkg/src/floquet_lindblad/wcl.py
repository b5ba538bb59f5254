"""Weak-coupling generators for periodically driven systems.

Two generator classes are built here:

* the fast-driving Davies generator ``K`` built from the Floquet-Bohr
  decomposition of the coupling operators, with the full Lindbladian
  ``L_t = -i ad H_t + P_t K P_t^{-1}`` and averaged generator
  ``Lbar = -i ad Hbar + K``;
* the adiabatic generator, built from the instantaneous Bohr decomposition
  of ``H_t``.

Jump labelling: ``[Hbar, S_{kqw}] = w S_{kqw}``, so ``S_{kqw}`` moves the
system up by ``w + q*Omega``.  The bath absorbs the opposite amount, and the
rate of that jump is ``gamma(-(w + q*Omega))``.  With the KMS convention
``gamma(-w) = exp(-beta w) gamma(w)`` this drives populations to the Gibbs
ratio ``exp(-beta * w)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DegeneracyWarning, InvalidBathError, InvalidInputError
from .floquet import PeriodicMatrixFunction, UnitaryFloquet, coefficients_from_grid
from .linalg import (
    DEFAULT_TOL,
    ad_superop,
    as_matrix,
    dissipator_superop,
    hamiltonian_superop,
    hermitian_basis,
    is_hermitian,
    matrix_to_json,
    sandwich_superop,
    tp_residual,
)

# --------------------------------------------------------------------------- bath


@dataclass(frozen=True, eq=False)
class BathSpectrum:
    """Matrix-valued bath spectral function ``omega -> gamma_{kk'}(omega)``.

    Built-ins are a scalar profile times a fixed PSD coupling matrix.
    """

    evaluator: Callable[[float], np.ndarray]
    n_couplings: int
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __call__(self, omega: float) -> np.ndarray:
        g = np.asarray(self.evaluator(float(omega)), dtype=complex)
        return g.reshape(self.n_couplings, self.n_couplings)

    @staticmethod
    def _coupling(n_couplings: int, coupling_matrix) -> np.ndarray:
        if coupling_matrix is None:
            return np.eye(n_couplings, dtype=complex)
        m = as_matrix(coupling_matrix, "coupling_matrix")
        if m.shape != (n_couplings, n_couplings):
            raise InvalidInputError(f"coupling_matrix must be {n_couplings}x{n_couplings}")
        return m

    @classmethod
    def flat(cls, g: float = 1.0, n_couplings: int = 1, coupling_matrix=None) -> "BathSpectrum":
        G = cls._coupling(n_couplings, coupling_matrix)
        return cls(lambda w: g * G, n_couplings, "flat", {"g": g})

    @classmethod
    def ohmic(
        cls,
        g: float,
        beta: float,
        cutoff: float = math.inf,
        n_couplings: int = 1,
        coupling_matrix=None,
    ) -> "BathSpectrum":
        """``g w (1 + coth(beta w / 2)) / 2 * exp(-|w| / cutoff)``, equal to ``g/beta`` at 0."""
        if not beta > 0:
            raise InvalidInputError(f"ohmic bath needs beta > 0, got {beta}")
        if not cutoff > 0:
            raise InvalidInputError(f"ohmic bath needs cutoff > 0, got {cutoff}")
        G = cls._coupling(n_couplings, coupling_matrix)

        def profile(w: float) -> float:
            if w == 0.0:
                return g / beta
            x = beta * w
            # w / (1 - exp(-beta w)), stable for both signs
            base = w / -math.expm1(-x) if x > -700 else -w * math.exp(x)
            return g * base * math.exp(-abs(w) / cutoff)

        return cls(lambda w: profile(w) * G, n_couplings, "ohmic",
                   {"g": g, "beta": beta, "cutoff": cutoff})

    @classmethod
    def from_config(cls, obj: dict, n_couplings: int = 1) -> "BathSpectrum":
        kind = obj.get("type")
        coupling = obj.get("coupling_matrix")
        if coupling is not None:
            coupling = np.asarray(coupling["re"]) + 1j * np.asarray(coupling.get("im", 0.0))
        if kind == "flat":
            return cls.flat(float(obj.get("g", 1.0)), n_couplings, coupling)
        if kind == "ohmic":
            return cls.ohmic(
                float(obj.get("g", 1.0)),
                float(obj["beta"]),
                float(obj.get("cutoff", math.inf)),
                n_couplings,
                coupling,
            )
        raise InvalidInputError(f"unknown bath type {kind!r}")

    def to_json(self) -> dict:
        return {"type": self.kind, **self.params}


def check_rate_matrix(gamma: np.ndarray, omega: float, tol: float = DEFAULT_TOL.psd) -> None:
    if not is_hermitian(gamma, tol * max(1.0, float(np.max(np.abs(gamma))))):
        raise InvalidBathError(f"gamma({omega}) is not Hermitian")
    lo = float(np.linalg.eigvalsh(0.5 * (gamma + gamma.conj().T)).min())
    if lo < -tol * max(1.0, float(np.max(np.abs(gamma)))):
        raise InvalidBathError(f"gamma({omega}) is not PSD (min eigenvalue {lo:.3e})")


# --------------------------------------------------------------------------- Bohr spectra


def _cluster(values: np.ndarray, tol: float) -> list[list[int]]:
    order = np.argsort(values, kind="stable")
    groups: list[list[int]] = []
    for i in order:
        if groups and values[i] - values[groups[-1][-1]] <= tol:
            groups[-1].append(int(i))
        else:
            groups.append([int(i)])
    return groups


def spectral_levels(h: np.ndarray, tol: float = DEFAULT_TOL.cluster):
    """Distinct eigenvalues of Hermitian ``h`` (ascending) and their projectors."""
    energies, vecs = np.linalg.eigh(0.5 * (h + h.conj().T))
    groups = _cluster(energies, tol)
    levels = np.array([energies[g].mean() for g in groups])
    projectors = [vecs[:, g] @ vecs[:, g].conj().T for g in groups]
    if len(levels) > 1:
        gaps = np.diff(levels)
        if np.any(gaps <= 100 * tol):
            warnings.warn(
                f"near-degenerate levels: smallest gap {gaps.min():.3e} "
                f"vs cluster tolerance {tol:.1e}",
                DegeneracyWarning,
                stacklevel=2,
            )
    return levels, projectors


def _frequencies_from_levels(levels: np.ndarray, tol: float) -> np.ndarray:
    diffs = np.abs(np.subtract.outer(levels, levels)).ravel()
    positive = diffs[diffs > tol]
    reps = [float(np.mean(positive[g])) for g in _cluster(positive, tol)] if positive.size else []
    reps = sorted(reps)
    return np.array([-w for w in reversed(reps)] + [0.0] + reps)


def bohr_quasifrequencies(hbar: np.ndarray, tol: float = DEFAULT_TOL.cluster) -> np.ndarray:
    """Sorted, deduplicated differences of the eigenvalues of ``hbar``."""
    hbar = as_matrix(hbar, "hbar")
    if not is_hermitian(hbar, DEFAULT_TOL.structural):
        raise InvalidInputError("hbar must be Hermitian")
    levels, _ = spectral_levels(hbar, tol)
    return _frequencies_from_levels(levels, tol)


def _split_by_frequency(x, levels, projectors, freqs, tol):
    """``{w_index: sum_{e_a - e_b = w} Pi_a x Pi_b}`` for non-zero pieces."""
    out: dict[int, np.ndarray] = {}
    for a, pa in enumerate(projectors):
        for b, pb in enumerate(projectors):
            w = levels[a] - levels[b]
            idx = int(np.argmin(np.abs(freqs - w)))
            if abs(freqs[idx] - w) > 2 * tol:
                raise InvalidInputError(f"frequency {w} missing from the Bohr set")
            piece = pa @ x @ pb
            if np.max(np.abs(piece)) > 0:
                out[idx] = out.get(idx, 0) + piece
    return out


@dataclass(frozen=True, eq=False)
class BohrDecomposition:
    """Jump operators ``S_{kqw}`` keyed by ``(k, q, frequency index)``."""

    frequencies: np.ndarray
    levels: np.ndarray
    harmonics: int
    omega: float
    operators: dict[tuple[int, int, int], np.ndarray]
    n_couplings: int
    hbar: np.ndarray

    def keys(self) -> list[tuple[int, int, int]]:
        return sorted(self.operators)

    def operator(self, k: int, q: int, w: float, tol: float = 1e-9) -> np.ndarray:
        idx = int(np.argmin(np.abs(self.frequencies - w)))
        if abs(self.frequencies[idx] - w) > tol:
            raise InvalidInputError(f"{w} is not a Bohr quasifrequency")
        op = self.operators.get((k, q, idx))
        return np.zeros_like(self.hbar) if op is None else op

    def bohr_relation_residual(self) -> float:
        """``max |[Hbar, S] - w S|`` over all stored operators."""
        res = 0.0
        for (k, q, i), s in self.operators.items():
            w = self.frequencies[i]
            res = max(res, float(np.max(np.abs(self.hbar @ s - s @ self.hbar - w * s))))
        return res

    def adjoint_relation_residual(self) -> float:
        """``max |S_{kqw}^dag - S_{k,-q,-w}|`` (meaningful for Hermitian couplings)."""
        n = len(self.frequencies)
        res = 0.0
        for (k, q, i), s in self.operators.items():
            partner = self.operators.get((k, -q, n - 1 - i), np.zeros_like(s))
            res = max(res, float(np.max(np.abs(s.conj().T - partner))))
        return res

    def interaction_picture(self, k: int, t: float) -> np.ndarray:
        """``sum_{q,w} S_{kqw} exp(i (w + q Omega) t)``."""
        out = np.zeros_like(self.hbar)
        for (kk, q, i), s in self.operators.items():
            if kk == k:
                out = out + s * np.exp(1j * (self.frequencies[i] + q * self.omega) * t)
        return out


def decompose_jumps(
    couplings: Sequence[np.ndarray],
    uf: UnitaryFloquet,
    harmonics: int,
    tol: float = DEFAULT_TOL.cluster,
) -> BohrDecomposition:
    """Floquet-Bohr decomposition of the coupling operators.

    ``S_{kqw} = sum_{e - e' = w} Pi_e X_{kq} Pi_{e'}`` where ``X_{kq}`` is the
    ``q``-th Fourier coefficient of ``t -> p_t^dag S_k p_t`` and ``Pi_e`` are the
    spectral projectors of ``Hbar``.
    """
    couplings = [as_matrix(s, "coupling") for s in couplings]
    levels, projectors = spectral_levels(uf.hbar, tol)
    freqs = _frequencies_from_levels(levels, tol)
    grid = uf.p.grid
    if grid is None:
        times = np.arange(max(16, 8 * harmonics + 8)) * (uf.period / max(16, 8 * harmonics + 8))
        grid = np.stack([uf.p(t) for t in times])
    if grid.shape[0] < 4 * harmonics:
        raise InvalidInputError(f"p grid too coarse for {harmonics} harmonics")
    ops: dict[tuple[int, int, int], np.ndarray] = {}
    grid_dag = grid.conj().transpose(0, 2, 1)
    for k, s in enumerate(couplings):
        samples = grid_dag @ s @ grid
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            xq = coefficients_from_grid(samples, harmonics)
        for q in range(-harmonics, harmonics + 1):
            for idx, piece in _split_by_frequency(xq[q], levels, projectors, freqs, tol).items():
                if np.max(np.abs(piece)) > 1e-15:
                    ops[(k, q, idx)] = piece
    return BohrDecomposition(
        frequencies=freqs,
        levels=levels,
        harmonics=harmonics,
        omega=uf.omega,
        operators=ops,
        n_couplings=len(couplings),
        hbar=uf.hbar,
    )


# --------------------------------------------------------------------------- Davies


@dataclass(frozen=True, eq=False)
class DaviesGenerator:
    K: np.ndarray
    hbar: np.ndarray
    bohr: BohrDecomposition | None = None
    bath: BathSpectrum | None = None

    @property
    def lbar(self) -> np.ndarray:
        return hamiltonian_superop(self.hbar) + self.K

    @property
    def dim(self) -> int:
        return self.hbar.shape[0]

    def commutator_residual(self) -> float:
        ad = ad_superop(self.hbar)
        return float(np.max(np.abs(self.K @ ad - ad @ self.K)))

    def trace_residual(self) -> float:
        return tp_residual(self.K, target=0.0)

    def scaled(self, factor: float) -> "DaviesGenerator":
        """Same structure with the dissipator multiplied by ``factor``."""
        return DaviesGenerator(factor * self.K, self.hbar, self.bohr, self.bath)


def _rate_terms(pairs, bath: BathSpectrum, tol: float) -> np.ndarray:
    """Assemble ``sum gamma_{kk'}(nu) D[S_k, S_k']`` from ``(nu, {k: S_k})`` groups."""
    K = None
    cache: dict[float, np.ndarray] = {}
    for nu, ops in pairs:
        if nu not in cache:
            g = bath(nu)
            check_rate_matrix(g, nu, tol)
            cache[nu] = g
        g = cache[nu]
        for k in sorted(ops):
            for kp in sorted(ops):
                if g[k, kp] == 0:
                    continue
                term = g[k, kp] * dissipator_superop(ops[k], ops[kp])
                K = term if K is None else K + term
    return K


def davies_generator(
    bd: BohrDecomposition, bath: BathSpectrum, tol: float = DEFAULT_TOL.psd
) -> DaviesGenerator:
    """``K(rho) = sum gamma_{kk'}(nu) (S_k rho S_k'^dag - 1/2 {S_k'^dag S_k, rho})``.

    The sum runs over harmonics ``q`` and Bohr quasifrequencies ``w`` with
    ``nu = -(w + q Omega)``, in lexicographic ``(q, w, k, k')`` order.
    """
    if bath.n_couplings != bd.n_couplings:
        raise InvalidInputError(
            f"bath has {bath.n_couplings} couplings, decomposition has {bd.n_couplings}"
        )
    d = bd.hbar.shape[0]
    groups: dict[tuple[int, int], dict[int, np.ndarray]] = {}
    for (k, q, i), s in sorted(bd.operators.items()):
        groups.setdefault((q, i), {})[k] = s
    pairs = [
        (-(float(bd.frequencies[i]) + q * bd.omega), ops)
        for (q, i), ops in sorted(groups.items())
    ]
    K = _rate_terms(pairs, bath, tol)
    if K is None:
        K = np.zeros((d * d, d * d), dtype=complex)
    return DaviesGenerator(K=K, hbar=bd.hbar, bohr=bd, bath=bath)


def periodic_conjugation(p_t: np.ndarray) -> np.ndarray:
    """Superoperator ``P_t(a) = p_t a p_t^dag``."""
    return sandwich_superop(p_t, p_t.conj().T)


def full_lindbladian_at(
    t: float, dg: DaviesGenerator, uf: UnitaryFloquet, H: PeriodicMatrixFunction
) -> np.ndarray:
    """``L_t = -i ad H_t + P_t K P_t^{-1}``."""
    p = uf.p(t)
    P = periodic_conjugation(p)
    P_inv = sandwich_superop(p.conj().T, p)
    return hamiltonian_superop(H(t)) + P @ dg.K @ P_inv


# --------------------------------------------------------------------------- adiabatic


def adiabatic_parts_at(
    t: float,
    H: PeriodicMatrixFunction,
    couplings: Sequence[np.ndarray],
    bath: BathSpectrum,
    tol: float = DEFAULT_TOL.cluster,
):
    """Hamiltonian and dissipative superoperators of the adiabatic generator at ``t``."""
    h = as_matrix(H(t), "H(t)")
    if not is_hermitian(h, DEFAULT_TOL.structural):
        raise InvalidInputError(f"H(t) is not Hermitian at t={t}")
    levels, projectors = spectral_levels(h, tol)
    freqs = _frequencies_from_levels(levels, tol)
    groups: dict[int, dict[int, np.ndarray]] = {}
    for k, s in enumerate(couplings):
        for idx, piece in _split_by_frequency(as_matrix(s), levels, projectors, freqs, tol).items():
            groups.setdefault(idx, {})[k] = piece
    pairs = [(-float(freqs[i]), ops) for i, ops in sorted(groups.items())]
    d = h.shape[0]
    D = _rate_terms(pairs, bath, DEFAULT_TOL.psd)
    if D is None:
        D = np.zeros((d * d, d * d), dtype=complex)
    return hamiltonian_superop(h), D


def adiabatic_generator_at(
    t: float,
    H: PeriodicMatrixFunction,
    couplings: Sequence[np.ndarray],
    bath: BathSpectrum,
    tol: float = DEFAULT_TOL.cluster,
) -> np.ndarray:
    """Generator built from the instantaneous Bohr decomposition of ``H_t``."""
    ham, diss = adiabatic_parts_at(t, H, couplings, bath, tol)
    return ham + diss


# --------------------------------------------------------------------------- standard form


@dataclass(frozen=True)
class StandardFormReport:
    is_gkls: bool
    hamiltonian: np.ndarray
    kossakowski: np.ndarray
    kossakowski_min_eig: float
    tp_residual: float
    hermiticity_residual: float

    def to_json(self) -> dict:
        return {
            "is_gkls": self.is_gkls,
            "hamiltonian": matrix_to_json(self.hamiltonian),
            "kossakowski_min_eig": self.kossakowski_min_eig,
            "tp_residual": self.tp_residual,
            "hermiticity_residual": self.hermiticity_residual,
        }


def process_matrix(L: np.ndarray) -> np.ndarray:
    """Coefficients ``chi`` with ``L(rho) = sum_ab chi_ab F_a rho F_b^dag`` in the Hermitian basis."""
    L = np.asarray(L, dtype=complex)
    d = int(round(math.sqrt(L.shape[0])))
    F = np.stack(hermitian_basis(d))
    L4 = L.reshape((d, d, d, d), order="F")
    return np.einsum("aik,bjl,ijkl->ab", F.conj(), F, L4)


def verify_standard_form(
    L: np.ndarray,
    tol: float = DEFAULT_TOL.psd,
    tp_tol: float = DEFAULT_TOL.structural,
) -> StandardFormReport:
    """Split ``L`` into Hamiltonian and dissipator parts and test the GKLS conditions.

    ``L`` is of standard form iff it preserves Hermiticity, annihilates the
    trace and its Kossakowski matrix (the traceless block of ``chi``) is PSD.
    """
    L = np.asarray(L, dtype=complex)
    d = int(round(math.sqrt(L.shape[0])))
    chi = process_matrix(L)
    herm_res = float(np.max(np.abs(chi - chi.conj().T)))
    F = hermitian_basis(d)
    C = chi[0, 0] / (2 * d) * np.eye(d, dtype=complex)
    for i in range(1, d * d):
        C = C + chi[i, 0] / math.sqrt(d) * F[i]
    ham = 0.5j * (C - C.conj().T)
    koss = chi[1:, 1:]
    koss_h = 0.5 * (koss + koss.conj().T)
    min_eig = float(np.linalg.eigvalsh(koss_h).min()) if koss.size else 0.0
    tp_res = tp_residual(L, target=0.0)
    ok = min_eig >= -tol and tp_res <= tp_tol and herm_res <= tp_tol
    return StandardFormReport(
        is_gkls=bool(ok),
        hamiltonian=ham,
        kossakowski=koss,
        kossakowski_min_eig=min_eig,
        tp_residual=tp_res,
        hermiticity_residual=herm_res,
    )
