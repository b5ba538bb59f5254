"""Factorized periodic dynamics ``Lambda_t = P_t exp(t Lbar)``.

A :class:`FactorizedModel` bundles what the lifting and evolution code needs:
the averaged generator, the periodic factor ``P_t`` and its inverse (sampled
exactly and as Fourier coefficients), and the time-dependent generator ``L_t``.
It is built either from a Davies generator, where ``P_t`` is the unitary
conjugation by ``p_t``, or from a numerical Floquet decomposition of any
periodic generator.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .floquet import FloquetDecomposition, PeriodicMatrixFunction, UnitaryFloquet, floquet_decompose
from .linalg import hamiltonian_superop, matrix_exp
from .wcl import DaviesGenerator, full_lindbladian_at

COEFF_CUTOFF = 1e-15


def trim_coefficients(coeffs: dict[int, np.ndarray], cutoff: float = COEFF_CUTOFF) -> dict[int, np.ndarray]:
    """Drop coefficients below ``cutoff`` times the largest one."""
    top = max(float(np.max(np.abs(c))) for c in coeffs.values())
    out = {n: c for n, c in coeffs.items() if float(np.max(np.abs(c))) > cutoff * top}
    return out or {0: coeffs.get(0, next(iter(coeffs.values())))}


def conjugation_coefficients(uf: UnitaryFloquet):
    """Coefficients of ``P_t = p_t . p_t^dag`` and ``P_t^{-1} = p_t^dag . p_t``.

    ``P_n = sum_{a-b=n} conj(p_b) (x) p_a`` and
    ``Pinv_n = sum_{b-a=n} p_b^T (x) p_a^dag``.
    """
    p = trim_coefficients(uf.p.coeffs)
    P: dict[int, np.ndarray] = {}
    Pinv: dict[int, np.ndarray] = {}
    for a in sorted(p):
        for b in sorted(p):
            P[a - b] = P.get(a - b, 0) + np.kron(p[b].conj(), p[a])
            Pinv[b - a] = Pinv.get(b - a, 0) + np.kron(p[b].T, p[a].conj().T)
    return trim_coefficients(P), trim_coefficients(Pinv)


@dataclass(frozen=True, eq=False)
class FactorizedModel:
    lbar: np.ndarray
    P: PeriodicMatrixFunction
    P_inv: PeriodicMatrixFunction
    L: PeriodicMatrixFunction | None = None
    kind: str = "davies"

    @property
    def period(self) -> float:
        return self.P.period

    @property
    def omega(self) -> float:
        return self.P.omega

    @property
    def dim(self) -> int:
        return int(round(np.sqrt(self.lbar.shape[0])))

    def semigroup(self, t: float) -> np.ndarray:
        return matrix_exp(t * self.lbar)

    def dynamical_map(self, t: float) -> np.ndarray:
        return self.P(t) @ self.semigroup(t)

    def bandwidth(self, rel_tol: float) -> int:
        return self.P.operative_bandwidth(rel_tol)

    @classmethod
    def from_davies(
        cls, uf: UnitaryFloquet, dg: DaviesGenerator, H: PeriodicMatrixFunction | None = None
    ) -> "FactorizedModel":
        """Without the drive ``H`` the model still propagates but carries no ``L_t``."""
        P, Pinv = conjugation_coefficients(uf)

        def conj(t):
            p = uf.p(t)
            return np.kron(p.conj(), p)

        def conj_inv(t):
            p = uf.p(t)
            return np.kron(p.T, p.conj().T)

        T = uf.period
        L = None
        if H is not None:
            # L_m = -i ad H_m + sum_{a+b=m} P_a K Pinv_b
            Lc: dict[int, np.ndarray] = {}
            for a in sorted(P):
                PK = P[a] @ dg.K
                for b in sorted(Pinv):
                    Lc[a + b] = Lc.get(a + b, 0) + PK @ Pinv[b]
            for m, h in H.coeffs.items():
                Lc[m] = Lc.get(m, 0) + hamiltonian_superop(h)
            L = PeriodicMatrixFunction(
                T, trim_coefficients(Lc), sampler=lambda t: full_lindbladian_at(t, dg, uf, H)
            )
        return cls(
            lbar=dg.lbar,
            P=PeriodicMatrixFunction(T, P, sampler=conj),
            P_inv=PeriodicMatrixFunction(T, Pinv, sampler=conj_inv),
            L=L,
            kind="davies",
        )

    @classmethod
    def from_floquet(cls, dec: FloquetDecomposition, L: PeriodicMatrixFunction) -> "FactorizedModel":
        """Generic periodic generator; ``P_t^{-1}`` is obtained by direct inversion."""
        P = trim_coefficients(dec.periodic_part.coeffs)
        grid = dec.periodic_part.grid
        n_max = max(abs(n) for n in dec.periodic_part.coeffs)
        inv_grid = np.linalg.inv(grid)

        def conj_inv(t):
            return np.linalg.inv(dec.periodic_part(t))

        Pinv = PeriodicMatrixFunction.from_grid(inv_grid, dec.period, n_max, sampler=conj_inv)
        return cls(
            lbar=dec.generator,
            P=PeriodicMatrixFunction(dec.period, P, sampler=dec.periodic_part.sampler),
            P_inv=PeriodicMatrixFunction(dec.period, trim_coefficients(Pinv.coeffs), sampler=conj_inv),
            L=L,
            kind="generic",
        )

    @classmethod
    def from_generator(
        cls, L: PeriodicMatrixFunction, steps_per_period: int = 512
    ) -> "FactorizedModel":
        return cls.from_floquet(floquet_decompose(L, steps_per_period), L)
