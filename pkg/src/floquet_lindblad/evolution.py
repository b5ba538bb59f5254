"""State propagation by three independent routes, and CP-divisibility checks.

* factorized: ``rho_t = P_t exp(t Lbar) rho_0``;
* Howland: embed ``rho_0`` in the zero harmonic, apply the lifted semigroup,
  evaluate the resulting periodic function at ``t``;
* RK4: fixed-step integration of ``d rho / dt = L_t rho``, the oracle.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidInputError, InvertibilityError, TruncationWarning
from .floquet import PeriodicMatrixFunction
from .lifting import (
    GeneralizedState,
    generalized_lindbladian,
    lifted_semigroup_factorized,
)
from .linalg import (
    check_density_matrix,
    choi_min_eig,
    identity_superop,
    matrix_exp,
    random_density_matrix,
    superop_dim,
    tp_residual,
    trace_norm,
    unvec,
    vec,
)
from .model import FactorizedModel
from .wcl import DaviesGenerator

DEFAULT_SEED = 20240611
N_PROBES = 20
EDGE_MASS_TOL = 1e-6
SINGULAR_COND = 1e13


def as_model(uf, dg: DaviesGenerator | None = None, H: PeriodicMatrixFunction | None = None) -> FactorizedModel:
    """Accept a ready model or a ``(UnitaryFloquet, DaviesGenerator[, H])`` pair."""
    if isinstance(uf, FactorizedModel):
        return uf
    if dg is None:
        raise InvalidInputError("a DaviesGenerator is required with a UnitaryFloquet")
    return FactorizedModel.from_davies(uf, dg, H)


# --------------------------------------------------------------------------- maps


@dataclass(frozen=True, eq=False)
class DynamicalMap:
    t: float
    map: np.ndarray

    @property
    def dim(self) -> int:
        return superop_dim(self.map)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return unvec(self.map @ vec(rho), self.dim)

    def tp_residual(self) -> float:
        return tp_residual(self.map)

    def choi_min_eig(self) -> float:
        return choi_min_eig(self.map)


def dynamical_map(t: float, uf, dg: DaviesGenerator | None = None) -> DynamicalMap:
    """``Lambda_t = P_t exp(t Lbar)``."""
    if t < 0:
        raise InvalidInputError("t must be non-negative")
    model = as_model(uf, dg)
    return DynamicalMap(float(t), model.dynamical_map(t))


def _transfer(model: FactorizedModel, t: float, s: float) -> np.ndarray:
    return model.P(t) @ matrix_exp((t - s) * model.lbar) @ model.P_inv(s)


def propagator(t: float, s: float, uf, dg: DaviesGenerator | None = None) -> np.ndarray:
    """``V_{t,s} = P_t exp((t - s) Lbar) P_s^{-1}``, no explicit inversion of ``Lambda_s``."""
    if not 0 <= s <= t:
        raise InvalidInputError(f"need 0 <= s <= t, got s={s}, t={t}")
    model = as_model(uf, dg)
    cond = float(np.linalg.cond(model.semigroup(s)))
    if not cond < SINGULAR_COND:
        raise InvertibilityError(f"Lambda_s is numerically singular at s={s} (condition {cond:.3e})")
    return _transfer(model, t, s)


# --------------------------------------------------------------------------- trajectories


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    method: str

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def traces(self) -> np.ndarray:
        return np.real(np.trace(self.states, axis1=1, axis2=2))

    def min_eigenvalues(self) -> np.ndarray:
        return np.array([np.linalg.eigvalsh(0.5 * (r + r.conj().T)).min() for r in self.states])

    def purities(self) -> np.ndarray:
        return np.real(np.einsum("tij,tji->t", self.states, self.states))

    def distance(self, other: "Trajectory") -> float:
        """Largest trace-norm gap over the shared time grid."""
        if not np.allclose(self.times, other.times, rtol=0, atol=1e-12):
            raise InvalidInputError("trajectories use different time grids")
        return max(trace_norm(a - b) for a, b in zip(self.states, other.states))

    def to_csv(self) -> str:
        d = self.dim
        header = ["t", "method"]
        for i in range(d):
            for j in range(d):
                header += [f"re_{i}{j}", f"im_{i}{j}"]
        header += ["trace", "min_eigenvalue", "purity"]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        tr, me, pu = self.traces(), self.min_eigenvalues(), self.purities()
        for k, t in enumerate(self.times):
            row = [_fmt(t), self.method]
            for i in range(d):
                for j in range(d):
                    z = self.states[k, i, j]
                    row += [_fmt(z.real), _fmt(z.imag)]
            row += [_fmt(tr[k]), _fmt(me[k]), _fmt(pu[k])]
            w.writerow(row)
        return buf.getvalue()


def _fmt(x: float) -> str:
    return "%.17g" % float(x)


def evolve_factorized(rho0: np.ndarray, grid: Sequence[float], uf, dg: DaviesGenerator | None = None) -> Trajectory:
    rho0 = check_density_matrix(rho0)
    model = as_model(uf, dg)
    v0 = vec(rho0)
    states = [unvec(model.dynamical_map(t) @ v0, rho0.shape[0]) for t in grid]
    return Trajectory(np.asarray(grid, dtype=float), np.stack(states), "factorized")


def evolve_howland(
    rho0: np.ndarray,
    grid: Sequence[float],
    uf,
    dg: DaviesGenerator | None = None,
    N: int = 10,
    H: PeriodicMatrixFunction | None = None,
    dense: bool = False,
) -> Trajectory:
    """``rho_t = evaluate(exp(t L~)(rho_0 (x) e_0), t)``.

    The lifted semigroup is taken in factorized form unless ``dense`` is set,
    in which case the truncated generator is exponentiated directly (this
    needs ``L_t``, so either a model or the drive ``H``).
    """
    rho0 = check_density_matrix(rho0)
    model = as_model(uf, dg, H)
    if dense and model.L is None:
        raise InvalidInputError("dense Howland evolution needs the drive H")
    s0 = GeneralizedState.embed(rho0, N, model.period)
    Lt = generalized_lindbladian(model.L, N) if dense else None
    states = []
    worst_edge = 0.0
    for t in grid:
        W = Lt.expm(t) if dense else lifted_semigroup_factorized(model, None, t, N)
        st = W.apply(s0)
        worst_edge = max(worst_edge, st.edge_mass(1))
        states.append(st.evaluate(t))
    if worst_edge > EDGE_MASS_TOL:
        warnings.warn(
            f"edge-block mass {worst_edge:.3e} exceeds {EDGE_MASS_TOL:.0e}; "
            f"the Howland trajectory is truncation dominated, increase N",
            TruncationWarning,
            stacklevel=2,
        )
    return Trajectory(np.asarray(grid, dtype=float), np.stack(states), "howland")


def rk4_reference(
    rho0: np.ndarray,
    grid: Sequence[float],
    L: Callable[[float], np.ndarray],
    steps: int = 16,
) -> Trajectory:
    """Fixed-step RK4 for ``d rho/dt = L_t rho`` with ``steps`` steps per grid interval."""
    if steps < 16:
        raise InvalidInputError("rk4_reference needs at least 16 steps per grid interval")
    rho0 = check_density_matrix(rho0)
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) < 0):
        raise InvalidInputError("time grid must be non-decreasing")
    d = rho0.shape[0]
    v = vec(rho0)
    out = [v.copy()]
    for a, b in zip(grid[:-1], grid[1:]):
        h = (b - a) / steps
        t = a
        for _ in range(steps):
            k1 = L(t) @ v
            k2 = L(t + h / 2) @ (v + h / 2 * k1)
            k3 = L(t + h / 2) @ (v + h / 2 * k2)
            k4 = L(t + h) @ (v + h * k3)
            v = v + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t = a + (_ + 1) * h
        out.append(v.copy())
    return Trajectory(grid, np.stack([unvec(x, d) for x in out]), "rk4")


def rk4_steps_for(grid: Sequence[float], period: float, steps_per_period: int) -> int:
    """Steps per grid interval giving at least ``steps_per_period`` per period."""
    dt = float(np.max(np.diff(np.asarray(grid, dtype=float)))) if len(grid) > 1 else period
    return max(16, math.ceil(steps_per_period * dt / period))


# --------------------------------------------------------------------------- W_tau


def w_tau_apply(f, tau: float, uf, dg: DaviesGenerator | None = None, N: int | None = None):
    """``W_tau(f)(t) = V_{t, t-tau}(f(t - tau))``.

    ``f`` is either a callable periodic function, for which a callable is
    returned, or a :class:`GeneralizedState`, which is mapped by the lifted
    factorized semigroup.
    """
    if tau < 0:
        raise InvalidInputError("tau must be non-negative")
    model = as_model(uf, dg)
    if isinstance(f, GeneralizedState):
        return lifted_semigroup_factorized(model, None, tau, f.N).apply(f)
    semigroup = model.semigroup(tau)

    def g(t: float) -> np.ndarray:
        rho = np.asarray(f(t - tau))
        V = model.P(t) @ semigroup @ model.P_inv(t - tau)
        return unvec(V @ vec(rho), rho.shape[0])

    return g


# --------------------------------------------------------------------------- CP divisibility


def probe_pairs(d: int, n: int = N_PROBES, seed: int = DEFAULT_SEED) -> list[tuple[np.ndarray, np.ndarray]]:
    rng = np.random.default_rng(seed)
    return [(random_density_matrix(rng, d), random_density_matrix(rng, d)) for _ in range(n)]


def cp_divisibility_report(
    uf,
    dg: DaviesGenerator | None,
    pairs: Sequence[tuple[float, float]],
    seed: int = DEFAULT_SEED,
    n_probes: int = N_PROBES,
    choi_tol: float = 1e-9,
    tp_tol: float = 1e-10,
    contraction_slack: float = 1e-9,
) -> dict:
    """Choi spectrum, trace preservation and trace-norm contraction of each ``V_{t,s}``."""
    model = as_model(uf, dg)
    probes = probe_pairs(model.dim, n_probes, seed)
    diffs = [a - b for a, b in probes]
    norms = [trace_norm(x) for x in diffs]
    rows = []
    for t, s in pairs:
        if s > t:
            raise InvalidInputError(f"pair (t={t}, s={s}) has s > t")
        V = _transfer(model, t, s) if s != t else identity_superop(model.dim)
        ce = choi_min_eig(V)
        tp = tp_residual(V)
        worst = max(
            trace_norm(unvec(V @ vec(x), model.dim)) - n0 for x, n0 in zip(diffs, norms)
        )
        rows.append(
            {
                "t": float(t),
                "s": float(s),
                "choi_min_eig": ce,
                "tp_residual": tp,
                "max_contraction_excess": float(worst),
                "cp": ce >= -choi_tol,
                "tp": tp <= tp_tol,
                "contractive": worst <= contraction_slack,
            }
        )
    for r in rows:
        r["pass"] = bool(r["cp"] and r["tp"] and r["contractive"])
    return {
        "seed": seed,
        "n_probes": n_probes,
        "pairs": rows,
        "min_choi_eig": min((r["choi_min_eig"] for r in rows), default=0.0),
        "max_tp_residual": max((r["tp_residual"] for r in rows), default=0.0),
        "max_contraction_excess": max((r["max_contraction_excess"] for r in rows), default=0.0),
        "all_pass": all(r["pass"] for r in rows),
    }


def periodic_spectrum_residual(uf, dg: DaviesGenerator | None = None, phases: int = 4) -> float:
    """Spread of the spectrum of ``V_{t+T,t}`` over ``t`` at several phases.

    ``V_{t+T,t} = P_t exp(T Lbar) P_t^{-1}`` is similar to ``exp(T Lbar)``, so
    the sorted spectrum must not depend on ``t``.
    """
    model = as_model(uf, dg)
    T = model.period
    ref = np.linalg.eigvals(matrix_exp(T * model.lbar))
    worst = 0.0
    for k in range(phases):
        t = k * T / phases
        ev = np.linalg.eigvals(_transfer(model, t + T, t))
        gap = np.abs(ev[:, None] - ref[None, :])
        worst = max(worst, float(gap.min(axis=1).max()), float(gap.min(axis=0).max()))
    return worst
