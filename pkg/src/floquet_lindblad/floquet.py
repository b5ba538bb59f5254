"""Periodic matrix functions, Fourier coefficients and Floquet normal forms."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import AliasingWarning, DecompositionError, InvalidInputError
from .linalg import (
    DEFAULT_TOL,
    is_hermitian,
    is_unitary,
    matrix_exp,
    matrix_from_json,
    matrix_log_principal,
    matrix_to_json,
)

DEFAULT_STEPS = 512
MIN_STEPS = 16


# --------------------------------------------------------------------------- Fourier


def fourier_coefficients(
    f: Callable[[float], np.ndarray],
    period: float,
    n_max: int,
    quadrature_points: int | None = None,
) -> dict[int, np.ndarray]:
    """Coefficients ``f_n = (1/T) int f(t) exp(-i n Omega t) dt`` for ``|n| <= n_max``.

    Uses the trapezoidal rule on ``quadrature_points`` equispaced nodes, which is
    exact for trigonometric polynomials of degree below the node count and
    spectrally accurate for smooth periodic ``f``.
    """
    if quadrature_points is None:
        quadrature_points = max(8 * n_max, 16)
    if quadrature_points < 4 * n_max or quadrature_points < 1:
        raise InvalidInputError(
            f"need at least 4*n_max = {4 * n_max} quadrature points, got {quadrature_points}"
        )
    times = np.arange(quadrature_points) * (period / quadrature_points)
    samples = np.stack([np.asarray(f(t), dtype=complex) for t in times])
    return coefficients_from_grid(samples, n_max)


def coefficients_from_grid(samples: np.ndarray, n_max: int) -> dict[int, np.ndarray]:
    """Fourier coefficients from samples on the grid ``t_k = k T / len(samples)``."""
    q = samples.shape[0]
    if q < 2 * n_max + 1:
        raise InvalidInputError(f"{q} samples cannot resolve {2 * n_max + 1} harmonics")
    spectrum = np.fft.fft(samples, axis=0) / q
    coeffs = {n: spectrum[n % q].copy() for n in range(-n_max, n_max + 1)}
    if n_max > 0:
        norms = [np.max(np.abs(c)) for c in coeffs.values()]
        edge = max(np.max(np.abs(coeffs[n_max])), np.max(np.abs(coeffs[-n_max])))
        if edge > 0.01 * max(norms):
            warnings.warn(
                f"edge coefficient |f_{n_max}| = {edge:.3e} is not small; "
                "increase the harmonic cutoff",
                AliasingWarning,
                stacklevel=3,
            )
    return coeffs


def reconstruct(coeffs: dict[int, np.ndarray], period: float, t):
    """Partial Fourier sum ``sum_n f_n exp(i n Omega t)`` at scalar or array ``t``."""
    omega = 2 * math.pi / period
    t_arr = np.asarray(t, dtype=float)
    scalar = t_arr.ndim == 0
    t_arr = np.atleast_1d(t_arr)
    keys = sorted(coeffs)
    shape = np.asarray(coeffs[keys[0]]).shape
    out = np.zeros((t_arr.size,) + shape, dtype=complex)
    for n in keys:
        phase = np.exp(1j * n * omega * t_arr)
        out += phase[:, None, None] * coeffs[n][None]
    return out[0] if scalar else out


def reconstruction_error(
    coeffs: dict[int, np.ndarray], period: float, f: Callable[[float], np.ndarray], points: int = 64
) -> float:
    """Sup over a uniform grid of the entrywise error of the partial Fourier sum."""
    times = np.arange(points) * (period / points)
    approx = reconstruct(coeffs, period, times)
    exact = np.stack([np.asarray(f(t), dtype=complex) for t in times])
    return float(np.max(np.abs(approx - exact)))


@dataclass(frozen=True, eq=False)
class PeriodicMatrixFunction:
    """A T-periodic matrix- or superoperator-valued function.

    ``coeffs`` maps harmonic index ``n`` to ``f_n``.  When ``sampler`` is given it
    is the ground truth for evaluation and the coefficients carry the
    ``truncation_error`` bound measured against it; otherwise evaluation is the
    Fourier sum.
    """

    period: float
    coeffs: dict[int, np.ndarray]
    sampler: Callable[[float], np.ndarray] | None = None
    truncation_error: float = 0.0
    grid: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if not self.period > 0:
            raise InvalidInputError(f"period must be positive, got {self.period}")
        if not self.coeffs:
            raise InvalidInputError("at least one Fourier coefficient is required")

    @property
    def omega(self) -> float:
        return 2 * math.pi / self.period

    @property
    def bandwidth(self) -> int:
        return max(abs(n) for n in self.coeffs)

    @property
    def shape(self) -> tuple[int, ...]:
        return np.asarray(next(iter(self.coeffs.values()))).shape

    def coefficient(self, n: int) -> np.ndarray:
        c = self.coeffs.get(n)
        return np.zeros(self.shape, dtype=complex) if c is None else c

    def operative_bandwidth(self, rel_tol: float = 1e-12) -> int:
        """Largest ``|n|`` whose coefficient exceeds ``rel_tol`` times the largest one."""
        norms = {n: float(np.max(np.abs(c))) for n, c in self.coeffs.items()}
        top = max(norms.values())
        if top == 0:
            return 0
        return max(abs(n) for n, v in norms.items() if v > rel_tol * top)

    def __call__(self, t: float) -> np.ndarray:
        if self.sampler is not None:
            return self.sampler(float(t))
        return reconstruct(self.coeffs, self.period, float(t))

    def fourier(self, t) -> np.ndarray:
        return reconstruct(self.coeffs, self.period, t)

    def grid_times(self) -> np.ndarray:
        if self.grid is None:
            raise InvalidInputError("function carries no sample grid")
        q = self.grid.shape[0]
        return np.arange(q) * (self.period / q)

    def truncated(self, n_max: int) -> "PeriodicMatrixFunction":
        return PeriodicMatrixFunction(
            self.period,
            {n: c for n, c in self.coeffs.items() if abs(n) <= n_max},
        )

    # construction -----------------------------------------------------------

    @classmethod
    def constant(cls, period: float, a: np.ndarray) -> "PeriodicMatrixFunction":
        return cls(period, {0: np.asarray(a, dtype=complex)})

    @classmethod
    def from_sampler(
        cls,
        f: Callable[[float], np.ndarray],
        period: float,
        n_max: int,
        quadrature_points: int | None = None,
    ) -> "PeriodicMatrixFunction":
        coeffs = fourier_coefficients(f, period, n_max, quadrature_points)
        err = reconstruction_error(coeffs, period, f)
        return cls(period, coeffs, sampler=f, truncation_error=err)

    @classmethod
    def from_grid(
        cls,
        samples: np.ndarray,
        period: float,
        n_max: int,
        sampler: Callable[[float], np.ndarray] | None = None,
    ) -> "PeriodicMatrixFunction":
        """Build from samples at ``t_k = k T / len(samples)``; the grid is the reference."""
        samples = np.asarray(samples, dtype=complex)
        coeffs = coefficients_from_grid(samples, n_max)
        q = samples.shape[0]
        times = np.arange(q) * (period / q)
        err = float(np.max(np.abs(reconstruct(coeffs, period, times) - samples)))
        return cls(period, coeffs, sampler=sampler, truncation_error=err, grid=samples)

    # serialization ----------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "period": self.period,
            "coeffs": [{"n": n, "matrix": matrix_to_json(self.coeffs[n])} for n in sorted(self.coeffs)],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PeriodicMatrixFunction":
        try:
            period = float(obj["period"])
            items = obj["coeffs"]
            coeffs = {}
            for item in items:
                n = int(item["n"])
                if n in coeffs:
                    raise InvalidInputError(f"duplicate harmonic {n}")
                coeffs[n] = matrix_from_json(item["matrix"])
        except (KeyError, TypeError) as exc:
            raise InvalidInputError(f"malformed periodic function: {exc}") from exc
        return cls(period, coeffs)


# --------------------------------------------------------------------------- RK4


def _rk4_step(A: Callable[[float], np.ndarray], t: float, phi: np.ndarray, h: float) -> np.ndarray:
    a_mid = A(t + 0.5 * h)
    k1 = A(t) @ phi
    k2 = a_mid @ (phi + 0.5 * h * k1)
    k3 = a_mid @ (phi + 0.5 * h * k2)
    k4 = A(t + h) @ (phi + h * k3)
    return phi + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


class FundamentalSolution:
    """Principal fundamental solution of ``dPhi/dt = A(t) Phi`` on one period.

    Fixed-step RK4 with ``h = T / steps``; values between grid points come from
    one partial RK4 step, later periods from powers of the monodromy matrix.
    """

    def __init__(self, A: Callable[[float], np.ndarray], period: float, steps: int = DEFAULT_STEPS):
        if steps < MIN_STEPS:
            raise InvalidInputError(f"steps_per_period must be >= {MIN_STEPS}, got {steps}")
        self.A = A
        self.period = float(period)
        self.steps = int(steps)
        self.h = self.period / self.steps
        dim = np.asarray(A(0.0)).shape[0]
        grid = np.empty((self.steps + 1, dim, dim), dtype=complex)
        grid[0] = np.eye(dim)
        for j in range(self.steps):
            grid[j + 1] = _rk4_step(A, j * self.h, grid[j], self.h)
        if not np.all(np.isfinite(grid)):
            raise DecompositionError("fundamental solution overflowed")
        self.grid = grid

    @property
    def monodromy(self) -> np.ndarray:
        return self.grid[-1]

    def times(self) -> np.ndarray:
        return np.arange(self.steps + 1) * self.h

    def within_period(self, r: float) -> np.ndarray:
        j = min(int(math.floor(r / self.h)), self.steps)
        rem = r - j * self.h
        if rem <= 1e-15 * self.period:
            return self.grid[j].copy()
        return _rk4_step(self.A, j * self.h, self.grid[j], rem)

    def __call__(self, t: float) -> np.ndarray:
        if t < 0:
            raise InvalidInputError(f"t must be >= 0, got {t}")
        k = int(math.floor(t / self.period))
        r = t - k * self.period
        phi = self.within_period(r)
        if k:
            phi = phi @ np.linalg.matrix_power(self.monodromy, k)
        return phi


def propagate_fundamental(A, t: float, steps_per_period: int = DEFAULT_STEPS) -> np.ndarray:
    """``Phi(t)`` with ``dPhi/dt = A(t) Phi``, ``Phi(0) = I`` by fixed-step RK4."""
    period = A.period if isinstance(A, PeriodicMatrixFunction) else None
    if period is None:
        raise InvalidInputError("A must be a PeriodicMatrixFunction")
    return FundamentalSolution(A, period, steps_per_period)(t)


def _reduced(t: float, period: float) -> float:
    r = math.fmod(t, period)
    return r + period if r < 0 else r


# --------------------------------------------------------------------------- Floquet


@dataclass(frozen=True, eq=False)
class FloquetDecomposition:
    """``Phi(t) = P(t) exp(t B)`` with ``P`` periodic and ``P(0) = I``."""

    generator: np.ndarray
    periodic_part: PeriodicMatrixFunction
    exponents: np.ndarray
    multipliers: np.ndarray
    monodromy: np.ndarray
    solution: FundamentalSolution = field(repr=False)

    @property
    def period(self) -> float:
        return self.periodic_part.period

    @property
    def omega(self) -> float:
        return self.periodic_part.omega

    def fundamental(self, t: float) -> np.ndarray:
        return self.periodic_part(t) @ matrix_exp(t * self.generator)


def floquet_decompose(
    A: PeriodicMatrixFunction,
    steps_per_period: int = DEFAULT_STEPS,
    n_harmonics: int | None = None,
    zone_offset: int = 0,
    branch_nudge: bool = False,
) -> FloquetDecomposition:
    """Floquet normal form of the periodic linear system ``dx/dt = A(t) x``.

    ``B = log(Phi(T)) / T`` with the principal logarithm, shifted by
    ``i * zone_offset * Omega``.  The periodic part is tabulated on the RK4
    grid (reference values) and expanded to ``n_harmonics`` Fourier modes.
    """
    sol = FundamentalSolution(A, A.period, steps_per_period)
    T = A.period
    omega = 2 * math.pi / T
    dim = sol.grid.shape[1]
    B = matrix_log_principal(sol.monodromy, branch_nudge=branch_nudge) / T
    B = B + 1j * zone_offset * omega * np.eye(dim)
    times = sol.times()[:-1]
    grid = np.stack([sol.grid[j] @ matrix_exp(-times[j] * B) for j in range(len(times))])

    def periodic(t: float) -> np.ndarray:
        r = _reduced(t, T)
        return sol.within_period(r) @ matrix_exp(-r * B)

    if n_harmonics is None:
        n_harmonics = steps_per_period // 8
    P = PeriodicMatrixFunction.from_grid(grid, T, n_harmonics, sampler=periodic)
    exponents = np.linalg.eigvals(B)
    exponents = exponents[np.lexsort((exponents.imag, -exponents.real))]
    return FloquetDecomposition(
        generator=B,
        periodic_part=P,
        exponents=exponents,
        multipliers=np.exp(exponents * T),
        monodromy=sol.monodromy,
        solution=sol,
    )


def shifted_exponents(exponents, omega: float, n_range: int) -> np.ndarray:
    """Array ``[j, n + n_range] = xi_j + i n Omega`` for ``|n| <= n_range``."""
    xi = np.asarray(exponents, dtype=complex)
    n = np.arange(-n_range, n_range + 1)
    return xi[:, None] + 1j * omega * n[None, :]


def reduce_to_zone(energies: np.ndarray, omega: float, zone_offset: int = 0) -> np.ndarray:
    """Map real quasienergies into ``(c - Omega/2, c + Omega/2]`` with ``c = zone_offset * Omega``."""
    c = zone_offset * omega
    k = np.ceil((np.asarray(energies) - c - omega / 2) / omega)
    return np.asarray(energies) - k * omega


@dataclass(frozen=True, eq=False)
class UnitaryFloquet:
    """``u_t = p_t exp(-i t Hbar)`` for a periodic Hamiltonian."""

    p: PeriodicMatrixFunction
    hbar: np.ndarray
    quasienergies: np.ndarray
    solution: FundamentalSolution = field(repr=False)

    @property
    def period(self) -> float:
        return self.p.period

    @property
    def omega(self) -> float:
        return self.p.omega

    @property
    def dim(self) -> int:
        return self.hbar.shape[0]

    def propagator(self, t: float) -> np.ndarray:
        """``u_t`` recomposed from the Floquet factors."""
        w, v = np.linalg.eigh(self.hbar)
        return self.p(t) @ (v * np.exp(-1j * t * w)) @ v.conj().T


def unitary_floquet(
    H: PeriodicMatrixFunction,
    steps_per_period: int = DEFAULT_STEPS,
    n_harmonics: int | None = None,
    zone_offset: int = 0,
    branch_nudge: bool = False,
    tol: float = DEFAULT_TOL.structural,
) -> UnitaryFloquet:
    """Floquet factorization of the Schroedinger propagator ``du/dt = -i H(t) u``.

    The averaged Hamiltonian is ``(i/T) log u_T``, symmetrized, with its
    quasienergies reduced to the zone ``(-Omega/2, Omega/2]`` (shifted by
    ``zone_offset`` zones).
    """
    T = H.period
    omega = 2 * math.pi / T
    probe = np.arange(steps_per_period) * (T / steps_per_period)
    for t in probe[:: max(1, steps_per_period // 64)]:
        if not is_hermitian(H(t), tol):
            raise InvalidInputError(f"H(t) is not Hermitian at t={t}")

    def generator(t: float) -> np.ndarray:
        return -1j * H(t)

    sol = FundamentalSolution(generator, T, steps_per_period)
    if not is_unitary(sol.monodromy, 1e-6):
        raise DecompositionError("monodromy of the Schroedinger equation is not unitary")
    hbar = 1j * matrix_log_principal(sol.monodromy, branch_nudge=branch_nudge) / T
    hbar = 0.5 * (hbar + hbar.conj().T)
    energies, vecs = np.linalg.eigh(hbar)
    energies = reduce_to_zone(energies, omega, zone_offset)
    order = np.argsort(energies, kind="stable")
    energies, vecs = energies[order], vecs[:, order]
    hbar = (vecs * energies) @ vecs.conj().T
    hbar = 0.5 * (hbar + hbar.conj().T)

    def rotate(t: float) -> np.ndarray:
        return (vecs * np.exp(1j * t * energies)) @ vecs.conj().T

    times = sol.times()[:-1]
    grid = np.stack([sol.grid[j] @ rotate(times[j]) for j in range(len(times))])

    def periodic(t: float) -> np.ndarray:
        r = _reduced(t, T)
        return sol.within_period(r) @ rotate(r)

    if n_harmonics is None:
        n_harmonics = steps_per_period // 8
    p = PeriodicMatrixFunction.from_grid(grid, T, n_harmonics, sampler=periodic)
    return UnitaryFloquet(p=p, hbar=hbar, quasienergies=energies, solution=sol)
