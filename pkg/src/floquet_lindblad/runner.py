"""Experiment orchestration: build the model from a config, run every check, emit artifacts."""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import SimulationConfig
from .evolution import (
    Trajectory,
    cp_divisibility_report,
    evolve_factorized,
    evolve_howland,
    periodic_spectrum_residual,
    probe_pairs,
    propagator,
    rk4_reference,
    rk4_steps_for,
    w_tau_apply,
)
from .floquet import FundamentalSolution, PeriodicMatrixFunction, UnitaryFloquet, fourier_coefficients, unitary_floquet
from .lifting import (
    GeneralizedState,
    SpectralLadder,
    contraction_counterexample,
    conjugation_bandwidth,
    default_truncation,
    generalized_lindbladian,
    lifted_evaluation_residual,
    lifted_semigroup_factorized,
    lifted_trace,
    lm_component_identity_check,
    match_ladder,
    number_matrix,
    q_antisymmetry_check,
    shift_matrix,
    spectral_ladder,
    truncation_diagnostics,
)
from .linalg import (
    choi_min_eig,
    hamiltonian_superop,
    matrix_exp,
    matrix_log_principal,
    matrix_to_json,
    operator_norm,
    random_hermitian,
    random_matrix,
    sandwich_superop,
    trace_norm,
    unvec,
    vec,
)
from .model import FactorizedModel
from .report import CheckReport
from .wcl import (
    DaviesGenerator,
    adiabatic_parts_at,
    decompose_jumps,
    davies_generator,
    verify_standard_form,
)

LADDER_MARGIN = 3
LADDER_TOL = 1e-6
FACTOR_TAUS = (0.1, 0.5, 1.0)
LM_RANGE = 4
ADIABATIC_HARMONICS = 32
CP_GRID = 6


@dataclass
class Built:
    config: SimulationConfig
    uf: UnitaryFloquet
    model: FactorizedModel
    N: int
    dg: DaviesGenerator | None = None


@dataclass
class RunResult:
    report: CheckReport
    trajectories: dict[str, Trajectory] = field(default_factory=dict)
    ladder: SpectralLadder | None = None
    diagnostics: dict = field(default_factory=dict)


def _scaled_adiabatic(cfg: SimulationConfig):
    def L(t: float) -> np.ndarray:
        ham, diss = adiabatic_parts_at(t, cfg.hamiltonian, cfg.couplings, cfg.bath, cfg.tolerances.cluster)
        return ham + cfg.dissipator_scale * diss

    return L


def build(cfg: SimulationConfig) -> Built:
    uf = unitary_floquet(cfg.hamiltonian, cfg.steps_per_period)
    if cfg.generator == "fast-wcl":
        Q = cfg.harmonics if cfg.harmonics is not None else uf.p.operative_bandwidth(1e-6)
        bd = decompose_jumps(cfg.couplings, uf, Q, cfg.tolerances.cluster)
        dg = davies_generator(bd, cfg.bath, cfg.tolerances.psd)
        if cfg.dissipator_scale != 1.0:
            dg = dg.scaled(cfg.dissipator_scale)
        model = FactorizedModel.from_davies(uf, dg, cfg.hamiltonian)
    else:
        dg = None
        sampler = _scaled_adiabatic(cfg)
        L = PeriodicMatrixFunction.from_sampler(
            sampler, cfg.period, ADIABATIC_HARMONICS, 8 * ADIABATIC_HARMONICS
        )
        model = FactorizedModel.from_generator(L, cfg.steps_per_period)
    N = cfg.truncation if cfg.truncation is not None else default_truncation(model)
    return Built(cfg, uf, model, N, dg)


# --------------------------------------------------------------------------- checks


def _matrix_core_checks(rep: CheckReport, rng: np.random.Generator) -> None:
    worst = 0.0
    violations = 0
    for _ in range(1000):
        d = int(rng.integers(1, 6))
        a, b = random_matrix(rng, d), random_matrix(rng, d)
        gap1 = operator_norm(a) - trace_norm(a)
        gap2 = trace_norm(a @ b) - operator_norm(a) * trace_norm(b)
        scale = max(1.0, trace_norm(a) * trace_norm(b))
        g = max(gap1, gap2) / scale
        worst = max(worst, g)
        violations += int(g > 1e-12)
    rep.add("norm_inequalities", "matrix-core", violations, 0,
            "operator norm below trace norm; trace norm submultiplicative with the operator norm",
            detail=f"1000 samples, largest relative excess {worst:.3e}")

    m = 0.5 * random_matrix(rng, 4)
    err = float(np.max(np.abs(matrix_log_principal(matrix_exp(m)) - m)))
    rep.add("exp_log_round_trip", "matrix-core", err, 1e-9, "principal log inverts the exponential")

    v = random_matrix(rng, 3)
    rep.add("choi_of_conjugation", "matrix-core", max(0.0, -choi_min_eig(sandwich_superop(v, v.conj().T))), 1e-10,
            "Choi matrix of a conjugation map is PSD", detail="measured is the negative part of the smallest eigenvalue")

    a, b = random_matrix(rng, 3), random_matrix(rng, 3)
    err = abs(np.trace(a @ b) - vec(a.T) @ vec(b))
    rep.add("trace_pairing", "matrix-core", err, 1e-13, "trace pairing equals the vectorized inner product")


def _floquet_checks(rep: CheckReport, b: Built) -> None:
    cfg, uf = b.config, b.uf
    T = cfg.period

    def A(t):
        return -1j * cfg.hamiltonian(t)

    fine = FundamentalSolution(A, T, 2 * cfg.steps_per_period)
    rk4_err = float(np.max(np.abs(fine.monodromy - uf.solution.monodromy))) * 16 / 15
    tol = max(10 * rk4_err, 1e-12)
    times = np.arange(64) * (3 * T / 64) + 0.37 * T / 64
    err = max(float(np.max(np.abs(uf.solution(t) - uf.propagator(t)))) for t in times)
    rep.add("floquet_factorization", "floquet-decomposition", err, tol,
            "Phi(t) = P(t) exp(tB) at 64 sample times", detail=f"RK4 error estimate {rk4_err:.3e}")

    mult = np.linalg.eigvals(uf.solution.monodromy)
    pred = np.exp(-1j * T * uf.quasienergies)
    gap = np.abs(mult[:, None] - pred[None, :])
    rep.add("multiplier_consistency", "floquet-decomposition",
            max(float(gap.min(axis=0).max()), float(gap.min(axis=1).max())), 1e-8,
            "multipliers equal the monodromy eigenvalues")

    grid = uf.p.grid
    eye = np.eye(uf.dim)
    unit = max(float(np.max(np.abs(p @ p.conj().T - eye))) for p in grid)
    rep.add("p_unitary", "floquet-decomposition", unit, 1e-8, "p(t) unitary on the grid")
    rep.add("hbar_hermitian", "floquet-decomposition",
            float(np.max(np.abs(uf.hbar - uf.hbar.conj().T))), 1e-10, "averaged Hamiltonian is Hermitian")

    bw = cfg.hamiltonian.bandwidth
    coeffs = fourier_coefficients(cfg.hamiltonian, T, bw + 1)
    err = max(float(np.max(np.abs(coeffs[n] - cfg.hamiltonian.coefficient(n)))) for n in coeffs)
    rep.add("quadrature_exactness", "floquet-decomposition", err, 1e-12,
            "band-limited coefficients recovered exactly")

    tails = truncation_diagnostics(uf, b.dg or _null_davies(uf), b.N)["P_tail"]
    floor = 1e-14
    rises = [max(0.0, tails[i + 1] - tails[i]) for i in range(len(tails) - 1) if tails[i] > floor]
    rep.add("tail_decay", "floquet-decomposition", max(rises, default=0.0), floor,
            "Fourier tail sums of P decrease with the cutoff")


def _null_davies(uf: UnitaryFloquet) -> DaviesGenerator:
    d = uf.dim
    return DaviesGenerator(np.zeros((d * d, d * d), dtype=complex), uf.hbar)


def _wcl_checks(rep: CheckReport, b: Built, rng: np.random.Generator) -> None:
    cfg, uf, model = b.config, b.uf, b.model
    T = cfg.period
    mod = "wcl-generator"
    dg = b.dg

    ws = np.linspace(-5.0, 5.0, 41)
    psd = 0.0
    for w in ws:
        g = cfg.bath(w)
        psd = max(psd, -float(np.linalg.eigvalsh(0.5 * (g + g.conj().T)).min()))
    rep.add("bath_psd", mod, psd, 1e-10, "bath rate matrices are PSD", detail="41 frequencies in [-5, 5]")
    if cfg.bath.kind == "ohmic":
        beta = cfg.bath.params["beta"]
        kms = max(
            float(np.max(np.abs(cfg.bath(-w) - math.exp(-beta * w) * cfg.bath(w)))) / max(1.0, float(np.max(np.abs(cfg.bath(w)))))
            for w in ws if w > 0
        )
        rep.add("bath_kms", mod, kms, 1e-9, "thermal bath obeys the KMS ratio")
    else:
        rep.skip("bath_kms", mod, "thermal bath obeys the KMS ratio", "bath is not thermal")

    if dg is not None and dg.bohr is not None:
        bd = dg.bohr
        rep.add("bohr_relation", mod, bd.bohr_relation_residual(), 1e-9, "[Hbar, S] = w S")
        if all(np.allclose(s, s.conj().T, atol=1e-12) for s in cfg.couplings):
            rep.add("bohr_adjoint", mod, bd.adjoint_relation_residual(), 1e-10, "S_kqw^dag = S_k,-q,-w")
        else:
            rep.skip("bohr_adjoint", mod, "S_kqw^dag = S_k,-q,-w", "couplings are not Hermitian")
        # truncation bound: harmonics beyond Q measured with a wide cutoff
        wide = decompose_jumps(cfg.couplings, uf, min(64, uf.p.grid.shape[0] // 4), cfg.tolerances.cluster)
        bound = 1e-9 + max(
            (sum(float(np.max(np.abs(s))) for (kk, q, _), s in wide.operators.items() if kk == k and abs(q) > bd.harmonics)
             for k in range(len(cfg.couplings))),
            default=0.0,
        )
        err = 0.0
        for t in np.arange(32) * (T / 32):
            u = uf.propagator(t)
            for k, s in enumerate(cfg.couplings):
                err = max(err, float(np.max(np.abs(bd.interaction_picture(k, t) - u.conj().T @ s @ u))))
        rep.add("bohr_completeness", mod, err, bound, "jump decomposition reconstructs the interaction picture",
                detail=f"Q={bd.harmonics}")
        rep.add("davies_trace", mod, dg.trace_residual(), 1e-11, "K annihilates the trace")
        rep.add("davies_commutation", mod, dg.commutator_residual(), 1e-9, "K commutes with ad Hbar")
        worst = max(0.0, *(-choi_min_eig(matrix_exp(tau * T * dg.K)) for tau in (0.1, 1.0, 10.0)))
        rep.add("davies_semigroup_cp", mod, worst, 1e-9, "exp(tau K) is CP",
                detail="measured is the negative part of the smallest Choi eigenvalue over tau/T in {0.1, 1, 10}")
    else:
        for name, prop in (
            ("bohr_relation", "[Hbar, S] = w S"),
            ("bohr_adjoint", "S_kqw^dag = S_k,-q,-w"),
            ("bohr_completeness", "jump decomposition reconstructs the interaction picture"),
            ("davies_trace", "K annihilates the trace"),
            ("davies_commutation", "K commutes with ad Hbar"),
            ("davies_semigroup_cp", "exp(tau K) is CP"),
        ):
            rep.skip(name, mod, prop, "adiabatic generator class")

    times = np.arange(16) * (T / 16)
    worst_k, worst_tp, ok = math.inf, 0.0, True
    for t in times:
        sf = verify_standard_form(model.L(t), cfg.tolerances.psd)
        worst_k = min(worst_k, sf.kossakowski_min_eig)
        worst_tp = max(worst_tp, sf.tp_residual)
        ok = ok and sf.is_gkls
    rep.add("standard_form", mod, max(0.0, -worst_k), cfg.tolerances.psd,
            "L_t is of GKLS form and annihilates the trace at 16 times", passed=ok,
            detail=f"min Kossakowski eigenvalue {worst_k:.3e}, max trace residual {worst_tp:.3e}")

    herm = 0.0
    d = cfg.dimension
    for t in times[::4]:
        Lt = model.L(t)
        rho = random_matrix(rng, d)
        a = unvec(Lt @ vec(rho.conj().T), d).conj().T
        herm = max(herm, float(np.max(np.abs(a - unvec(Lt @ vec(rho), d)))))
    rep.add("hermiticity_preservation", mod, herm, 1e-12, "L_t(rho^dag)^dag = L_t(rho)")

    if cfg.generator == "adiabatic":
        comm = 0.0
        for t in times:
            ham, diss = adiabatic_parts_at(t, cfg.hamiltonian, cfg.couplings, cfg.bath, cfg.tolerances.cluster)
            comm = max(comm, float(np.max(np.abs(ham @ diss - diss @ ham))))
        rep.add("adiabatic_commutation", mod, comm, 1e-9, "Hamiltonian and dissipative parts commute")
    else:
        rep.skip("adiabatic_commutation", mod, "Hamiltonian and dissipative parts commute", "fast-driving generator class")


def _lifting_checks(rep: CheckReport, b: Built, rng: np.random.Generator, diag: dict):
    model, N = b.model, b.N
    T = model.period
    mod = "howland-lifting"
    bwP = conjugation_bandwidth(model)
    Lt = generalized_lindbladian(model.L, N)
    margin = max(LADDER_MARGIN, bwP)

    ladder = spectral_ladder(None, model, N, margin=margin)
    ev = np.linalg.eigvals(Lt.matrix)
    rel = match_ladder(ladder.eigenvalues, ev)
    rep.add("ladder_eigenvalues", mod, float(rel.max()), LADDER_TOL,
            "interior spectrum of the truncated generalized Lindbladian is xi_j - i n Omega",
            detail=f"N={N}, margin {margin}, relative to max(1, |lambda|)")
    interior = N - bwP
    res_in = max((r[3] for r in ladder.rows if abs(r[1]) <= interior), default=0.0)
    res_all = ladder.max_residual
    rep.add("ladder_eigenvectors", mod, res_in, LADDER_TOL,
            "P~(phi_j (x) e_n) are eigenvectors on interior rungs",
            detail=f"|n| <= N - bandwidth(P) = {interior}; margin-{margin} rungs reach {res_all:.3e}")

    worst = 0.0
    for f in FACTOR_TAUS:
        d = Lt.expm(f * T).interior(margin) - lifted_semigroup_factorized(model, None, f * T, N).interior(margin)
        worst = max(worst, float(np.max(np.abs(d))))
    rep.add("semigroup_factorization", mod, worst, 1e-6,
            "exp(tau L~) = P~ (exp(tau Lbar) (x) exp(-i tau Omega F_z)) P~^dag on interior blocks",
            detail=f"tau/T in {{0.1, 0.5, 1}}, margin {margin}")

    d = model.dim
    blocks = np.zeros((2 * N + 1, d, d), dtype=complex)
    blocks[N] = b.config.initial_state
    for n in (-1, 1):
        h = random_hermitian(rng, d)
        blocks[N + n] = 0.1 * (h - np.trace(h) / d * np.eye(d))
    s = GeneralizedState(blocks, T)
    tp = max(abs(lifted_trace(lifted_semigroup_factorized(model, None, f * T, N).apply(s)) - lifted_trace(s))
             for f in FACTOR_TAUS)
    rep.add("lifted_trace_preservation", mod, tp, 1e-10, "lifted semigroup preserves the lifted trace")

    P_tail = truncation_diagnostics(b.uf, b.dg or _null_davies(b.uf), N)["P_tail"]
    bound = 1e-12 + (P_tail[N - 2] if N >= 3 else P_tail[-1]) * sum(float(np.abs(x).sum()) for x in blocks)
    err = lifted_evaluation_residual(model.P, s, np.arange(32) * (T / 32))
    rep.add("evaluation_homomorphism", mod, err, bound, "evaluating A~ s at t equals A_t(s(t))",
            detail="lift of P_t at 32 times")

    comm = 0.0
    Fz = number_matrix(N)
    keep = np.abs(np.arange(-N, N + 1)) <= N - 3
    for n in range(1, 4):
        F = shift_matrix(n, N)
        c = (Fz @ F - F @ Fz - n * F)[np.ix_(keep, keep)]
        comm = max(comm, float(np.max(np.abs(c))))
    rep.add("shift_number_commutation", mod, comm, 0.0, "[F_z, F_n] = n F_n on the interior")

    ce = contraction_counterexample(T)
    gap = max(abs(ce["l2_norm"] - 1.0), abs(ce["max_value"] - math.sqrt(30) / 4))
    rep.add("contraction_counterexample", mod, gap, 1e-10,
            "xi has unit mean-square norm but peak sqrt(30)/4 > 1",
            passed=gap <= 1e-10 and ce["constant_state_isometry"] and not ce["pointwise_contraction"],
            detail=f"isometric on constant states: {ce['constant_state_isometry']}; "
                   f"pointwise contraction: {ce['pointwise_contraction']}; peak {ce['max_value']:.10f}")
    diag["contraction_counterexample"] = ce

    if b.dg is not None:
        H = b.config.hamiltonian
        lm = max(lm_component_identity_check(m, b.dg, b.uf, H) for m in range(-LM_RANGE, LM_RANGE + 1))
        rep.add("lm_component_identity", mod, lm, 1e-8,
                "L_m = sum_n P_n (Lbar + i n Omega) Pinv_(m-n)", detail=f"|m| <= {LM_RANGE}")
        q = q_antisymmetry_check(b.uf, N)
        rep.add("q_antisymmetry", mod, q, 1e-7, "P~ Q^dag + Q P~^dag = 0 on interior blocks")
        td = truncation_diagnostics(b.uf, b.dg, N, H)
        rep.add("pdot_identity", mod, td["Pdot_residual"], 1e-6,
                "dP_t/dt = -i ad(H_t - P_t(Hbar)) P_t", detail="central difference, h = 1e-4 T")
        diag["truncation"] = td
    else:
        for name, prop in (
            ("lm_component_identity", "L_m = sum_n P_n (Lbar + i n Omega) Pinv_(m-n)"),
            ("q_antisymmetry", "P~ Q^dag + Q P~^dag = 0 on interior blocks"),
            ("pdot_identity", "dP_t/dt = -i ad(H_t - P_t(Hbar)) P_t"),
        ):
            rep.skip(name, mod, prop, "requires a unitary periodic factor")
        diag["truncation"] = {
            "N": N,
            "P_bandwidth": bwP,
            "P_truncation_error": model.P.truncation_error,
        }
    diag["ladder"] = {
        "N": N,
        "margin": margin,
        "interior": interior,
        "P_bandwidth": bwP,
        "condition": ladder.condition,
        "base_eigenvalues": [[float(z.real), float(z.imag)] for z in ladder.base_eigenvalues],
    }
    return ladder


def _evolution_checks(rep: CheckReport, b: Built, diag: dict, seed: int) -> dict[str, Trajectory]:
    cfg, model, N = b.config, b.model, b.N
    T = cfg.period
    mod = "evolution-engine"
    rho0 = cfg.initial_state
    grid = cfg.times
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        fact = evolve_factorized(rho0, grid, model)
        how = evolve_howland(rho0, grid, model, N=N)
    steps = rk4_steps_for(grid, T, cfg.rk4_steps_per_period)
    rk4 = rk4_reference(rho0, grid, model.L, steps)
    trajs = {"factorized": fact, "howland": how, "rk4": rk4}
    gaps = {"factorized-howland": fact.distance(how), "factorized-rk4": fact.distance(rk4),
            "howland-rk4": how.distance(rk4)}
    rep.add("three_way_agreement", mod, max(gaps.values()), 1e-5,
            "factorized, Howland and RK4 trajectories agree in trace norm",
            detail=", ".join(f"{k} {v:.3e}" for k, v in gaps.items())
            + (f"; {len(caught)} truncation warning(s)" if caught else ""))
    rep.add("trace_factorized", mod, float(np.max(np.abs(fact.traces() - 1))), 1e-10,
            "factorized trajectory is trace preserving")
    rep.add("trace_rk4", mod, float(np.max(np.abs(rk4.traces() - 1))), 1e-8, "RK4 trajectory is trace preserving")
    low = min(float(t.min_eigenvalues().min()) for t in trajs.values())
    rep.add("positivity", mod, max(0.0, -low), 1e-9, "states stay positive", detail=f"smallest eigenvalue {low:.3e}")

    probes = probe_pairs(cfg.dimension, 20, seed)
    excess = 0.0
    for r, s in probes:
        x = vec(r - s)
        prev = math.inf
        for t in grid:
            val = trace_norm(unvec(model.dynamical_map(t) @ x, cfg.dimension))
            excess = max(excess, val - prev)
            prev = val
    rep.add("contraction_in_time", mod, max(0.0, excess), 1e-9,
            "trace distance of evolved probe pairs is non-increasing", detail=f"20 probe pairs, seed {seed}")

    if np.max(np.abs(model.lbar - hamiltonian_superop(b.uf.hbar))) == 0.0:
        pur = float(np.max(np.abs(fact.purities() - fact.purities()[0])))
        rep.add("purity_conservation", mod, pur, 1e-8, "closed dynamics conserves purity")
    else:
        rep.skip("purity_conservation", mod, "closed dynamics conserves purity", "dissipative run")

    ts = np.linspace(0.0, 2 * T, CP_GRID)
    pairs = [(t, s) for t in ts for s in ts if s <= t]
    cp = cp_divisibility_report(model, None, pairs, seed=seed)
    failing = [f"({p['t']:.4f}, {p['s']:.4f})" for p in cp["pairs"] if not p["pass"]]
    rep.add("cp_divisibility", mod, max(0.0, -cp["min_choi_eig"]), 1e-9,
            "every V_(t,s) is CP, trace preserving and contractive", passed=cp["all_pass"],
            detail=f"{len(pairs)} pairs; max TP residual {cp['max_tp_residual']:.3e}; "
                   f"max contraction excess {cp['max_contraction_excess']:.3e}"
                   + (f"; failing pairs {', '.join(failing[:4])}" if failing else ""))
    diag["cp_divisibility"] = cp

    t, s, r = 1.7 * T, 0.9 * T, 0.4 * T
    ck = float(np.max(np.abs(propagator(t, s, model) @ propagator(s, r, model) - propagator(t, r, model))))
    rep.add("chapman_kolmogorov", mod, ck, 1e-9, "V_(t,s) V_(s,r) = V_(t,r)")

    rep.add("periodic_spectrum", mod, periodic_spectrum_residual(model), 1e-9,
            "V_(t+T,t) has the same spectrum at every phase", detail="4 phases")

    f = lambda t: rho0  # noqa: E731
    g1 = w_tau_apply(w_tau_apply(f, 0.5 * T, model), 0.3 * T, model)
    g2 = w_tau_apply(f, 0.8 * T, model)
    wt = max(float(np.max(np.abs(g1(t) - g2(t)))) for t in np.arange(16) * (T / 16))
    rep.add("w_tau_semigroup", mod, wt, 1e-8, "W_(tau1) W_(tau2) = W_(tau1 + tau2)", detail="tau = 0.3T, 0.5T")
    return trajs


def run(cfg: SimulationConfig) -> RunResult:
    """Build the model, run every check and collect the artifacts."""
    b = build(cfg)
    rng = np.random.default_rng(cfg.seed)
    rep = CheckReport()
    diag: dict = {}
    _matrix_core_checks(rep, rng)
    _floquet_checks(rep, b)
    _wcl_checks(rep, b, rng)
    ladder = _lifting_checks(rep, b, rng, diag)
    trajs = _evolution_checks(rep, b, diag, cfg.seed)
    diag.update(
        {
            "config": cfg.to_json(),
            "seed": cfg.seed,
            "generator": cfg.generator,
            "truncation": diag.get("truncation", {}),
            "floquet": {
                "hbar": matrix_to_json(b.uf.hbar),
                "quasienergies": [float(x) for x in b.uf.quasienergies],
                "p_truncation_error": b.uf.p.truncation_error,
            },
            "lbar": matrix_to_json(b.model.lbar),
        }
    )
    if b.dg is not None and b.dg.bohr is not None:
        diag["bohr_frequencies"] = [float(x) for x in b.dg.bohr.frequencies]
        diag["harmonic_cutoff"] = b.dg.bohr.harmonics
    return RunResult(report=rep, trajectories=trajs, ladder=ladder, diagnostics=diag)


# --------------------------------------------------------------------------- output


def _combined_csv(trajs: dict[str, Trajectory]) -> str:
    parts = []
    for k, name in enumerate(("factorized", "howland", "rk4")):
        text = trajs[name].to_csv()
        parts.append(text if k == 0 else text.split("\n", 1)[1])
    return "".join(parts)


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    raise TypeError(f"not serializable: {type(x).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def write_outputs(result: RunResult, out_dir, check_only: bool = False) -> list[Path]:
    from .report import report_render

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "report.json": result.report.dumps(),
        "report.txt": report_render(result.report),
    }
    if not check_only:
        files["trajectory.csv"] = _combined_csv(result.trajectories)
        files["ladder.csv"] = result.ladder.to_csv() if result.ladder is not None else ""
        files["diagnostics.json"] = dumps(result.diagnostics)
    written = []
    for name in sorted(files):
        path = out / name
        path.write_text(files[name])
        written.append(path)
    return written
