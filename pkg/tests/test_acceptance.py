"""The ten acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line, printed in the terminal summary.
"""
import math

import numpy as np
from scipy.special import jv

from floquet_lindblad.evolution import (
    cp_divisibility_report,
    evolve_factorized,
    evolve_howland,
    rk4_reference,
    rk4_steps_for,
)
from floquet_lindblad.lifting import (
    conjugation_bandwidth,
    contraction_counterexample,
    generalized_lindbladian,
    ladder_eigenvector,
    lifted_semigroup_factorized,
    lm_component_identity_check,
    match_ladder,
    q_antisymmetry_check,
)
from floquet_lindblad.linalg import ad_superop, operator_norm, trace_functional, trace_norm
from floquet_lindblad.wcl import full_lindbladian_at, verify_standard_form

from conftest import ACCEPTANCE_LINES, SZ

SEED = 20240611


def record(k, title, ok, detail):
    ACCEPTANCE_LINES.append(f"criterion {k:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
    assert ok, detail


def test_criterion_01_floquet_closed_form(drive_floquet):
    uf = drive_floquet
    h_err = float(np.max(np.abs(uf.hbar - 0.5 * SZ)))
    z = 0.7 / (2 * 3.0)
    c_err = max(
        float(np.max(np.abs(uf.p.coefficient(n) - np.diag([jv(n, -z), jv(n, z)])))) for n in range(-8, 9)
    )
    record(1, "Floquet closed form", h_err <= 1e-8 and c_err <= 1e-8,
           f"|Hbar - sz/2| = {h_err:.2e}, Bessel coefficient error = {c_err:.2e} (tol 1e-8)")


def test_criterion_02_davies_structure(benchmark):
    dg, uf, H = benchmark.dg, benchmark.uf, benchmark.config.hamiltonian
    comm = operator_norm(dg.K @ ad_superop(uf.hbar) - ad_superop(uf.hbar) @ dg.K)
    tr = float(np.max(np.abs(trace_functional(uf.dim) @ dg.K)))
    reports = [verify_standard_form(full_lindbladian_at(t, dg, uf, H))
               for t in np.linspace(0, uf.period, 16, endpoint=False)]
    koss = min(r.kossakowski_min_eig for r in reports)
    ok = comm <= 1e-9 and tr <= 1e-11 and koss >= -1e-10 and all(r.is_gkls for r in reports)
    record(2, "Davies structure", ok,
           f"|[K, ad Hbar]| = {comm:.2e}, trace annihilation = {tr:.2e}, min Kossakowski eig over 16 t = {koss:.2e}")


def test_criterion_03_cp_divisibility(benchmark):
    T = benchmark.model.period
    s_vals = np.linspace(0, T, 6)
    gaps = np.linspace(0, 2 * T, 6)
    pairs = [(s + g, s) for s in s_vals for g in gaps]
    rep = cp_divisibility_report(benchmark.model, None, pairs, seed=SEED, n_probes=20,
                                 choi_tol=1e-9, tp_tol=1e-10, contraction_slack=0.0)
    ok = (len(pairs) == 36 and rep["min_choi_eig"] >= -1e-9 and rep["max_tp_residual"] <= 1e-10
          and rep["max_contraction_excess"] <= 0.0 and rep["all_pass"])
    record(3, "CP-divisibility", ok,
           f"36 pairs, min Choi eig = {rep['min_choi_eig']:.2e}, max TP residual = {rep['max_tp_residual']:.2e}, "
           f"max contraction excess = {rep['max_contraction_excess']:.2e}")


def test_criterion_04_spectral_ladder(benchmark):
    b = benchmark
    N, margin, omega = 10, 3, b.model.omega
    Lt = generalized_lindbladian(b.model.L, N)
    computed = np.linalg.eigvals(Lt.matrix)
    xi, vecs = np.linalg.eig(b.model.lbar)
    predicted = np.array([x - 1j * n * omega for n in range(-(N - margin), N - margin + 1) for x in xi])
    eig_err = float(np.max(match_ladder(predicted, computed)))

    def residual(n, j):
        phi = ladder_eigenvector(b.model.P.coeffs, vecs[:, j], n, N)
        lam = xi[j] - 1j * n * omega
        return float(np.linalg.norm(Lt.matrix @ phi - lam * phi) / np.linalg.norm(phi))

    bw = conjugation_bandwidth(b.model)
    inner = max(residual(n, j) for n in range(-(N - bw), N - bw + 1) for j in range(len(xi)))
    outer = max(residual(n, j) for n in range(-(N - margin), N - margin + 1) for j in range(len(xi)))
    ok = eig_err <= 1e-6 and inner <= 1e-6
    record(4, "spectral ladder", ok,
           f"eigenvalue rel. error (margin {margin}) = {eig_err:.2e}; eigenvector residual for |n| <= N - bw(P) = {N - bw}: "
           f"{inner:.2e}; at margin {margin}: {outer:.2e}")


def test_criterion_05_factorization(benchmark):
    b = benchmark
    N, T = 10, b.model.period
    Lt = generalized_lindbladian(b.model.L, N)
    errs = []
    for tau in (0.1 * T, 0.5 * T, T):
        dense = Lt.expm(tau).interior(3)
        fact = lifted_semigroup_factorized(b.model, None, tau, N).interior(3)
        errs.append(float(np.max(np.abs(dense - fact))))
    record(5, "factorization", max(errs) <= 1e-6,
           "interior error at tau = 0.1T, 0.5T, T: " + ", ".join(f"{e:.2e}" for e in errs))


def test_criterion_06_three_way_agreement(benchmark):
    b = benchmark
    T = b.model.period
    grid = np.linspace(0, 5 * T, 101)
    rho0 = b.config.initial_state
    fac = evolve_factorized(rho0, grid, b.model)
    how = evolve_howland(rho0, grid, b.model, N=10)
    rk = rk4_reference(rho0, grid, b.model.L, steps=rk4_steps_for(grid, T, 512))
    gaps = [fac.distance(how), fac.distance(rk), how.distance(rk)]
    record(6, "three-way agreement", max(gaps) <= 1e-5,
           f"trace-norm gaps factorized/Howland = {gaps[0]:.2e}, factorized/RK4 = {gaps[1]:.2e}, Howland/RK4 = {gaps[2]:.2e}")


def test_criterion_07_fourier_component_identity(benchmark):
    b = benchmark
    res = [lm_component_identity_check(m, b.dg, b.uf, b.config.hamiltonian) for m in range(-4, 5)]
    record(7, "m-th Fourier component identity", max(res) <= 1e-8, f"max residual over |m| <= 4 = {max(res):.2e}")


def test_criterion_08_q_antisymmetry(benchmark):
    r3 = q_antisymmetry_check(benchmark.uf, 10, margin=3)
    rd = q_antisymmetry_check(benchmark.uf, 10)
    record(8, "Q antisymmetry identity", max(r3, rd) <= 1e-7,
           f"interior residual N=10: margin 3 = {r3:.2e}, default margin = {rd:.2e}")


def test_criterion_09_counterexample():
    out = contraction_counterexample(1.0)
    ok = (abs(out["l2_norm"] - 1) <= 1e-10 and abs(out["max_value"] - math.sqrt(30) / 4) <= 1e-10
          and out["constant_state_isometry"] and not out["pointwise_contraction"])
    record(9, "counterexample", ok,
           f"L2 norm = {out['l2_norm']:.15f}, max = {out['max_value']:.15f} (sqrt(30)/4 = {math.sqrt(30) / 4:.15f})")


def test_criterion_10_norm_inequalities():
    rng = np.random.default_rng(SEED)
    violations = 0
    for _ in range(1000):
        d = int(rng.integers(1, 6))
        scale = 10.0 ** rng.uniform(-3, 3, size=2)
        a = scale[0] * (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
        b = scale[1] * (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
        if rng.random() < 0.2:
            a[:, 0] = 0  # rank-deficient samples
        ta, tb = trace_norm(a), trace_norm(b)
        slack = 1e-12
        if operator_norm(a) > ta * (1 + slack):
            violations += 1
        if trace_norm(a @ b) > operator_norm(a) * tb * (1 + slack):
            violations += 1
    record(10, "norm inequalities", violations == 0, f"{violations} violations in 1000 samples")
