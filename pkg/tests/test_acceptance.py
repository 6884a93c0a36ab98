"""Acceptance gate: the eight headline checks at their pinned tolerances.

Each test prints one PASS/FAIL line (visible with ``pytest -s`` and in the
failure output) and then asserts.  Three checks are expected to fail and
carry the measured numbers in their messages:

* check 1: the target pulse fidelities (0.97 / 0.77) are only reproduced
  if every damping rate is doubled relative to the closed-form
  transmission matrix that checks 2 and 3 pin to 1e-12; the faithful
  computation gives 0.943 / 0.572.
* checks 4 and 5 (two points of 4, and all points, respectively): at ramp
  amplitude 5 and duration pi/2 the schedule's adiabaticity ratio is 0.2,
  which leaves a nonadiabatic amplitude deficit of 0.044 and a mechanical
  noise pickup of ~1.4e-3 in fidelity.  Both tolerance models assume the
  adiabatic limit; the companion tests in test_adiabatic.py show the same
  quantities land well inside those tolerances once the ramp is 10x slower.
"""

import math
import time

import numpy as np

from omtransfer.adiabatic import analytic_fidelity, fs_bound
from omtransfer.gaussian import (
    SingleModeGaussian,
    embed_initial,
    fock_oracle_fidelity,
    gaussian_fidelity,
    integrate,
    make_squeezed_coherent,
    reduce_to_mode,
)
from omtransfer.model import ConstantCoupling, SystemParams, TrigSchedule, build_dynamic_matrix
from omtransfer.spectral import dark_mode_exact, dark_mode_perturbative, eigensystem
from omtransfer.transmission import (
    Pulse,
    gaussian_pulse,
    half_width,
    pulse_fidelity,
    t31_resonant,
    transmission_matrix,
    transmit_pulse_freq,
    transmit_pulse_time,
)

G0 = 5.0
FIG1 = TrigSchedule(5.0, math.pi / 2)
FIG2_PAIRS = [(0.096, 0.054), (0.064, 0.036), (0.032, 0.018), (0.0192, 0.032)]
TARGET_PAIR = (0.064, 0.032)


def fig2_params(pair):
    return SystemParams(kappa1=pair[0] * G0, kappa2=pair[1] * G0, gamma_m=2e-4 * G0)


def report(index, name, ok, detail, elapsed, budget):
    status = "PASS" if ok else "FAIL"
    line = f"ACCEPTANCE {index} [{name}]: {status} ({detail}) [{elapsed:.2f}s < {budget}s]"
    print(line)
    assert elapsed < budget, f"runtime budget exceeded: {line}"
    assert ok, line


def test_acceptance_1_pulse_fidelity_values():
    start = time.perf_counter()
    params = fig2_params(TARGET_PAIR)
    measured = {}
    for s_rel in (0.008, 0.04):
        p_in = gaussian_pulse(s_rel * G0)
        out = transmit_pulse_freq(p_in, params, 4.0, 3.0)
        measured[s_rel] = pulse_fidelity(p_in, out)
    # also record the matched pair used by the other three damping sets
    params_alt = fig2_params((0.064, 0.036))
    recorded = {}
    for s_rel in (0.008, 0.04):
        p_in = gaussian_pulse(s_rel * G0)
        recorded[s_rel] = pulse_fidelity(
            p_in, transmit_pulse_freq(p_in, params_alt, 4.0, 3.0)
        )
    elapsed = time.perf_counter() - start
    ok = abs(measured[0.008] - 0.97) <= 0.02 and abs(measured[0.04] - 0.77) <= 0.03
    detail = (
        f"Fp(0.008 g0)={measured[0.008]:.4f} vs 0.97+-0.02, "
        f"Fp(0.04 g0)={measured[0.04]:.4f} vs 0.77+-0.03; "
        f"matched pair (0.064, 0.036) gives {recorded[0.008]:.4f}, {recorded[0.04]:.4f}"
    )
    report(1, "pulse-fidelity targets", ok, detail, elapsed, 5.0)


def test_acceptance_2_resonant_transmission():
    start = time.perf_counter()
    res = t31_resonant(fig2_params((0.064, 0.036)), 4.0, 3.0)
    unit_ok = abs(res.value - 1.0) <= 1e-5 and res.optimal
    worst_rel = 0.0
    for pair in FIG2_PAIRS:
        params = fig2_params(pair)
        t31 = abs(transmission_matrix(params, 4.0, 3.0, 0.0)[2, 0])
        closed = t31_resonant(params, 4.0, 3.0).value
        worst_rel = max(worst_rel, abs(t31 - closed) / closed)
    elapsed = time.perf_counter() - start
    ok = unit_ok and worst_rel <= 1e-12
    detail = f"T31(0)={res.value:.8f}, matrix-vs-closed-form rel err {worst_rel:.2e}"
    report(2, "resonant transmission", ok, detail, elapsed, 1.0)


def test_acceptance_3_half_width():
    start = time.perf_counter()
    worst_rel = 0.0
    for pair in FIG2_PAIRS:
        analytic, numeric = half_width(fig2_params(pair), 4.0, 3.0)
        worst_rel = max(worst_rel, abs(analytic - numeric) / numeric)
    analytic_target, _ = half_width(fig2_params(TARGET_PAIR), 4.0, 3.0)
    elapsed = time.perf_counter() - start
    ok = (
        worst_rel < 0.05
        and abs(analytic_target / G0 - 0.0377) <= 5e-5
        and abs(analytic_target / G0 - 0.04) / 0.04 < 0.07
    )
    detail = (
        f"numeric-vs-analytic worst rel {worst_rel:.3%}, "
        f"target-pair analytic {analytic_target / G0:.5f} g0 vs expected 0.04"
    )
    report(3, "transmission half-width", ok, detail, elapsed, 1.0)


def _conversion_fidelity(params, schedule, duration, alpha=1.0, r=0.0):
    initial = make_squeezed_coherent(alpha, r, 0.0)
    traj = integrate(embed_initial(initial, 0.0), params, schedule, duration)
    return gaussian_fidelity(initial, reduce_to_mode(traj.final, 3))


def test_acceptance_4_adiabatic_conversion():
    start = time.perf_counter()
    failures = []
    details = []
    for k1 in (0.05, 0.1, 0.2, 0.5):
        params = SystemParams(kappa1=k1, kappa2=0.0)
        f_num = _conversion_fidelity(params, FIG1, math.pi / 2)
        with np.errstate(all="ignore"):
            rep = _quiet_analytic(params)
        diff = abs(f_num - rep.F)
        tol = 2.0 * rep.f0T**2
        details.append(f"k1={k1}: |dF|={diff:.2e} tol={tol:.2e}")
        if diff > tol:
            failures.append(k1)
    slow = TrigSchedule(5.0, 5 * math.pi)
    infid = 1.0 - _conversion_fidelity(SystemParams(kappa1=0.0, kappa2=0.0), slow, 5 * math.pi)
    slow_ok = infid < 1e-3
    elapsed = time.perf_counter() - start
    ok = not failures and slow_ok
    detail = "; ".join(details) + f"; 10x-slow infidelity {infid:.2e}"
    report(4, "adiabatic conversion vs first-order fidelity", ok, detail, elapsed, 30.0)


def _quiet_analytic(params):
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return analytic_fidelity(1.0, 0.0, 0.0, params, FIG1, math.pi / 2)


def test_acceptance_5_thermal_noise_immunity():
    start = time.perf_counter()
    duration = math.pi / 2
    noisy_tpl = dict(kappa2=0.0, gamma_m=2e-4, n_th=100.0)
    failures = []
    bound_at_1 = None
    for r in (0.0, 0.4):
        for k1 in (0.0, 0.25, 0.5, 0.75, 1.0):
            quiet = SystemParams(kappa1=k1, kappa2=0.0)
            noisy = SystemParams(kappa1=k1, **noisy_tpl)
            f_quiet = _conversion_fidelity(quiet, FIG1, duration, r=r)
            f_noisy = _conversion_fidelity(noisy, FIG1, duration, r=r)
            bound = 3.0 * fs_bound(noisy, FIG1, duration) * math.cosh(2.0 * r)
            delta = abs(f_quiet - f_noisy)
            if k1 == 1.0 and r == 0.0:
                bound_at_1 = bound
            if delta > bound:
                failures.append((r, k1, delta, bound))
    bound_sane = bound_at_1 is not None and abs(bound_at_1 - 4.7e-4) < 0.1e-4
    elapsed = time.perf_counter() - start
    ok = not failures and bound_sane
    detail = (
        f"bound(k1=1, r=0)={bound_at_1:.3e} (expected ~4.7e-4); "
        + (
            f"{len(failures)} point(s) exceed the bound, first: r={failures[0][0]}, "
            f"k1={failures[0][1]}, dF={failures[0][2]:.2e} > {failures[0][3]:.2e}"
            if failures
            else "all points within the bound"
        )
    )
    report(5, "thermal-noise immunity", ok, detail, elapsed, 60.0)


def _random_physical_state(rng):
    while True:
        alpha = rng.uniform(-math.sqrt(2), math.sqrt(2)) + 1j * rng.uniform(
            -math.sqrt(2), math.sqrt(2)
        )
        r = rng.uniform(0.0, 0.8)
        phi = rng.uniform(0.0, math.pi)
        nu = 1.0 + 2.0 * rng.uniform(0.0, 1.2)
        n_ex = (nu * math.cosh(2.0 * r) - 1.0) / 2.0
        if abs(alpha) <= 2.0 and n_ex <= 3.0:
            m_an = -np.exp(2j * phi) * nu * math.sinh(2.0 * r) / 2.0
            return SingleModeGaussian(mean=alpha, n_ex=n_ex, m_an=m_an)


def test_acceptance_6_fidelity_oracle_equivalence():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(50):
        s1 = _random_physical_state(rng)
        s2 = _random_physical_state(rng)
        worst = max(worst, abs(gaussian_fidelity(s1, s2) - fock_oracle_fidelity(s1, s2)))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-6
    report(
        6,
        "Gaussian fidelity vs Fock oracle",
        ok,
        f"worst |dF| = {worst:.2e} over 50 random state pairs",
        elapsed,
        60.0,
    )


def test_acceptance_7_spectral_properties():
    start = time.perf_counter()
    es = eigensystem(build_dynamic_matrix(SystemParams(kappa1=0.0, kappa2=0.0), 3.0, 4.0))
    spectrum_err = max(
        abs(got - want) for got, want in zip(sorted(es.lambdas, key=lambda z: z.real), (-5.0, 0.0, 5.0))
    )
    rng = np.random.default_rng(77)
    worst_lam, worst_vec = 0.0, 0.0
    for _ in range(40):
        g1, g2 = rng.uniform(0.5, 5.0, size=2)
        g0 = math.hypot(g1, g2)
        k1, k2, gm = rng.uniform(0.0, 0.1 * g0, size=3)
        ratio = max(k1, k2, gm) / g0
        params = SystemParams(kappa1=k1, kappa2=k2, gamma_m=gm)
        pert = dark_mode_perturbative(params, g1, g2)
        exact = dark_mode_exact(build_dynamic_matrix(params, g1, g2))
        lam_err = abs(pert.lambda1 - exact.lambda1) / (ratio**2 * g0 + 1e-300)
        vec_err = np.linalg.norm(pert.vector - exact.vector) / (ratio**2 + 1e-300)
        worst_lam = max(worst_lam, lam_err)
        worst_vec = max(worst_vec, vec_err)
    elapsed = time.perf_counter() - start
    ok = spectrum_err <= 1e-12 * G0 and worst_lam < 5.0 and worst_vec < 5.0
    detail = (
        f"zero-damping spectrum err {spectrum_err:.2e}, "
        f"second-order coefficients: lambda {worst_lam:.2f}, vector {worst_vec:.2f} (< 5)"
    )
    report(7, "spectral properties", ok, detail, elapsed, 1.0)


def test_acceptance_8_cross_domain_consistency():
    start = time.perf_counter()
    params = fig2_params(TARGET_PAIR)
    worst = 0.0
    for s_rel in (0.008, 0.04):
        p_in = gaussian_pulse(s_rel * G0)
        out_f = transmit_pulse_freq(p_in, params, 4.0, 3.0)
        n = p_in.times.size
        amps = np.zeros(4 * n, dtype=complex)
        amps[:n] = p_in.amplitudes
        padded = Pulse(times=out_f.times.copy(), amplitudes=amps)
        out_t = transmit_pulse_time(padded, params, ConstantCoupling(4.0, 3.0))
        rel = np.linalg.norm(out_t.amplitudes - out_f.amplitudes) / np.linalg.norm(
            out_f.amplitudes
        )
        worst = max(worst, rel)
    elapsed = time.perf_counter() - start
    ok = worst < 1e-3
    report(
        8,
        "time vs frequency domain",
        ok,
        f"worst relative L2 difference {worst:.2e}",
        elapsed,
        10.0,
    )
