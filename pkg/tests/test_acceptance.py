"""Acceptance suite: one test per release criterion, one printed verdict each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines. Every tolerance is pinned here; nothing is tuned at runtime.
"""

import time

import numpy as np

from ucclab import experiment as ex
from ucclab import tomography as tg
from ucclab.channels import (
    CONTROLLED_Z,
    DensityMatrix,
    PHASE_FLIP_FIRST,
    PHASE_FLIP_SECOND,
    anticorrelated_phase_flip,
    random_density,
)
from ucclab.codes import (
    commutant_basis,
    find_noiseless_subsystems,
    find_unitarily_correctable_codes,
    verify_correction,
)
from ucclab.schemas import AcquisitionSettings, PrepSettings
from ucclab.workbench import run_report, sweep_table

from helpers import commutant_dim_bruteforce

NOISE = anticorrelated_phase_flip()
P_OUTER = np.diag([1.0, 0.0, 0.0, 1.0])
P_INNER = np.diag([0.0, 1.0, 1.0, 0.0])
SWEEP_GRID = [float(t) for t in np.linspace(0.0, 90.0, 37)]


def _verdict(number, ok, detail, budget_s, elapsed_s):
    status = "PASS" if ok else "FAIL"
    print(f"[acceptance] criterion {number}: {status} ({elapsed_s:.2f}s / budget {budget_s:.0f}s) - {detail}")
    assert ok, f"criterion {number}: {detail}"
    assert elapsed_s < budget_s, f"criterion {number} exceeded runtime budget: {elapsed_s:.2f}s"


def _ucc_by_projector():
    codes = find_unitarily_correctable_codes(NOISE)
    outer = next(c for c in codes if np.abs(c.projector - P_OUTER).max() < 1e-9)
    inner = next(c for c in codes if np.abs(c.projector - P_INNER).max() < 1e-9)
    return codes, outer, inner


def test_criterion_1_code_discovery():
    start = time.perf_counter()
    problems = []

    if find_noiseless_subsystems(NOISE) != []:
        problems.append("expected no passive codes for the built-in noise")

    codes, outer, inner = _ucc_by_projector()
    if len(codes) != 2:
        problems.append(f"expected exactly two correctable codes, got {len(codes)}")
    if np.abs(outer.projector - P_OUTER).max() >= 1e-9 or np.abs(inner.projector - P_INNER).max() >= 1e-9:
        problems.append("code projectors do not match the two codespace projectors")

    z1z2 = (PHASE_FLIP_FIRST @ PHASE_FLIP_SECOND).real
    oracle_pairs = (
        ([PHASE_FLIP_FIRST.real, PHASE_FLIP_SECOND.real], [PHASE_FLIP_FIRST, PHASE_FLIP_SECOND], 4),
        ([np.eye(4), z1z2], [np.eye(4), PHASE_FLIP_FIRST @ PHASE_FLIP_SECOND], 8),
    )
    for int_gens, gens, expected in oracle_pairs:
        brute = commutant_dim_bruteforce(int_gens)
        numeric = len(commutant_basis(gens))
        if brute != expected or numeric != expected:
            problems.append(
                f"commutant dimension mismatch: brute force {brute}, numeric {numeric}, expected {expected}"
            )

    elapsed = time.perf_counter() - start
    _verdict(1, not problems, problems or "no passive codes, two correctable codes, oracle agrees (4, 8)", 1.0, elapsed)


def test_criterion_2_recovery_verification():
    start = time.perf_counter()
    problems = []
    _, outer, inner = _ucc_by_projector()
    candidates = (("Z1", PHASE_FLIP_FIRST), ("Z2", PHASE_FLIP_SECOND), ("CZ", CONTROLLED_Z))
    for name, unitary in candidates:
        for code_name, code in (("C1", outer), ("C2", inner)):
            if not verify_correction(NOISE, unitary, code, trials=100, tol=1e-8):
                problems.append(f"{name} does not verify on {code_name}")
    for code_name, code in (("C1", outer), ("C2", inner)):
        if verify_correction(NOISE, np.eye(4), code, trials=100, tol=1e-8):
            problems.append(f"identity unexpectedly verifies on {code_name}")
    elapsed = time.perf_counter() - start
    _verdict(
        2,
        not problems,
        "; ".join(problems) or "Z1, Z2, CZ verify on both codes; identity fails on both",
        1.0,
        elapsed,
    )


def test_criterion_3_fidelity_law_exact():
    start = time.perf_counter()
    table = sweep_table(SWEEP_GRID, 0.0, 0.0, AcquisitionSettings(mode="exact"))
    worst_noisy = max(abs(r.fidelity_noisy - np.cos(np.deg2rad(4 * r.theta_deg)) ** 2) for r in table.rows)
    worst_corrected = max(abs(r.fidelity_corrected - 1.0) for r in table.rows)
    ok = worst_noisy < 1e-12 and worst_corrected < 1e-12
    elapsed = time.perf_counter() - start
    _verdict(
        3,
        ok,
        f"max |F_noisy - cos^2(4 theta)| = {worst_noisy:.2e}, max |F_corrected - 1| = {worst_corrected:.2e}",
        5.0,
        elapsed,
    )


def test_criterion_4_high_fidelity_recovery_statistics():
    start = time.perf_counter()
    mixing = ex.mixing_for_da_visibility(0.953)
    worst = 1.0
    for seed in range(10):
        table = sweep_table(
            SWEEP_GRID, 0.0, mixing, AcquisitionSettings(mode="poisson", seed=seed)
        )
        worst = min(worst, min(r.fidelity_corrected for r in table.rows))
    ok = worst >= 0.97
    elapsed = time.perf_counter() - start
    _verdict(
        4,
        ok,
        f"mixing {mixing:.3f}: min corrected fidelity over 10 seeds x 37 angles = {worst:.4f} (>= 0.97)",
        120.0,
        elapsed,
    )


def test_criterion_5_single_state_narrative():
    start = time.perf_counter()
    mixing = ex.mixing_for_self_fidelity(0.98)
    report = run_report(
        PrepSettings(theta_deg=35.5, phi_deg=46.5, mixing=mixing),
        AcquisitionSettings(mode="poisson", seed=0),
    )
    f_noisy = report.fidelity_noisy_vs_initial
    f_corrected = report.fidelity_corrected_vs_initial
    ok = abs(f_noisy - 0.62) <= 0.08 and f_corrected >= 0.95
    elapsed = time.perf_counter() - start
    _verdict(
        5,
        ok,
        f"F_noisy = {f_noisy:.3f} (0.62 +/- 0.08), F_corrected = {f_corrected:.3f} (>= 0.95)",
        10.0,
        elapsed,
    )


def test_criterion_6_tomography_consistency():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    states = [random_density(rng, 4) for _ in range(20)]
    problems = []

    for idx, truth in enumerate(states):
        record = ex.simulate_counts(truth, ex.AcquisitionConfig(12000.0, 5.0, idx, "exact"))
        f = tg.fidelity(tg.mle_reconstruct(record).state, truth)
        if f < 1 - 1e-6:
            problems.append(f"exact-mode state {idx}: fidelity {f:.8f} < 1 - 1e-6")

    durations = {600.0: 0.05, 6000.0: 0.5, 60000.0: 5.0}
    medians = {}
    for flux, duration in durations.items():
        infidelities = []
        for idx, truth in enumerate(states):
            cfg = ex.AcquisitionConfig(12000.0, duration, ex.derived_seed(idx, int(flux)), "poisson")
            record = ex.simulate_counts(truth, cfg)
            infidelities.append(1.0 - tg.fidelity(tg.mle_reconstruct(record).state, truth))
        medians[flux] = float(np.median(infidelities))

    if medians[60000.0] >= 0.005:
        problems.append(f"median infidelity at 60000 expected pairs: {medians[60000.0]:.4f} >= 0.005")
    if not medians[600.0] > medians[6000.0] > medians[60000.0]:
        problems.append(f"median infidelity not monotone: {medians}")

    elapsed = time.perf_counter() - start
    detail = problems or (
        "exact-mode fidelity >= 1 - 1e-6 for 20 states; median infidelity "
        + " > ".join(f"{medians[f]:.2e}@{int(f)}" for f in (600.0, 6000.0, 60000.0))
    )
    _verdict(6, not problems, detail, 120.0, elapsed)


def test_criterion_7_metric_sanity():
    start = time.perf_counter()
    problems = []
    bell = ex.prep_code_state(ex.PrepParams(22.5, 0.0, 0.0))
    product = ex.prep_code_state(ex.PrepParams(0.0, 0.0, 0.0))
    mixed = DensityMatrix(np.eye(4) / 4)

    if abs(tg.tangle(bell) - 1.0) > 1e-9:
        problems.append("tangle of the Bell state is not 1")
    if abs(tg.tangle(product)) > 1e-9:
        problems.append("tangle of a product state is not 0")
    if abs(tg.linear_entropy(bell)) > 1e-9:
        problems.append("linear entropy of a pure state is not 0")
    if abs(tg.linear_entropy(mixed) - 1.0) > 1e-9:
        problems.append("linear entropy of the maximally mixed state is not 1")

    rng = np.random.default_rng(90)
    for _ in range(5):
        a, b = random_density(rng, 4), random_density(rng, 4)
        if abs(tg.fidelity(a, b) - tg.fidelity(b, a)) > 1e-9:
            problems.append("fidelity is not symmetric")
    for _ in range(5):
        u = rng.normal(size=4) + 1j * rng.normal(size=4)
        v = rng.normal(size=4) + 1j * rng.normal(size=4)
        u /= np.linalg.norm(u)
        v /= np.linalg.norm(v)
        overlap = abs(u.conj() @ v) ** 2
        f = tg.fidelity(np.outer(u, u.conj()), np.outer(v, v.conj()))
        if abs(f - overlap) > 1e-9:
            problems.append("pure-state fidelity does not match squared overlap")

    elapsed = time.perf_counter() - start
    _verdict(7, not problems, "; ".join(problems) or "entanglement, mixedness and fidelity identities hold", 1.0, elapsed)
