"""Acceptance criteria, one test each.

Every test records a ``[PASS]``/``[FAIL]`` line that is echoed in the pytest
terminal summary, then asserts at the stated tolerance.
"""

import json
import time
from pathlib import Path

import numpy as np
from scipy.stats import unitary_group

import conftest
from ionosc.config import load_config, parse_config
from ionosc.dirac1d import DiracParams, dirac_h
from ionosc.encoding import (
    SchemeAParams,
    SchemeBParams,
    build_scheme_a,
    build_scheme_b,
    mass_spectrum_of,
    params_for_masses,
    build,
)
from ionosc.engine import evolve_sector
from ionosc.operators import ION_SZ, SIGMA_Y, SIGMA_Z, kron
from ionosc.scenario import (
    ExperimentConfig,
    MomentumEigenstate,
    block_spinors,
    compare_to_theory,
    energy_bases,
    measure_flavor,
    run,
)
from ionosc.theory import tribimaximal
from oracles import fit_frequencies

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
# |E_k - E_j| for cp = 40 and masses (5, 6, 7), from an independent evaluation of sqrt(cp^2 + m^2)
BEATS = (0.1362080908206238, 0.16038417618053558, 0.29659226700115937)


def report(n, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def _spectral_peaks(signal, dt, pad=64, rel=0.01):
    """Peak frequencies of a Hann-windowed, zero-padded spectrum."""
    x = (signal - signal.mean()) * np.hanning(signal.size)
    spec = np.abs(np.fft.rfft(x, n=pad * signal.size))
    f = np.fft.rfftfreq(pad * signal.size, dt)
    interior = (spec[1:-1] > spec[:-2]) & (spec[1:-1] > spec[2:]) & (spec[1:-1] > rel * spec.max())
    return f[1:-1][interior]


def test_criterion_1_benchmark_reproduction():
    start = time.perf_counter()
    _, config = load_config(CONFIGS / "figure2.json")
    record = run(config)
    elapsed = time.perf_counter() - start
    t = record.times
    dt = t[1] - t[0]
    bin_width = 1.0 / (t.size * dt)

    residual = max(fit_frequencies(record.P[:, i], t, list(BEATS))[1] for i in range(3))
    peaks = np.concatenate([_spectral_peaks(record.P[:, i], dt) for i in range(3)])
    peaks = peaks[peaks < 2.0]
    off_bin = max(min(abs(p - f) for f in BEATS) for p in peaks) / bin_width
    amplitude = max(np.ptp(record.P[:, i]) / 2 for i in range(3))
    overlap = np.max(np.abs(record.P[:, 1] - record.P[:, 2]))

    ok = residual < 1e-8 and off_bin <= 1.0 and overlap < 0.25 * amplitude and elapsed < 5.0
    report(1, ok, f"beat-fit residual {residual:.2e}, spectral peaks within {off_bin:.2f} bin, "
                  f"max|P_mu-P_tau| {overlap:.2e} vs amplitude {amplitude:.3f}, runtime {elapsed:.2f} s")
    assert ok


def test_criterion_2_exact_spinor_matches_theory():
    rng = np.random.default_rng(2)
    start = time.perf_counter()
    worst = 0.0
    for i in range(20):
        config = ExperimentConfig(
            scheme=("A", "B")[i % 2],
            masses=tuple(rng.uniform(-10, 10, 3)),
            mixing=unitary_group.rvs(3, random_state=rng),
            alpha=int(rng.integers(3)),
            spinor="exact",
            momentum=MomentumEigenstate(rng.uniform(1, 60)),
            times=np.linspace(0, 10, 1001),
        )
        worst = max(worst, compare_to_theory(run(config), config)["max_abs_dev"])
    elapsed = time.perf_counter() - start
    ok = worst < 1e-8 and elapsed < 10.0
    report(2, ok, f"max |P_sim - P_theory| {worst:.2e} over 20 draws, runtime {elapsed:.2f} s")
    assert ok


def test_criterion_3_symmetric_spinor_bound():
    devs = []
    for scale in (1, 5, 10):
        config = ExperimentConfig(
            scheme="A", masses=(5, 6, 7), spinor="symmetric", momentum=MomentumEigenstate(40.0 * scale),
            times=np.linspace(0, 10, 1001),
        )
        devs.append(compare_to_theory(run(config), config)["max_abs_dev"])
    monotone = devs[0] > devs[1] > devs[2]
    ok = devs[0] <= 2e-2 and monotone
    report(3, ok, "max deviation at cp x1, x5, x10: " + ", ".join(f"{d:.2e}" for d in devs))
    assert ok


def test_criterion_4_scheme_equivalence():
    rng = np.random.default_rng(4)
    worst = 0.0
    for i in range(50):
        kw = dict(
            masses=tuple(rng.uniform(-10, 10, 3)),
            mixing=unitary_group.rvs(3, random_state=rng),
            alpha=int(rng.integers(3)),
            spinor=("symmetric", "exact")[i % 2],
            momentum=MomentumEigenstate(rng.uniform(1, 60)),
            times=np.linspace(0, 10, 201),
        )
        Pa = run(ExperimentConfig(scheme="A", **kw)).P
        Pb = run(ExperimentConfig(scheme="B", **kw)).P
        worst = max(worst, float(np.max(np.abs(Pa - Pb))))
    ok = worst < 1e-10
    report(4, ok, f"max |P_A - P_B| {worst:.2e} over 50 draws")
    assert ok


def test_criterion_5_fock_vs_packet():
    raw = json.loads((CONFIGS / "packet_fock.json").read_text())
    fock_cfg = load_config(CONFIGS / "packet_fock.json")[1]
    fock = run(fock_cfg)
    packet = run(parse_config(dict(raw, engine="sector")))
    diff = float(np.max(np.abs(fock.P - packet.P)))
    change = fock.diagnostics["cutoff_history"][-1][1]
    ok = diff < 1e-4 and change < 1e-8
    report(5, ok, f"max |P_fock - P_packet| {diff:.2e} at n_cut {fock.diagnostics['n_cut']}, "
                  f"last doubling changed P by {change:.2e}")
    assert ok


def test_criterion_6_eigen_action_identities():
    rng = np.random.default_rng(6)
    worst = 0.0
    eye = np.eye(2)
    for _ in range(200):
        g = rng.uniform(-10, 10, 3)
        c = rng.uniform(0.2, 3)
        p = rng.uniform(-60, 60)

        # scheme A: spin-spin terms act as +-(O1 +- O2) on the encoded pairs
        pair, enc = build_scheme_a(SchemeAParams(*g, c=c))
        ss = g[1] * kron(ION_SZ, ION_SZ, eye) + g[2] * kron(eye, ION_SZ, ION_SZ)
        masses = (g[0] + g[1] + g[2], g[0] + g[1] - g[2], g[0] - g[1] + g[2])
        for k, f in enumerate((g[1] + g[2], g[1] - g[2], -g[1] + g[2])):
            b = enc.block(k)
            worst = max(worst, np.max(np.abs(ss[np.ix_(b, b)] - f * SIGMA_Z)))
            block = pair.h(p)[np.ix_(b, b)]
            worst = max(worst, np.max(np.abs(block - dirac_h(p, DiracParams(c, masses[k])))))

        # scheme B: sigma_y kinetic term, masses from the couplings, constant -J1 dropped
        pair, enc = build_scheme_b(SchemeBParams(*g, c=c))
        for k in range(3):
            b = enc.block(k)
            expected = c * p * SIGMA_Y + masses[k] * SIGMA_Z
            block = pair.h(p)[np.ix_(b, b)] - pair.constant_shift * eye
            worst = max(worst, np.max(np.abs(block - expected)))
        assert pair.constant_shift == -g[1]
    ok = worst <= 1e-14
    report(6, ok, f"max identity residual {worst:.2e} over 200 random parameter sets, both schemes")
    assert ok


def test_criterion_7_null_tests():
    t = np.linspace(0, 10, 1001)
    drift, leak = 0.0, 0.0
    for scheme in ("A", "B"):
        for spinor in ("symmetric", "exact"):
            record = run(ExperimentConfig(scheme=scheme, masses=(6, 6, 6), spinor=spinor, times=t))
            drift = max(drift, float(np.max(np.ptp(record.P, axis=0))))
            leak = max(leak, float(record.leakage.max()))
        config = ExperimentConfig(scheme=scheme, masses=(5, 6, 7), spinor="exact", times=t)
        pair, enc = config.hamiltonian
        bases = energy_bases(pair, enc, 40.0)
        spinors = block_spinors(pair, enc, 40.0, "exact")
        for k in range(3):
            psi = np.zeros(enc.dim, dtype=complex)
            psi[list(enc.block(k))] = spinors[k]
            P, leakage = measure_flavor(evolve_sector(pair, 40.0, psi, t).states, tribimaximal(), enc, bases)
            drift = max(drift, float(np.max(np.ptp(P, axis=0))))
            leak = max(leak, float(leakage.max()))
        for record in (run(config), run(ExperimentConfig(scheme=scheme, masses=(5, 6, 7), times=t))):
            leak = max(leak, float(record.leakage.max()))
    ok = drift < 1e-10 and leak < 1e-12
    report(7, ok, f"max drift of constant traces {drift:.2e}, max leakage {leak:.2e}")
    assert ok


def test_criterion_8_parameter_round_trip():
    rng = np.random.default_rng(8)
    worst = 0.0
    for scheme in ("A", "B"):
        for _ in range(100):
            target = rng.uniform(-20, 20, 3)
            got = mass_spectrum_of(*build(params_for_masses(scheme, target))).masses
            worst = max(worst, float(np.max(np.abs(np.array(got) - target))))
    ok = worst < 1e-12
    report(8, ok, f"max round-trip error {worst:.2e} over 100 spectra per scheme")
    assert ok
