"""Acceptance criteria, one test each, at their stated tolerances.

Each test prints a single ``[criterion N] PASS|FAIL ...`` line (visible in
``pytest -v`` output) before asserting.
"""
import json
import time
from functools import lru_cache

import numpy as np
import pytest

from sqzqed import spectra
from sqzqed.cli import H1_GRID, run
from sqzqed.config import parse_config
from sqzqed.fockspace import HilbertDims, annihilation, basis, bogoliubov_b, lower_half, squeeze_unitary
from sqzqed.model import SystemParams, collapse_ops, h_eff
from sqzqed.squeezing import number_distribution, t_eff_analytic, thermal_fit
from sqzqed.system import solve
from sqzqed.transmon import (
    CpbParams, asymptotic_offdiag, charge_matrix_element, diagonalize, level_slope, transmon_squeezing_coeffs,
)

pytestmark = pytest.mark.slow


@pytest.fixture
def report(capsys):
    def _report(n, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {n}] {'PASS' if ok else 'FAIL'} {detail}")
        return ok

    return _report


def _homodyne(p, phi=0.0):
    sol = solve(p)
    calc = spectra.HomodyneCalculator(sol.liouvillian, sol.rho, sol.a, p.kappa, phi)
    w = spectra.grid(*spectra.HOMODYNE_GRID)
    return calc, spectra.Spectrum(w, spectra.map_frequencies(calc, w), "homodyne")


@lru_cache(maxsize=None)
def squeeze_run(e1=0.0):
    t0 = time.perf_counter()
    calc, s = _homodyne(SystemParams(chi_sq=0.41, e1=e1, n_fock=30))
    return calc, s, time.perf_counter() - t0


@lru_cache(maxsize=None)
def splitting_run(e1):
    p = SystemParams(chi_sq=0.45, e1=e1, n_fock=40)
    sol = solve(p)
    s = spectra.qubit_spectrum(sol.liouvillian, sol.rho, sol.sigma_minus)
    peaks = spectra.find_extrema(s, "peaks", min_prominence=1e-4 * s.values.max())
    return p, sol, s, peaks


def test_criterion_1_squeezing_dip(report):
    calc, s, elapsed = squeeze_run()
    dips = [f for f in spectra.find_extrema(s, "dips", min_prominence=1e-3) if f.value < 1]
    loc, smin = spectra.deepest_dip(calc, s)
    ok = len(dips) == 1 and smin < 1 and abs(loc - 0.572) <= 0.02 and elapsed <= 300
    report(1, ok, f"dips={len(dips)} S_min={smin:.5f} at {loc:.5f} (target 0.572+-0.02) runtime={elapsed:.1f}s")
    assert ok


def test_criterion_2_smin_trend_and_phase(report):
    grid_values = (0.1, 0.2, 0.3, 0.41, 0.47, 0.49)
    rows = spectra.sweep_smin(SystemParams(n_fock=30), chi_sq_values=grid_values)
    smin = np.array([r.s_min for r in rows])
    k = int(np.argmin(smin))
    d = np.diff(smin)
    unimodal = 0 < k < len(smin) - 1 and np.all(d[:k] < 0) and np.all(d[k:] > 0)
    calc0, s0, _ = squeeze_run()
    loc0, s_phi0 = spectra.deepest_dip(calc0, s0)
    calc90, s90 = _homodyne(SystemParams(chi_sq=0.41, n_fock=30), np.pi / 2)
    s_phi90_min = float(s90.values.min())
    ok = bool(unimodal) and s_phi90_min > 1 > s_phi0
    report(2, ok, f"S_min={np.round(smin, 4).tolist()} turn at chi_sq={grid_values[k]}; "
                  f"phi=0 min {s_phi0:.4f}, phi=pi/2 min over grid {s_phi90_min:.4f} (at dip {calc90(loc0):.3f})")
    assert ok


def test_criterion_3_number_splitting(report):
    p, sol, s, peaks = splitting_run(0.0)
    main = [f for f in peaks if f.value > 1e-2 * peaks[0].value]
    locs = np.array([f.location for f in main])
    spacings = np.diff(locs)
    fit = spectra.fit_lorentzians(s, [f.location for f in peaks])
    areas = fit[:4, 2]
    probs = number_distribution(sol.rho, p.dims, "b", p.r).probs[:4]
    rel = np.abs(areas / probs - 1)
    ok = len(main) >= 4 and np.all(np.abs(spacings - 0.872) <= 0.02) and np.all(rel <= 0.10) and np.all(
        np.diff(areas) < 0)
    report(3, ok, f"peaks={np.round(locs, 4).tolist()} spacings={np.round(spacings, 4).tolist()} "
                  f"areas={np.round(areas, 4).tolist()} P(n_b)={np.round(probs, 4).tolist()} "
                  f"max rel err={rel.max():.3f}")
    assert ok


def test_criterion_4_interleaved_peaks(report):
    p, _, _, peaks = splitting_run(0.13)
    _, _, _, peaks0 = splitting_run(0.0)
    cb = p.chi_bar
    dominant = max(f.value for f in peaks)

    def offset(f):
        k = round(f.location / cb)
        return k, f.location - k * cb

    on_grid = all(abs(offset(f)[1]) <= 0.03 for f in peaks if f.value > 1e-2 * dominant)
    extra = [f for f in peaks if offset(f)[0] % 2 == 0 and f.value > 1e-2 * dominant]
    dominant0 = max(f.value for f in peaks0)
    extra0 = [f for f in peaks0 if offset(f)[0] % 2 == 0 and abs(offset(f)[1]) <= 0.03
              and f.value > 1e-2 * dominant0]
    ok = on_grid and len(extra) >= 2 and not extra0
    report(4, ok, f"interleaved peaks at {[round(f.location, 4) for f in extra]} "
                  f"(offsets {[round(offset(f)[1], 4) for f in extra]}); E1=0 interleaved above 1%: {len(extra0)}")
    assert ok


def test_criterion_5_effective_temperature(report):
    rows = []
    for c in (0.2, 0.3, 0.41, 0.45):
        p = SystemParams(chi_sq=c, n_fock=40)
        dist = number_distribution(solve(p).rho, p.dims, "b", p.r)
        kt = thermal_fit(dist, p.chi_bar, max_n=lower_half(p.n_fock)).kT
        rows.append((c, kt, t_eff_analytic(1.0, c)))
    rel = [abs(kt / ref - 1) for _, kt, ref in rows]
    refs_ok = abs(t_eff_analytic(1, 0.41) - 0.4395) < 1e-4 and abs(t_eff_analytic(1, 0.45) - 0.4665) < 1e-4
    ok = max(rel) <= 0.02 and refs_ok
    report(5, ok, "kT fit/analytic: " + ", ".join(f"{c}: {kt:.5f}/{ref:.5f}" for c, kt, ref in rows))
    assert ok


def test_criterion_6_two_mode_benchmark(report, tmp_path):
    cfg = parse_config("", mode="h1-benchmark")
    t0 = time.perf_counter()
    run(cfg, tmp_path)
    elapsed = time.perf_counter() - t0
    manifest = json.loads((tmp_path / "h1_benchmark.manifest.json").read_text())
    res = manifest["results"]
    ok = 0.03 <= res["s_min"] <= 0.12 and elapsed <= 1800 and res["truncation"]["n1_fock"] > 0
    report(6, ok, f"S_min={res['s_min']:.4f} at {res['dip_location']:.4f} truncation={res['truncation']} "
                  f"chi_sq_eff={res['chi_sq_eff']:.4f} grid={H1_GRID} runtime={elapsed:.0f}s")
    assert ok


def test_criterion_7_diagonalization(report):
    worst, counts = 0.0, []
    for c in (0.2, 0.41, 0.45):
        p = SystemParams(chi_sq=c, n_fock=60)
        h = h_eff(p).full()
        n = p.n_fock
        for block, sign in ((slice(0, n), 1), (slice(n, 2 * n), -1)):
            ev, vec = np.linalg.eigh(sign * h[block, block])
            # keep eigenvectors living in the lower half of the Fock ladder
            trusted = (np.abs(vec[lower_half(n):]) ** 2).sum(axis=0) < 1e-6
            err = np.abs(ev - p.chi_bar * (np.arange(n) + 0.5))[trusted]
            counts.append(int(trusted.sum()))
            worst = max(worst, float(err.max()))
    d = HilbertDims(60, has_qubit=False)
    r = 0.5 * np.arctanh(0.82)
    psi = squeeze_unitary(d, r) @ basis(d, 0)
    b_res = float(np.linalg.norm((bogoliubov_b(d, r) @ psi)[: lower_half(60)]))
    a = annihilation(d).full()
    x1, x2 = a + a.T, -1j * (a - a.T)

    def var(x):
        return float(np.real(psi.conj() @ x @ x @ psi - (psi.conj() @ x @ psi) ** 2))

    prod_err = abs(var(x1) * var(x2) - 1)
    ok = worst <= 1e-6 and min(counts) >= 1 and b_res <= 1e-8 and prod_err <= 1e-8
    report(7, ok, f"eigen err={worst:.2e} over {counts} trusted levels; |b S|0>|={b_res:.2e}; "
                  f"|var product-1|={prod_err:.2e}")
    assert ok


def _dense_liouvillian(h, collapse):
    d = h.shape[0]
    eye = np.eye(d)
    big = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for rate, c in collapse:
        cd = c.conj().T @ c
        big += rate * (np.kron(c.conj(), c) - 0.5 * np.kron(eye, cd) - 0.5 * np.kron(cd.T, eye))
    return big


def _dense_oracle(p, omegas):
    h = h_eff(p).full()
    coll = [(r, c.full()) for r, c in collapse_ops(p)]
    big = _dense_liouvillian(h, coll)
    d = h.shape[0]
    _, _, vh = np.linalg.svd(big)
    rho = vh[-1].conj().reshape(d, d, order="F")
    rho = rho / np.trace(rho)
    rho = (rho + rho.conj().T) / 2
    a = annihilation(p.dims).full()
    x = a + a.conj().T
    src = a @ rho + rho @ a.conj().T - np.trace(x @ rho) * rho
    sm = coll[1][1]
    qsrc = sm.conj().T @ rho
    eye = np.eye(d * d)
    hom, qub = [], []
    for w in omegas:
        y = np.linalg.solve(1j * w * eye - big, src.reshape(-1, order="F")).reshape(d, d, order="F")
        hom.append(1 + 2 * p.kappa * np.trace(x @ y).real)
        y = np.linalg.solve(-1j * w * eye - big, qsrc.reshape(-1, order="F")).reshape(d, d, order="F")
        qub.append(np.trace(sm @ y).real / np.pi)
    return rho, np.array(hom), np.array(qub)


def test_criterion_8_dense_oracle(report):
    omegas = np.array([-0.31, 0.17, 0.5723, 0.9, 1.3])
    worst = 0.0
    count = 0
    for n in range(2, 13):
        for c, e1 in ((0.0, 0.0), (0.2, 0.0), (0.41, 0.13), (0.45, 0.05)):
            p = SystemParams(chi_sq=c, e1=e1, n_fock=n)
            rho_d, hom_d, qub_d = _dense_oracle(p, omegas)
            sol = solve(p)
            hom = spectra.homodyne_spectrum(sol.liouvillian, sol.rho, sol.a, p.kappa, detunings=omegas).values
            qub = spectra.qubit_spectrum(sol.liouvillian, sol.rho, sol.sigma_minus, detunings=omegas).values
            worst = max(worst, np.abs(sol.rho - rho_d).max(), np.abs(hom - hom_d).max(), np.abs(qub - qub_d).max())
            count += 1
    ok = worst <= 1e-8
    report(8, ok, f"max |sparse - dense| = {worst:.2e} over {count} instances (dim <= 24)")
    assert ok


def test_criterion_9_transmon(report):
    hf = 0.0
    for ratio in (1.0, 10.0, 50.0):
        for ng in (0.1, 0.25, 0.4):
            p = CpbParams(ratio, 1.0, ng)
            spec = diagonalize(p, 3)
            for m in range(3):
                hf = max(hf, abs(charge_matrix_element(spec, m, m).real + level_slope(p, m) / 8))
    p50 = CpbParams(50.0, 1.0, 0.25)
    exact = abs(charge_matrix_element(diagonalize(p50, 2), 0, 1))
    off_err = abs(abs(asymptotic_offdiag(0, p50)) - exact) / exact
    ngs = np.round(np.arange(0.0, 0.5001, 0.01), 2)
    argmax = []
    for m in range(3):
        g = [abs(charge_matrix_element(diagonalize(CpbParams(50.0, 1.0, ng), 3), m, m)) for ng in ngs]
        argmax.append(float(ngs[int(np.argmax(g))]))
    spec = diagonalize(p50, 3)
    coeffs = transmon_squeezing_coeffs(spec, 0.1, spec.transition01 - 5.0)
    ok = hf <= 1e-6 and off_err <= 0.05 and argmax == [0.25] * 3 and abs(coeffs.c_plus) > abs(coeffs.c_minus)
    report(9, ok, f"HF err={hf:.2e}; offdiag err@50={off_err:.4f}; argmax Ng={argmax}; "
                  f"|c+|={abs(coeffs.c_plus):.3e} > |c-|={abs(coeffs.c_minus):.3e}")
    assert ok


def test_criterion_10_trivial_floors(report):
    p = SystemParams(n_fock=30)
    sol = solve(p)
    w = spectra.grid(*spectra.HOMODYNE_GRID)
    s = spectra.homodyne_spectrum(sol.liouvillian, sol.rho, sol.a, p.kappa, detunings=w)
    flat = float(np.abs(s.values - 1).max())
    g0 = basis(p.dims, 0, "g")
    vac = float(np.abs(sol.rho - np.outer(g0, g0.conj())).max())
    _, s_a, _ = squeeze_run(0.0)
    _, s_b, _ = squeeze_run(0.13)
    inv = float(np.abs(s_a.values - s_b.values).max())
    ok = flat <= 1e-6 and vac <= 1e-8 and inv <= 1e-4
    report(10, ok, f"|S_a-1|={flat:.2e}; |rho-|g,0><g,0||={vac:.2e}; E1 invariance={inv:.2e}")
    assert ok
