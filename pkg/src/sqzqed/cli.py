"""Command-line driver: ``sqzqed <mode> --config <path> [--out-dir DIR] [--workers K]``.

Every mode writes CSV data, an SVG plot where a curve makes sense, and a
``<stem>.manifest.json`` with the full configuration, package versions,
timings, solver residuals and headline results.  Exit status is 0 on success,
2 for configuration errors and 3 for solver failures; failures print a JSON
object to stderr.
"""
from __future__ import annotations

import argparse
import json
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__, spectra, squeezing, transmon
from .model import multimode_effective
from .config import MODES, ConfigError, RunConfig, parse_config
from .liouville import SolverError
from .plot import plot_file
from .system import solve, solve_multimode

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3
H1_GRID = (0.45, 0.70, 26)
SWEEP_CHISQ = (0.1, 0.2, 0.3, 0.41, 0.47, 0.49)
SWEEP_PHI = tuple(float(x) for x in np.linspace(0.0, np.pi, 9))


def _num(x) -> str:
    return repr(float(x))


def _params_line(d: dict) -> str:
    return "# params: " + " ".join(f"{k}={v}" for k, v in d.items()) + "\n"


def write_csv(path: Path, header: tuple[str, ...], rows, params: dict | None = None) -> Path:
    lines = [_params_line(params)] if params else []
    lines.append(",".join(header) + "\n")
    lines.extend(",".join(v if isinstance(v, str) else _num(v) for v in row) + "\n" for row in rows)
    path.write_text("".join(lines))
    return path


def _write_json(path: Path, obj) -> Path:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return path


def _jsonable(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, tuple):
        return list(o)
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _features(feats) -> list[dict]:
    return [dict(location=f.location, value=f.value, width=f.width, prominence=f.prominence) for f in feats]


def _system_snapshot(cfg: RunConfig) -> dict:
    s = dict(cfg.section("system"))
    s["kind"] = cfg.mode
    return s


class Run:
    """Collects outputs, timings and results for the manifest."""

    def __init__(self, cfg: RunConfig, out_dir: Path):
        self.cfg = cfg
        self.out = out_dir
        self.stem = cfg.section("output")["stem"] or cfg.mode.replace("-", "_")
        self.files: list[str] = []
        self.timings: dict[str, float] = {}
        self.residuals: dict[str, float] = {}
        self.results: dict = {}

    def path(self, suffix: str) -> Path:
        p = self.out / f"{self.stem}{suffix}"
        self.files.append(p.name)
        return p

    def timed(self, label: str, fn, *args, **kwargs):
        t0 = time.perf_counter()
        val = fn(*args, **kwargs)
        self.timings[label] = round(time.perf_counter() - t0, 4)
        return val

    def manifest(self) -> dict:
        return {
            "mode": self.cfg.mode,
            "config": self.cfg.values,
            "versions": {"sqzqed": __version__, "python": platform.python_version(),
                         "numpy": np.__version__, "scipy": scipy.__version__},
            "timings_s": self.timings,
            "residuals": self.residuals,
            "results": self.results,
            "outputs": self.files,
        }


def _solve(run: Run):
    p = run.cfg.system_params()
    sol = run.timed("steady_state", solve, p, tol=run.cfg.section("tolerances")["steady"])
    run.residuals["steady_state"] = sol.residual
    return p, sol


def _emit_spectrum(run: Run, s: spectra.Spectrum, feats) -> None:
    params = {**_system_snapshot(run.cfg), **{k: v for k, v in s.params.items() if k not in ("kind",)}}
    params["kind"] = s.kind
    csv_path = write_csv(run.path(".csv"), ("detuning", "value"), zip(s.detunings, s.values), params)
    _write_json(run.path(".features.json"), _features(feats))
    plot_file(csv_path, run.path(".svg"))


def mode_steady(run: Run) -> None:
    p, sol = _solve(run)
    dist_a = squeezing.number_distribution(sol.rho, p.dims, "a")
    write_csv(run.path(".a.csv"), ("n", "probability"), enumerate(dist_a.probs), _system_snapshot(run.cfg))
    run.results.update(excited_population=sol.excited_population(), mean_photons_a=dist_a.mean)
    if p.chi_sq > 0:
        dist_b = squeezing.number_distribution(sol.rho, p.dims, "b", p.r)
        write_csv(run.path(".b.csv"), ("n", "probability"), enumerate(dist_b.probs),
                  {**_system_snapshot(run.cfg), "r": p.r})
        fit = squeezing.thermal_fit(dist_b, p.chi_bar, max_n=p.n_fock // 2)
        summary = dict(kT=fit.kT, kT_analytic=squeezing.t_eff_analytic(p.chi, p.chi_sq), residual=fit.residual,
                       n_points_used=fit.n_points_used, r=p.r, chi_bar=p.chi_bar,
                       n_thermal_analytic=squeezing.thermal_occupation(p.r), mean_photons_b=dist_b.mean)
        _write_json(run.path(".fit.json"), summary)
        run.results.update(summary)


def mode_homodyne(run: Run) -> None:
    p, sol = _solve(run)
    omegas = spectra.grid(*run.cfg.grid(spectra.HOMODYNE_GRID))
    phi = run.cfg.section("grid")["phi"]
    calc = spectra.HomodyneCalculator(sol.liouvillian, sol.rho, sol.a, p.kappa, phi)
    vals = run.timed("spectrum", spectra.map_frequencies, calc, omegas, run.cfg.workers)
    s = spectra.Spectrum(omegas, vals, "homodyne", dict(phi=phi, reduced_dim=calc.resolvent.size))
    loc, smin = run.timed("refine", spectra.deepest_dip, calc, s)
    feats = spectra.find_extrema(s, "dips")
    _emit_spectrum(run, s, feats)
    run.results.update(s_min=smin, dip_location=loc, n_dips=len(feats), reduced_dim=calc.resolvent.size)


def mode_qubit(run: Run) -> None:
    p, sol = _solve(run)
    omegas = spectra.grid(*run.cfg.grid(spectra.QUBIT_GRID))
    calc = spectra.QubitCalculator(sol.liouvillian, sol.rho, sol.sigma_minus)
    vals = run.timed("spectrum", spectra.map_frequencies, calc, omegas, run.cfg.workers)
    s = spectra.Spectrum(omegas, vals, "qubit", dict(reduced_dim=calc.resolvent.size))
    feats = spectra.find_extrema(s, "peaks", min_prominence=1e-4 * float(vals.max()))
    _emit_spectrum(run, s, feats)
    run.results.update(peaks=[f.location for f in feats], heights=[f.value for f in feats],
                       excited_population=sol.excited_population(), reduced_dim=calc.resolvent.size)


def _emit_sweep(run: Run, name: str, rows) -> None:
    lines = [(r.value, r.s_min, r.location, r.status.replace(",", ";")) for r in rows]
    write_csv(run.path(".csv"), (name, "s_min", "location", "status"), lines, _system_snapshot(run.cfg))
    ok = [r for r in rows if r.status == "ok"]
    run.results.update(rows=[dict(value=r.value, s_min=r.s_min, location=r.location, status=r.status)
                             for r in rows], failed=len(rows) - len(ok))
    if ok:
        write_csv(run.path(".plot.csv"), (name, "s_min"), [(r.value, r.s_min) for r in ok])
        plot_file(run.out / f"{run.stem}.plot.csv", run.path(".svg"), marker="min")


def mode_sweep_chisq(run: Run) -> None:
    values = run.cfg.section("sweep")["values"] or SWEEP_CHISQ
    base = run.cfg.system_params().with_(unstable=True)
    omegas = spectra.grid(*run.cfg.grid(spectra.HOMODYNE_GRID))
    rows = run.timed("sweep", spectra.sweep_smin, base, chi_sq_values=values, detunings=omegas,
                     workers=run.cfg.workers)
    _emit_sweep(run, "chi_sq", rows)


def mode_sweep_phi(run: Run) -> None:
    values = run.cfg.section("sweep")["values"] or SWEEP_PHI
    omegas = spectra.grid(*run.cfg.grid(spectra.HOMODYNE_GRID))
    rows = run.timed("sweep", spectra.sweep_smin, run.cfg.system_params(), phi_values=values, detunings=omegas,
                     workers=run.cfg.workers)
    _emit_sweep(run, "phi", rows)


def mode_h1(run: Run) -> None:
    mp = run.cfg.multimode_params()
    sol = run.timed("steady_state", solve_multimode, mp)
    run.residuals["steady_state"] = sol.residual
    omegas = spectra.grid(*run.cfg.grid(H1_GRID))
    calc = spectra.HomodyneCalculator(sol.liouvillian, sol.rho, sol.a, mp.kappa, run.cfg.section("grid")["phi"])
    vals = run.timed("spectrum", spectra.map_frequencies, calc, omegas, run.cfg.workers)
    s = spectra.Spectrum(omegas, vals, "homodyne", {})
    loc, smin = run.timed("refine", spectra.deepest_dip, calc, s)
    chi_eff, chi_sq_eff = multimode_effective(mp)
    info = dict(kind="homodyne", n1_fock=mp.n1_fock, n2_fock=mp.n2_fock, g=mp.g, g_cross=mp.g_cross,
                delta=mp.delta, e2=mp.e2, kappa2=mp.kappa2)
    write_csv(run.path(".csv"), ("detuning", "value"), zip(omegas, vals), info)
    plot_file(run.out / f"{run.stem}.csv", run.path(".svg"))
    run.results.update(s_min=smin, dip_location=loc, chi_eff=chi_eff, chi_sq_eff=chi_sq_eff,
                       truncation=dict(n1_fock=mp.n1_fock, n2_fock=mp.n2_fock),
                       excited_population=sol.excited_population(), reduced_dim=calc.resolvent.size)


def mode_transmon(run: Run) -> None:
    t = run.cfg.section("transmon")
    ngs = np.linspace(t["ng_start"], t["ng_stop"], t["ng_points"])
    tables = {f"g{m}{m}": [] for m in range(t["levels"])}
    tables["n01"] = []
    offdiag_err = {}
    argmax = {}
    for ratio in t["ej_over_ec"]:
        ej = ratio * t["ec"]
        g00 = []
        for ng in ngs:
            spec = transmon.diagonalize(transmon.CpbParams(ej, t["ec"], float(ng)), t["levels"])
            for m in range(t["levels"]):
                el = transmon.charge_matrix_element(spec, m, m).real
                tables[f"g{m}{m}"].append((ng, ratio, el))
                if m == 0:
                    g00.append(abs(el))
            tables["n01"].append((ng, ratio, abs(transmon.charge_matrix_element(spec, 0, 1))))
        argmax[repr(ratio)] = float(ngs[int(np.argmax(g00))])
        quarter = transmon.CpbParams(ej, t["ec"], 0.25)
        exact = abs(transmon.charge_matrix_element(transmon.diagonalize(quarter, 2), 0, 1))
        offdiag_err[repr(ratio)] = abs(abs(transmon.asymptotic_offdiag(0, quarter)) - exact) / exact
    for name, rows in tables.items():
        write_csv(run.path(f".{name}.csv"), ("ng", "ej_over_ec", "element"), rows, dict(ec=t["ec"], element=name))
    errs = [offdiag_err[repr(r)] for r in sorted(t["ej_over_ec"]) if r >= 10]
    run.results.update(offdiag01_rel_error=offdiag_err, g00_argmax_ng=argmax,
                       offdiag_error_monotone=bool(all(b < a for a, b in zip(errs, errs[1:]))))


HANDLERS = {
    "steady": mode_steady, "homodyne": mode_homodyne, "qubit-spectrum": mode_qubit,
    "sweep-chisq": mode_sweep_chisq, "sweep-phi": mode_sweep_phi, "h1-benchmark": mode_h1,
    "transmon": mode_transmon,
}


def run(cfg: RunConfig, out_dir: str | Path | None = None) -> dict:
    """Execute ``cfg`` and write all artifacts; returns the manifest."""
    out = Path(out_dir if out_dir is not None else cfg.section("output")["out_dir"])
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError([f"output directory {out} is not writable: {exc}"]) from exc
    r = Run(cfg, out)
    t0 = time.perf_counter()
    HANDLERS[cfg.mode](r)
    r.timings["total"] = round(time.perf_counter() - t0, 4)
    manifest = r.manifest()
    _write_json(out / f"{r.stem}.manifest.json", manifest)
    return manifest


def _fail(code: int, kind: str, errors: list[str]) -> int:
    print(json.dumps({"status": "error", "exit_code": code, "kind": kind, "errors": errors}), file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="sqzqed", description=__doc__.splitlines()[0])
    ap.add_argument("mode", choices=MODES)
    ap.add_argument("--config", help="sectioned key = value file; defaults apply when omitted")
    ap.add_argument("--out-dir", help="overrides [output] out_dir")
    ap.add_argument("--workers", type=int, help="overrides [run] workers")
    args = ap.parse_args(argv)
    try:
        text = Path(args.config).read_text(encoding="utf-8") if args.config else ""
    except OSError as exc:
        return _fail(EXIT_CONFIG, "config", [f"cannot read config: {exc}"])
    try:
        cfg = parse_config(text, mode=args.mode)
        if args.workers is not None:
            if args.workers < 1:
                raise ConfigError(["--workers must be >= 1"])
            cfg.values["run"]["workers"] = args.workers
        manifest = run(cfg, args.out_dir)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config", exc.errors)
    except (SolverError, np.linalg.LinAlgError, ArithmeticError) as exc:
        return _fail(EXIT_SOLVER, "solver", [str(exc)])
    print(json.dumps({"status": "ok", "mode": cfg.mode, "results": manifest["results"]},
                     default=_jsonable, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
