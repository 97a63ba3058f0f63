"""Command-line front end.

    twinsfg --config run.ini --scenario fig2 --out results/ [--grid-check]

Writes ``profile*.csv`` (delay_fs, intensity, intensity_normalized),
``summary.json`` and ``effective_config.ini`` into the output directory.
Every file is written to a temporary name and renamed into place.  On
failure a one-line JSON error record goes to stderr and the exit status is
nonzero (2 for configuration errors, 1 otherwise).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import replace

import numpy as np

from .config import ConfigError, RunConfig, build_setup, dump_config, load_config, parse_config
from .correlator import delay_sweep, fft_backend_check
from .experiments import Setup, run_profile, scenario_fig2, scenario_fig3, scenario_fig4

SIG = 9
GRID_TOLERANCE = 1e-3


def _g(x):
    """Float rounded to SIG significant digits (None passes through)."""
    return None if x is None else float(f"{x:.{SIG}g}")


def atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def profile_csv(profile):
    norm = profile.normalized
    rows = ["delay_fs,intensity,intensity_normalized"]
    for t, y, n in zip(profile.delays, profile.intensity, norm):
        rows.append(f"{t * 1e15:.{SIG}g},{y:.{SIG}g},{n:.{SIG}g}")
    return "\n".join(rows) + "\n"


def _summary(result):
    fit = result.fit
    out = {
        "fwhm_fs": _g(result.fwhm * 1e15),
        "peak_intensity": _g(result.peak_intensity),
        "fit": None,
        "residual": None,
    }
    if fit is not None:
        out["fit"] = {
            "amplitude": _g(fit.amplitude),
            "width_rad_per_s": _g(fit.width),
            "center_fs": _g(fit.center * 1e15),
            "baseline": _g(fit.baseline),
            "converged": fit.converged,
        }
        out["residual"] = _g(fit.residual_norm)
    for key, val in result.extras.items():
        out[key] = _g(val)
    return out


def _pinhole_on(cfg: RunConfig):
    apply = cfg["pinhole"]["apply"]
    if apply == "auto":
        return cfg.scenario == "fig3"
    return apply == "yes"


def run_scenario(cfg: RunConfig, setup: Setup):
    """Returns a list of (csv name, ScenarioResult)."""
    name = cfg.scenario
    if name == "fig2":
        return [("profile.csv", scenario_fig2(setup))]
    if name == "fig3":
        return [("profile.csv", scenario_fig3(setup))]
    if name == "fig4":
        results = scenario_fig4(setup)
    else:
        # sweep: the configured transfer, one profile per defocus value
        if not _pinhole_on(cfg):
            setup = replace(setup, pinhole_half_angle=None)
        results = []
        for dz in setup.defocus_list:
            spec = setup.transfer.replace(defocus=dz, pinhole_half_angle=setup.pinhole_half_angle)
            res = run_profile(setup, spec)
            res.extras["defocus"] = dz
            results.append(res)
    return [(f"profile_dz{r.extras['defocus'] * 1e6:g}um.csv", r) for r in results]


def grid_check(setup: Setup, results):
    """FFT-vs-direct check and grid doubling on the first profile."""
    first = results[0][1].profile
    fft = fft_backend_check(setup.pdc, setup.grid, first.transfer_used.replace(delay=0.0), workers=setup.workers)
    fine = delay_sweep(setup.pdc, setup.sfg, first.delays, first.transfer_used, setup.grid.doubled(),
                       setup.baseline, setup.workers)
    scale = float(np.max(np.abs(first.intensity))) or 1.0
    change = float(np.max(np.abs(fine.intensity - first.intensity)) / scale)
    return {
        "fft_max_rel_deviation": fft.max_rel_deviation,
        "doubling_max_rel_change": change,
        "converged": bool(change <= GRID_TOLERANCE and fft.max_rel_deviation < 1e-6),
    }


def run(cfg: RunConfig, out_dir, check=False, stdout=sys.stdout):
    setup = build_setup(cfg)
    results = run_scenario(cfg, setup)
    report = grid_check(setup, results) if check else None

    files = {fname: profile_csv(r.profile) for fname, r in results}
    summary = {"scenario": cfg.scenario, "grid_converged": None if report is None else report["converged"]}
    if report is not None:
        summary["grid_check"] = {k: (_g(v) if isinstance(v, float) else v) for k, v in report.items()}
    if cfg.scenario in ("fig2", "fig3"):
        summary.update(_summary(results[0][1]))
        summary["profile_csv"] = results[0][0]
    else:
        summary["profiles"] = [dict(_summary(r), profile_csv=fname) for fname, r in results]
    files["summary.json"] = json.dumps(summary, indent=2) + "\n"
    files["effective_config.ini"] = dump_config(cfg)

    os.makedirs(out_dir, exist_ok=True)
    for fname, text in files.items():
        atomic_write(os.path.join(out_dir, fname), text)

    if report is not None:
        print(f"fft vs direct max rel deviation: {report['fft_max_rel_deviation']:.3e}", file=stdout)
        print(f"grid doubling max rel change:    {report['doubling_max_rel_change']:.3e}", file=stdout)
        print(f"grid converged: {report['converged']}", file=stdout)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="twinsfg", description="Twin-beam PDC/SFG correlation simulator")
    p.add_argument("--config", help="INI run configuration (defaults if omitted)")
    p.add_argument("--scenario", choices=("fig2", "fig3", "fig4", "sweep"), help="overrides [scenario] name")
    p.add_argument("--out", help="output directory (overrides [output] directory)")
    p.add_argument("--grid-check", action="store_true", help="run the FFT cross-check and grid doubling")
    return p


def _fail(kind, err, status):
    record = {"error": kind, "message": str(err)}
    for attr in ("field", "line"):
        if getattr(err, attr, None) is not None:
            record[attr] = getattr(err, attr)
    print(json.dumps(record), file=sys.stderr)
    return status


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else parse_config("")
        if args.scenario:
            sections = dict(cfg.sections, scenario={"name": args.scenario})
            cfg = RunConfig(sections)
        out_dir = args.out or cfg["output"]["directory"]
        return run(cfg, out_dir, check=args.grid_check)
    except ConfigError as err:
        return _fail(type(err).__name__, err, 2)
    except OSError as err:
        return _fail("IOError", err, 1)
    except Exception as err:  # scenario failure: report with context
        return _fail(type(err).__name__, err, 1)


if __name__ == "__main__":
    sys.exit(main())
