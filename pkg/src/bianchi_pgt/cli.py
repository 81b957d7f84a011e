"""Command-line entry point.

    bianchi-pgt [--config run.json] <command> [--field_D 1 --X 1000 ...]

Commands: enumerate, psi, explicit, unsmooth, gallagher, exponent, pipeline.
Every CSV starts with ``# config_hash=<hex> schema=1``.  Wall times and
versions go to ``manifest.json`` in the output directory, never into the CSVs,
so reruns of one config give byte-identical CSVs.

Exit codes: 0 success, 2 enumeration finished unsaturated, 1 error.
"""

from __future__ import annotations

import argparse
import json
import math
import platform
import sys
import time
import warnings
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import __version__
from .chebyshev import ChebyshevSeries, error_term, log_integral
from .config import OUTDIR_ENV, RunConfig, load_config
from .errors import BianchiError, BudgetExceeded, DomainError, EmptyRange, MissingInput, ParseError
from .explicit import MainTermFit, eval_psi2, eval_psi3, fit_main_terms
from .gallagher import envelope, exceptional_measure
from .geodesics import GeodesicLedger, enumerate_classes, pi_gamma_array, read_ledger, write_ledger
from .spectrum import ScatteringPoles, WeylModel, load_poles, load_spectrum, synth_spectrum
from .unsmooth import ParamPolicy, exponent_fit, fit_power_law, policy_params, sandwich_psi0

CSV_SCHEMA = 1
COMMANDS = ("enumerate", "psi", "explicit", "unsmooth", "gallagher", "exponent", "pipeline")


# ---------------------------------------------------------------- output


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def write_csv(path: Path, cfg: RunConfig, columns, rows) -> Path:
    lines = [f"# config_hash={cfg.hash()} schema={CSV_SCHEMA}", ",".join(columns)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def _update_manifest(out: Path, cfg: RunConfig, stage: str, seconds: float, outputs, extra=None):
    path = out / "manifest.json"
    try:
        man = json.loads(path.read_text())
        if man.get("config_hash") != cfg.hash():
            man = {}
    except (OSError, ValueError):
        man = {}
    man.update({
        "config_hash": cfg.hash(),
        "config": cfg.as_dict(),
        "versions": {"bianchi_pgt": __version__, "python": platform.python_version(),
                     "numpy": np.__version__},
    })
    entry = {"seconds": round(seconds, 6), "outputs": [p.name for p in outputs]}
    if extra:
        entry.update(extra)
    man.setdefault("stages", {})[stage] = entry
    path.write_text(json.dumps(man, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------- inputs


def _out(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _ledger_path(cfg: RunConfig) -> Path:
    return Path(cfg.ledger) if cfg.ledger else Path(cfg.out_dir) / "ledger.csv"


def read_weights(path) -> ChebyshevSeries:
    """A bare ``norm,lambda`` table, for hand-built Chebyshev series."""
    norms, lams = [], []
    header = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",")]
            if header is None:
                header = parts
                continue
            try:
                norms.append(float(parts[0]))
                lams.append(float(parts[1]))
            except (ValueError, IndexError) as exc:
                raise ParseError(str(exc), line=lineno) from None
    X = max(norms) if norms else 1.0
    return ChebyshevSeries(norms, lams, X)


def load_series_source(cfg: RunConfig):
    """GeodesicLedger or, for a ``norm,lambda`` table, a ChebyshevSeries."""
    path = _ledger_path(cfg)
    if not path.exists():
        raise MissingInput(f"ledger file {path} not found (run 'enumerate' or set ledger)")
    with open(path) as fh:
        first = next((ln for ln in fh if ln.strip() and not ln.startswith("#")), "")
    if [p.strip() for p in first.split(",")] == ["norm", "lambda"]:
        return read_weights(path)
    return read_ledger(path)


def load_spectrum_source(cfg: RunConfig):
    if cfg.spectrum == "synthetic":
        model = WeylModel(cfg.weyl_remainder, cfg.volume, cfg.kappa)
        return synth_spectrum(model, cfg.T_max, seed=cfg.seed)
    if not Path(cfg.spectrum).exists():
        raise MissingInput(f"spectrum file {cfg.spectrum} not found")
    return load_spectrum(cfg.spectrum, volume=cfg.volume)


def load_poles_source(cfg: RunConfig):
    if cfg.poles is None:
        return ScatteringPoles.empty()
    if not Path(cfg.poles).exists():
        raise MissingInput(f"poles file {cfg.poles} not found")
    return load_poles(cfg.poles)


def x_grid(cfg: RunConfig, X: float | None = None) -> np.ndarray:
    if X is not None and cfg.grid_hi > X * (1 + 1e-12):
        raise DomainError(f"grid_hi={cfg.grid_hi} exceeds the ledger bound X={X}")
    return np.geomspace(cfg.grid_lo, cfg.grid_hi, cfg.grid_count)


def make_policy(cfg: RunConfig, name: str | None = None) -> ParamPolicy:
    return ParamPolicy(name or cfg.policy, cfg.c_h, cfg.c_T, cfg.c_Y, eps=cfg.eps,
                       threshold_scale=cfg.threshold_scale)


# ---------------------------------------------------------------- commands


def cmd_enumerate(cfg: RunConfig) -> int:
    out = _out(cfg)
    t0 = time.perf_counter()
    tag = [f"config_hash={cfg.hash()} schema={CSV_SCHEMA}"]
    try:
        ledger = enumerate_classes(cfg.field_D, cfg.X, cfg.H, cfg.method, cfg.budget)
    except BudgetExceeded as exc:
        if isinstance(exc.partial, GeodesicLedger):
            write_ledger(exc.partial, out / "ledger.partial.csv", tag)
        raise
    path = out / "ledger.csv"
    write_ledger(ledger, path, tag)
    print(f"{len(ledger)} classes, {int(ledger.primitive.sum())} primitive, "
          f"saturated={ledger.saturated}")
    print(ledger.saturation_report)
    _update_manifest(out, cfg, "enumerate", time.perf_counter() - t0, [path],
                     {"classes": len(ledger), "saturated": bool(ledger.saturated)})
    return 0 if ledger.saturated else 2


def cmd_psi(cfg: RunConfig) -> int:
    out = _out(cfg)
    t0 = time.perf_counter()
    src = load_series_source(cfg)
    if isinstance(src, GeodesicLedger):
        series = ChebyshevSeries.from_ledger(src)
        xs = x_grid(cfg, src.X)
        spectrum = load_spectrum_source(cfg)
        pis = pi_gamma_array(src, xs)
        E = error_term(src, spectrum, xs)
        cols = ("x", "psi0", "psi1", "psi2", "psi3", "pi", "li_x2", "E")
        psis = [series.psi(xs, k) for k in range(4)]
        lis = log_integral(xs ** 2)
        rows = [(x, *(p[i] for p in psis), int(pis[i]), lis[i], E[i]) for i, x in enumerate(xs)]
    else:
        series = src
        xs = x_grid(cfg, None)
        cols = ("x", "psi0", "psi1", "psi2", "psi3")
        rows = []
        for x in xs:
            # the weight table is complete, so psi extends past its last norm
            i = np.searchsorted(series.norms, x, side="right")
            n, lam = series.norms[:i], series.lams[:i]
            rows.append((x, *(float(np.sum(lam * (x - n) ** k)) / math.factorial(k)
                              for k in range(4))))
    path = write_csv(out / "psi.csv", cfg, cols, rows)
    _update_manifest(out, cfg, "psi", time.perf_counter() - t0, [path])
    return 0


def cmd_explicit(cfg: RunConfig) -> int:
    out = _out(cfg)
    t0 = time.perf_counter()
    spectrum = load_spectrum_source(cfg)
    poles = load_poles_source(cfg)
    k = cfg.fit_k
    source = None
    if _ledger_path(cfg).exists():
        source = load_series_source(cfg)
    outputs = []
    if source is not None:
        series = source if isinstance(source, ChebyshevSeries) else ChebyshevSeries.from_ledger(source)
        xs = x_grid(cfg, series.X)
        fit = fit_main_terms(series, spectrum, poles, k, (float(xs[0]), float(xs[-1])), cfg.T)
        observed = series.psi(xs, k)
        fit_path = out / "explicit_fit.json"
        fit_path.write_text(json.dumps({
            "config_hash": cfg.hash(), "k": fit.k, "A": list(fit.A), "B0": fit.B0,
            "fit_window": list(fit.fit_window), "residual_rms": fit.residual_rms,
        }, indent=2, sort_keys=True) + "\n")
        outputs.append(fit_path)
    else:
        warnings.warn("no ledger available; the main-term polynomial is set to zero")
        xs = x_grid(cfg, None)
        fit = MainTermFit.zero(k)
        observed = np.full(len(xs), np.nan)
    evaluate = eval_psi3 if k == 3 else eval_psi2
    cols = ("x", "T", "value", "observed", "main_poly", "small_terms", "mirror_small_terms",
            "critical_terms", "truncation_bound", "pole_terms", "mirror_pole_terms")
    rows = []
    for x, obs in zip(xs, observed):
        r = evaluate(spectrum, poles, fit, float(x), cfg.T, cfg.C_trunc).row()
        rows.append((r["x"], r["T"], r["value"], obs, r["main_poly"], r["small_terms"],
                     r["mirror_small_terms"], r["critical_terms"], r["truncation_bound"],
                     r["pole_terms"], r["mirror_pole_terms"]))
    outputs.insert(0, write_csv(out / "explicit.csv", cfg, cols, rows))
    _update_manifest(out, cfg, "explicit", time.perf_counter() - t0, outputs)
    return 0


def cmd_unsmooth(cfg: RunConfig) -> int:
    out = _out(cfg)
    t0 = time.perf_counter()
    src = load_series_source(cfg)
    series = src if isinstance(src, ChebyshevSeries) else ChebyshevSeries.from_ledger(src)
    policy = make_policy(cfg)
    k = 3 if policy.name == "theorem1" else 2
    rows, skipped = [], 0
    for x in x_grid(cfg, series.X):
        h, _, _ = policy_params(policy, float(x))
        try:
            lo, hi = sandwich_psi0(series, float(x), h, k)
        except DomainError:
            skipped += 1
            continue
        rows.append((x, h, lo, series.psi(float(x), 0), hi, hi - lo))
    if skipped:
        warnings.warn(f"{skipped} grid points skipped: stencil leaves (0, X]")
    path = write_csv(out / "unsmooth.csv", cfg,
                     ("x", "h", "lower", "psi0", "upper", "width"), rows)
    _update_manifest(out, cfg, "unsmooth", time.perf_counter() - t0, [path],
                     {"skipped": skipped})
    return 0


def cmd_gallagher(cfg: RunConfig) -> int:
    out = _out(cfg)
    t0 = time.perf_counter()
    spectrum = load_spectrum_source(cfg)
    policy = make_policy(cfg, "theorem2")
    if len(spectrum.critical) == 0:
        warnings.warn(EmptyRange("spectrum has no critical parameters; every block is empty"))
    results = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EmptyRange)
        for n in range(cfg.block_lo, cfg.block_hi + 1):
            results.append(exceptional_measure(spectrum, n, policy, cfg.grid_density))
    cols = ("n", "Y", "T", "mu_log", "exceed_fraction", "lhs_integral", "rhs_integral", "ratio")
    rows = [(r.n, r.Y, r.T, r.mu_log, r.exceed_fraction, r.lhs_integral, r.rhs_integral, r.ratio)
            for r in results]
    path = write_csv(out / "gallagher.csv", cfg, cols, rows)
    env = envelope(results, cfg.eps)
    print(f"envelope max_n mu_log n (log n)^(1+eps) = {env:.6g}")
    _update_manifest(out, cfg, "gallagher", time.perf_counter() - t0, [path], {"envelope": env})
    return 0


def _read_error_table(path):
    xs, Es = [], []
    header = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",")]
            if header is None:
                if parts[:2] != ["x", "E"]:
                    raise ParseError("expected header x,E", line=lineno)
                header = parts
                continue
            try:
                xs.append(float(parts[0]))
                Es.append(float(parts[1]))
            except (ValueError, IndexError) as exc:
                raise ParseError(str(exc), line=lineno) from None
    return np.array(xs), np.array(Es)


def cmd_exponent(cfg: RunConfig) -> int:
    out = _out(cfg)
    t0 = time.perf_counter()
    if cfg.error_table is not None:
        xs, E = _read_error_table(cfg.error_table)
        fit = fit_power_law(xs, E)
    else:
        ledger = load_series_source(cfg)
        if not isinstance(ledger, GeodesicLedger):
            raise MissingInput("exponent needs a geodesic ledger, not a weight table")
        spectrum = load_spectrum_source(cfg)
        xs = x_grid(cfg, ledger.X)
        E = error_term(ledger, spectrum, xs)
        fit = exponent_fit(ledger, spectrum, xs)
    path = write_csv(out / "exponent.csv", cfg, ("x", "E"), zip(xs, E))
    report = out / "exponent_report.txt"
    report.write_text(f"# config_hash={cfg.hash()} schema={CSV_SCHEMA}\n{fit.report()}\n")
    print(fit.report())
    _update_manifest(out, cfg, "exponent", time.perf_counter() - t0, [path, report],
                     {"slope": fit.slope, "half_width": fit.half_width})
    return 0


def cmd_pipeline(cfg: RunConfig) -> int:
    code = cmd_enumerate(cfg)
    for step in (cmd_psi, cmd_explicit, cmd_unsmooth, cmd_gallagher, cmd_exponent):
        step(cfg)
    return code


HANDLERS = {
    "enumerate": cmd_enumerate, "psi": cmd_psi, "explicit": cmd_explicit,
    "unsmooth": cmd_unsmooth, "gallagher": cmd_gallagher, "exponent": cmd_exponent,
    "pipeline": cmd_pipeline,
}


# ---------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    flags = argparse.ArgumentParser(add_help=False)
    flags.add_argument("--config", help="JSON file with RunConfig keys")
    for f in fields(RunConfig):
        flags.add_argument(f"--{f.name}", dest=f.name, default=None, metavar=f.name.upper(),
                           help=f"override '{f.name}' (default {f.default!r})")
    parser = _Parser(prog="bianchi-pgt", description=__doc__.split("\n\n")[0],
                     epilog=f"{OUTDIR_ENV} overrides out_dir from the config file; "
                            "command-line flags override both.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[flags], help=HANDLERS[name].__doc__ or f"run {name}")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return 1
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    overrides = {f.name: getattr(args, f.name) for f in fields(RunConfig)}
    try:
        cfg = load_config(args.config, overrides)
        return HANDLERS[args.command](cfg)
    except (BianchiError, OSError, ValueError) as exc:
        print(f"bianchi-pgt {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
