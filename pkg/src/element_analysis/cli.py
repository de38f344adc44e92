"""Command-line interface.

Exit codes: 0 success, 1 runtime failure, 2 input or validation error.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import logging
import sys
from pathlib import Path

import numpy as np

from . import formats
from .config import AnalysisConfig, load_config
from .cwt import TimeSeries
from .detection import ElementEvent, synthesize
from .morse import morse_norm, morse_time, peak_frequency
from .pipeline import StageError, detect_events, reconstruct, run_analysis, transform, write_outputs
from .preprocess import butterworth_highpass, resample_uniform
from .theory import element_frequency_factor, eta, s_tilde_max, zeta_max

log = logging.getLogger("element_analysis")

D = AnalysisConfig()

CONFIG_FLAGS = {
    # flag: (config field, type, help)
    "--beta": ("beta", float, f"analysis wavelet order (default {D.beta:g})"),
    "--gamma": ("gamma", float, f"wavelet family (default {D.gamma:g})"),
    "--mu": ("mu", float, f"element order (default {D.mu:g})"),
    "--min-period": ("min_period", str, f"shortest analysed period, e.g. 8d, 2w, 1m (default {D.min_period:g}d)"),
    "--max-period": ("max_period", str, f"longest analysed period (default {D.max_period:g}d)"),
    "--voxels-per-octave": ("voxels_per_octave", int, f"scales per octave (default {D.voxels_per_octave})"),
    "--alpha": ("alpha", float, f"false-alarm level of the noise threshold (default {D.alpha:g})"),
    "--noise-method": ("noise_method", str, f"monte-carlo or analytic-white (default {D.noise_method})"),
    "--mc-trials": ("mc_trials", int, f"Monte Carlo noise runs (default {D.mc_trials})"),
    "--cutoff-period": ("cutoff_period", str, f"high-pass cutoff period (default {D.cutoff_period:g}d = 1/3 y)"),
    "--filter-order": ("filter_order", int, f"Butterworth order (default {D.filter_order})"),
    "--seed": ("seed", int, f"random seed (default {D.seed})"),
    "--dt": ("dt", float, f"resampling interval in days (default {D.dt:g})"),
    "--max-gap": ("max_gap", float, f"longest gap bridged by interpolation, in samples (default {D.max_gap:g})"),
    "--date-column": ("date_column", str, "date column name (default: first column)"),
    "--value-column": ("value_column", str, "value column name (default: second column)"),
}


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("analysis parameters")
    g.add_argument("--config", type=Path, help="JSON file of config fields; flags override it")
    for flag, (dest, typ, text) in CONFIG_FLAGS.items():
        g.add_argument(flag, dest=dest, type=typ, default=None, help=text)
    g.add_argument("--no-filter", dest="no_filter", action="store_true", help="skip the Butterworth high-pass stage")


def _config(args, warn: bool = True) -> AnalysisConfig:
    overrides = {dest: getattr(args, dest, None) for dest, *_ in CONFIG_FLAGS.values()}
    if getattr(args, "no_filter", False):
        overrides["apply_filter"] = False
    cfg = load_config(getattr(args, "config", None), **overrides)
    if warn:
        for msg in cfg.warnings():
            log.warning(msg)
    return cfg


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _read_series(path, cfg: AnalysisConfig) -> TimeSeries:
    raw = formats.read_csv(path, cfg.date_column, cfg.value_column)
    if raw.dropped:
        log.info("dropped %d rows with missing values from %s", raw.dropped, path)
    return resample_uniform(raw, cfg.dt, cfg.max_gap)


def cmd_analyze(args) -> int:
    cfg = _config(args, warn=False)  # run_analysis reports them
    raw = formats.read_csv(args.input, cfg.date_column, cfg.value_column)
    if raw.dropped:
        log.info("dropped %d rows with missing values", raw.dropped)
    result = run_analysis(raw, cfg)
    manifest = write_outputs(result, _out_dir(args))
    print(f"{len(result.events)} significant events; {len(manifest['files'])} files in {args.out_dir}")
    return 0


def cmd_filter(args) -> int:
    cfg = _config(args)
    series = _read_series(args.input, cfg)
    spec = cfg.filter
    out = series if spec is None else butterworth_highpass(series, spec)
    formats.write_series_csv(args.output, out)
    return 0


def cmd_transform(args) -> int:
    cfg = _config(args)
    sc = transform(_read_series(args.input, cfg), cfg)
    out = _out_dir(args)
    formats.write_scalogram_csv(out / "scalogram.csv", sc)
    formats.write_pgm(out / "scalogram.pgm", sc)
    formats.save_scalogram(out / "scalogram.npz", sc)
    (out / "config.json").write_text(cfg.to_json())
    return 0


def cmd_detect(args) -> int:
    cfg = _config(args)
    sc = formats.load_scalogram(args.scalogram)
    if (sc.params.beta, sc.params.gamma) != (cfg.beta, cfg.gamma):
        raise ValueError(f"scalogram was computed with beta={sc.params.beta:g}, gamma={sc.params.gamma:g}; "
                         f"config has beta={cfg.beta:g}, gamma={cfg.gamma:g}")
    events, noise, maxima = detect_events(sc, cfg)
    out = _out_dir(args)
    formats.write_events_jsonl(out / "events.jsonl", events)
    formats.write_events_csv(out / "events.csv", events)
    (out / "config.json").write_text(cfg.to_json())
    print(f"{len(maxima)} maxima, {len(events)} significant (sigma_hat={noise.sigma_hat:.6g})")
    return 0


def cmd_reconstruct(args) -> int:
    cfg = _config(args)
    sc = formats.load_scalogram(args.scalogram)
    events = formats.read_events(args.events, sc.dt)
    el = reconstruct(events, sc, cfg)
    out = _out_dir(args)
    formats.write_scalogram_csv(out / "element_scalogram.csv", el)
    formats.write_pgm(out / "element_scalogram.pgm", el)
    return 0


def _read_event_spec(path, cfg: AnalysisConfig) -> list[ElementEvent]:
    aliases = {"t": ("t", "t_sample"), "c_abs": ("c_abs",), "c_phase": ("c_phase", "c_phase_rad"),
               "rho": ("rho", "rho_samples")}
    p = cfg.element_params
    events = []
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        cols = {}
        for key, names in aliases.items():
            found = [n for n in names if n in header]
            if not found and key != "c_phase":
                raise ValueError(f"{path}: event list needs a {key!r} column, got {header}")
            cols[key] = found[0] if found else None
        for row in reader:
            try:
                t = float(row[cols["t"]])
                c_abs = float(row[cols["c_abs"]])
                phase = float(row[cols["c_phase"]]) if cols["c_phase"] else 0.0
                rho = float(row[cols["rho"]])
            except (TypeError, ValueError):
                raise ValueError(f"{path}:{reader.line_num}: malformed event row {row}") from None
            if not c_abs > 0 or not rho > 0:
                raise ValueError(f"{path}:{reader.line_num}: amplitude and rho must be positive")
            events.append(ElementEvent.from_element(p, t, c_abs * np.exp(1j * phase), rho))
    return events


def cmd_synth(args) -> int:
    cfg = _config(args)
    events = _read_event_spec(args.events, cfg) if args.events else []
    epoch = _dt.datetime.fromisoformat(args.start)
    series = synthesize(events, cfg.element_params, args.length, cfg.dt, args.noise_sigma, cfg.seed, epoch=epoch)
    formats.write_series_csv(args.output, series)
    return 0


def cmd_theory(args) -> int:
    cfg = _config(args)
    p = cfg.element_params
    report = {
        "beta": p.beta,
        "mu": p.mu,
        "gamma": p.gamma,
        "a_beta_gamma": morse_norm(p.analysis),
        "a_mu_gamma": morse_norm(p.element),
        "omega_beta_gamma": peak_frequency(p.analysis),
        "omega_mu_gamma": peak_frequency(p.element),
        "s_tilde_max": s_tilde_max(p),
        "eta": eta(p),
        "zeta_max": zeta_max(p),
        "frequency_factor": element_frequency_factor(p),
    }
    for key, value in report.items():
        print(f"{key}={value:.10g}")
    if args.kernel_out:
        kernel = morse_time(p.analysis, args.kernel_length, args.kernel_scale)
        t = np.arange(args.kernel_length) - args.kernel_length // 2
        with Path(args.kernel_out).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "re", "im", "abs"])
            for ti, k in zip(t, kernel):
                w.writerow([ti, formats.fmt(k.real), formats.fmt(k.imag), formats.fmt(abs(k))])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="element-analysis",
        description="Morse-wavelet element analysis of time series.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def command(name, func, text):
        p = sub.add_parser(name, help=text, description=text)
        p.set_defaults(func=func)
        _add_config_flags(p)
        return p

    p = command("analyze", cmd_analyze, "full pipeline: read, resample, filter, transform, detect, reconstruct")
    p.add_argument("input", type=Path, help="CSV with a date and a value column")
    p.add_argument("--out-dir", default="out", help="output directory (default out)")

    p = command("filter", cmd_filter, "resample and high-pass filter a series")
    p.add_argument("input", type=Path)
    p.add_argument("-o", "--output", type=Path, required=True, help="output series CSV")

    p = command("transform", cmd_transform, "scalogram of a (filtered) series")
    p.add_argument("input", type=Path)
    p.add_argument("--out-dir", default="out", help="output directory (default out)")

    p = command("detect", cmd_detect, "significant element events from a scalogram.npz")
    p.add_argument("scalogram", type=Path)
    p.add_argument("--out-dir", default="out", help="output directory (default out)")

    p = command("reconstruct", cmd_reconstruct, "element scalogram from an events file")
    p.add_argument("events", type=Path, help="events .jsonl or .csv")
    p.add_argument("--scalogram", type=Path, required=True, help="scalogram.npz supplying grid and length")
    p.add_argument("--out-dir", default="out", help="output directory (default out)")

    p = command("synth", cmd_synth, "synthesize an element-model series")
    p.add_argument("events", type=Path, nargs="?", help="CSV with columns t, c_abs, c_phase, rho (samples)")
    p.add_argument("-o", "--output", type=Path, required=True)
    p.add_argument("--length", type=int, default=1024, help="number of samples (default 1024)")
    p.add_argument("--noise-sigma", type=float, default=0.0, help="white noise standard deviation (default 0)")
    p.add_argument("--start", default="2000-01-01", help="date of the first sample (default 2000-01-01)")

    p = command("theory", cmd_theory, "print closed-form element-analysis constants")
    p.add_argument("--kernel-out", type=Path, help="also write the time-domain wavelet as CSV (t, re, im, abs)")
    p.add_argument("--kernel-scale", type=float, default=8.0, help="kernel scale in samples (default 8)")
    p.add_argument("--kernel-length", type=int, default=256, help="kernel window length (default 256)")
    return parser


INPUT_ERRORS = (ValueError, FileNotFoundError, IsADirectoryError, KeyError)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except StageError as exc:
        print(f"error {exc}", file=sys.stderr)
        return 2 if isinstance(exc.cause, INPUT_ERRORS) else 1
    except INPUT_ERRORS as exc:
        print(f"error [{args.command}]: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"error [{args.command}]: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
