"""End-to-end analysis: resample, high-pass, transform, detect, reconstruct."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import formats
from .config import AnalysisConfig
from .cwt import Scalogram, TimeSeries, cwt_fft, edge_mask, make_scale_grid
from .detection import ElementEvent, MaxPoint, NoiseModel, detect, reconstruct_scalogram
from .preprocess import RawSeries, butterworth_highpass, resample_uniform

log = logging.getLogger(__name__)


class StageError(RuntimeError):
    """Failure inside a named pipeline stage; ``cause`` keeps the original."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class AnalysisResult:
    config: AnalysisConfig
    series: TimeSeries
    filtered: TimeSeries
    scalogram: Scalogram
    noise: NoiseModel
    maxima: list[MaxPoint]
    events: list[ElementEvent]
    element_scalogram: Scalogram


def _stage(name, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except Exception as exc:
        raise StageError(name, exc) from exc


def transform(series: TimeSeries, config: AnalysisConfig) -> Scalogram:
    params = config.element_params.analysis
    grid = make_scale_grid(
        params, config.min_period / series.dt, config.max_period / series.dt, config.voxels_per_octave
    )
    sc = cwt_fft(series, params, grid)
    valid = edge_mask(grid, len(series), config.decay_multiplier)
    return Scalogram(sc.coeffs, grid, params, sc.dt, sc.t0, sc.epoch, valid)


def detect_events(scalogram: Scalogram, config: AnalysisConfig):
    return detect(
        scalogram, config.element_params, config.alpha, config.noise_method,
        trials=config.mc_trials, seed=config.seed,
    )


def reconstruct(events: list[ElementEvent], scalogram: Scalogram, config: AnalysisConfig) -> Scalogram:
    el = reconstruct_scalogram(
        events, config.element_params, scalogram.grid, scalogram.n, scalogram.dt, scalogram.t0, scalogram.epoch
    )
    return Scalogram(el.coeffs, el.grid, el.params, el.dt, el.t0, el.epoch, scalogram.valid)


def run_analysis(data: RawSeries | TimeSeries, config: AnalysisConfig) -> AnalysisResult:
    """Run every stage on raw dated observations or an already uniform series."""
    for msg in config.warnings():
        log.warning(msg)
    if isinstance(data, RawSeries):
        series = _stage("resample", resample_uniform, data, config.dt, config.max_gap)
    else:
        series = data
    spec = config.filter
    filtered = series if spec is None else _stage("filter", butterworth_highpass, series, spec)
    scalogram = _stage("transform", transform, filtered, config)
    events, noise, maxima = _stage("detect", detect_events, scalogram, config)
    element = _stage("reconstruct", reconstruct, events, scalogram, config)
    log.info("%d maxima, %d significant events (sigma_hat=%.4g)", len(maxima), len(events), noise.sigma_hat)
    return AnalysisResult(config, series, filtered, scalogram, noise, maxima, events, element)


def write_outputs(result: AnalysisResult, out_dir) -> dict:
    """Write every artifact of a run plus a manifest of content hashes."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    config_json = result.config.to_json()
    provenance = "element-analysis\nconfig " + " ".join(config_json.split())
    names = []

    def emit(name, writer, *args, **kw):
        path = out / name
        try:
            writer(path, *args, **kw)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc
        names.append(name)

    emit("config.json", lambda p: p.write_text(config_json))
    emit("filtered.csv", formats.write_series_csv, result.filtered,
         {"raw": result.series.values, "filtered": result.filtered.values})
    emit("scalogram.csv", formats.write_scalogram_csv, result.scalogram)
    emit("scalogram.pgm", formats.write_pgm, result.scalogram, comment=provenance)
    emit("scalogram.npz", formats.save_scalogram, result.scalogram)
    emit("element_scalogram.csv", formats.write_scalogram_csv, result.element_scalogram)
    emit("element_scalogram.pgm", formats.write_pgm, result.element_scalogram, comment=provenance)
    emit("events.jsonl", formats.write_events_jsonl, result.events)
    emit("events.csv", formats.write_events_csv, result.events)
    noise = {
        "sigma_hat": result.noise.sigma_hat,
        "alpha": result.noise.alpha,
        "method": result.noise.method,
        "quantile": result.noise.quantile,
        "per_scale_threshold": np.asarray(result.noise.per_scale_threshold).tolist(),
        "n_maxima": len(result.maxima),
        "n_events": len(result.events),
    }
    emit("noise.json", lambda p: p.write_text(json.dumps(noise, indent=2) + "\n"))
    return formats.write_manifest(out, names, config_json)
