"""Accuracy metrics and the hardware throughput/power estimator."""

import io
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .engine import StochasticResult, run_stochastic_grid
from .model import ModelParams, build_likelihood_volume, compute_features
from .reference import ReferenceResult, reference_infer

SWEEP_CSV_HEADER = "n_max,rms,f1,cycles_mean,cycles_sd,timeouts"

# Prospective signal-generator device figures: 500 MHz bitstreams at 50 uW.
DEFAULT_CLOCK_HZ = 500e6
DEFAULT_GENERATOR_POWER_W = 50e-6


@dataclass(frozen=True)
class AccuracyReport:
    """Stochastic-vs-reference agreement for one configuration.

    RMS is computed over the disparity entries of the max-normalized
    distributions, restricted to pixels matched by both engines; F1 treats
    the reference no-match set as ground truth.
    """

    n_max: int
    rms_error: float
    f1_nomatch: float
    n_matched: int
    n_nomatch: int
    n_timeout: int
    cycles_mean: float
    cycles_sd: float


@dataclass(frozen=True)
class HardwareEstimate:
    n_generators: int
    power_watts: float
    valid_pixels: int
    cycles_per_pixel: float
    cycles_per_image: float
    frames_per_second: float
    clock_hz: float
    per_generator_power_watts: float


def rms_distribution_error(
    stochastic_readout: np.ndarray,
    reference_scores: np.ndarray,
    matched_mask: Optional[np.ndarray] = None,
) -> float:
    """Root mean squared componentwise difference between distributions.

    Both inputs must be max-normalized with matching shapes (..., D+1). With a
    mask, only pixels matched by both engines enter the mean.
    """
    a = np.asarray(stochastic_readout, dtype=float)
    b = np.asarray(reference_scores, dtype=float)
    if a.shape != b.shape:
        raise ValueError("distribution arrays must have identical shapes")
    if matched_mask is not None:
        a = a[matched_mask]
        b = b[matched_mask]
    if a.size == 0:
        raise ValueError("no pixels to compare")
    return float(np.sqrt(np.mean((a - b) ** 2)))


def f1_nomatch(reference_flags: np.ndarray, stochastic_flags: np.ndarray) -> float:
    """F1 score of no-match detection with the reference flags as truth.

    Both sets empty is perfect agreement (1.0); one empty set against a
    non-empty one scores 0.
    """
    ref = np.asarray(reference_flags, dtype=bool)
    sto = np.asarray(stochastic_flags, dtype=bool)
    if ref.shape != sto.shape:
        raise ValueError("flag arrays must have identical shapes")
    tp = int(np.sum(ref & sto))
    fp = int(np.sum(~ref & sto))
    fn = int(np.sum(ref & ~sto))
    if tp == 0:
        return 1.0 if fp == 0 and fn == 0 else 0.0
    return 2.0 * tp / (2.0 * tp + fp + fn)


def hardware_estimate(
    m: int,
    n: int,
    mean_cycles_per_pixel: float,
    image_width: int,
    image_height: int,
    d_max: int,
    clock_hz: float = DEFAULT_CLOCK_HZ,
    per_generator_power_watts: float = DEFAULT_GENERATOR_POWER_W,
) -> HardwareEstimate:
    """Closed-form speed and power projection for a hardware machine.

    One generator per term module (N x M); valid pixels lose 4 per dimension
    to filtering and d_max more columns to the disparity search range.
    """
    if min(m, n, image_width, image_height, d_max) <= 0:
        raise ValueError("all dimensions must be positive")
    if mean_cycles_per_pixel <= 0 or clock_hz <= 0 or per_generator_power_watts <= 0:
        raise ValueError("rates and powers must be positive")
    valid = (image_width - 4 - d_max) * (image_height - 4)
    if valid <= 0:
        raise ValueError("image too small for this d_max")
    n_generators = n * m
    power = n_generators * per_generator_power_watts
    cycles_per_image = valid * mean_cycles_per_pixel
    fps = clock_hz / cycles_per_image
    return HardwareEstimate(
        n_generators=n_generators,
        power_watts=power,
        valid_pixels=valid,
        cycles_per_pixel=mean_cycles_per_pixel,
        cycles_per_image=cycles_per_image,
        frames_per_second=fps,
        clock_hz=clock_hz,
        per_generator_power_watts=per_generator_power_watts,
    )


def compare_results(
    stochastic: StochasticResult, reference: ReferenceResult
) -> AccuracyReport:
    """Score one stochastic run against the reference on the same volume."""
    both_matched = (
        (~reference.no_match) & (~stochastic.no_match) & (~stochastic.timed_out)
    )
    readout = stochastic.readout()[:, :, : stochastic.d_max + 1]
    rms = rms_distribution_error(readout, reference.norm_scores, both_matched)
    f1 = f1_nomatch(reference.no_match, stochastic.no_match)
    return AccuracyReport(
        n_max=stochastic.n_max,
        rms_error=rms,
        f1_nomatch=f1,
        n_matched=int(both_matched.sum()),
        n_nomatch=int(stochastic.no_match.sum()),
        n_timeout=int(stochastic.timed_out.sum()),
        cycles_mean=float(stochastic.cycles.mean()),
        cycles_sd=float(stochastic.cycles.std()),
    )


def sweep_counter_sizes(
    left: np.ndarray,
    right: np.ndarray,
    params: ModelParams,
    n_max_values: Sequence[int],
    seeds: Sequence[int],
    max_cycles: int = 10**7,
    workers: int = 1,
) -> List[AccuracyReport]:
    """Accuracy and runtime versus counter size on one stereo pair.

    Per n_max value, metrics are averaged over the given master seeds;
    timeouts are reported in the counts, never dropped.
    """
    if not n_max_values:
        raise ValueError("need at least one counter size")
    if not seeds:
        raise ValueError("need at least one seed")
    fmaps_l = compute_features(left)
    fmaps_r = compute_features(right)
    volume = build_likelihood_volume(fmaps_l, fmaps_r, params)
    reference = reference_infer(volume)

    reports = []
    for n_max in n_max_values:
        per_seed = [
            compare_results(
                run_stochastic_grid(volume, n_max, seed, max_cycles, workers),
                reference,
            )
            for seed in seeds
        ]
        reports.append(
            AccuracyReport(
                n_max=n_max,
                rms_error=float(np.mean([r.rms_error for r in per_seed])),
                f1_nomatch=float(np.mean([r.f1_nomatch for r in per_seed])),
                n_matched=int(np.mean([r.n_matched for r in per_seed])),
                n_nomatch=int(np.mean([r.n_nomatch for r in per_seed])),
                n_timeout=int(sum(r.n_timeout for r in per_seed)),
                cycles_mean=float(np.mean([r.cycles_mean for r in per_seed])),
                cycles_sd=float(np.mean([r.cycles_sd for r in per_seed])),
            )
        )
    return reports


def sweep_to_csv(reports: Sequence[AccuracyReport]) -> str:
    out = io.StringIO()
    out.write(SWEEP_CSV_HEADER + "\n")
    for r in reports:
        out.write(
            f"{r.n_max},{r.rms_error:.6f},{r.f1_nomatch:.6f},"
            f"{r.cycles_mean:.4f},{r.cycles_sd:.4f},{r.n_timeout}\n"
        )
    return out.getvalue()
