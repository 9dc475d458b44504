"""Seeded Monte Carlo study of layer-thickness fabrication errors."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .design import best_coherent, detector_absorption, uniformity
from .errors import DistPNRError, DomainError
from .optics import Layer, Stack, traveling_response

WHICH = ("detectors-and-spacers", "detectors-only")


@dataclass(frozen=True)
class PerturbationSpec:
    """Independent uniform relative thickness errors in [-bound, +bound]."""

    fractional_bound: float = 0.05
    which_layers: str = "detectors-and-spacers"

    def __post_init__(self):
        if not 0.0 <= self.fractional_bound < 1.0:
            raise DomainError(f"fractional bound {self.fractional_bound} must lie in [0, 1)")
        if self.which_layers not in WHICH:
            raise DomainError(f"unknown layer selection {self.which_layers!r}")

    def applies_to(self, layer: Layer) -> bool:
        if self.which_layers == "detectors-only":
            return layer.role == "detector"
        return layer.role in ("detector", "spacer")


def layer_draw(seed: int, sample_index: int, layer_index: int) -> float:
    """Uniform draw in [0, 1) from a Philox stream keyed by (seed, sample, layer).

    Independent of call order, so serial and parallel runs agree bit for bit.
    """
    ss = np.random.SeedSequence([seed & (2**64 - 1), sample_index, layer_index])
    return float(np.random.Generator(np.random.Philox(ss)).random())


def perturb_stack(nominal: Stack, spec: PerturbationSpec, sample_index: int, seed: int) -> Stack:
    b = spec.fractional_bound
    if b == 0.0:
        return nominal
    layers = []
    for i, layer in enumerate(nominal.layers):
        if spec.applies_to(layer):
            u = (2.0 * layer_draw(seed, sample_index, i) - 1.0) * b
            layer = Layer(layer.medium, layer.thickness * (1.0 + u), layer.role, layer.label)
        layers.append(layer)
    return nominal.with_layers(layers)


@dataclass(frozen=True)
class SampleRecord:
    index: int
    absorption: float = math.nan
    delta_norm: float = math.nan
    theta: float = math.nan
    t: complex = complex(math.nan, math.nan)
    r: complex = complex(math.nan, math.nan)
    r_right: complex = complex(math.nan, math.nan)
    per_layer: tuple[float, ...] = ()
    thicknesses: tuple[float, ...] = ()
    error: str | None = None


@dataclass(frozen=True)
class EnsembleReport:
    records: tuple[SampleRecord, ...]
    seed: int
    spec: PerturbationSpec
    wavelength: float
    summary: dict = field(default_factory=dict)


def summarize(records) -> dict:
    ok = [r for r in records if r.error is None]
    a = np.array([r.absorption for r in ok])
    dn = np.array([r.delta_norm for r in ok])
    if not ok:
        return {"n_samples": len(records), "n_failed": len(records)}
    q = np.quantile(dn, [0.5, 0.9, 0.95, 1.0])
    return {
        "n_samples": len(records),
        "n_failed": len(records) - len(ok),
        "fraction_complete_absorption": float(np.mean(a >= 0.99)),
        "min_absorption": float(a.min()),
        "mean_absorption": float(a.mean()),
        "fraction_delta_norm_below_0.03": float(np.mean(dn < 0.03)),
        "delta_norm_median": float(q[0]),
        "delta_norm_q90": float(q[1]),
        "delta_norm_q95": float(q[2]),
        "delta_norm_max": float(q[3]),
    }


def _evaluate(nominal, spec, seed, wavelength, index) -> SampleRecord:
    stack = perturb_stack(nominal, spec, index, seed)
    thick = tuple(layer.thickness for layer in stack.layers)
    try:
        resp = best_coherent(stack, wavelength)
        per = detector_absorption(stack, resp)
        tr = traveling_response(stack, wavelength)
        rep = uniformity(per)
    except DistPNRError as exc:
        return SampleRecord(index, thicknesses=thick, error=f"{exc.reason}: {exc}")
    return SampleRecord(index, resp.absorption, rep.delta_norm, resp.theta, tr.t, tr.r, tr.r_right,
                        tuple(per), thick)


def run_ensemble(nominal: Stack, spec: PerturbationSpec, n_samples: int, seed: int,
                 wavelength: float | None = None, workers: int = 1) -> EnsembleReport:
    """Best-phase coherent response and uniformity for ``n_samples`` perturbed stacks.

    Failing samples are kept with their error message.  Records are in sample
    order regardless of ``workers``.
    """
    if n_samples < 1:
        raise DomainError("n_samples must be >= 1")
    wl = wavelength or nominal.design_wavelength
    if wl is None:
        raise DomainError("no wavelength given and stack has no design wavelength")

    def job(i):
        return _evaluate(nominal, spec, seed, wl, i)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = tuple(pool.map(job, range(n_samples)))
    else:
        records = tuple(job(i) for i in range(n_samples))
    return EnsembleReport(records, seed, spec, float(wl), summarize(records))
