"""Stack builders, thickness/filling-factor optimisers, target coefficients,
uniformity metrics, deposition sweeps and spectra."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from .errors import DomainError, InfeasibleDesignError, SearchError
from .materials import VACUUM, Material, MeanderSpec
from .optics import (
    Coherent,
    CoherentResponse,
    Illumination,
    Layer,
    Mirror,
    Open,
    Stack,
    TwoPortResponse,
    best_coherent_absorption,
    best_phase,
    coherent_response,
    traveling_response,
)


# -- geometries -------------------------------------------------------------

@dataclass(frozen=True)
class CounterPropagating:
    """Free-standing absorber lit from both sides at the best input phase."""


@dataclass(frozen=True)
class Salisbury:
    """Absorber on a quarter-wave spacer backed by a mirror."""

    spacer_n: float = 1.5
    mirror_reflectivity: float = 0.999


Geometry = Union[CounterPropagating, Salisbury]


def spacer_material(n: float) -> Material:
    if not n >= 1.0:
        raise DomainError(f"spacer index {n} must be >= 1")
    return Material.from_index(f"spacer[n={n:g}]", n)


def build_salisbury(meander: MeanderSpec, spacer_n: float = 1.5, mirror_R: float = 0.999,
                    design_wavelength: float = 1550.0) -> Stack:
    """ambient | meander | quarter-wave spacer | mirror."""
    if not 0.0 < mirror_R < 1.0:
        raise DomainError(f"mirror reflectivity {mirror_R} must lie in (0, 1)")
    spacer = spacer_material(spacer_n)
    layers = (
        Layer(meander.medium, meander.thickness, "detector", "Det1"),
        Layer(spacer, design_wavelength / (4 * spacer_n), "spacer", "Sp1"),
    )
    return Stack(layers, VACUUM, Mirror(mirror_R, spacer_n), design_wavelength)


def build_distributed(meander_sublayer: MeanderSpec, n_det: int, spacer_n: float = 1.5,
                      design_wavelength: float = 1550.0) -> Stack:
    """``n_det`` detector sublayers separated by half-wave spacers, vacuum on both sides."""
    if n_det < 1:
        raise DomainError("a distributed detector needs at least one sublayer")
    spacer = spacer_material(spacer_n)
    d_sp = design_wavelength / (2 * spacer_n)
    layers = []
    for i in range(n_det):
        layers.append(Layer(meander_sublayer.medium, meander_sublayer.thickness, "detector", f"Det{i + 1}"))
        if i < n_det - 1:
            layers.append(Layer(spacer, d_sp, "spacer", f"Sp{i + 1}"))
    return Stack(tuple(layers), VACUUM, Open(VACUUM), design_wavelength)


def best_coherent(stack: Stack, wavelength: float) -> CoherentResponse:
    return coherent_response(stack, wavelength, best_phase(stack, wavelength))


# -- thickness optimisation ---------------------------------------------------

def _objective(meander: MeanderSpec, wavelength: float, geometry: Geometry):
    if isinstance(geometry, Salisbury):
        def value(d):
            m = MeanderSpec(meander.film, meander.slit, meander.filling_factor, d)
            stack = build_salisbury(m, geometry.spacer_n, geometry.mirror_reflectivity, wavelength)
            return traveling_response(stack, wavelength).A
    else:
        medium = meander.medium

        def value(d):
            stack = Stack((Layer(medium, d, "detector", "Det1"),))
            return best_coherent_absorption(stack, wavelength)[1]
    return value


def optimal_thickness(meander: MeanderSpec, wavelength: float = 1550.0,
                      geometry: Geometry = CounterPropagating(), d_max: float = 100.0,
                      step: float = 0.1) -> float:
    """Detector thickness (nm) maximising absorption over (0, d_max].

    The thickness field of ``meander`` is ignored.  Grid scan at ``step``
    followed by a parabolic fit through the best grid point and its neighbours.
    """
    value = _objective(meander, wavelength, geometry)
    grid = np.arange(1, int(round(d_max / step)) + 1) * step
    vals = np.array([value(d) for d in grid])
    i = int(np.argmax(vals))
    if i == 0 or i == len(grid) - 1:
        raise SearchError(
            f"no interior absorption maximum in (0, {d_max}] nm at f={meander.filling_factor:g}"
        )
    y0, y1, y2 = vals[i - 1 : i + 2]
    denom = y0 - 2 * y1 + y2
    offset = 0.5 * (y0 - y2) / denom if denom < 0 else 0.0
    return float(grid[i] + offset * step)


def thin_film_optimal_thickness(epsilon_eff: complex, wavelength: float = 1550.0) -> float:
    """Thickness where the sheet admittance Re[-i k D (eps-1)/2] equals one."""
    k = 2 * math.pi / wavelength
    return 2.0 / (k * complex(epsilon_eff).imag)


def solve_filling_factor(d_sub: float, n_det: int, wavelength: float = 1550.0,
                         geometry: Geometry = CounterPropagating(), film: Material | None = None,
                         slit: Material = VACUUM, tol: float = 1e-4) -> float:
    """Filling factor whose single-layer optimum thickness equals ``d_sub * n_det``.

    Bisection on f, using that the optimum thickness decreases with f.
    """
    if d_sub <= 0 or n_det < 1:
        raise DomainError("sublayer thickness must be > 0 and n_det >= 1")
    from .materials import NBTIN

    film = film or NBTIN
    target = d_sub * n_det
    d_max = max(100.0, 2.0 * target)

    def excess(f):
        try:
            return optimal_thickness(MeanderSpec(film, slit, f), wavelength, geometry, d_max) - target
        except SearchError:
            return math.inf  # optimum beyond the scan range: f too small

    # thin-film estimate of the root narrows the bracket; widen if it misses
    eps_im = (film.permittivity(wavelength) - slit.permittivity(wavelength)).imag
    guess = thin_film_optimal_thickness(1j * eps_im, wavelength) / target if eps_im > 0 else 0.5
    lo, hi = max(1e-3, 0.8 * guess), min(1.0, 1.25 * guess)
    if excess(hi) > 0:
        lo, hi = hi, 1.0
        if excess(hi) > 0:
            raise InfeasibleDesignError(f"even f=1 needs more than {target} nm of film")
    if excess(lo) <= 0:
        lo, hi = 1e-3, lo
        if excess(lo) <= 0:
            raise InfeasibleDesignError(f"no filling factor in (0, 1] gives an optimum of {target} nm")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# -- target coefficients --------------------------------------------------------

@dataclass(frozen=True)
class DesignTargets:
    """Per-sublayer amplitude/intensity targets, exact rationals."""

    t: Fraction
    r: Fraction
    A: Fraction
    geometry: str
    sublayers: int


def target_coefficients(sublayers: int, geometry: str = "counter-propagating") -> DesignTargets:
    """Per-sublayer (t, r, A) for ``sublayers`` detectors in the given geometry.

    Counter-propagating with M sublayers: t = M/(M+1), r = -1/(M+1).
    Salisbury with K sublayers: t = 2K/(2K+1), r = -1/(2K+1).
    In both cases A = 1 - t**2 - r**2.
    """
    if sublayers < 1:
        raise DomainError("need at least one sublayer")
    if geometry == "counter-propagating":
        m = sublayers
    elif geometry == "salisbury":
        m = 2 * sublayers
    else:
        raise DomainError(f"unknown geometry {geometry!r}")
    t = Fraction(m, m + 1)
    r = Fraction(-1, m + 1)
    A = Fraction(2 * m, (m + 1) ** 2)
    return DesignTargets(t, r, A, geometry, sublayers)


# -- uniformity ---------------------------------------------------------------------

@dataclass(frozen=True)
class UniformityReport:
    delta: float
    delta_max: float
    delta_norm: float
    per_layer: tuple[float, ...]

    @property
    def total(self) -> float:
        return math.fsum(self.per_layer)


def uniformity(per_layer: Sequence[float]) -> UniformityReport:
    a = np.asarray(per_layer, dtype=float)
    n = a.size
    if n < 2:
        raise DomainError("absorption non-uniformity needs at least two layers")
    total = math.fsum(a)
    if not total > 0:
        raise DomainError("total absorption must be positive")
    delta = math.sqrt(np.mean((a - total / n) ** 2))
    delta_max = total / n * math.sqrt(n - 1)
    return UniformityReport(delta, delta_max, min(delta / delta_max, 1.0), tuple(float(x) for x in a))


def detector_absorption(stack: Stack, resp: CoherentResponse) -> list[float]:
    """Per-detector absorptions from a coherent response, in stack order."""
    lookup = dict(zip(resp.layer_indices, resp.per_layer))
    return [lookup.get(i, 0.0) for i in stack.detector_indices()]


def stack_uniformity(stack: Stack, wavelength: float | None = None) -> tuple[CoherentResponse, UniformityReport]:
    wl = wavelength or stack.design_wavelength
    resp = best_coherent(stack, wl)
    return resp, uniformity(detector_absorption(stack, resp))


# -- deposition sweeps -----------------------------------------------------------------

@dataclass(frozen=True)
class SweepSample:
    thickness: float
    label: str
    t: complex
    r: complex
    T: float
    R: float
    A: float


@dataclass(frozen=True)
class SweepTrajectory:
    wavelength: float
    samples: tuple[SweepSample, ...]


def _grid(d: float, step: float) -> np.ndarray:
    n = max(1, int(math.ceil(d / step - 1e-9)))
    pts = np.arange(1, n + 1) * step
    pts[-1] = d
    return pts


def deposition_sweep(final_stack: Stack, wavelength: float | None = None, step: float = 0.1,
                     spacer_step: float = 1.0) -> SweepTrajectory:
    """Traveling-wave response while the layers are deposited one by one.

    Open stacks are grown left to right from the first layer.  Mirror stacks
    are grown outwards from the mirror; spacers already touching the mirror
    are treated as pre-existing.
    """
    if step <= 0 or spacer_step <= 0:
        raise DomainError("sweep steps must be positive")
    wl = wavelength or final_stack.design_wavelength
    if wl is None:
        raise DomainError("no wavelength given and stack has no design wavelength")
    layers = list(final_stack.layers)
    if final_stack.is_mirror:
        base = []
        while layers and layers[-1].role == "spacer":
            base.insert(0, layers.pop())
        order = layers[::-1]

        def partial(done, current):
            return final_stack.with_layers([current, *done[::-1], *base] if current else [*done[::-1], *base])
    else:
        order = layers

        def partial(done, current):
            return final_stack.with_layers([*done, current] if current else list(done))

    def sample(stack, cum, label):
        resp = traveling_response(stack, wl)
        return SweepSample(cum, label, resp.t, resp.r, resp.T, resp.R, resp.A)

    start_label = order[0].label if order else ""
    out = [sample(partial([], None), 0.0, start_label)]
    done: list[Layer] = []
    cum = 0.0
    for layer in order:
        dstep = spacer_step if layer.role == "spacer" else step
        if layer.thickness > 0:
            for d in _grid(layer.thickness, dstep):
                current = Layer(layer.medium, float(d), layer.role, layer.label)
                out.append(sample(partial(done, current), cum + float(d), layer.label))
        cum += layer.thickness
        done.append(layer)
    return SweepTrajectory(float(wl), tuple(out))


# -- spectra -----------------------------------------------------------------------------

def spectrum(stack: Stack, wl_min: float, wl_max: float, n_points: int,
             illumination: Illumination = "left") -> list[tuple[float, Union[TwoPortResponse, CoherentResponse]]]:
    """Response at ``n_points`` evenly spaced wavelengths.

    ``illumination`` is ``"left"`` for the traveling response or a
    :class:`Coherent` (``theta=None`` re-optimises the phase at every
    wavelength).
    """
    if n_points < 1:
        raise DomainError("n_points must be >= 1")
    if wl_max < wl_min:
        raise DomainError("wl_max must not be below wl_min")
    if n_points == 1 or wl_min == wl_max:
        grid = [float(wl_min)]
    else:
        grid = [float(x) for x in np.linspace(wl_min, wl_max, n_points)]
    out = []
    for wl in grid:
        if illumination == "left":
            out.append((wl, traveling_response(stack, wl)))
        elif isinstance(illumination, Coherent):
            out.append((wl, coherent_response(stack, wl, illumination.theta)))
        else:
            raise DomainError(f"unsupported spectrum illumination {illumination!r}")
    return out
