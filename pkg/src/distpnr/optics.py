"""Transfer-matrix engine for stratified media at normal incidence.

Conventions: time dependence exp(-i w t); inside a layer the forward wave
picks up exp(+i phi) with phi = 2 pi n d / lambda.  Amplitudes (A, B) are the
forward/backward electric-field amplitudes, and the transfer matrix maps the
right-ambient amplitudes onto the left-ambient ones,
``(A_0, B_0) = M (A_sub, B_sub)``.

Scattering coefficients are reported power-normalised (field amplitude times
sqrt(n) of the ambient), so ``T = |t|**2`` and left/right transmissions agree
even when the two ambients differ.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import DomainError, GeometryError, SingularStackError
from .materials import VACUUM, Material, Medium

ROLES = ("detector", "spacer", "layer")


@dataclass(frozen=True)
class Layer:
    medium: Medium
    thickness: float
    role: str = "layer"
    label: str = ""

    def __post_init__(self):
        t = float(self.thickness)
        if not (t >= 0.0 and math.isfinite(t)):
            raise DomainError(f"layer {self.label or self.medium.name!r}: thickness {t} must be finite and >= 0")
        if self.role not in ROLES:
            raise DomainError(f"unknown layer role {self.role!r}")
        object.__setattr__(self, "thickness", t)


@dataclass(frozen=True)
class Open:
    """Transmissive termination into a semi-infinite ambient."""

    ambient: Material = VACUUM


@dataclass(frozen=True)
class Mirror:
    """Semi-infinite real-index reflector.

    The index is chosen so that the interface with a medium of index
    ``reference_index`` reflects ``reflectivity`` of the intensity with a pi
    phase shift.
    """

    reflectivity: float
    reference_index: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.reflectivity < 1.0:
            raise DomainError(f"mirror reflectivity {self.reflectivity} must lie in (0, 1)")
        if not self.reference_index >= 1.0 or not math.isfinite(self.reference_index):
            raise DomainError(f"mirror reference index {self.reference_index} must be >= 1")

    @property
    def index(self) -> float:
        s = math.sqrt(self.reflectivity)
        return self.reference_index * (1.0 + s) / (1.0 - s)

    @property
    def medium(self) -> Material:
        return Material.from_index("mirror", self.index, kind="mirror-medium")


Termination = Union[Open, Mirror]


@dataclass(frozen=True)
class Stack:
    layers: tuple[Layer, ...] = ()
    ambient: Material = VACUUM
    termination: Termination = Open()
    design_wavelength: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))

    @property
    def is_mirror(self) -> bool:
        return isinstance(self.termination, Mirror)

    @property
    def right_medium(self) -> Material:
        term = self.termination
        return term.medium if isinstance(term, Mirror) else term.ambient

    def with_layers(self, layers: Sequence[Layer]) -> "Stack":
        return Stack(tuple(layers), self.ambient, self.termination, self.design_wavelength)

    def detector_indices(self) -> list[int]:
        return [i for i, layer in enumerate(self.layers) if layer.role == "detector"]


@dataclass(frozen=True)
class TransferMatrix:
    matrix: np.ndarray
    wavelength: float


@dataclass(frozen=True)
class TwoPortResponse:
    t: complex
    r: complex
    r_right: complex
    t_right: complex
    T: float
    R: float
    A: float
    wavelength: float


@dataclass(frozen=True)
class CoherentResponse:
    theta: float
    a_left: complex
    a_right: complex
    b_left: complex
    b_right: complex
    absorption: float
    per_layer: tuple[float, ...]
    layer_indices: tuple[int, ...]
    wavelength: float


@dataclass(frozen=True)
class Coherent:
    """Two-sided illumination; ``theta=None`` selects the best phase."""

    theta: float | None = None


Illumination = Union[str, Coherent]


# -- core ------------------------------------------------------------------

def _ambient_index(material: Material, wavelength: float) -> float:
    n = material.refractive_index(wavelength)
    if n.imag != 0.0 or n.real <= 0.0:
        raise DomainError(f"ambient {material.name!r} must be lossless with real index > 0 (got {n})")
    return n.real


def _media(stack: Stack, wavelength: float):
    if not (wavelength > 0 and math.isfinite(wavelength)):
        raise DomainError(f"wavelength {wavelength} must be positive")
    ns = [_ambient_index(stack.ambient, wavelength)]
    ns += [layer.medium.refractive_index(wavelength) for layer in stack.layers]
    ns.append(_ambient_index(stack.right_medium, wavelength))
    ds = [layer.thickness for layer in stack.layers]
    return ns, ds


def _interface(a: complex, b: complex):
    inv_t = (a + b) / (2 * a)
    r = (a - b) / (a + b)
    return (inv_t, r * inv_t, r * inv_t, inv_t)


def _mul(m, n):
    return (
        m[0] * n[0] + m[1] * n[2],
        m[0] * n[1] + m[1] * n[3],
        m[2] * n[0] + m[3] * n[2],
        m[2] * n[1] + m[3] * n[3],
    )


def _apply(m, v):
    return (m[0] * v[0] + m[1] * v[1], m[2] * v[0] + m[3] * v[1])


def _propagation(n: complex, d: float, wavelength: float):
    phi = 2 * math.pi * n * d / wavelength
    return (cmath.exp(-1j * phi), 0j, 0j, cmath.exp(1j * phi))


def _segments(ns, ds, wavelength):
    """Per-medium matrices: segment j maps amplitudes at the left edge of medium j+1
    onto those at the left edge of medium j (ambient: at its interface)."""
    segs = []
    for j in range(len(ns) - 1):
        m = _interface(ns[j], ns[j + 1])
        if j > 0:
            m = _mul(_propagation(ns[j], ds[j - 1], wavelength), m)
        segs.append(m)
    return segs


def _total(segs):
    m = (1 + 0j, 0j, 0j, 1 + 0j)
    for s in segs:
        m = _mul(m, s)
    return m


def stack_transfer_matrix(stack: Stack, wavelength: float) -> TransferMatrix:
    ns, ds = _media(stack, wavelength)
    m = _total(_segments(ns, ds, wavelength))
    return TransferMatrix(np.array([[m[0], m[1]], [m[2], m[3]]]), float(wavelength))


def _scattering(m, n0: float, nr: float):
    if m[0] == 0 or not cmath.isfinite(m[0]):
        raise SingularStackError("M11 vanished; stack is singular")
    # det M is the product of the interface determinants n_{j+1}/n_j, i.e. nr/n0;
    # using it directly avoids cancellation in m11*m22 - m12*m21 for opaque stacks
    scale = math.sqrt(nr / n0)
    t = scale / m[0]
    t_right = (nr / n0) / m[0] / scale
    r = m[2] / m[0]
    r_right = -m[1] / m[0]
    return t, r, r_right, t_right


def traveling_response(stack: Stack, wavelength: float) -> TwoPortResponse:
    """Single-side illumination from the left.  For mirror stacks T is leakage."""
    ns, ds = _media(stack, wavelength)
    m = _total(_segments(ns, ds, wavelength))
    t, r, r_right, t_right = _scattering(m, ns[0], ns[-1])
    T = abs(t) ** 2
    R = abs(r) ** 2
    return TwoPortResponse(t, r, r_right, t_right, T, R, 1.0 - T - R, float(wavelength))


def _left_fields(ns, ds, wavelength):
    """Fields for unit power entering from the left, propagated back from the right face.

    Returns (fields, b_left, b_right): fields[j] is (E, H) at interface j (between
    media j and j+1), b_left and b_right the outgoing power-normalised amplitudes.
    """
    segs = _segments(ns, ds, wavelength)
    m = _total(segs)
    if m[0] == 0 or not cmath.isfinite(m[0]):
        raise SingularStackError("M11 vanished; stack is singular")
    As = 1 / math.sqrt(ns[0]) / m[0]
    fields = [(0j, 0j)] * len(segs)
    v = (As, 0j)
    for j in range(len(segs) - 1, -1, -1):
        fields[j] = (v[0] + v[1], ns[j + 1] * (v[0] - v[1]))
        v = _apply(segs[j], v)
    return fields, v[1] * math.sqrt(ns[0]), As * math.sqrt(ns[-1])


def _solve_fields(ns, ds, wavelength, a_left: complex, a_right: complex):
    """Internal fields for power-normalised inputs at the outer faces.

    Returns (fluxes, b_left, b_right) where fluxes[j] is the Poynting flux
    through interface j (between media j and j+1) in units of total input power.
    Each input is solved in the direction where its field decays into the
    stack, and the two solutions are superposed; back-propagating a wave that
    enters from the right would amplify rounding errors in opaque stacks.
    """
    n_int = len(ns) - 1
    e = [0j] * n_int
    h = [0j] * n_int
    b_left = b_right = 0j
    if a_left != 0:
        fields, bl, br = _left_fields(ns, ds, wavelength)
        for j, (ej, hj) in enumerate(fields):
            e[j] += a_left * ej
            h[j] += a_left * hj
        b_left += a_left * bl
        b_right += a_left * br
    if a_right != 0:
        fields, bl, br = _left_fields(ns[::-1], ds[::-1], wavelength)
        for j, (ej, hj) in enumerate(fields):
            # mirrored frame: interface order and the flux direction are reversed
            e[n_int - 1 - j] += a_right * ej
            h[n_int - 1 - j] -= a_right * hj
        b_right += a_right * bl
        b_left += a_right * br
    p_in = abs(a_left) ** 2 + abs(a_right) ** 2
    fluxes = [(ej * hj.conjugate()).real / p_in for ej, hj in zip(e, h)]
    return fluxes, b_left, b_right


def _illumination_inputs(stack: Stack, wavelength: float, illumination: Illumination):
    if illumination == "left":
        return 1.0 + 0j, 0j, None
    if stack.is_mirror:
        raise GeometryError("mirror-terminated stacks accept left illumination only")
    if illumination == "right":
        return 0j, 1.0 + 0j, None
    if isinstance(illumination, Coherent):
        theta = illumination.theta
        if theta is None:
            theta = best_phase(stack, wavelength)
        a = 1 / math.sqrt(2)
        return a + 0j, cmath.exp(1j * theta) * a, float(theta)
    raise DomainError(f"unknown illumination {illumination!r}")


@dataclass(frozen=True)
class PowerBalance:
    """Where the input power goes, as fractions of the total input."""

    per_layer: tuple[float, ...]
    outgoing_left: float
    outgoing_right: float
    leakage: float
    b_left: complex
    b_right: complex

    @property
    def total(self) -> float:
        return sum(self.per_layer) + self.outgoing_left + self.outgoing_right + self.leakage


def power_balance(stack: Stack, wavelength: float, illumination: Illumination = "left") -> PowerBalance:
    a_left, a_right, _ = _illumination_inputs(stack, wavelength, illumination)
    return _balance(stack, wavelength, a_left, a_right)


def _balance(stack, wavelength, a_left, a_right):
    ns, ds = _media(stack, wavelength)
    fluxes, b_left, b_right = _solve_fields(ns, ds, wavelength, a_left, a_right)
    per_layer = tuple(fluxes[i] - fluxes[i + 1] for i in range(len(stack.layers)))
    p_in = abs(a_left) ** 2 + abs(a_right) ** 2
    out_left = abs(b_left) ** 2 / p_in
    if stack.is_mirror:
        return PowerBalance(per_layer, out_left, 0.0, fluxes[-1], b_left, b_right)
    return PowerBalance(per_layer, out_left, abs(b_right) ** 2 / p_in, 0.0, b_left, b_right)


def per_layer_absorption(stack: Stack, wavelength: float, illumination: Illumination = "left") -> tuple[float, ...]:
    """Absorbed fraction of the input power in every layer, in stack order."""
    return power_balance(stack, wavelength, illumination).per_layer


def coherent_absorption_curve(stack: Stack, wavelength: float, thetas) -> np.ndarray:
    """A_coh over an array of input phases, from the scattering matrix."""
    resp = traveling_response(stack, wavelength)
    return _coherent_curve(resp, np.asarray(thetas, dtype=float))


def _coherent_curve(resp: TwoPortResponse, thetas: np.ndarray, phasors: np.ndarray | None = None) -> np.ndarray:
    t, r, rr, tr = resp.t, resp.r, resp.r_right, resp.t_right
    base = 0.5 * (abs(r) ** 2 + abs(tr) ** 2 + abs(t) ** 2 + abs(rr) ** 2)
    cross = r.conjugate() * tr + t.conjugate() * rr
    if phasors is None:
        phasors = np.exp(1j * thetas)
    return 1.0 - base - (phasors.real * cross.real - phasors.imag * cross.imag)


PHASE_GRID = 720
_GRID = np.arange(PHASE_GRID) * (2 * math.pi / PHASE_GRID)
_PHASORS = np.exp(1j * _GRID)


def best_phase(stack: Stack, wavelength: float) -> float:
    """Input phase maximising coherent absorption: 720-point scan plus parabolic refinement."""
    return best_coherent_absorption(stack, wavelength)[0]


def best_coherent_absorption(stack: Stack, wavelength: float) -> tuple[float, float]:
    """(theta, A_coh) at the best input phase, without reconstructing internal fields."""
    if stack.is_mirror:
        raise GeometryError("coherent illumination needs a transmissive stack")
    resp = traveling_response(stack, wavelength)
    step = 2 * math.pi / PHASE_GRID
    grid = _GRID
    curve = _coherent_curve(resp, grid, _PHASORS)
    i = int(np.argmax(curve))
    y0, y1, y2 = curve[i - 1], curve[i], curve[(i + 1) % PHASE_GRID]
    denom = y0 - 2 * y1 + y2
    offset = 0.5 * (y0 - y2) / denom if denom < 0 else 0.0
    theta = float((grid[i] + offset * step) % (2 * math.pi))
    cross = resp.r.conjugate() * resp.t_right + resp.t.conjugate() * resp.r_right
    base = 0.5 * (abs(resp.r) ** 2 + abs(resp.t_right) ** 2 + abs(resp.t) ** 2 + abs(resp.r_right) ** 2)
    return theta, 1.0 - base - (cmath.exp(1j * theta) * cross).real


def coherent_response(stack: Stack, wavelength: float, theta: float | None = None) -> CoherentResponse:
    """Equal-power inputs from both sides, right input phase-shifted by ``theta``."""
    if stack.is_mirror:
        raise GeometryError("coherent illumination needs a transmissive stack")
    a_left, a_right, theta = _illumination_inputs(stack, wavelength, Coherent(theta))
    bal = _balance(stack, wavelength, a_left, a_right)
    absorption = 1.0 - (abs(bal.b_left) ** 2 + abs(bal.b_right) ** 2)
    idx = tuple(i for i, layer in enumerate(stack.layers) if _lossy(layer, wavelength))
    return CoherentResponse(
        theta=theta,
        a_left=a_left,
        a_right=a_right,
        b_left=bal.b_left,
        b_right=bal.b_right,
        absorption=absorption,
        per_layer=tuple(bal.per_layer[i] for i in idx),
        layer_indices=idx,
        wavelength=float(wavelength),
    )


def _lossy(layer: Layer, wavelength: float) -> bool:
    return layer.medium.permittivity(wavelength).imag > 0.0
