"""Optical media: constant or tabulated permittivities and the meander effective medium.

Time convention is exp(-i w t), so absorbing media have Im(eps) > 0 and
Im(n) > 0.  Wavelengths are in nanometres throughout.
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from .errors import DispersionRangeError, DispersionTableError, DomainError

# n + ik of NbTiN at 1550 nm, squared
NBTIN_EPSILON = (4.21 + 3.87j) ** 2

KINDS = ("film", "dielectric", "mirror-medium")


@dataclass(frozen=True)
class Material:
    """A homogeneous medium.

    Either ``epsilon`` (constant) or ``table`` (rows of ``(wavelength_nm, n, k)``)
    is set.  Tabulated materials interpolate n and k linearly and refuse to
    extrapolate.
    """

    name: str
    epsilon: complex | None = None
    table: tuple[tuple[float, float, float], ...] | None = None
    kind: str = "dielectric"
    source: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if (self.epsilon is None) == (self.table is None):
            raise DomainError(f"material {self.name!r}: give exactly one of epsilon or table")
        if self.kind not in KINDS:
            raise DomainError(f"material {self.name!r}: unknown kind {self.kind!r}")
        if self.epsilon is not None:
            eps = complex(self.epsilon)
            if not (math.isfinite(eps.real) and math.isfinite(eps.imag)):
                raise DomainError(f"material {self.name!r}: permittivity must be finite")
            if eps.imag < 0:
                raise DomainError(f"material {self.name!r}: Im(eps) must be >= 0 (gain media unsupported)")
            object.__setattr__(self, "epsilon", eps)
        else:
            rows = tuple(tuple(float(v) for v in row) for row in self.table)
            _check_table(rows, self.name)
            object.__setattr__(self, "table", rows)

    @property
    def is_constant(self) -> bool:
        return self.table is None

    @property
    def wavelength_range(self) -> tuple[float, float]:
        if self.table is None:
            return (0.0, math.inf)
        return (self.table[0][0], self.table[-1][0])

    def refractive_index(self, wavelength: float) -> complex:
        if self.table is None:
            return _sqrt_passive(self.epsilon)
        lo, hi = self.wavelength_range
        if not lo <= wavelength <= hi:
            raise DispersionRangeError(
                f"material {self.name!r}: wavelength {wavelength} nm outside table range [{lo}, {hi}] nm"
            )
        wl, n, k = np.array(self.table).T
        return complex(np.interp(wavelength, wl, n), np.interp(wavelength, wl, k))

    def permittivity(self, wavelength: float) -> complex:
        if self.table is None:
            return self.epsilon
        return self.refractive_index(wavelength) ** 2

    @classmethod
    def constant(cls, name: str, epsilon: complex, kind: str = "dielectric") -> "Material":
        return cls(name=name, epsilon=complex(epsilon), kind=kind)

    @classmethod
    def from_index(cls, name: str, n: complex, kind: str = "dielectric") -> "Material":
        return cls(name=name, epsilon=complex(n) ** 2, kind=kind)


def _sqrt_passive(eps: complex) -> complex:
    n = cmath.sqrt(eps)
    # principal branch already gives Re(n) >= 0; Im(eps) >= 0 then gives Im(n) >= 0
    if n.imag < 0:
        n = -n
    return n


def _check_table(rows, name):
    if len(rows) < 2:
        raise DispersionTableError(f"dispersion table for {name!r} needs at least 2 rows")
    for i, row in enumerate(rows):
        if len(row) != 3:
            raise DispersionTableError(f"dispersion table for {name!r}: row {i} must have 3 values")
        wl, n, k = row
        if not all(math.isfinite(v) for v in row):
            raise DispersionTableError(f"dispersion table for {name!r}: row {i} not finite")
        if n < 0 or k < 0:
            raise DispersionTableError(f"dispersion table for {name!r}: row {i} has negative n or k")
        if i and wl <= rows[i - 1][0]:
            raise DispersionTableError(
                f"dispersion table for {name!r}: wavelengths must be strictly increasing (row {i})"
            )


def read_dispersion_csv(path: Union[str, Path], name: str | None = None, kind: str = "film") -> Material:
    """Load a ``wavelength_nm,n,k`` CSV.  Errors name the offending line."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise DispersionTableError(f"{path}: no such file") from exc
    reader = csv.reader(text.splitlines())
    try:
        header = next(reader)
    except StopIteration:
        raise DispersionTableError(f"{path}: empty file") from None
    if [h.strip() for h in header] != ["wavelength_nm", "n", "k"]:
        raise DispersionTableError(f"{path}:1: header must be 'wavelength_nm,n,k'")
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        if not rec or all(not c.strip() for c in rec):
            continue
        if len(rec) != 3:
            raise DispersionTableError(f"{path}:{lineno}: expected 3 columns, got {len(rec)}")
        try:
            wl, n, k = (float(c) for c in rec)
        except ValueError:
            raise DispersionTableError(f"{path}:{lineno}: non-numeric value") from None
        if not all(math.isfinite(v) for v in (wl, n, k)):
            raise DispersionTableError(f"{path}:{lineno}: non-finite value")
        if n < 0 or k < 0:
            raise DispersionTableError(f"{path}:{lineno}: n and k must be >= 0")
        if rows and wl <= rows[-1][0]:
            raise DispersionTableError(f"{path}:{lineno}: wavelength not strictly increasing")
        rows.append((wl, n, k))
    if len(rows) < 2:
        raise DispersionTableError(f"{path}: at least 2 data rows required")
    return Material(name=name or path.stem, table=tuple(rows), kind=kind, source=str(path))


VACUUM = Material.constant("vacuum", 1.0)
NBTIN = Material.constant("NbTiN", NBTIN_EPSILON, kind="film")


def effective_permittivity(film: complex, slit: complex, filling_factor: float) -> complex:
    """Parallel-polarisation mixing rule ``eps_film*f + eps_slit*(1-f)``."""
    f = float(filling_factor)
    if not 0.0 <= f <= 1.0:
        raise DomainError(f"filling factor {f} outside [0, 1]")
    return complex(film) * f + complex(slit) * (1.0 - f)


@dataclass(frozen=True)
class EffectiveMedium:
    """Meander nanowire layer homogenised for polarisation along the slits."""

    film: Material
    slit: Material = VACUUM
    filling_factor: float = 0.5

    def __post_init__(self):
        f = float(self.filling_factor)
        if not 0.0 < f <= 1.0:
            raise DomainError(f"filling factor {f} outside (0, 1]")
        object.__setattr__(self, "filling_factor", f)

    @property
    def name(self) -> str:
        return f"{self.film.name}[f={self.filling_factor:g}]"

    @property
    def is_constant(self) -> bool:
        return self.film.is_constant and self.slit.is_constant

    def permittivity(self, wavelength: float) -> complex:
        return effective_permittivity(
            self.film.permittivity(wavelength), self.slit.permittivity(wavelength), self.filling_factor
        )

    def refractive_index(self, wavelength: float) -> complex:
        return _sqrt_passive(self.permittivity(wavelength))


Medium = Union[Material, EffectiveMedium]


@dataclass(frozen=True)
class MeanderSpec:
    """A meander detector film of given filling factor and thickness (nm)."""

    film: Material = NBTIN
    slit: Material = VACUUM
    filling_factor: float = 0.5
    thickness: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.filling_factor <= 1.0:
            raise DomainError(f"filling factor {self.filling_factor} outside (0, 1]")
        if not self.thickness >= 0.0:
            raise DomainError(f"meander thickness {self.thickness} must be >= 0")

    @property
    def medium(self) -> EffectiveMedium:
        return EffectiveMedium(self.film, self.slit, self.filling_factor)
