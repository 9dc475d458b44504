"""JSON stack specifications: parsing, validation and serialisation."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import jsonschema

from .errors import DistPNRError, SpecFileNotFound, SpecInvariantError, SpecSchemaError
from .materials import NBTIN, VACUUM, EffectiveMedium, Material, read_dispersion_csv
from .optics import Layer, Mirror, Open, Stack

DATA_DIR = Path(__file__).parent / "data"

BUILTIN_MATERIALS = {"vacuum": VACUUM, "NbTiN": NBTIN}

_CONSTANT = {
    "type": "object",
    "additionalProperties": False,
    "required": ["epsilon_re", "epsilon_im"],
    "properties": {"epsilon_re": {"type": "number"}, "epsilon_im": {"type": "number"}},
}
_TABLE = {
    "type": "object",
    "additionalProperties": False,
    "required": ["dispersion_csv"],
    "properties": {"dispersion_csv": {"type": "string"}},
}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["layers"],
    "properties": {
        "ambient": {"type": "string"},
        "layers": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["kind", "material", "thickness_nm"],
                "properties": {
                    "kind": {"enum": ["detector", "spacer"]},
                    "material": {"type": "string"},
                    "thickness_nm": {"type": "number"},
                    "filling_factor": {"type": "number"},
                    "slit_material": {"type": "string"},
                },
            },
        },
        "termination": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["open", "mirror"]},
                "reflectivity": {"type": "number"},
                "ambient": {"type": "string"},
            },
        },
        "materials": {"type": "object", "additionalProperties": {"oneOf": [_CONSTANT, _TABLE]}},
        "design_wavelength_nm": {"type": "number"},
    },
}


def _path(parts) -> str:
    out = "$"
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def _finite(doc, where, value):
    if not math.isfinite(value):
        raise SpecInvariantError(f"{where}: value must be finite")
    return value


def bundled_specs() -> list[str]:
    return sorted(p.name for p in DATA_DIR.glob("*.json"))


def resolve_spec_path(name: str | Path) -> Path:
    """Existing file path, or the name of a bundled example (with or without ``.json``)."""
    path = Path(name)
    if path.exists():
        return path
    stem = path.name if path.suffix == ".json" else path.name + ".json"
    bundled = DATA_DIR / stem
    if bundled.is_file():
        return bundled
    raise SpecFileNotFound(f"{name}: no such stack file")


def parse_stack_spec(path: str | Path) -> Stack:
    path = resolve_spec_path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SpecSchemaError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return stack_from_dict(doc, base_dir=path.parent)


def stack_from_dict(doc: Any, base_dir: Path | None = None) -> Stack:
    validator = jsonschema.Draft7Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise SpecSchemaError(f"{_path(err.absolute_path)}: {err.message}")
    base_dir = Path(base_dir or ".")

    wl = doc.get("design_wavelength_nm")
    if wl is not None:
        _finite(doc, "$.design_wavelength_nm", wl)
        if wl <= 0:
            raise SpecInvariantError("$.design_wavelength_nm: must be > 0")
        wl = float(wl)

    defs = doc.get("materials", {})
    film_names = {
        layer["material"] for layer in doc["layers"] if layer["kind"] == "detector"
    }
    cache: dict[str, Material] = {}

    def material(ref: str, where: str) -> Material:
        if ref in cache:
            return cache[ref]
        kind = "film" if ref in film_names else "dielectric"
        if ref in defs:
            entry = defs[ref]
            mwhere = f"$.materials.{ref}"
            try:
                if "dispersion_csv" in entry:
                    csv_path = Path(entry["dispersion_csv"])
                    if not csv_path.is_absolute():
                        csv_path = base_dir / csv_path
                    mat = read_dispersion_csv(csv_path, name=ref, kind=kind)
                    mat = Material(ref, table=mat.table, kind=kind, source=entry["dispersion_csv"])
                else:
                    re_ = _finite(doc, f"{mwhere}.epsilon_re", entry["epsilon_re"])
                    im_ = _finite(doc, f"{mwhere}.epsilon_im", entry["epsilon_im"])
                    if im_ < 0:
                        raise SpecInvariantError(f"{mwhere}.epsilon_im: must be >= 0")
                    mat = Material(ref, epsilon=complex(re_, im_), kind=kind)
            except SpecInvariantError:
                raise
            except DistPNRError as exc:
                raise SpecInvariantError(f"{mwhere}: {exc}") from None
        elif ref in BUILTIN_MATERIALS:
            mat = BUILTIN_MATERIALS[ref]
        else:
            raise SpecInvariantError(f"{where}: unknown material {ref!r}")
        cache[ref] = mat
        return mat

    ambient = material(doc.get("ambient", "vacuum"), "$.ambient")
    layers = []
    n_det = n_sp = 0
    for i, entry in enumerate(doc["layers"]):
        where = f"$.layers[{i}]"
        d = _finite(doc, f"{where}.thickness_nm", entry["thickness_nm"])
        if d < 0:
            raise SpecInvariantError(f"{where}.thickness_nm: must be >= 0")
        mat = material(entry["material"], f"{where}.material")
        if entry["kind"] == "detector":
            if "filling_factor" not in entry:
                raise SpecInvariantError(f"{where}.filling_factor: required for detector layers")
            f = _finite(doc, f"{where}.filling_factor", entry["filling_factor"])
            if not 0 < f <= 1:
                raise SpecInvariantError(f"{where}.filling_factor: {f} outside (0, 1]")
            slit = material(entry.get("slit_material", "vacuum"), f"{where}.slit_material")
            n_det += 1
            layers.append(Layer(EffectiveMedium(mat, slit, float(f)), float(d), "detector", f"Det{n_det}"))
        else:
            for key in ("filling_factor", "slit_material"):
                if key in entry:
                    raise SpecInvariantError(f"{where}.{key}: only allowed on detector layers")
            n_sp += 1
            layers.append(Layer(mat, float(d), "spacer", f"Sp{n_sp}"))

    term = doc.get("termination", {"kind": "open"})
    if term["kind"] == "open":
        if "reflectivity" in term:
            raise SpecInvariantError("$.termination.reflectivity: only allowed for mirror termination")
        termination = Open(material(term.get("ambient", "vacuum"), "$.termination.ambient"))
    else:
        if "ambient" in term:
            raise SpecInvariantError("$.termination.ambient: not allowed for mirror termination")
        if "reflectivity" not in term:
            raise SpecInvariantError("$.termination.reflectivity: required for mirror termination")
        rm = _finite(doc, "$.termination.reflectivity", term["reflectivity"])
        if not 0 < rm < 1:
            raise SpecInvariantError(f"$.termination.reflectivity: {rm} outside (0, 1)")
        adjacent = layers[-1].medium if layers else ambient
        if not adjacent.is_constant:
            raise SpecInvariantError("$.termination: medium next to the mirror must have a constant index")
        n_adj = adjacent.refractive_index(wl or 1550.0)
        if n_adj.imag != 0 or n_adj.real < 1:
            raise SpecInvariantError("$.termination: medium next to the mirror must be lossless with n >= 1")
        termination = Mirror(float(rm), n_adj.real)

    return Stack(tuple(layers), ambient, termination, wl)


def stack_to_dict(stack: Stack) -> dict:
    """Inverse of :func:`stack_from_dict` for stacks built from named materials."""
    materials: dict[str, dict] = {}

    def ref(mat: Material) -> str:
        entry = (
            {"dispersion_csv": mat.source} if mat.table is not None
            else {"epsilon_re": mat.epsilon.real, "epsilon_im": mat.epsilon.imag}
        )
        if mat.table is not None and mat.source is None:
            raise SpecInvariantError(f"material {mat.name!r}: tabulated material has no source file")
        if materials.get(mat.name, entry) != entry:
            raise SpecInvariantError(f"two different materials share the name {mat.name!r}")
        materials[mat.name] = entry
        return mat.name

    doc: dict[str, Any] = {"ambient": ref(stack.ambient), "layers": []}
    for layer in stack.layers:
        if layer.role == "detector":
            med = layer.medium
            doc["layers"].append({
                "kind": "detector",
                "material": ref(med.film),
                "thickness_nm": layer.thickness,
                "filling_factor": med.filling_factor,
                "slit_material": ref(med.slit),
            })
        else:
            doc["layers"].append({"kind": "spacer", "material": ref(layer.medium), "thickness_nm": layer.thickness})
    if isinstance(stack.termination, Mirror):
        doc["termination"] = {"kind": "mirror", "reflectivity": stack.termination.reflectivity}
    else:
        doc["termination"] = {"kind": "open", "ambient": ref(stack.termination.ambient)}
    doc["materials"] = materials
    if stack.design_wavelength is not None:
        doc["design_wavelength_nm"] = stack.design_wavelength
    return doc


def write_stack_spec(stack: Stack, path: str | Path) -> None:
    Path(path).write_text(json.dumps(stack_to_dict(stack), indent=2) + "\n", encoding="utf-8")
