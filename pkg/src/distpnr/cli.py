"""Command-line front end.  Emits plot-ready CSV and JSON, never plots.

Exit status: 0 success, 1 computation error (one ``error: <reason>: ...``
line on stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from . import design, photostats, tolerance
from .errors import DistPNRError
from .materials import NBTIN, VACUUM, Material, MeanderSpec
from .optics import Coherent, power_balance
from .stackfile import parse_stack_spec

SWEEP_COLUMNS = ["thickness_nm", "layer", "t_re", "t_im", "r_re", "r_im", "T", "R", "A"]
SPECTRUM_TRAVELING_COLUMNS = ["wavelength_nm", "t_re", "t_im", "r_re", "r_im", "T", "R", "A",
                              "layers_absorbed", "leakage"]
SPECTRUM_COHERENT_COLUMNS = ["wavelength_nm", "theta", "A_coh", "b_left_re", "b_left_im",
                             "b_right_re", "b_right_im", "layers_absorbed"]
UNIFORMITY_COLUMNS = ["layer", "absorption"]
PNR_COLUMNS = ["k", "probability"]
PNR_CURVE_COLUMNS = ["N", "probability"]
MONTECARLO_COLUMNS = ["sample", "A_coh", "delta_norm", "theta", "t_re", "t_im", "r_re", "r_im",
                      "r_right_re", "r_right_im", "per_layer", "error"]


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


class Output:
    """CSV to ``<out>/<name>.csv`` (stdout when no --out) and JSON summary beside it."""

    def __init__(self, out: str | None, name: str):
        self.dir = Path(out) if out else None
        self.name = name

    def table(self, columns, rows):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if columns:
            w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
        if self.dir is None:
            sys.stdout.write(buf.getvalue())
        else:
            self.dir.mkdir(parents=True, exist_ok=True)
            (self.dir / f"{self.name}.csv").write_text(buf.getvalue(), encoding="utf-8")

    def summary(self, data: dict):
        if self.dir is None:
            return
        self.dir.mkdir(parents=True, exist_ok=True)
        text = json.dumps(data, indent=2, sort_keys=True) + "\n"
        (self.dir / f"{self.name}_summary.json").write_text(text, encoding="utf-8")


def _wavelength(args, stack) -> float:
    wl = args.wavelength or stack.design_wavelength
    if wl is None:
        raise DistPNRError("no --lambda given and stack has no design_wavelength_nm")
    return wl


def cmd_sweep(args):
    stack = parse_stack_spec(args.stack)
    wl = _wavelength(args, stack)
    traj = design.deposition_sweep(stack, wl, args.step, args.spacer_step)
    rows = [(s.thickness, s.label, s.t.real, s.t.imag, s.r.real, s.r.imag, s.T, s.R, s.A) for s in traj.samples]
    out = Output(args.out, "sweep")
    out.table(SWEEP_COLUMNS, rows)
    best = max(traj.samples, key=lambda s: s.A)
    out.summary({"wavelength_nm": wl, "max_A": best.A, "thickness_at_max_A_nm": best.thickness,
                 "n_samples": len(traj.samples)})


def cmd_spectrum(args):
    stack = parse_stack_spec(args.stack)
    out = Output(args.out, "spectrum")
    worst = 0.0
    if args.mode == "traveling":
        rows = []
        for wl, resp in design.spectrum(stack, args.wl_from, args.wl_to, args.points, "left"):
            bal = power_balance(stack, wl, "left")
            worst = max(worst, abs(1.0 - bal.total))
            rows.append((wl, resp.t.real, resp.t.imag, resp.r.real, resp.r.imag, resp.T, resp.R, resp.A,
                         math.fsum(bal.per_layer), bal.leakage))
        out.table(SPECTRUM_TRAVELING_COLUMNS, rows)
    else:
        rows = []
        for wl, resp in design.spectrum(stack, args.wl_from, args.wl_to, args.points, Coherent(args.theta)):
            bal = power_balance(stack, wl, Coherent(resp.theta))
            worst = max(worst, abs(1.0 - bal.total))
            rows.append((wl, resp.theta, resp.absorption, resp.b_left.real, resp.b_left.imag,
                         resp.b_right.real, resp.b_right.imag, math.fsum(bal.per_layer)))
        out.table(SPECTRUM_COHERENT_COLUMNS, rows)
    out.summary({"mode": args.mode, "points": len(rows), "max_energy_balance_error": worst})


def cmd_design(args):
    film = NBTIN
    slit = Material.constant("slit", args.slit_eps) if args.slit_eps != 1.0 else VACUUM
    geometry = (design.Salisbury(args.spacer_n, args.mirror_r) if args.geometry == "salisbury"
                else design.CounterPropagating())
    out = Output(args.out, "design")
    if args.fill is not None:
        meander = MeanderSpec(film, slit, args.fill)
        d_opt = design.optimal_thickness(meander, args.wavelength, geometry)
        m = MeanderSpec(film, slit, args.fill, d_opt)
        rows = [("D_opt_nm", round(d_opt, 2))]
        if isinstance(geometry, design.Salisbury):
            stack = design.build_salisbury(m, geometry.spacer_n, geometry.mirror_reflectivity, args.wavelength)
            rows.append(("A", design.traveling_response(stack, args.wavelength).A))
        else:
            stack = design.build_distributed(m, 1, design_wavelength=args.wavelength)
            rows.append(("A_coh", design.best_coherent(stack, args.wavelength).absorption))
            rows.append(("A_tr", design.traveling_response(stack, args.wavelength).A))
            eps = meander.medium.permittivity(args.wavelength)
            rows.append(("thin_film_D_opt_nm", design.thin_film_optimal_thickness(eps, args.wavelength)))
    elif args.sublayer_nm is not None and args.layers is not None:
        f = design.solve_filling_factor(args.sublayer_nm, args.layers, args.wavelength, geometry, film, slit)
        sub = MeanderSpec(film, slit, f, args.sublayer_nm)
        single = design.build_distributed(sub, 1, design_wavelength=args.wavelength)
        rows = [("filling_factor", round(f, 4)),
                ("sublayer_A_tr", design.traveling_response(single, args.wavelength).A),
                ("target_A", float(design.target_coefficients(args.layers).A))]
    else:
        raise SystemExit(_usage_error("design needs --fill, or --sublayer-nm with --layers"))
    out.table(None, rows)
    out.summary(dict(rows))


def cmd_uniformity(args):
    stack = parse_stack_spec(args.stack)
    wl = _wavelength(args, stack)
    resp, rep = design.stack_uniformity(stack, wl)
    labels = [stack.layers[i].label for i in stack.detector_indices()]
    out = Output(args.out, "uniformity")
    out.table(UNIFORMITY_COLUMNS, list(zip(labels, rep.per_layer)))
    out.summary({"A_coh": resp.absorption, "theta": resp.theta, "delta": rep.delta,
                 "delta_max": rep.delta_max, "delta_norm": rep.delta_norm, "wavelength_nm": wl})
    if args.out:
        return
    sys.stdout.write(f"# A_coh={_fmt(resp.absorption)} delta={_fmt(rep.delta)} "
                     f"delta_norm={_fmt(rep.delta_norm)}\n")


def _source(text: str) -> photostats.PhotonSource:
    kind, _, value = text.partition(":")
    try:
        if kind == "fock":
            return photostats.fock(int(value))
        if kind == "sq":
            return photostats.squeezed_vacuum_pn(float(value))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"bad source {text!r}; use fock:<m> or sq:<xi>")


def cmd_pnr(args):
    array = photostats.DetectorArraySpec(args.n, args.eta, args.mode)
    dist = photostats.source_click_distribution(args.source, array)
    out = Output(args.out, "pnr")
    out.table(PNR_COLUMNS, list(enumerate(dist.probabilities)))
    out.summary({"source": args.source.kind, **args.source.params, "N": args.n, "eta": args.eta,
                 "mode": args.mode, "total": math.fsum(dist.probabilities)})


def cmd_pnr_curve(args):
    rows = photostats.resolution_curve(args.m, args.eta, range(max(1, args.m), args.n_max + 1))
    out = Output(args.out, "pnr_curve")
    out.table(PNR_CURVE_COLUMNS, rows)
    out.summary({"m": args.m, "eta": args.eta, "n_max": args.n_max})


def cmd_montecarlo(args):
    stack = parse_stack_spec(args.stack)
    wl = _wavelength(args, stack)
    spec = tolerance.PerturbationSpec(args.bound, "detectors-only" if args.detectors_only else "detectors-and-spacers")
    rep = tolerance.run_ensemble(stack, spec, args.samples, args.seed, wl, args.workers)
    rows = [
        (r.index, r.absorption, r.delta_norm, r.theta, r.t.real, r.t.imag, r.r.real, r.r.imag,
         r.r_right.real, r.r_right.imag, ";".join(_fmt(a) for a in r.per_layer), r.error or "")
        for r in rep.records
    ]
    out = Output(args.out, "montecarlo")
    out.table(MONTECARLO_COLUMNS, rows)
    out.summary({"seed": args.seed, "bound": args.bound, "wavelength_nm": wl, **rep.summary})
    if not args.out:
        sys.stdout.write("# " + json.dumps(rep.summary, sort_keys=True) + "\n")


def _usage_error(msg):
    sys.stderr.write(f"usage error: {msg}\n")
    return 2


EPILOG = """\
CSV columns (stable order):
  sweep        {sweep}
  spectrum     traveling: {spt}
               coherent:  {spc}
  design       key,value rows (D_opt_nm, A|A_coh, A_tr, thin_film_D_opt_nm | filling_factor, ...)
  uniformity   {uni}
  pnr          {pnr}
  pnr-curve    {pnrc}
  montecarlo   {mc}
With --out DIR the CSV goes to DIR/<command>.csv and a JSON summary to
DIR/<command>_summary.json; otherwise the CSV is printed.
""".format(
    sweep=",".join(SWEEP_COLUMNS), spt=",".join(SPECTRUM_TRAVELING_COLUMNS),
    spc=",".join(SPECTRUM_COHERENT_COLUMNS), uni=",".join(UNIFORMITY_COLUMNS),
    pnr=",".join(PNR_COLUMNS), pnrc=",".join(PNR_CURVE_COLUMNS), mc=",".join(MONTECARLO_COLUMNS),
)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="distpnr", description=__doc__.splitlines()[0],
                                epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_, epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
        sp.add_argument("--out", help="output directory")
        sp.set_defaults(func=func)
        return sp

    sp = add("sweep", cmd_sweep, "deposition trajectory")
    sp.add_argument("--stack", required=True)
    sp.add_argument("--lambda", dest="wavelength", type=float)
    sp.add_argument("--step", type=float, default=0.1)
    sp.add_argument("--spacer-step", type=float, default=1.0)

    sp = add("spectrum", cmd_spectrum, "response versus wavelength")
    sp.add_argument("--stack", required=True)
    sp.add_argument("--from", dest="wl_from", type=float, required=True)
    sp.add_argument("--to", dest="wl_to", type=float, required=True)
    sp.add_argument("--points", type=int, default=500)
    sp.add_argument("--mode", choices=["traveling", "coherent"], default="traveling")
    sp.add_argument("--theta", type=float, help="fixed coherent input phase (default: best phase per wavelength)")

    sp = add("design", cmd_design, "optimal thickness or filling factor")
    sp.add_argument("--geometry", choices=["cp", "salisbury"], default="cp")
    sp.add_argument("--fill", type=float)
    sp.add_argument("--sublayer-nm", type=float)
    sp.add_argument("--layers", type=int)
    sp.add_argument("--lambda", dest="wavelength", type=float, default=1550.0)
    sp.add_argument("--slit-eps", type=float, default=1.0)
    sp.add_argument("--spacer-n", type=float, default=1.5)
    sp.add_argument("--mirror-r", type=float, default=0.999)

    sp = add("uniformity", cmd_uniformity, "per-layer coherent absorption and non-uniformity")
    sp.add_argument("--stack", required=True)
    sp.add_argument("--lambda", dest="wavelength", type=float)

    sp = add("pnr", cmd_pnr, "click distribution for a photon source")
    sp.add_argument("--source", type=_source, required=True, help="fock:<m> or sq:<xi>")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--eta", type=float, default=1.0)
    sp.add_argument("--mode", choices=photostats.MODES, default="incoherent-multiplexed")

    sp = add("pnr-curve", cmd_pnr_curve, "P(m|m) versus number of detectors")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--eta", type=float, default=1.0)
    sp.add_argument("--n-max", type=int, default=100)

    sp = add("montecarlo", cmd_montecarlo, "thickness-tolerance ensemble")
    sp.add_argument("--stack", required=True)
    sp.add_argument("--samples", type=int, default=1000)
    sp.add_argument("--bound", type=float, default=0.05)
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--lambda", dest="wavelength", type=float)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--detectors-only", action="store_true")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except DistPNRError as exc:
        msg = " ".join(str(exc).split())
        sys.stderr.write(f"error: {exc.reason}: {msg}\n")
        return 1
    except OSError as exc:
        sys.stderr.write(f"error: io: {' '.join(str(exc).split())}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
