"""Command-line front end.

Subcommands: ``bound`` (all bounds at one eps), ``curve`` (an eps sweep as
CSV or JSON), ``verify`` (bounds against the brute-force oracle) and
``gibbs`` (inverse temperature and max entropy over an energy grid).

Exit codes: 0 success, 1 an unsound bound was found, 2 malformed input,
3 a precondition failed (support violation, energy out of range, size
limits).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import Optional

import jsonschema
import numpy as np

from . import classical, quantum
from .classical import ProbArray
from .errors import InvalidStateError, LocalBoundsError, PreconditionError, RangeError
from .gibbs import EnergySpectrum, F_lambda, solve_beta
from .oracle import BallSpec, functional_for, minimize_functional_ball
from .quantum import DensityOperator, QCEnsemble
from .reports import BoundReport

EXIT_OK, EXIT_UNSOUND, EXIT_SCHEMA, EXIT_PRECONDITION = 0, 1, 2, 3

CSV_COLUMNS = ("epsilon", "bound_id", "target", "value", "raw_value", "clamped", "faithful", "terms")
VERIFY_COLUMNS = ("bound_id", "target", "epsilon", "value", "oracle_min", "slack", "sound", "method")
GIBBS_COLUMNS = ("E", "beta", "F", "tail_error", "error")

MAX_CLASSICAL_CELLS = 64
MAX_QUANTUM_DIM = 8

FUNCTIONALS = {
    "prob1": ("entropy", "energy", "kl"),
    "prob2": ("equivocation", "mi"),
    "density": ("entropy", "energy", "relative-entropy"),
    "qc": ("qce",),
}
KNOWN_IDS = {
    "B-lb-3+c", "B-lb-3++c", "B-lb-1c", "B-lb-2+c", "H-LB+c", "CE-LB-c-1", "CE-LB-c-2",
    "CE-LB++c", "CE-LB+c", "KLD-LB+", "KLD-LB+d", "I-LB-c-1", "I-LB-c-2", "I-LB++", "I-LB+",
    "B-lb-3+", "B-lb-3++", "B-lb-1", "B-lb-2+", "H-LB+", "RE-LB+D", "RE-LB+A", "RE-LB+C",
    "RE-LB+B", "CE-LB-3+", "CE-LB-3++", "CE-LB-1", "CE-LB-2",
}


class SchemaError(Exception):
    """Malformed input; the message starts with a JSON path."""


# ------------------------------------------------------------------ schemas

_NUM = {"type": "number"}
_VEC = {"type": "array", "items": _NUM, "minItems": 1}
_MAT = {"type": "array", "items": _VEC, "minItems": 1}
_DENSITY = {
    "type": "object",
    "oneOf": [
        {"required": ["re"], "properties": {"re": _MAT, "im": _MAT}},
        {"required": ["spectrum"], "properties": {"spectrum": _VEC}},
    ],
}
_SPECTRUM = {
    "type": "object",
    "oneOf": [
        {"required": ["levels"], "properties": {"levels": _VEC}},
        {"required": ["family", "cap"],
         "properties": {"family": {"const": "oscillator"}, "cap": {"type": "integer", "minimum": 2}}},
    ],
}
SCHEMAS = {
    "prob1": {"type": "object", "required": ["probs"],
              "properties": {"probs": _VEC, "tail_mass": {"type": "number", "minimum": 0}}},
    "prob2": {"type": "object", "required": ["matrix"], "properties": {"matrix": _MAT}},
    "density": _DENSITY,
    "qc": {"type": "object", "required": ["weights", "states"],
           "properties": {"weights": _VEC, "states": {"type": "array", "items": _DENSITY, "minItems": 1}}},
    "spectrum": _SPECTRUM,
}


def _path(err: jsonschema.ValidationError) -> str:
    out = "$"
    for part in err.absolute_path:
        out += f"[{part}]" if isinstance(part, int) else f".{part}"
    return out


def _validate(doc, kind: str, where: str = "$"):
    try:
        jsonschema.validate(doc, SCHEMAS[kind])
    except jsonschema.ValidationError as err:
        raise SchemaError(f"{where}{_path(err)[1:]}: {err.message}") from None


def _density(doc, where: str = "$") -> DensityOperator:
    _validate(doc, "density", where)
    try:
        if "spectrum" in doc:
            return DensityOperator.from_spectrum(doc["spectrum"])
        re = np.asarray(doc["re"], dtype=float)
        im = np.asarray(doc.get("im", np.zeros_like(re)), dtype=float)
        if re.shape != im.shape:
            raise SchemaError(f"{where}.im: shape {im.shape} differs from re {re.shape}")
        return DensityOperator(re + 1j * im)
    except (InvalidStateError, ValueError) as exc:
        raise SchemaError(f"{where}: {exc}") from None


def parse_input(doc) -> object:
    """Turn an input document into a ProbArray, DensityOperator or QCEnsemble."""
    if not isinstance(doc, dict) or "kind" not in doc:
        raise SchemaError("$.kind: missing input kind")
    kind = doc["kind"]
    if kind == "qc_ensemble":
        kind = "qc"
    if kind not in ("prob1", "prob2", "density", "qc"):
        raise SchemaError(f"$.kind: unknown kind {kind!r}")
    if kind == "density":
        return _density(doc)
    _validate(doc, kind)
    try:
        if kind == "prob1":
            # tail_mass: probability cut off from an infinite distribution
            return ProbArray(np.asarray(doc["probs"], dtype=float), float(doc.get("tail_mass", 0.0)))
        if kind == "prob2":
            rows = doc["matrix"]
            if len({len(r) for r in rows}) != 1:
                raise SchemaError("$.matrix: rows have different lengths")
            return ProbArray(np.asarray(rows, dtype=float))
        states = [_density(s, f"$.states[{i}]") for i, s in enumerate(doc["states"])]
        return QCEnsemble(doc["weights"], states)
    except (InvalidStateError, PreconditionError) as exc:
        raise SchemaError(f"$: {exc}") from None


def parse_spectrum(doc) -> EnergySpectrum:
    _validate(doc, "spectrum")
    try:
        if "levels" in doc:
            return EnergySpectrum.from_levels(doc["levels"])
        return EnergySpectrum.oscillator(doc["cap"])
    except PreconditionError as exc:
        raise SchemaError(f"$.levels: {exc}") from None


def input_kind(obj) -> str:
    if isinstance(obj, QCEnsemble):
        return "qc"
    if isinstance(obj, DensityOperator):
        return "density"
    return "prob1" if obj.ndim == 1 else "prob2"


def _load_json(text_or_path: str, what: str):
    """Read JSON from a path, ``-`` (stdin) or an inline JSON string."""
    if text_or_path == "-":
        text = sys.stdin.read()
    elif os.path.exists(text_or_path):
        with open(text_or_path, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = text_or_path
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"$ ({what}): invalid JSON: {exc.msg} at line {exc.lineno}") from None


# -------------------------------------------------------------- formatting

def fmt(x) -> str:
    """17 significant digits; non-finite values as ``inf``/``-inf``/``nan``."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x + 0.0, ".17g")  # + 0.0 turns -0.0 into 0


def _to_json(obj) -> str:
    # floats written with 17 significant digits; non-finite values become strings
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_to_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_to_json(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        s = fmt(obj)
        return s if math.isfinite(obj) else json.dumps(s)
    return json.dumps(str(obj))


def report_row(r: BoundReport, clamp: bool) -> list:
    terms = ";".join(f"{k}={fmt(v)}" for k, v in r.terms.items())
    return [fmt(r.epsilon), r.bound_id, r.target, fmt(r.value if clamp else r.raw_value),
            fmt(r.raw_value), fmt(r.clamped), fmt(r.faithful), terms]


def _write_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def render_reports(reports, fmt_name: str, clamp: bool) -> str:
    if fmt_name == "csv":
        return _write_csv(CSV_COLUMNS, [report_row(r, clamp) for r in reports])
    return _to_json({"reports": [r.to_dict(clamp) for r in reports]}) + "\n"


# ----------------------------------------------------------- bound dispatch

class Options:
    """Bound options gathered from the command line."""

    def __init__(self, d=None, spectrum: Optional[EnergySpectrum] = None, energy=None,
                 reference=None, axis: int = 1, variant: str = "statement"):
        self.d = d
        self.spectrum = spectrum
        self.energy = energy
        self.reference = reference
        self.axis = axis
        self.variant = variant


def _mean_energy(spectrum: EnergySpectrum, weights) -> float:
    w = np.asarray(weights, dtype=float).ravel()
    return float(np.dot(spectrum.head(w.size), w))


def _energy_value(center, functional: str, opts: Options) -> Optional[float]:
    """The energy bound ``E``: the user's value, else the center's own mean energy."""
    if opts.spectrum is None:
        return None
    if opts.energy is not None:
        return float(opts.energy)
    sp = opts.spectrum
    if isinstance(center, QCEnsemble):
        return _mean_energy(sp, center.average_state().diagonal_in())
    if isinstance(center, DensityOperator):
        if functional == "entropy":
            return _mean_energy(sp, center.eigvals)
        return _mean_energy(sp, center.diagonal_in())
    if center.ndim == 2:
        return _mean_energy(sp, center.marginal(opts.axis).entries)
    if functional == "entropy":
        return _mean_energy(sp, np.sort(center.entries)[::-1])
    return _mean_energy(sp, center.entries)


def compute_bounds(center, functional: str, eps: float, opts: Options) -> list[BoundReport]:
    kind = input_kind(center)
    if functional not in FUNCTIONALS[kind]:
        raise SchemaError(f"$.kind: functional {functional!r} does not apply to {kind} input "
                          f"(choose from {', '.join(FUNCTIONALS[kind])})")
    sp = opts.spectrum
    e_val = _energy_value(center, functional, opts)
    if kind == "prob1":
        if functional == "entropy":
            return classical.entropy_lower_bounds(center, eps, spectrum=sp, energy=e_val)
        if functional == "energy":
            if sp is None:
                raise SchemaError("--energy-spectrum: the energy functional needs a spectrum")
            return [classical.affine_functional_lower_bound(center, sp, eps)]
        q = _reference(opts, ProbArray, "prob1")
        return classical.kl_lower_bounds(center, q, eps, d=opts.d)
    if kind == "prob2":
        if functional == "equivocation":
            return classical.equivocation_lower_bounds(
                center, eps, energy=None if sp is None else (sp, e_val))
        return classical.mi_lower_bounds(
            center, eps, energy=None if sp is None else (sp, e_val, opts.axis))
    if kind == "density":
        if functional == "entropy":
            return quantum.entropy_lower_bounds(center, eps, spectrum=sp, energy=e_val)
        if functional == "energy":
            if sp is None:
                raise SchemaError("--energy-spectrum: the energy functional needs a spectrum")
            return [quantum.energy_lower_bound(center, sp, eps)]
        omega = _reference(opts, DensityOperator, "density")
        return quantum.relative_entropy_lower_bounds(
            center, omega, eps, d=opts.d, energy=None if sp is None else (sp, e_val),
            variant=opts.variant)
    return quantum.qce_lower_bounds(center, eps, energy=None if sp is None else (sp, e_val))


def _reference(opts: Options, cls, kind: str):
    if opts.reference is None:
        raise SchemaError(f"--reference: this functional needs a {kind} reference document")
    if not isinstance(opts.reference, cls):
        raise SchemaError(f"--reference: expected a {kind} document")
    return opts.reference


def _filter(reports, bound: str):
    if bound == "all":
        return list(reports)
    if bound not in KNOWN_IDS:
        raise SchemaError(f"--bound: unknown bound id {bound!r}")
    return [r for r in reports if r.bound_id == bound]


# ------------------------------------------------------------ verification

_ORACLE_NAME = {"relative-entropy": "relative_entropy"}


def _ball_for(report: BoundReport, center, opts: Options, e_val) -> BallSpec:
    t = report.target
    if t == "L^qc" or (t == "L" and isinstance(center, QCEnsemble)):
        return BallSpec(center, report.epsilon, "ensemble")
    if t == "L":
        return BallSpec(center, report.epsilon)
    if t == "L^d":
        return BallSpec(center, report.epsilon, "rank", d=opts.d)
    if t == "L^com":
        return BallSpec(center, report.epsilon, "commuting")
    return BallSpec(center, report.epsilon, "energy", spectrum=opts.spectrum, E=e_val)


def verify_rows(center, functional: str, reports, opts: Options, budget: int, seed: int):
    kind = input_kind(center)
    name = _ORACLE_NAME.get(functional, functional)
    ref = {}
    if name == "kl":
        ref["q"] = opts.reference
    if name == "relative_entropy":
        ref["omega"] = opts.reference
    if name == "energy":
        ref["spectrum"] = opts.spectrum
    f = functional_for(name, "classical" if kind in ("prob1", "prob2")
                       else ("ensemble" if kind == "qc" else "quantum"), **ref)
    e_val = _energy_value(center, functional, opts)
    rows, cache = [], {}
    for r in reports:
        key = (r.target, r.epsilon)
        if key not in cache:
            spec = _ball_for(r, center, opts, e_val)
            cache[key] = minimize_functional_ball(spec, f, budget=budget, seed=seed)
        res = cache[key]
        rows.append({"bound_id": r.bound_id, "target": r.target, "epsilon": r.epsilon,
                     "value": r.value, "oracle_min": res.min_value,
                     "slack": res.min_value - r.value, "sound": r.value <= res.min_value + 1e-9,
                     "method": res.method})
    return rows


def _check_desk_scale(center):
    if isinstance(center, ProbArray):
        if center.entries.size > MAX_CLASSICAL_CELLS:
            raise PreconditionError(f"verify handles at most {MAX_CLASSICAL_CELLS} cells")
    else:
        dim = center.dim
        if dim > MAX_QUANTUM_DIM:
            raise PreconditionError(f"verify handles dimension at most {MAX_QUANTUM_DIM}")


# ------------------------------------------------------------------ parsing

def _eps_value(text: str) -> float:
    try:
        eps = float(text)
    except ValueError:
        raise SchemaError(f"--epsilon: not a number: {text!r}") from None
    if not 0 < eps <= 1:
        raise SchemaError(f"--epsilon: {text} is outside (0, 1]")
    return eps


def _eps_grid(text: str) -> list[float]:
    parts = [t for t in text.replace(" ", ",").split(",") if t]
    if not parts:
        raise SchemaError("--eps-grid: empty grid")
    return sorted({_eps_value(t) for t in parts})


def _number_list(text: str, flag: str) -> list[float]:
    parts = [t for t in text.replace(" ", ",").split(",") if t]
    if not parts:
        raise SchemaError(f"{flag}: empty list")
    try:
        return [float(t) for t in parts]
    except ValueError:
        raise SchemaError(f"{flag}: not a list of numbers: {text!r}") from None


def _options(args) -> Options:
    spectrum = None
    if getattr(args, "energy_spectrum", None):
        spectrum = parse_spectrum(_load_json(args.energy_spectrum, "energy spectrum"))
    elif getattr(args, "energy_cap", None):
        spectrum = EnergySpectrum.oscillator(args.energy_cap)
    reference = None
    if getattr(args, "reference", None):
        reference = parse_input(_load_json(args.reference, "reference"))
    return Options(d=args.d, spectrum=spectrum, energy=args.energy, reference=reference,
                   axis=args.axis, variant=args.variant)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="localbounds",
                                description="Local lower bounds on entropic functionals in eps-balls.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, grid: bool):
        sp.add_argument("input", help="input JSON document (path, '-' for stdin, or inline JSON)")
        sp.add_argument("--functional", "-f", required=True,
                        choices=sorted({f for fs in FUNCTIONALS.values() for f in fs}))
        if grid:
            sp.add_argument("--eps-grid", required=True, help="comma-separated eps values in (0, 1]")
        else:
            sp.add_argument("--epsilon", "--eps", required=True)
        sp.add_argument("--bound", default="all", help="bound id or 'all'")
        sp.add_argument("--d", type=int, default=None, help="rank/support bound for restricted balls")
        sp.add_argument("--energy-spectrum", default=None,
                        help='spectrum JSON: {"levels": [...]} or {"family": "oscillator", "cap": n}')
        sp.add_argument("--energy-cap", type=int, default=None,
                        help="use the oscillator spectrum 0..cap-1")
        sp.add_argument("--energy", type=float, default=None,
                        help="energy bound E (default: the center's mean energy)")
        sp.add_argument("--axis", type=int, choices=(1, 2), default=1,
                        help="marginal carrying the energy constraint (mutual information)")
        sp.add_argument("--reference", default=None, help="q (prob1) or omega (density) document")
        sp.add_argument("--variant", choices=("statement", "proof"), default="statement")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        clamp = sp.add_mutually_exclusive_group()
        clamp.add_argument("--clamp", dest="clamp", action="store_true", default=True)
        clamp.add_argument("--no-clamp", dest="clamp", action="store_false")

    common(sub.add_parser("bound", help="evaluate all applicable bounds at one eps"), grid=False)
    common(sub.add_parser("curve", help="sweep an eps grid"), grid=True)
    v = sub.add_parser("verify", help="check bounds against the brute-force oracle")
    common(v, grid=False)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--budget", type=int, default=20000)

    g = sub.add_parser("gibbs", help="inverse temperature and max entropy over an energy grid")
    g.add_argument("spectrum", help='spectrum JSON: {"levels": [...]} or {"family": "oscillator", "cap": n}')
    g.add_argument("--E", "--e-grid", dest="e_grid", required=True, help="comma-separated energies")
    g.add_argument("--format", choices=("json", "csv"), default="csv")
    return p


# ------------------------------------------------------------------ commands

def cmd_bound(args, out) -> int:
    center = parse_input(_load_json(args.input, "input"))
    opts = _options(args)
    reports = _filter(compute_bounds(center, args.functional, _eps_value(args.epsilon), opts), args.bound)
    out.write(render_reports(reports, args.format, args.clamp))
    return EXIT_OK


def cmd_curve(args, out) -> int:
    grid = _eps_grid(args.eps_grid)
    center = parse_input(_load_json(args.input, "input"))
    opts = _options(args)
    reports = []
    for eps in grid:
        reports.extend(_filter(compute_bounds(center, args.functional, eps, opts), args.bound))
    out.write(render_reports(reports, args.format, args.clamp))
    return EXIT_OK


def cmd_verify(args, out) -> int:
    center = parse_input(_load_json(args.input, "input"))
    _check_desk_scale(center)
    opts = _options(args)
    reports = _filter(compute_bounds(center, args.functional, _eps_value(args.epsilon), opts), args.bound)
    rows = verify_rows(center, args.functional, reports, opts, args.budget, args.seed)
    if args.format == "csv":
        out.write(_write_csv(VERIFY_COLUMNS, [[r["bound_id"], r["target"], fmt(r["epsilon"]),
                                               fmt(r["value"]), fmt(r["oracle_min"]), fmt(r["slack"]),
                                               fmt(r["sound"]), r["method"]] for r in rows]))
    else:
        out.write(_to_json({"rows": rows}) + "\n")
    return EXIT_OK if all(r["sound"] for r in rows) else EXIT_UNSOUND


def gibbs_row(spectrum: EnergySpectrum, E: float) -> dict:
    try:
        if E == spectrum.ground:
            f_val, tail = F_lambda(spectrum, E, with_error=True)
            return {"E": E, "beta": math.inf, "F": f_val, "tail_error": tail, "error": ""}
        if not spectrum.is_truncated and E >= spectrum.upper_energy():
            return {"E": E, "beta": 0.0, "F": F_lambda(spectrum, E), "tail_error": 0.0, "error": ""}
        sol = solve_beta(spectrum, E)
        return {"E": E, "beta": sol.beta, "F": sol.F_value, "tail_error": sol.tail_error, "error": ""}
    except RangeError as exc:
        return {"E": E, "beta": math.nan, "F": math.nan, "tail_error": math.nan, "error": str(exc)}


def cmd_gibbs(args, out) -> int:
    spectrum = parse_spectrum(_load_json(args.spectrum, "spectrum"))
    rows = [gibbs_row(spectrum, E) for E in _number_list(args.e_grid, "--E")]
    if args.format == "csv":
        out.write(_write_csv(GIBBS_COLUMNS, [[fmt(r["E"]), fmt(r["beta"]), fmt(r["F"]),
                                              fmt(r["tail_error"]), r["error"]] for r in rows]))
    else:
        out.write(_to_json({"rows": rows}) + "\n")
    return EXIT_PRECONDITION if any(r["error"] for r in rows) else EXIT_OK


COMMANDS = {"bound": cmd_bound, "curve": cmd_curve, "verify": cmd_verify, "gibbs": cmd_gibbs}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_SCHEMA if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args, out)
    except SchemaError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_SCHEMA
    except (PreconditionError, LocalBoundsError) as exc:
        err.write(f"error: {_plain(str(exc))}\n")
        return EXIT_PRECONDITION


def _plain(msg: str) -> str:
    return msg.replace("+inf on a neighborhood", "+∞ on a neighborhood")


if __name__ == "__main__":
    sys.exit(main())
