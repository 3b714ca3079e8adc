"""``qpwind`` command line: experiment drivers writing CSV and JSON.

Every subcommand reads an optional JSON config (``--config``) and then
applies flag overrides.  CSV goes to ``--out`` (stdout by default) and
starts with a ``# key=value`` metadata line.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import __version__, acceptance, accel, cocycle, dos, polyalg, winding, zeros
from .model import GOLDEN_ALPHA, TWO_PI, CocycleParams, FourierPotential, amo_potential

EXIT_OK, EXIT_USAGE, EXIT_LE, EXIT_QUANT, EXIT_CONTOUR, EXIT_ROOTS, EXIT_FAILED = range(7)

ERROR_CODES = (
    ((cocycle.LENotConverged, accel.ProfileError), EXIT_LE),
    ((accel.QuantizationError, accel.ConvexityError), EXIT_QUANT),
    ((winding.ContourZeroError, winding.LimitNotStabilized), EXIT_CONTOUR),
    ((zeros.RootsNotConverged, zeros.InterpolationIllConditioned, polyalg.RootFindingError,
      dos.SpectrumError, dos.CharpolyIllConditioned), EXIT_ROOTS),
)


class UsageError(ValueError):
    pass


# --- config ----------------------------------------------------------------

DEFAULTS = {
    "amo": 0.5,
    "alpha": "golden",
    "E": 3.5,
    "y": 0.0,
    "n": 100,
    "M": 512,
    "S": 64,
    "tol": 1e-3,
    "epsilon": 0.05,
    "workers": None,
}


def _line_of(text: str, key: str) -> str:
    if not text:
        return ""
    for i, line in enumerate(text.splitlines(), 1):
        if f'"{key}"' in line:
            return f" (line {i})"
    return ""


def parse_alpha(value) -> float:
    """``"golden"``, a decimal in radians, or ``"p/q"`` meaning ``(p/q) 2 pi``."""
    if isinstance(value, (int, float)):
        a = float(value)
    elif isinstance(value, str):
        s = value.strip().lower().replace("*2pi", "").replace("·2π", "")
        if s == "golden":
            return GOLDEN_ALPHA
        if "/" in s:
            a = float(Fraction(s)) * TWO_PI
        else:
            a = float(s)
    else:
        raise UsageError(f"cannot read alpha from {value!r}")
    if not math.isfinite(a):
        raise UsageError("alpha must be finite")
    return a


def parse_complex(value) -> complex:
    if isinstance(value, (list, tuple)) and len(value) == 2:
        z = complex(float(value[0]), float(value[1]))
    elif isinstance(value, (int, float)):
        z = complex(value)
    elif isinstance(value, str):
        try:
            z = complex(value.replace(" ", "").replace("i", "j"))
        except ValueError:
            raise UsageError(f"cannot read a complex number from {value!r}") from None
    else:
        raise UsageError(f"cannot read a complex number from {value!r}")
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise UsageError("complex values must be finite")
    return z


class RunConfig:
    """Validated settings for one command."""

    def __init__(self, raw: dict, text: str = ""):
        self.raw = raw
        self.text = text
        try:
            self.pot = self._potential()
            self.alpha = parse_alpha(raw.get("alpha", DEFAULTS["alpha"]))
            self.E = parse_complex(raw.get("E", DEFAULTS["E"]))
        except (UsageError, ValueError, TypeError) as exc:
            raise UsageError(str(exc)) from None
        self.y = self._float("y")
        self.n = self._int("n", 1)
        self.M = self._int("M", 1)
        self.S = self._int("S", 1)
        self.tol = self._float("tol", positive=True)
        self.epsilon = self._float("epsilon", positive=True)
        w = raw.get("workers", DEFAULTS["workers"])
        self.workers = accel.default_workers() if w is None else self._int("workers", 1)

    def _potential(self) -> FourierPotential:
        raw = self.raw
        if "potential" in raw and raw["potential"] is not None:
            p = raw["potential"]
            if isinstance(p, str):
                with open(p, encoding="utf-8") as fh:
                    return FourierPotential.from_json(fh.read())
            return FourierPotential.from_dict(p)
        lam = raw.get("amo", DEFAULTS["amo"])
        if lam in (0, "0", "free"):
            return FourierPotential()
        return amo_potential(float(lam))

    def _num(self, key):
        v = self.raw.get(key, DEFAULTS.get(key))
        if v is None:
            raise UsageError(f"missing value for {key!r}")
        return v

    def _float(self, key, positive=False) -> float:
        v = self._num(key)
        try:
            v = float(v)
        except (TypeError, ValueError):
            raise UsageError(f"{key!r}{_line_of(self.text, key)}: expected a number, got {v!r}") from None
        if not math.isfinite(v) or (positive and v <= 0):
            raise UsageError(f"{key!r}{_line_of(self.text, key)}: bad value {v!r}")
        return v

    def _int(self, key, minimum) -> int:
        v = self._num(key)
        if isinstance(v, bool) or int(v) != v or int(v) < minimum:
            raise UsageError(f"{key!r}{_line_of(self.text, key)}: expected an integer >= {minimum}, got {v!r}")
        return int(v)

    def y_grid(self) -> np.ndarray:
        raw = self.raw
        if "y_grid" in raw:
            ys = np.array([float(v) for v in raw["y_grid"]])
        elif "y_range" in raw:
            try:
                lo, hi, k = raw["y_range"]
            except (TypeError, ValueError):
                raise UsageError(f"'y_range'{_line_of(self.text, 'y_range')}: expected [min, max, points]") from None
            k = int(k)
            if not float(lo) < float(hi) or k < 2:
                raise UsageError(f"'y_range'{_line_of(self.text, 'y_range')}: empty range")
            ys = np.linspace(float(lo), float(hi), k)
        else:
            ys = np.array([self.y])
        if ys.size == 0 or not np.all(np.isfinite(ys)):
            raise UsageError("empty or non-finite y grid")
        return ys

    def probes(self) -> np.ndarray:
        p = self.raw.get("probes", {"radius": 6.0, "count": 16})
        if isinstance(p, dict):
            R, K = float(p.get("radius", 6.0)), int(p.get("count", 16))
            if R <= 0 or K < 1:
                raise UsageError("probes need a positive radius and count")
            return R * np.exp(2j * math.pi * (np.arange(K) + 0.5) / K)
        return np.array([parse_complex(v) for v in p])

    def metadata(self) -> dict:
        return {
            "version": __version__,
            "potential": json.dumps(self.pot.to_dict()["coeffs"], separators=(",", ":")),
            "alpha": repr(self.alpha),
            "E": repr(self.E),
            "n": self.n,
            "M": self.M,
            "tol": repr(self.tol),
        }


def load_config(args) -> RunConfig:
    raw, text = {}, ""
    if args.config:
        if not os.path.exists(args.config):
            raise UsageError(f"config file {args.config!r} not found")
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"{args.config}: line {exc.lineno}: {exc.msg}") from None
        if not isinstance(raw, dict):
            raise UsageError("config must be a JSON object")
    for key in ("amo", "potential", "alpha", "E", "y", "n", "M", "S", "tol", "epsilon", "workers"):
        v = getattr(args, key, None)
        if v is not None:
            raw[key] = v
    if getattr(args, "amo", None) is not None and getattr(args, "potential", None) is None:
        raw.pop("potential", None)
    if getattr(args, "free", False):
        raw["amo"] = "free"
        raw.pop("potential", None)
    if getattr(args, "y_range", None):
        raw["y_range"] = [args.y_range[0], args.y_range[1], int(args.y_range[2])]
        raw.pop("y_grid", None)
    if getattr(args, "ys", None):
        raw["y_grid"] = [float(v) for v in args.ys.split(",")]
    return RunConfig(raw, text)


# --- output ----------------------------------------------------------------

def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def write_csv(path, header, rows, meta):
    buf = io.StringIO()
    buf.write("# " + " ".join(f"{k}={v}" for k, v in meta.items()) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    _emit(path, buf.getvalue())


def write_json(path, doc):
    _emit(path, json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Fraction):
        return str(o)
    raise TypeError(type(o).__name__)


def _emit(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


# --- commands --------------------------------------------------------------

def cmd_le(cfg: RunConfig, args):
    prof_rows = []
    ys = cfg.y_grid()
    if len(ys) >= 5:
        prof = accel.le_profile(cfg.pot, cfg.alpha, cfg.E, ys[0], ys[-1], len(ys), cfg.tol,
                                workers=cfg.workers)
        if np.allclose(prof.y_grid, ys):
            prof_rows = list(zip(prof.y_grid, prof.L_values, prof.est_error))
    if not prof_rows:
        for y in ys:
            r = cocycle.converged_le(cfg.pot, cfg.alpha, cfg.E, float(y), cfg.tol)
            prof_rows.append((y, r.value, r.est_error))
    write_csv(args.out, ["y", "L", "est_error"], prof_rows, cfg.metadata())


def cmd_accel(cfg: RunConfig, args):
    if "profile_csv" in cfg.raw or args.profile:
        prof = read_profile(args.profile or cfg.raw["profile_csv"], cfg.E)
    else:
        if "y_range" not in cfg.raw and "y_grid" not in cfg.raw:
            cfg.raw["y_range"] = [0.0, 2.5, 26]
        ys = cfg.y_grid()
        prof = accel.le_profile(cfg.pot, cfg.alpha, cfg.E, ys[0], ys[-1], len(ys), cfg.tol,
                                workers=cfg.workers)
    pl = accel.fit_quantized(prof)
    doc = pl.to_dict()
    doc["max_slope_deviation"] = float(np.max(accel.slope_deviations(prof, pl), initial=0.0))
    doc["meta"] = cfg.metadata()
    write_json(args.json_out or args.out, doc)


def read_profile(path, E) -> accel.LEProfile:
    """Read a ``y,L[,est_error]`` CSV as written by ``qpwind le``."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.DictReader(lines))
    if not rows or "y" not in rows[0] or "L" not in rows[0]:
        raise UsageError(f"{path}: expected columns y,L")
    ys = [float(r["y"]) for r in rows]
    Ls = [float(r["L"]) for r in rows]
    errs = [float(r.get("est_error") or 0.0) for r in rows]
    return accel.LEProfile(E, np.array(ys), np.array(Ls), np.array(errs))


def cmd_winding(cfg: RunConfig, args):
    rows = []
    for y in cfg.y_grid():
        if args.limit:
            nu = winding.winding_limit(cfg.pot, cfg.alpha, cfg.E, float(y), args.limit)
            rows.append((y, nu, -nu, 0, True))
        else:
            r = winding.winding_n(cfg.pot, CocycleParams(cfg.alpha, cfg.E, float(y), cfg.n))
            rows.append((y, float(r.nu_n), r.total_winding, r.n, True))
    write_csv(args.out, ["y", "nu_n", "W", "n", "stabilized"], rows, cfg.metadata())


def cmd_zeros(cfg: RunConfig, args):
    rs = zeros.fn_zeros(cfg.pot, cfg.alpha, cfg.E, cfg.n)
    L0 = cocycle.converged_le(cfg.pot, cfg.alpha, cfg.E, 0.0, cfg.tol).value
    if "y_range" not in cfg.raw and "y_grid" not in cfg.raw:
        cfg.raw["y_range"] = [0.0, 2.5, 26]
    ys = cfg.y_grid()
    prof = accel.le_profile(cfg.pot, cfg.alpha, cfg.E, ys[0], ys[-1], len(ys), cfg.tol,
                            workers=cfg.workers)
    pl = accel.fit_quantized(prof)
    rep = zeros.zero_circle_report(cfg.pot, cfg.alpha, cfg.E, cfg.n, pl, cfg.epsilon, rs=rs)
    tps = np.array(rep.turning_points) if rep.turning_points else np.zeros(0)
    rows = []
    for z in rs.roots:
        y = -math.log(abs(z))
        near = np.abs(tps - y) <= cfg.epsilon if tps.size else np.zeros(0, bool)
        g = float(tps[np.argmax(near)]) if near.any() else math.nan
        rows.append((z.real, z.imag, y, g))
    write_csv(args.out, ["re", "im", "neg_log_abs", "assigned_gamma"], rows, cfg.metadata())
    doc = rep.to_dict()
    doc.update(L0=L0, max_residual=float(rs.residuals.max()), converged=rs.converged,
               symmetric=zeros.symmetry_check(rs, 1e-6) if cfg.pot.is_real and cfg.E.imag == 0 else None)
    if args.json_out:
        write_json(args.json_out, doc)
    else:
        sys.stderr.write(json.dumps(doc, default=_json_default) + "\n")


def cmd_dos(cfg: RunConfig, args):
    mu = dos.empirical_dos(cfg.pot, cfg.alpha, cfg.y, cfg.n, cfg.S)
    meta = cfg.metadata() | {"y": repr(cfg.y), "S": cfg.S}
    write_csv(args.out, ["re", "im"], [(z.real, z.imag) for z in mu.points], meta)


def cmd_thouless(cfg: RunConfig, args):
    rep = dos.thouless_report(cfg.pot, cfg.alpha, cfg.y, cfg.n, cfg.S, cfg.probes(), le_tol=cfg.tol)
    rows = [(E.real, E.imag, p, L, r, x) for E, p, L, r, x in
            zip(rep.E_grid, rep.potential_values, rep.L_values, rep.residuals, rep.excluded)]
    meta = cfg.metadata() | {"y": repr(cfg.y), "S": cfg.S, "assumption": rep.assumption.replace(" ", "_")}
    write_csv(args.out, ["re", "im", "potential", "L", "residual", "excluded"], rows, meta)


def cmd_accden(cfg: RunConfig, args):
    r = dos.accden_check(cfg.pot, cfg.alpha, cfg.E, cfg.y, cfg.n, cfg.S, le_tol=cfg.tol)
    write_json(args.json_out or args.out, {"lhs": r.lhs, "rhs": r.rhs, "residual": r.residual,
                                           "L0": r.L0, "meta": cfg.metadata()})


def cmd_ldt(cfg: RunConfig, args):
    ns = [int(v) for v in args.ns.split(",")] if args.ns else [cfg.n]
    rows = []
    for n in ns:
        frac = cocycle.ldt_deviation_fraction(cfg.pot, CocycleParams(cfg.alpha, cfg.E, cfg.y, n),
                                              cfg.epsilon, cfg.M)
        rows.append((n, frac))
    meta = cfg.metadata() | {"y": repr(cfg.y), "epsilon": repr(cfg.epsilon)}
    write_csv(args.out, ["n", "deviation_fraction"], rows, meta)


def cmd_verify(cfg: RunConfig, args):
    tols = cfg.raw.get("tolerances", {})
    unknown = set(tols) - set(acceptance.DEFAULT_TOLERANCES)
    if unknown:
        raise UsageError(f"unknown tolerance keys: {sorted(unknown)}")
    only = None
    if args.only:
        want = {int(v) for v in args.only.split(",")}
        only = {c.__name__ for i, c in enumerate(acceptance.CHECKS, 1) if i in want}
    results = acceptance.run_all(tols, only)
    for r in results:
        sys.stderr.write(r.line() + "\n")
    doc = {"passed": all(r.passed for r in results), "criteria": [r.to_dict() for r in results]}
    write_json(args.json_out or args.out, doc)
    return EXIT_OK if doc["passed"] else EXIT_FAILED


HELP = {
    "le": "Lyapunov exponent on a y grid (CSV y,L,est_error)",
    "accel": "integer-slope fit of a y-profile (JSON)",
    "winding": "finite-n winding nu_n on a y grid (CSV)",
    "zeros": "complex zeros of f_n in z (CSV) and circle report (JSON)",
    "dos": "eigenvalues pooled over phases (CSV re,im)",
    "thouless": "log-potential of the DOS against L at probe energies (CSV)",
    "accden": "acceleration/DOS identity at one (E, y) (JSON)",
    "ldt": "fraction of phases with large deviation of log|f_n|/n (CSV)",
    "verify": "run the acceptance criteria (JSON summary, exit 6 on failure)",
}

COMMANDS = {
    "le": cmd_le, "accel": cmd_accel, "winding": cmd_winding, "zeros": cmd_zeros,
    "dos": cmd_dos, "thouless": cmd_thouless, "accden": cmd_accden, "ldt": cmd_ldt,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qpwind", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--amo", type=float, help="almost-Mathieu coupling lambda")
    common.add_argument("--free", action="store_true", help="zero potential")
    common.add_argument("--potential", help='potential JSON file {"coeffs": [[k, re, im], ...]}')
    common.add_argument("--alpha", help='"golden", radians, or p/q (fraction of 2 pi)')
    common.add_argument("--E", help="energy, e.g. 3.5 or 2+2j")
    common.add_argument("--y", type=float)
    common.add_argument("--ys", help="comma-separated y values")
    common.add_argument("--y-range", nargs=3, type=float, metavar=("MIN", "MAX", "POINTS"))
    common.add_argument("--n", type=int)
    common.add_argument("--M", type=int, help="phase grid size")
    common.add_argument("--S", type=int, help="phase samples for the DOS")
    common.add_argument("--tol", type=float)
    common.add_argument("--epsilon", type=float)
    common.add_argument("--workers", type=int, help="default: $QPWIND_WORKERS or all cores")
    common.add_argument("--out", default="-", help="output path (default stdout)")
    common.add_argument("--json-out", help="path for the JSON summary")
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=HELP[name])
        if name == "accel":
            p.add_argument("--profile", help="fit an existing y,L CSV instead of computing one")
        if name == "winding":
            p.add_argument("--limit", choices=["+", "-"], help="one-sided limit instead of fixed n")
        if name == "ldt":
            p.add_argument("--ns", help="comma-separated lengths")
        if name == "verify":
            p.add_argument("--only", help="comma-separated criterion numbers")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = load_config(args)
        rc = COMMANDS[args.command](cfg, args)
        return EXIT_OK if rc is None else rc
    except UsageError as exc:
        sys.stderr.write(f"qpwind: usage error: {exc}\n")
        return EXIT_USAGE
    except Exception as exc:
        for types, code in ERROR_CODES:
            if isinstance(exc, types):
                sys.stderr.write(f"qpwind: {type(exc).__name__}: {exc}\n")
                return code
        if isinstance(exc, (ValueError, dos.HypothesisViolation, OSError)):
            sys.stderr.write(f"qpwind: usage error: {exc}\n")
            return EXIT_USAGE
        raise


if __name__ == "__main__":
    sys.exit(main())
