"""Command-line interface.

Subcommands: metric, validate, compare, sweep, ep, evolve, discriminate,
model show.  Inputs come from ``--in file.json`` or ``--model/--params``;
the summary JSON goes to stdout and ``--out dir`` additionally writes
result.json plus any CSV series.  Output is deterministic: sorted keys,
floats at 17 significant digits, complex numbers as [re, im] pairs.

Exit codes: 0 ok, 1 generic library error, 2 broken-phase / bracketing /
positivity violations, 3 defective (exceptional-point) systems, 4 parse
or parameter errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys

import numpy as np

from . import __version__, dynamics, linalg, metric, models, phase
from .errors import BrokenPhase, InvalidParams, MetricForgeError

DEFAULT_TOLS = {
    "eig_tol": 1e-8,
    "herm_tol": 1e-10,
    "defect_tol": 1e-8,
    "biorth_tol": 1e-10,
    "real_tol": 1e-9,
    "pos_tol": 1e-12,
    "cmp_tol": 1e-9,
    "ep_tol": 1e-10,
}


class AxisError(MetricForgeError):
    """Malformed --axis grid specification."""

    exit_code = 2


# ---------------------------------------------------------------------------
# Deterministic JSON
# ---------------------------------------------------------------------------

def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return "null"
    s = format(x, ".17g")
    return s


def dumps_canonical(obj) -> str:
    """JSON with sorted keys and a fixed 17-significant-digit float format."""
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, complex):
        return dumps_canonical([obj.real, obj.imag])
    if isinstance(obj, (list, tuple, np.ndarray)):
        items = [dumps_canonical(v) for v in obj]
        return "[" + ", ".join(items) + "]"
    if isinstance(obj, dict):
        items = [json.dumps(str(k)) + ": " + dumps_canonical(obj[k])
                 for k in sorted(obj, key=str)]
        return "{" + ", ".join(items) + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _c2j(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _mat2j(m) -> list:
    return [[_c2j(z) for z in row] for row in np.asarray(m, dtype=complex)]


def _vec2j(v) -> list:
    return [_c2j(z) for z in np.asarray(v, dtype=complex)]


def _entry_from_json(x) -> complex:
    if isinstance(x, (int, float)):
        return complex(x)
    if (isinstance(x, list) and len(x) == 2
            and all(isinstance(c, (int, float)) for c in x)):
        return complex(x[0], x[1])
    raise InvalidParams(f"matrix entry {x!r} is neither a number nor [re, im]")


def _mat_from_json(rows, what: str) -> np.ndarray:
    if not isinstance(rows, list) or not rows:
        raise InvalidParams(f"{what} must be a non-empty nested array")
    try:
        m = np.array([[_entry_from_json(x) for x in row] for row in rows],
                     dtype=complex)
    except (TypeError, ValueError) as exc:
        raise InvalidParams(f"bad {what}: {exc}") from None
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidParams(f"{what} must be square")
    return m


# ---------------------------------------------------------------------------
# Input handling
# ---------------------------------------------------------------------------

def _parse_kv_params(text: str) -> dict:
    out = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise InvalidParams(f"--params entry {item!r} is not name=value")
        k, v = item.split("=", 1)
        try:
            out[k.strip()] = float(v)
        except ValueError:
            raise InvalidParams(f"--params value {v!r} is not a number") from None
    return out


def _load_input(args) -> dict:
    """Return the raw input document (model or matrix form)."""
    given_file = getattr(args, "infile", None)
    given_model = getattr(args, "model", None)
    if given_file and given_model:
        raise InvalidParams("give either --in or --model, not both")
    if given_file:
        try:
            with open(given_file, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise InvalidParams(f"cannot read {given_file}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise InvalidParams(f"{given_file} is not valid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise InvalidParams("input document must be a JSON object")
        if ("model" in doc) == ("matrix" in doc):
            raise InvalidParams(
                "input document needs exactly one of 'model' or 'matrix'")
        return doc
    if given_model:
        params = _parse_kv_params(getattr(args, "params", "") or "")
        return {"model": {"family": given_model, "params": params}}
    raise InvalidParams("no input: give --in file.json or --model FAMILY")


class ResolvedInput:
    """Matrices and optional model instance extracted from an input document."""

    def __init__(self, doc: dict):
        self.doc = doc
        self.instance = None
        self.das = None
        if "model" in doc:
            spec = doc["model"]
            if not isinstance(spec, dict) or "family" not in spec:
                raise InvalidParams("'model' needs a 'family' and 'params'")
            self.instance = models.build(spec["family"],
                                         spec.get("params", {}) or {})
            self.h = self.instance.hamiltonian
            self.s = self.instance.similarity
            self.das = self.instance.das_data
        else:
            spec = doc["matrix"]
            if not isinstance(spec, dict) or "h" not in spec:
                raise InvalidParams("'matrix' needs an 'h' entry")
            self.h = _mat_from_json(spec["h"], "matrix.h")
            self.s = (_mat_from_json(spec["s"], "matrix.s")
                      if spec.get("s") is not None else None)
            if self.s is not None:
                if self.s.shape != self.h.shape:
                    raise InvalidParams("matrix.s must match matrix.h in size")
                linalg.inverse(self.s)  # must be invertible
            if "das" in spec:
                self.das = _das_from_json(spec["das"])

    def digest(self) -> str:
        return hashlib.sha256(
            dumps_canonical(self.doc).encode("utf-8")).hexdigest()


def _das_from_json(spec) -> metric.DasConstruction:
    try:
        q0 = _mat_from_json(spec["q0"], "das.q0")
        generators = [
            (_entry_from_json(g["energy"]), _mat_from_json(g["sigma"], "das.sigma"))
            for g in spec["generators"]
        ]
        projectors = [_mat_from_json(p, "das.projector")
                      for p in spec["projectors"]]
        phases = [_entry_from_json(c) for c in spec.get("phases", [])]
    except (KeyError, TypeError) as exc:
        raise InvalidParams(f"bad das block: {exc}") from None
    return metric.DasConstruction(q0, generators, projectors, phases)


def _parse_tols(pairs) -> dict:
    tols = dict(DEFAULT_TOLS)
    for item in pairs or []:
        if "=" not in item:
            raise InvalidParams(f"--tol entry {item!r} is not name=value")
        k, v = item.split("=", 1)
        k = k.strip()
        if k not in tols:
            raise InvalidParams(f"unknown tolerance {k!r}; "
                                f"known: {', '.join(sorted(tols))}")
        try:
            tols[k] = float(v)
        except ValueError:
            raise InvalidParams(f"--tol value {v!r} is not a number") from None
    return tols


def _parse_axis(spec: str) -> tuple:
    try:
        name, grid = spec.split("=", 1)
        start_s, stop_s, count_s = grid.split(":")
        start, stop, count = float(start_s), float(stop_s), int(count_s)
    except ValueError:
        raise AxisError(
            f"--axis {spec!r} is not name=start:stop:count") from None
    if count < 1:
        raise AxisError("axis count must be >= 1")
    if count == 1:
        values = [start]
    else:
        values = [float(x) for x in np.linspace(start, stop, count)]
    return name.strip(), values


# ---------------------------------------------------------------------------
# Construction helpers
# ---------------------------------------------------------------------------

def _spectral_from_input(res: ResolvedInput, tols: dict) -> metric.MetricOperator:
    if res.instance is not None and res.instance.analytic_pairs is not None:
        sysb = metric.BiorthSystem(pairs=res.instance.analytic_pairs,
                                   dim=res.h.shape[0])
        return metric.spectral_metric(
            sysb, h_scale=max(linalg.frob(res.h), 1e-300),
            real_tol=tols["real_tol"], unit_lefts=False)
    if res.instance is not None and res.instance.phase == phase.BROKEN:
        raise BrokenPhase(
            f"model is in the broken phase (discriminant "
            f"{res.instance.discriminant:.6g} < 0); no positive metric exists")
    pairs = linalg.eigendecompose(res.h, defect_tol=tols["defect_tol"])
    sysb = metric.biorthonormalize(pairs, defect_tol=tols["defect_tol"])
    return metric.spectral_metric(
        sysb, h_scale=max(linalg.frob(res.h), 1e-300),
        real_tol=tols["real_tol"])


def _das_from_input(res: ResolvedInput, tols: dict) -> metric.MetricOperator:
    if res.das is None:
        if res.instance is not None:
            raise BrokenPhase(
                "model has no projector construction here (phase "
                f"{res.instance.phase!r})")
        raise InvalidParams(
            "the das method needs a model input or an explicit 'das' block")
    return metric.das_metric(res.das, herm_tol=tols["herm_tol"])


def _metric_entry(res: ResolvedInput, m: metric.MetricOperator,
                  tols: dict) -> dict:
    rep = metric.validate_metric(res.h, m, pos_tol=tols["pos_tol"])
    return {
        "matrix": _mat2j(m.matrix),
        "method": m.method,
        "report": {
            "hermitian_residual": rep.hermitian_residual,
            "min_metric_eigenvalue": rep.min_metric_eigenvalue,
            "intertwining_residual": rep.intertwining_residual,
            "positive": rep.positive,
        },
    }


def _build_metrics(res: ResolvedInput, method: str, tols: dict) -> dict:
    out = {"metrics": {}}
    if method in ("spectral", "both"):
        out["metrics"]["spectral"] = _metric_entry(
            res, _spectral_from_input(res, tols), tols)
    if method in ("das", "both"):
        out["metrics"]["das"] = _metric_entry(
            res, _das_from_input(res, tols), tols)
    if method == "both":
        a = _mat_from_json(out["metrics"]["das"]["matrix"], "das")
        b = _mat_from_json(out["metrics"]["spectral"]["matrix"], "spectral")
        cmp_ = metric.compare_metrics(
            metric.MetricOperator(a, "das"), metric.MetricOperator(b, "spectral"),
            cmp_tol=tols["cmp_tol"])
        out["comparison"] = {"verdict": cmp_.verdict, "factor": cmp_.factor}
    return out


def _default_psi0(dim: int) -> np.ndarray:
    v = np.array([1j ** (k % 4) for k in range(dim)], dtype=complex)
    return v / math.sqrt(dim)


def _parse_psi0(text: str, dim: int) -> np.ndarray:
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != dim:
        raise InvalidParams(f"--psi0 needs {dim} entries, got {len(parts)}")
    vals = []
    for p in parts:
        re_s, _, im_s = p.partition(":")
        try:
            vals.append(complex(float(re_s), float(im_s) if im_s else 0.0))
        except ValueError:
            raise InvalidParams(f"--psi0 entry {p!r} is not re or re:im") from None
    v = np.array(vals, dtype=complex)
    norm = math.sqrt(float(np.sum(np.abs(v) ** 2)))
    if norm == 0.0:
        raise InvalidParams("--psi0 must be nonzero")
    return v / norm


# ---------------------------------------------------------------------------
# Subcommand handlers: each returns (results dict, {filename: csv text})
# ---------------------------------------------------------------------------

def cmd_metric(args, tols):
    res = ResolvedInput(_load_input(args))
    return _build_metrics(res, args.method, tols), {}, res


def cmd_validate(args, tols):
    res = ResolvedInput(_load_input(args))
    built = _build_metrics(res, args.method, tols)
    return built, {}, res


def cmd_compare(args, tols):
    res = ResolvedInput(_load_input(args))
    built = _build_metrics(res, "both", tols)
    return {"comparison": built["comparison"]}, {}, res


def cmd_sweep(args, tols):
    doc = _load_input(args)
    if "model" not in doc:
        raise InvalidParams("sweep needs a model input")
    res = ResolvedInput({"model": {"family": doc["model"]["family"],
                                   "params": doc["model"].get("params", {})}})
    axes = [_parse_axis(a) for a in (args.axis or [])]
    if not axes:
        raise AxisError("sweep needs at least one --axis name=start:stop:count")
    diagram = phase.sweep(doc["model"]["family"],
                          doc["model"].get("params", {}) or {}, axes,
                          real_tol=tols["real_tol"],
                          defect_tol=tols["defect_tol"])
    brackets = phase.ep_brackets(diagram)
    results = {"diagram": diagram.to_jsonable(), "ep_brackets": brackets}
    return results, {"sweep.csv": diagram.to_csv()}, res


def cmd_ep(args, tols):
    doc = _load_input(args)
    if "model" not in doc:
        raise InvalidParams("ep needs a model input")
    res = ResolvedInput(doc)
    value = phase.find_exceptional(
        doc["model"]["family"], doc["model"].get("params", {}) or {},
        args.param, args.lo, args.hi,
        ep_tol=tols["ep_tol"], real_tol=tols["real_tol"])
    return {"param": args.param, "value": value}, {}, res


def cmd_evolve(args, tols):
    res = ResolvedInput(_load_input(args))
    if args.steps < 2:
        raise InvalidParams("--steps must be >= 2")
    point = phase.classify(res.h, real_tol=tols["real_tol"],
                           defect_tol=tols["defect_tol"])
    broken = point.classification != phase.UNBROKEN
    if broken and not args.allow_broken:
        raise BrokenPhase(
            f"spectrum is {point.classification}; metric-norm evolution "
            "needs the unbroken phase (pass --allow-broken to force)")
    dim = res.h.shape[0]
    psi0 = (_parse_psi0(args.psi0, dim) if args.psi0 else _default_psi0(dim))
    m = None
    if not broken:
        if res.instance is not None and res.instance.analytic_metric is not None:
            m = res.instance.analytic_metric
        else:
            m = _spectral_from_input(res, tols)
    times = np.linspace(0.0, args.tmax, args.steps)
    rec = dynamics.evolve(res.h, psi0, times, metric=m, hbar=args.hbar)
    metric_dev = float(np.max(np.abs(rec.metric_norms - rec.metric_norms[0]))
                       / max(rec.metric_norms[0], 1e-300))
    std_dev = float(np.max(np.abs(rec.standard_norms - rec.standard_norms[0])))
    results = {
        "classification": point.classification,
        "psi0": _vec2j(psi0),
        "max_metric_norm_deviation": metric_dev if m is not None else None,
        "max_standard_norm_deviation": std_dev,
        "metric_used": _mat2j(m.matrix) if m is not None else None,
    }
    if broken:
        results["growth_rate"] = dynamics.growth_rate(rec)
    return results, {"evolution.csv": rec.to_csv()}, res


def cmd_discriminate(args, tols):
    sin_theta = args.sin_theta
    res = None
    if getattr(args, "model", None) or getattr(args, "infile", None):
        res = ResolvedInput(_load_input(args))
        if res.instance is not None and "sin_theta" in res.instance.extras:
            sin_theta = res.instance.extras["sin_theta"]
    m = dynamics.assemble_discrimination_metric(sin_theta)
    files = {}
    if args.axis:
        name, values = _parse_axis(args.axis)
        if name != "theta":
            raise AxisError("discriminate scans only over theta")
        scan = dynamics.orthogonality_scan(values, args.eps, m)
        results = {
            "sin_theta": sin_theta,
            "eps": args.eps,
            "zero_crossings": scan.zero_crossings,
            "rows": len(scan.rows),
        }
        files["scan.csv"] = scan.to_csv()
    else:
        pair = dynamics.build_entangled_pair(args.theta, args.eps)
        rep = dynamics.discriminate(pair, m)
        results = {
            "sin_theta": sin_theta,
            "theta": args.theta,
            "eps": args.eps,
            "standard_overlap": _c2j(rep.standard_overlap),
            "metric_overlap": _c2j(rep.metric_overlap),
            "distinguishability_gain": rep.distinguishability_gain,
        }
    return results, files, res


def cmd_model_show(args, tols):
    res = ResolvedInput(_load_input(args))
    if res.instance is None:
        raise InvalidParams("model show needs a model input")
    inst = res.instance
    results = {
        "family": inst.family,
        "params": inst.params,
        "hamiltonian": _mat2j(inst.hamiltonian),
        "similarity": _mat2j(inst.similarity),
        "eigenvalues": [_c2j(v) for v in inst.analytic_eigenvalues],
        "phase": inst.phase,
        "discriminant": inst.discriminant,
        "metric": (_mat2j(inst.analytic_metric.matrix)
                   if inst.analytic_metric is not None else None),
        "extras": {k: v for k, v in inst.extras.items()
                   if isinstance(v, (int, float, str, list))},
    }
    return results, {}, res


# ---------------------------------------------------------------------------
# Wiring
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InvalidParams(message)


def _add_input_flags(p):
    p.add_argument("--in", dest="infile", help="input document (JSON)")
    p.add_argument("--model", help="model family name")
    p.add_argument("--params", help="model parameters name=value,...")
    p.add_argument("--tol", action="append", metavar="NAME=VALUE",
                   help="override a tolerance (repeatable)")
    p.add_argument("--out", help="directory for result.json and CSV files")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="metricforge",
                 description="Positive-definite metric operators for "
                             "pseudo-Hermitian Hamiltonians")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("metric", help="construct and validate metric operators")
    _add_input_flags(p)
    p.add_argument("--method", choices=("spectral", "das", "both"),
                   default="both")
    p.set_defaults(handler=cmd_metric)

    p = sub.add_parser("validate", help="validity report for a constructed metric")
    _add_input_flags(p)
    p.add_argument("--method", choices=("spectral", "das", "both"),
                   default="spectral")
    p.set_defaults(handler=cmd_validate)

    p = sub.add_parser("compare", help="compare the two construction routes")
    _add_input_flags(p)
    p.set_defaults(handler=cmd_compare)

    p = sub.add_parser("sweep", help="phase classification over a grid")
    _add_input_flags(p)
    p.add_argument("--axis", action="append", metavar="NAME=START:STOP:COUNT")
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("ep", help="bisect for an exceptional point")
    _add_input_flags(p)
    p.add_argument("--param", required=True)
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.set_defaults(handler=cmd_ep)

    p = sub.add_parser("evolve", help="time evolution with norm tracking")
    _add_input_flags(p)
    p.add_argument("--tmax", type=float, default=10.0)
    p.add_argument("--steps", type=int, default=101)
    p.add_argument("--hbar", type=float, default=1.0)
    p.add_argument("--psi0", help="initial state re:im,re:im,... (normalized)")
    p.add_argument("--allow-broken", action="store_true",
                   help="evolve even when the spectrum is not real")
    p.set_defaults(handler=cmd_evolve)

    p = sub.add_parser("discriminate",
                       help="entangled-pair overlap under the metric")
    _add_input_flags(p)
    p.add_argument("--theta", type=float, default=math.pi / 3)
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--sin-theta", type=float, default=0.5,
                   help="doublet mixing used in the 4x4 metric "
                        "(overridden by a jc_doublet model input)")
    p.add_argument("--axis", metavar="theta=START:STOP:COUNT",
                   help="scan theta instead of a single evaluation")
    p.set_defaults(handler=cmd_discriminate)

    p = sub.add_parser("model", help="model utilities")
    msub = p.add_subparsers(dest="model_command", required=True)
    ps = msub.add_parser("show", help="print a model instance")
    _add_input_flags(ps)
    ps.set_defaults(handler=cmd_model_show)

    return ap


def _run(argv) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    tols = _parse_tols(getattr(args, "tol", None))
    results, files, res = args.handler(args, tols)
    doc = {
        "command": ["metricforge"] + list(argv),
        "input_digest": res.digest() if res is not None else None,
        "results": results,
        "tolerances": tols,
        "version": __version__,
    }
    text = dumps_canonical(doc)
    out_dir = getattr(args, "out", None)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "result.json"), "w",
                  encoding="utf-8") as fh:
            fh.write(text + "\n")
        for name, content in files.items():
            with open(os.path.join(out_dir, name), "w", encoding="utf-8") as fh:
                fh.write(content)
    sys.stdout.write(text + "\n")
    return 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        return _run(argv)
    except MetricForgeError as exc:
        body = {
            "error": type(exc).__name__,
            "message": str(exc),
            "exit_code": exc.exit_code,
        }
        sys.stderr.write(dumps_canonical(body) + "\n")
        return exc.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
