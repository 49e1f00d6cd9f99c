"""Command-line front end: ``oscreduce <command> [flags]``.

Exit codes: 0 ok, 1 verification failure, 2 bad input, 3 numerical
non-convergence.  JSON output is one object per line; CSV headers are fixed
per command (see the README).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable

import numpy as np
from numpy.polynomial import Polynomial

from . import polytope, reduction, sectors, spectra, verify, wick
from .fock import WeightVector, count_dim, enumerate_basis, oscillator_eigenvalue
from .quadrature import QuadratureError
from .sectors import RankDeficiency
from .symbols import PolySymbol, SymbolSyntaxError, average_circle, parse_symbol, parse_test_function

SCHEMA_VERSION = 1
COMMANDS = ("dim", "basis", "op", "reduce", "density", "sectors", "polytope", "verify")

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3

DEFAULTS: dict[str, Any] = {
    "weights": None,
    "k": None,
    "symbol": None,
    "f": "x",
    "fit_order": None,
    "tol": 1e-10,
    "format": "json",
    "output": None,
    "seed": 0,
    "epsilon": None,
    "example": None,
    "W": None,
    "only": None,
    "inject_fault": None,
    "method": "auto",
}

# what each command cannot run without
REQUIRED = {
    "dim": ("weights", "k"),
    "basis": ("weights", "k"),
    "op": ("weights", "k", "symbol"),
    "reduce": ("weights", "k"),
    "density": ("weights", "k", "symbol"),
    "sectors": ("weights",),
    "polytope": ("k",),
    "verify": (),
}


class InputError(Exception):
    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("; ".join(problems))


@dataclass
class RunConfig:
    command: str
    weights: WeightVector | None = None
    ks: tuple[int, ...] = ()
    symbol: PolySymbol | None = None
    symbol_text: str | None = None
    f: Polynomial | None = None
    f_text: str = "x"
    fit_order: int | None = None
    tol: float = 1e-10
    format: str = "json"
    output: str | None = None
    seed: int = 0
    epsilon: float | None = None
    action: polytope.TorusAction | None = None
    only: str | None = None
    inject_fault: str | None = None
    method: str = "auto"


# ---------------------------------------------------------------- parsing and validation

def parse_k_range(text: str) -> tuple[int, ...]:
    """``"5"`` or inclusive ``"start:stop[:step]"``."""
    text = str(text).strip()
    parts = text.split(":")
    try:
        nums = [int(x) for x in parts]
    except ValueError:
        raise ValueError(f"k must be an integer or start:stop:step, got {text!r}") from None
    if len(nums) == 1:
        ks = (nums[0],)
    elif len(nums) in (2, 3):
        step = nums[2] if len(nums) == 3 else 1
        if step <= 0:
            raise ValueError("k-range step must be positive")
        ks = tuple(range(nums[0], nums[1] + 1, step))
    else:
        raise ValueError(f"k must be an integer or start:stop:step, got {text!r}")
    if not ks:
        raise ValueError(f"k-range {text!r} is empty")
    if min(ks) < 0:
        raise ValueError("k must be non-negative")
    return ks


def read_config_file(path: str) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputError([f"{path}:{lineno}: expected key=value"])
            key, value = (x.strip() for x in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in DEFAULTS:
                raise InputError([f"{path}:{lineno}: unknown key {key!r}"])
            values[key] = value
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oscreduce", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--weights", help="comma separated coprime positive weights, e.g. 1,2")
    parser.add_argument("--k", help="level k or inclusive range start:stop:step")
    parser.add_argument("--symbol", help='polynomial symbol, e.g. "s(1)" or "zb(1)^2*z(2) + zb(2)*z(1)^2"')
    parser.add_argument("--f", help='test polynomial in x for density sums (default "x")')
    parser.add_argument("--fit-order", dest="fit_order", help="number of subleading orders to fit")
    parser.add_argument("--tol", help="quadrature tolerance (default 1e-10)")
    parser.add_argument("--format", help="json or csv")
    parser.add_argument("--output", help="write to this file instead of stdout")
    parser.add_argument("--seed", help="seed for random states (default 0)")
    parser.add_argument("--epsilon", help="reduce: also report the mass outside P_epsilon")
    parser.add_argument("--example", help="polytope: cp3 or cp1")
    parser.add_argument("--W", help='polytope weight matrix, rows by ";" e.g. "0,0;1,1;3,0;0,3"')
    parser.add_argument("--only", help="verify: comma separated groups (fock, symbols, wick, ..., acceptance)")
    parser.add_argument("--inject-fault", dest="inject_fault", help="verify: corrupt a computation (norm)")
    parser.add_argument("--method", help="eigensolver: auto, jacobi or eigh")
    parser.add_argument("--config", help="flat key=value file; flags take precedence")
    return parser


def resolve(args: argparse.Namespace) -> RunConfig:
    """Merge flags > config file > defaults, then validate everything at once."""
    merged = dict(DEFAULTS)
    problems: list[str] = []
    if args.config:
        try:
            merged.update(read_config_file(args.config))
        except OSError as exc:
            problems.append(f"cannot read config file: {exc}")
        except InputError as exc:
            problems.extend(exc.problems)
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value

    cfg = RunConfig(args.command)
    for key in REQUIRED[args.command]:
        if merged.get(key) is None:
            problems.append(f"--{key.replace('_', '-')} is required for {args.command}")

    def attempt(label, func):
        try:
            return func()
        except (ValueError, TypeError) as exc:
            problems.append(f"{label}: {exc}")
            return None

    if merged["weights"] is not None:
        cfg.weights = attempt("--weights", lambda: WeightVector.parse(str(merged["weights"])))
    if merged["k"] is not None:
        cfg.ks = attempt("--k", lambda: parse_k_range(merged["k"])) or ()
        if args.command == "polytope" and cfg.ks and min(cfg.ks) < 1:
            problems.append("--k: polytope levels must be >= 1")
    if merged["symbol"] is not None:
        cfg.symbol_text = str(merged["symbol"])
        n = cfg.weights.n if cfg.weights else None
        cfg.symbol = attempt("--symbol", lambda: parse_symbol(cfg.symbol_text, n))
        if cfg.symbol is not None and args.command == "density" and not cfg.symbol.is_hermitian(1e-12):
            problems.append("--symbol: density needs a real-valued (Hermitian) symbol")
    cfg.f_text = str(merged["f"])
    cfg.f = attempt("--f", lambda: parse_test_function(cfg.f_text))
    if merged["fit_order"] is not None:
        cfg.fit_order = attempt("--fit-order", lambda: _nonneg_int(merged["fit_order"]))
    cfg.tol = attempt("--tol", lambda: _positive_float(merged["tol"])) or cfg.tol
    cfg.format = str(merged["format"]).lower()
    if cfg.format not in ("json", "csv"):
        problems.append(f"--format: must be json or csv, got {merged['format']!r}")
    cfg.output = merged["output"]
    cfg.seed = attempt("--seed", lambda: int(merged["seed"])) or 0
    if merged["epsilon"] is not None:
        cfg.epsilon = attempt("--epsilon", lambda: _unit_interval(merged["epsilon"]))
    cfg.method = str(merged["method"])
    if cfg.method not in ("auto", "jacobi", "eigh"):
        problems.append(f"--method: must be auto, jacobi or eigh, got {cfg.method!r}")
    if args.command == "polytope":
        if merged["W"] is not None and merged["example"] is not None:
            problems.append("polytope: give either --W or --example, not both")
        elif merged["W"] is not None:
            cfg.action = attempt("--W", lambda: polytope.TorusAction.parse(str(merged["W"])))
        else:
            name = str(merged["example"] or "cp3").lower()
            examples = {"cp3": polytope.cp3_example, "cp1": polytope.cp1_example}
            if name not in examples:
                problems.append(f"--example: must be cp3 or cp1, got {name!r}")
            else:
                cfg.action = examples[name]()
    cfg.only = merged["only"]
    if cfg.only is not None:
        attempt("--only", lambda: verify.select(cfg.only))
    cfg.inject_fault = merged["inject_fault"]
    if cfg.inject_fault is not None and cfg.inject_fault != "norm":
        problems.append(f"--inject-fault: unknown fault {cfg.inject_fault!r} (available: norm)")
    if problems:
        raise InputError(problems)
    return cfg


def _nonneg_int(value) -> int:
    v = int(value)
    if v < 0:
        raise ValueError("must be >= 0")
    return v


def _positive_float(value) -> float:
    v = float(value)
    if not v > 0:
        raise ValueError("tolerance must be positive")
    return v


def _unit_interval(value) -> float:
    v = float(value)
    if not 0 < v < 1:
        raise ValueError("must lie in (0, 1)")
    return v


# ---------------------------------------------------------------- output

class Emitter:
    """Collects JSON objects or CSV rows and writes them in one go."""

    def __init__(self, cfg: RunConfig, header: list[str] | None = None):
        self.cfg = cfg
        self.header = header
        self.lines: list[str] = []
        self.rows: list[list] = []

    def record(self, obj: dict, rows: Iterable[list] = ()):
        if self.cfg.format == "json":
            self.lines.append(json.dumps({"schema_version": SCHEMA_VERSION, **obj}, default=_jsonable))
        else:
            self.rows.extend(rows)

    def text(self) -> str:
        if self.cfg.format == "json":
            return "".join(line + "\n" for line in self.lines)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header or [])
        writer.writerows(self.rows)
        return buf.getvalue()

    def flush(self, stream):
        data = self.text()
        if self.cfg.output:
            with open(self.cfg.output, "w", encoding="utf-8") as fh:
                fh.write(data)
        else:
            stream.write(data)


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    raise TypeError(f"not serializable: {type(x).__name__}")


def _fmt_fraction(x: Fraction) -> str:
    return str(Fraction(x))


def _model_with_fit(weights: WeightVector, ks: list[int], values: list[float], lead: sectors.AsymptoticModel,
                    fit_order: int | None, note) -> tuple[sectors.AsymptoticModel, int]:
    """Fit on the first half of ks.

    Without an explicit order the largest order (up to 4) that the data can
    determine is used, so truncation bias does not masquerade as slow decay.
    """
    half = len(ks) // 2
    order = sectors.feasible_order(lead, half) if fit_order is None else fit_order
    if order == 0:
        if fit_order is None:
            note(f"note: {half} fitting points are too few for subleading orders; leading order only")
        return lead, 0
    fit = sectors.fit_subleading(list(zip(ks[:half], values[:half])), lead, order)
    return fit.model, order


# ---------------------------------------------------------------- commands

def cmd_dim(cfg: RunConfig, out: Emitter, note) -> int:
    w = cfg.weights
    ks = list(cfg.ks)
    counts = [count_dim(w, k) for k in ks]
    lead = sectors.leading_model(w, PolySymbol.constant(w.n), Polynomial([1.0]))
    model, order = _model_with_fit(w, ks, [float(c) for c in counts], lead, cfg.fit_order, note)
    out.header = ["k", "dim", "model", "residual"]
    for k, n_k in zip(ks, counts):
        m = sectors.model_eval(model, k) if k > 0 else float("nan")
        out.record({"k": k, "dim": n_k, "sums": {"1": n_k}, "model": m, "residual": n_k - m,
                    "fit_order": order}, [[k, n_k, m, n_k - m]])
    return EXIT_OK


def cmd_basis(cfg: RunConfig, out: Emitter, note) -> int:
    out.header = ["k", "position", "alpha", "norm_sq", "norm_sq_exact", "oscillator_eigenvalue"]
    for k in cfg.ks:
        b = enumerate_basis(cfg.weights, k)
        exact = [f"{e.ratio}*(2pi)^{e.power}" for e in b.exact_norms]
        energy = [oscillator_eigenvalue(a, cfg.weights, k) if k else float("nan") for a in b.indices]
        out.record({"k": k, "dim": b.dim, "indices": [list(a) for a in b.indices],
                    "norms_sq": b.norms_sq, "norms_sq_exact": exact},
                   [[k, i, " ".join(map(str, a)), b.norms_sq[i], exact[i], energy[i]]
                    for i, a in enumerate(b.indices)])
    return EXIT_OK


def cmd_op(cfg: RunConfig, out: Emitter, note) -> int:
    out.header = ["k", "row", "col", "re", "im"]
    for k in cfg.ks:
        b = enumerate_basis(cfg.weights, k)
        mat = wick.toeplitz_matrix(cfg.symbol, b)
        other = wick.normal_ordered_matrix(cfg.symbol, b)
        gap = float(np.max(np.abs(mat.entries - other.entries))) if b.dim else 0.0
        obj = {"k": k, "dim": b.dim, "hermitian": mat.is_hermitian(),
               "entries": [[[z.real, z.imag] for z in row] for row in mat.entries],
               "normal_order_gap": gap}
        if mat.is_hermitian() and b.dim:
            obj["eigenvalues"] = spectra.hermitian_eigenvalues(mat, cfg.method)
        rows = [[k, i, j, mat.entries[i, j].real, mat.entries[i, j].imag]
                for i in range(b.dim) for j in range(b.dim) if mat.entries[i, j] != 0]
        out.record(obj, rows)
    return EXIT_OK


def cmd_reduce(cfg: RunConfig, out: Emitter, note) -> int:
    cal = reduction.calibrate()
    out.header = ["k", "alpha", "d", "vstar_v", "symbol_deviation"]
    for k in cfg.ks:
        if k < 1:
            raise InputError(["--k: reduce needs k >= 1"])
        b = enumerate_basis(cfg.weights, k)
        if b.dim == 0:
            out.record({"k": k, "dim": 0})
            continue
        maps = reduction.build_reduction_maps(b, tol=cfg.tol, calibration=cal.value)
        law = reduction.vstar_v_symbol_check(b, calibration=cal.value)
        obj = {"k": k, "dim": b.dim, "calibration": cal.value, "indices": [list(a) for a in b.indices],
               "d": maps.v_diag, "vstar_v": maps.vstar_v, "symbol_deviation": law.max_deviation}
        if cfg.epsilon is not None:
            scan = reduction.concentration_scan(cfg.weights, [k], cfg.epsilon, seed=cfg.seed)
            obj["outside_mass"] = scan.ratios[0] if scan.ratios else None
            obj["phi_bound"] = scan.bound
        out.record(obj, [[k, " ".join(map(str, a)), maps.v_diag[i], maps.vstar_v[i], law.deviations[i]]
                         for i, a in enumerate(b.indices)])
    return EXIT_OK


def cmd_density(cfg: RunConfig, out: Emitter, note) -> int:
    w = cfg.weights
    symbol = cfg.symbol.with_n(w.n)
    ks = sorted(cfg.ks)
    label = cfg.f_text
    g0 = average_circle(symbol, w).principal()
    lead = sectors.leading_model(w, g0, cfg.f)
    sums, evs = [], {}
    for k in ks:
        b = enumerate_basis(w, k)
        ev = spectra.hermitian_eigenvalues(wick.lambda_toeplitz(symbol, b), cfg.method) if b.dim else np.zeros(0)
        evs[k] = ev
        sums.append(float(np.sum(cfg.f(ev))))
    model, order = _model_with_fit(w, ks, sums, lead, cfg.fit_order, note)
    residuals = [s - sectors.model_eval(model, k) for k, s in zip(ks, sums)]
    half = len(ks) // 2
    if order > 0 and len(ks) - half >= 2:
        scale = max(abs(s) for s in sums) if sums else 1.0
        decay = sectors.decay_order_check(ks[half:], residuals[half:], w.n, order, scale)
        note(f"decay check ({label}, fit order {order}): {'passed' if decay.passed else 'failed'}; "
             f"slope {decay.slope:.3f}, bound {decay.bound:.1f}, max out-of-sample residual {decay.max_residual:.3e}")
    out.header = ["k", "dim", "sum", "model", "residual"]
    for k, s, r in zip(ks, sums, residuals):
        out.record({"k": k, "dim": int(evs[k].size), "eigenvalues": evs[k], "sums": {label: s},
                    "model": {label: s - r}, "residual": {label: r}, "fit_order": order},
                   [[k, int(evs[k].size), s, s - r, r]])
    return EXIT_OK


def cmd_sectors(cfg: RunConfig, out: Emitter, note) -> int:
    w = cfg.weights
    symbol = cfg.symbol.with_n(w.n) if cfg.symbol is not None else PolySymbol.constant(w.n)
    g0 = average_circle(symbol, w).principal()
    out.header = ["zeta_j", "zeta_q", "support", "m", "n_zeta", "effective_weights", "I0_re", "I0_im"]
    for sec in sectors.enumerate_sectors(w):
        i0 = sectors.leading_coefficient(sec, g0, cfg.f, w)
        eff = sec.effective_weights_for(w)
        out.record({"zeta": f"{sec.zeta.j}/{sec.zeta.q}", "support": [i + 1 for i in sec.support], "m": sec.m,
                    "n_zeta": sec.dim_n, "effective_weights": list(eff), "I0": [i0.real, i0.imag]},
                   [[sec.zeta.j, sec.zeta.q, " ".join(str(i + 1) for i in sec.support), sec.m, sec.dim_n,
                     " ".join(map(str, eff)), i0.real, i0.imag]])
    return EXIT_OK


def cmd_polytope(cfg: RunConfig, out: Emitter, note) -> int:
    poly = polytope.fixed_point_values(cfg.action)
    d = poly.d
    out.header = ["k"] + [f"lambda_{i + 1}/2pi" for i in range(d)]
    for k in cfg.ks:
        pts = polytope.bs_lattice_points(poly, k)
        out.record({"k": k, "count": len(pts),
                    "vertices": [[_fmt_fraction(x) for x in v] for v in poly.hull_vertices],
                    "points": [[_fmt_fraction(x) for x in p] for p in pts], "units": "2pi"},
                   [[k] + [_fmt_fraction(x) for x in p] for p in pts])
    return EXIT_OK


def cmd_verify(cfg: RunConfig, out: Emitter, note) -> int:
    # timings go to stderr only, so the emitted records are byte-reproducible
    out.header = ["name", "group", "passed", "detail"]
    results = verify.run(cfg.only, cfg.inject_fault)
    for r in results:
        note(r.line())
        out.record({"name": r.name, "group": r.group, "passed": r.passed, "detail": r.detail},
                   [[r.name, r.group, r.passed, r.detail]])
    failed = [r.name for r in results if not r.passed]
    note(f"{len(results) - len(failed)}/{len(results)} checks passed" + (f"; failed: {', '.join(failed)}" if failed else ""))
    return EXIT_VERIFY if failed else EXIT_OK


HANDLERS = {"dim": cmd_dim, "basis": cmd_basis, "op": cmd_op, "reduce": cmd_reduce, "density": cmd_density,
            "sectors": cmd_sectors, "polytope": cmd_polytope, "verify": cmd_verify}


def main(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr

    def note(message: str):
        print(message, file=stderr)

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        cfg = resolve(args)
        out = Emitter(cfg)
        code = HANDLERS[cfg.command](cfg, out, note)
        out.flush(stdout)
        return code
    except InputError as exc:
        for problem in exc.problems:
            note(f"error: {problem}")
        return EXIT_INPUT
    except (QuadratureError, RankDeficiency, spectra.ConvergenceError) as exc:
        note(f"numerical failure: {exc}")
        return EXIT_NUMERIC
    except (SymbolSyntaxError, spectra.NonHermitianError, ValueError) as exc:
        note(f"error: {exc}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
