"""Command-line entry point: ``getzler <subcommand> [options]``.

Exit status is 0 on success, 1 when a mathematical check fails and 2 for
usage or input errors.  Output is deterministic for a fixed configuration
and seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__
from .calculus import CertificateError, random_curvature
from .clifford import CurvatureTensor, Multivector, popcount
from .constants import TWIST_SIGN, two_over_i_power
from .convolution import (
    FiberFunction,
    FiberGrid,
    compose_kernels,
    eps_lambda,
    random_torus_section,
    torus_product,
    twisted_convolve,
)
from .gaussian import random_gaussian
from .serialize import (
    SchemaError,
    curvature_from_json,
    dumps,
    fiber_function_from_json,
    fiber_function_to_json,
    kernel_metadata,
    kernel_to_bytes,
    multivector_to_json,
    scalar_to_json,
    torus_section_from_json,
    torus_section_to_json,
)
from .supertrace import (
    a_hat,
    ahat_density,
    index_density,
    str_lambda_algebraic,
    str_lambda_quadrature,
    str_zero,
    torus_boundary_value,
)
from .verify import SUITE_NAMES, SuiteConfig, run_suites

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2
DENSITY_TOL = 1e-10


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    n: int = 4
    jet_order: int = 6
    grid: int | None = None
    lambdas: list = field(default_factory=lambda: [1.0, 0.5, 0.1, 0.01])
    taus: list = field(default_factory=lambda: [0.25, 0.5, 1.0])
    backend: str = "gaussian"
    seed: int = 0
    fmt: str = "json"
    output: str | None = None
    inputs: dict = field(default_factory=dict)
    fault: str | None = None
    full: bool = False
    suites: tuple = ()
    radius: float = 8.0

    def validate(self) -> None:
        if self.n < 1:
            raise UsageError("--n must be positive")
        if self.command in ("verify", "ahat", "supertrace", "heat") and self.n % 2:
            raise UsageError(f"{self.command} uses spinors and needs even --n, got {self.n}")
        if self.jet_order < 2:
            raise UsageError("--jet-order must be at least 2")
        if self.grid is not None and (self.grid < 4 or self.grid & (self.grid - 1)):
            raise UsageError("--grid must be a power of two, at least 4")
        if self.command == "heat" and any(t <= 0 for t in self.taus):
            raise UsageError("--tau values must be positive")
        if self.radius <= 0:
            raise UsageError("--radius must be positive")


# -- input helpers ----------------------------------------------------------------------

def _load_json(path: str, what: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {what} {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _decode(path: str, what: str, decoder):
    doc = _load_json(path, what)
    try:
        return decoder(doc)
    except SchemaError as exc:
        raise UsageError(f"{path}: {exc}") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"{path}: invalid {what}: {exc}") from None


def _curvature(cfg: RunConfig, rng) -> CurvatureTensor:
    path = cfg.inputs.get("curvature")
    if path:
        kappa = _decode(path, "curvature", curvature_from_json)
        if kappa.n != cfg.n:
            cfg.n = kappa.n
            if kappa.n % 2 and cfg.command in ("ahat", "heat"):
                raise UsageError(f"{path}: spinor computations need even n, got {kappa.n}")
        return kappa
    return random_curvature(rng, cfg.n)


def _number(x) -> object:
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else float(x)
    if isinstance(x, complex):
        return scalar_to_json(x) if x.imag else x.real
    return x


# -- subcommands ------------------------------------------------------------------------

def cmd_verify(cfg: RunConfig) -> tuple[int, dict, list | None]:
    sign = -TWIST_SIGN if cfg.fault == "twist-sign" else TWIST_SIGN
    scfg = SuiteConfig(seed=cfg.seed, n=cfg.n, jet_order=cfg.jet_order, grid=cfg.grid or 64,
                       twist_sign=sign, scale="full" if cfg.full else "quick", only=cfg.suites)
    report = run_suites(scfg)
    report["fault"] = cfg.fault
    rows = [{"suite": r["suite"], "identity": r["identity"], "passed": r["passed"],
             "cases": r["cases"], "max_residual": r["max_residual"]} for r in report["results"]]
    return (EXIT_OK if report["passed"] else EXIT_VIOLATION), report, rows


def cmd_ahat(cfg: RunConfig) -> tuple[int, dict, list | None]:
    kappa = _curvature(cfg, random.Random(cfg.seed))
    form = a_hat(kappa)
    grades = {}
    for mask, c in form.items():
        key = f"grade{popcount(mask)}"
        grades.setdefault(key, Multivector.zero(form.n))
        grades[key] = grades[key] + Multivector(form.n, {mask: c})
    doc = {"n": kappa.n, "seed": cfg.seed, "a_hat": multivector_to_json(form),
           "grades": {k: _number(v.scalar_part()) if k == "grade0" else multivector_to_json(v)
                      for k, v in sorted(grades.items())},
           "top_coefficient": _number(form.top_coefficient())}
    rows = [{"blades": " ".join(str(i + 1) for i in range(form.n) if m >> i & 1) or "1",
             "grade": popcount(m), "coefficient": str(c)} for m, c in sorted(form.items())]
    return EXIT_OK, doc, rows


def cmd_supertrace(cfg: RunConfig) -> tuple[int, dict, list | None]:
    rng = random.Random(cfg.seed)
    path = cfg.inputs.get("section")
    if path:
        section = _decode(path, "section", torus_section_from_json)
    else:
        section = random_torus_section(rng, cfg.n, [-cfg.n - 1, -cfg.n, 0, 1], max_freq=2, max_sin=2,
                                       trace_term=True)
    n = section.n
    if n % 2:
        raise UsageError(f"supertraces need even n, got {n}")
    try:
        poly = str_lambda_algebraic(section)
        boundary = torus_boundary_value(section)
    except CertificateError as exc:
        return EXIT_VIOLATION, {"error": "certificate", "detail": str(exc)}, None
    G = cfg.grid or (16 if n <= 2 else 8)
    needed = 2 * section.bandwidth() + 1
    if G < needed:
        G = 1 << (needed - 1).bit_length()
    rows = []
    for lam in cfg.lambdas:
        if lam == 0:
            value = complex(boundary.top_coefficient())
        else:
            value = str_lambda_quadrature(section, lam, G)
        poly_value = complex(poly(Fraction(lam)))
        rows.append({"lambda": lam, "str": _clean(value), "polynomial": _clean(poly_value),
                     "abs_error": abs(value - poly_value)})
    limit = two_over_i_power(n) * poly(0)
    zero_trace = str_zero(boundary)
    ok = limit == zero_trace and all(r["abs_error"] <= 1e-8 * max(1.0, abs(complex(r["polynomial"])))
                                      for r in rows)
    doc = {"n": n, "seed": cfg.seed, "grid": G, "table": rows,
           "trace_polynomial": [_number(c) for c in poly.to_list()],
           "str_zero": _number(complex(zero_trace)), "normalized_limit": _number(complex(limit)),
           "consistent": ok, "section": torus_section_to_json(section)}
    return (EXIT_OK if ok else EXIT_VIOLATION), doc, rows


def _clean(z: complex):
    z = complex(z)
    return z.real if z.imag == 0 else scalar_to_json(z)


def cmd_heat(cfg: RunConfig) -> tuple[int, dict, list | None]:
    kappa = _curvature(cfg, random.Random(cfg.seed))
    dens = [index_density(kappa, t) for t in cfg.taus]
    predicted = ahat_density(kappa)
    spread = max((abs(a - b) for a in dens for b in dens), default=0.0)
    gap = max((abs(d - predicted) for d in dens), default=0.0)
    ok = spread <= DENSITY_TOL and gap <= DENSITY_TOL
    rows = [{"tau": t, "density": _clean(d)} for t, d in zip(cfg.taus, dens)]
    doc = {"n": kappa.n, "seed": cfg.seed, "table": rows, "max_deviation": spread,
           "a_hat_density": _clean(predicted), "a_hat_gap": gap, "consistent": ok}
    return (EXIT_OK if ok else EXIT_VIOLATION), doc, rows


def _fiber_inputs(cfg: RunConfig, rng) -> tuple[FiberFunction, FiberFunction]:
    out = []
    for key in ("phi1", "phi2"):
        path = cfg.inputs.get(key)
        if path:
            out.append(_decode(path, "fiber function", fiber_function_from_json))
        else:
            out.append(FiberFunction.from_gaussian(random_gaussian(rng, cfg.n, cfg.n)))
    return out[0], out[1]


def cmd_convolve(cfg: RunConfig) -> tuple[int, dict, list | None]:
    rng = random.Random(cfg.seed)
    kappa = _curvature(cfg, rng)
    f1, f2 = _fiber_inputs(cfg, rng)
    if not (f1.n == f2.n == kappa.n):
        raise UsageError("fiber functions and curvature have different dimensions")
    n = kappa.n
    G = cfg.grid or 64
    grid = FiberGrid(n, G, cfg.radius)
    probes = [[0.0] * n] + [[round(rng.uniform(-2, 2) / grid.h) * grid.h for _ in range(n)]
                            for _ in range(4)]
    doc = {"n": n, "seed": cfg.seed, "backend": cfg.backend}
    if cfg.backend == "gaussian":
        if f1.backend != "gaussian" or f2.backend != "gaussian":
            raise UsageError("the gaussian backend needs gaussian inputs")
        result = twisted_convolve(f1, f2, kappa)
        doc["result"] = fiber_function_to_json(result)
        values = [result(X) for X in probes]
    else:
        result = twisted_convolve(f1.to_grid(grid), f2.to_grid(grid), kappa)
        doc.update(G=G, radius=cfg.radius)
        values = [result(X) for X in probes]
    rows = [{"X": " ".join(repr(x) for x in X), "value": repr(v)} for X, v in zip(probes, values)]
    doc["probes"] = [{"X": X, "value": multivector_to_json(v)} for X, v in zip(probes, values)]
    return EXIT_OK, doc, rows


def cmd_compose(cfg: RunConfig) -> tuple[int, dict, list | None]:
    rng = random.Random(cfg.seed)
    sections = []
    for key in ("section", "section2"):
        path = cfg.inputs.get(key)
        if path:
            sections.append(_decode(path, "section", torus_section_from_json))
        else:
            sections.append(random_torus_section(rng, cfg.n, [-1, 0, 1], max_freq=2, max_sin=2))
    s1, s2 = sections
    if s1.n != s2.n:
        raise UsageError("sections have different dimensions")
    lam = cfg.lambdas[0]
    if lam == 0:
        raise UsageError("compose works on a slice with lambda != 0")
    G = cfg.grid or 16
    if s1.n * G.bit_length() > 14:
        raise UsageError(f"grid {G} in dimension {s1.n} is too large for dense kernels")
    k1, k2 = eps_lambda(s1, lam, G), eps_lambda(s2, lam, G)
    composed = compose_kernels(k1, k2)
    direct = eps_lambda(torus_product(s1, s2), lam, G)
    scale = max(float(np.abs(direct.samples).max()), 1e-300)
    rel = float(np.abs(composed.samples - direct.samples).max()) / scale
    ok = rel <= 1e-10
    doc = {"n": s1.n, "seed": cfg.seed, "lambda": lam, "G": G, "relative_error": rel,
           "consistent": ok, "resolves_bandwidth": 2 * torus_product(s1, s2).bandwidth() < G, "kernel": kernel_metadata(composed)}
    blob = cfg.inputs.get("kernel_out")
    if blob:
        with open(blob, "wb") as fh:
            fh.write(kernel_to_bytes(composed))
        doc["kernel_file"] = blob
    return (EXIT_OK if ok else EXIT_VIOLATION), doc, [{"lambda": lam, "G": G, "relative_error": rel}]


COMMANDS = {
    "verify": cmd_verify,
    "ahat": cmd_ahat,
    "supertrace": cmd_supertrace,
    "heat": cmd_heat,
    "convolve": cmd_convolve,
    "compose": cmd_compose,
}


# -- argument parsing ------------------------------------------------------------------------

def _float_list(text: str) -> list[float]:
    try:
        return [float(Fraction(t)) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=None, help="dimension of the tangent fiber")
    common.add_argument("--jet-order", type=int, default=6, help="jet truncation order N")
    common.add_argument("--grid", type=int, default=None, help="grid points per axis (power of two)")
    common.add_argument("--lambda", dest="lambdas", type=_float_list, default=None,
                        help="comma-separated lambda values")
    common.add_argument("--tau", dest="taus", type=_float_list, default=None,
                        help="comma-separated heat times")
    common.add_argument("--backend", choices=("gaussian", "grid"), default="gaussian")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
    common.add_argument("--output", default=None, help="write the result here instead of stdout")

    parser = argparse.ArgumentParser(prog="getzler", description="Checks and computations for Getzler rescaling.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="run the property suites")
    p.add_argument("--suite", action="append", choices=SUITE_NAMES, default=None)
    p.add_argument("--full", action="store_true", help="use the full case counts")
    p.add_argument("--inject-fault", choices=("twist-sign",), default=None,
                   help="run against a deliberately broken build")

    p = sub.add_parser("ahat", parents=[common], help="A-hat form of a curvature tensor")
    p.add_argument("--curvature", help="curvature JSON (random from --seed if omitted)")

    p = sub.add_parser("supertrace", parents=[common], help="supertrace sweep over lambda")
    p.add_argument("--section", help="torus section JSON (random from --seed if omitted)")

    p = sub.add_parser("heat", parents=[common], help="index density of the model heat kernel")
    p.add_argument("--curvature", help="curvature JSON (random from --seed if omitted)")

    p = sub.add_parser("convolve", parents=[common], help="twisted convolution of two fiber functions")
    p.add_argument("--curvature")
    p.add_argument("--phi1")
    p.add_argument("--phi2")
    p.add_argument("--radius", type=float, default=8.0, help="half-width of the grid box")

    p = sub.add_parser("compose", parents=[common], help="compose torus kernels at one lambda")
    p.add_argument("--section")
    p.add_argument("--section2")
    p.add_argument("--kernel-out", help="write the composed kernel blob here")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    default_n = {"compose": 1, "convolve": 2}.get(args.command, 4)
    cfg = RunConfig(command=args.command, n=args.n if args.n is not None else default_n,
                    jet_order=args.jet_order, grid=args.grid, backend=args.backend,
                    seed=args.seed, fmt=args.fmt, output=args.output)
    if args.lambdas is not None:
        cfg.lambdas = args.lambdas
    elif args.command == "supertrace":
        cfg.lambdas = [1.0, 0.5, 0.1, 0.01, 0.0]
    if args.taus is not None:
        cfg.taus = args.taus
    for key in ("curvature", "section", "section2", "phi1", "phi2", "kernel_out"):
        if getattr(args, key, None):
            cfg.inputs[key] = getattr(args, key)
    cfg.fault = getattr(args, "inject_fault", None)
    cfg.full = getattr(args, "full", False)
    cfg.suites = tuple(getattr(args, "suite", None) or ())
    cfg.radius = getattr(args, "radius", 8.0)
    return cfg


def render(doc: dict, rows: list | None, fmt: str) -> str:
    if fmt == "json":
        return dumps(doc)
    if rows is None:
        rows = [{"key": k, "value": json.dumps(v, sort_keys=True, default=str)} for k, v in sorted(doc.items())]
    buf = io.StringIO()
    fields = list(rows[0].keys()) if rows else ["key", "value"]
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: (json.dumps(v, sort_keys=True) if isinstance(v, (dict, list)) else v)
                         for k, v in r.items()})
    return buf.getvalue()


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = config_from_args(args)
        cfg.validate()
        status, doc, rows = COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"getzler {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render(doc, rows, cfg.fmt)
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
