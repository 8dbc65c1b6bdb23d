"""Command-line harness: ``lanfa run | quadform | linsys | gen``.

Every subcommand accepts ``--config file.toml``; flags given on the command
line override values from the file. CSV outputs start with the full
configuration as ``#``-prefixed TOML lines.

Exit codes: 0 success, 2 configuration error, 3 bound violation,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import asdict, dataclass, fields

import numpy as np
import tomli_w

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import __version__
from .bounds import bound_curve, default_setup, quadform_bound_curve, snap_breakpoint
from .contours import IntervalSet
from .errors import (
    DomainError,
    EnclosureError,
    LanfaError,
    MatrixMarketError,
    SingularIntegrandError,
    SingularShiftError,
    ValidationError,
)
from .functions import parse_function
from .lanczos import lanczos
from .linalg import read_matrix_market, write_matrix_market
from .linsys import cg_apriori_bound, galerkin_from_minres, residual_history
from .problems import GENERATORS, ProblemSpec, gen_rhs

EXIT_OK, EXIT_CONFIG, EXIT_VIOLATION, EXIT_NUMERICAL = 0, 2, 3, 4

RUN_COLUMNS = ["k", "true_err", "err_w", "res_w", "integral_term", "bound", "fp_term", "quad_err"]
QUADFORM_COLUMNS = ["k", "true_qf_err", "res_w_sq", "integral_term", "bound", "quad_err"]
LINSYS_COLUMNS = ["k", "lanczos_res", "minres_res", "galerkin_pred", "cg_bound"]


@dataclass
class RunConfig:
    """Everything needed to reproduce one experiment; ``None`` means "use the default"."""

    problem: str = "uniform"
    matrix: str | None = None
    n: int | None = None
    lmin: float | None = None
    lmax: float | None = None
    rho: float | None = None
    lambda1: float | None = None
    lambdan: float | None = None
    kappa: float | None = None
    m: int | None = None
    rhs: str = "equal"
    f: str = "sqrt"
    a: float | None = None
    q: float | None = None
    coeffs: list | None = None
    contour: str | None = None
    w: float | None = None
    r: float | None = None
    eps: float | None = None
    norm: str | None = None
    sets: str = "aposteriori"
    S0: str | None = None
    kmax: int = 60
    precision: str = "fp64"
    reorth: bool = True
    fp_term: bool = False
    quad_tol: float = 1e-8
    seed: int = 0
    jobs: int = 1
    out: str | None = None

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def to_toml(self) -> str:
        # TOML has no null; unset values are simply omitted
        return tomli_w.dumps({k: v for k, v in asdict(self).items() if v is not None})

    @classmethod
    def from_toml(cls, text):
        return cls.from_dict(tomllib.loads(text))

    def validate(self):
        if self.matrix is None and self.problem not in GENERATORS:
            raise ValidationError(f"unknown problem {self.problem!r}; choose from {sorted(GENERATORS)}")
        if self.sets not in ("apriori", "aposteriori"):
            raise ValidationError(f"--sets must be apriori or aposteriori, got {self.sets!r}")
        if self.precision not in ("fp64", "fp32"):
            raise ValidationError(f"--precision must be fp64 or fp32, got {self.precision!r}")
        if self.contour not in (None, "pacman", "circle", "double_circle"):
            raise ValidationError(f"unknown contour {self.contour!r}")
        if int(self.kmax) < 1:
            raise ValidationError(f"--kmax must be positive, got {self.kmax}")
        if not self.quad_tol > 0:
            raise ValidationError(f"--quad-tol must be positive, got {self.quad_tol}")


# --------------------------------------------------------------------------
# building blocks


def problem_spec(cfg: RunConfig) -> ProblemSpec:
    params = {k: getattr(cfg, k) for k in ("n", "lmin", "lmax", "rho", "lambda1", "lambdan", "kappa", "m")}
    return ProblemSpec(cfg.problem, params, seed=cfg.seed, rhs=cfg.rhs)


def build_problem(cfg: RunConfig):
    """``(A, b)`` from a bundled generator or a Matrix Market file."""
    if cfg.matrix is None:
        return problem_spec(cfg).build()
    A = read_matrix_market(cfg.matrix)
    return A, gen_rhs(ProblemSpec("uniform", seed=cfg.seed, rhs=cfg.rhs), A)


def build_function(cfg: RunConfig, A):
    a = cfg.a
    if a is None and cfg.f in ("step", "abs", "stepx"):
        a = snap_breakpoint(A.spectrum.eigenvalues, 0.6)
    return parse_function(cfg.f, a=a, q=cfg.q, coeffs=cfg.coeffs)


def build_setup(cfg: RunConfig, A, f):
    S0 = IntervalSet.parse(cfg.S0) if cfg.S0 else None
    return default_setup(A, f, contour=cfg.contour, w=cfg.w, norm=cfg.norm, r=cfg.r,
                         eps=cfg.eps, S0=S0)


def _kmax(cfg, A):
    # the Krylov space cannot exceed the dimension
    return min(int(cfg.kmax), A.n)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_csv(cfg: RunConfig, columns, rows, stream=None):
    """Config comment block, header, then one line per row (sequences of values)."""
    buf = io.StringIO()
    for line in cfg.to_toml().splitlines():
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    text = buf.getvalue()
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        (stream or sys.stdout).write(text)
    return text


def read_csv(path):
    """``(config, header, rows)`` from a file written by this tool."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    comment = "\n".join(l[2:] for l in lines if l.startswith("# "))
    body = [l for l in lines if not l.startswith("#")]
    rows = list(csv.reader(body))
    return RunConfig.from_toml(comment), rows[0], rows[1:]


# --------------------------------------------------------------------------
# commands


def cmd_run(cfg: RunConfig):
    """Bound curve for ``f(A) b``; returns ``(rows, report)``."""
    cfg.validate()
    A, b = build_problem(cfg)
    f = build_function(cfg, A)
    su = build_setup(cfg, A, f)
    rep = bound_curve(A, b, f, su.contour, su.w, cfg.sets, su.norm, _kmax(cfg, A), S0=su.S0,
                      S_apriori=su.S_apriori, reorth=cfg.reorth, precision=cfg.precision,
                      fp_term=cfg.fp_term, tol=cfg.quad_tol, jobs=cfg.jobs)
    rows = [[r.k, r.true_err, r.err_w, r.res_w, r.integral_term, r.bound, r.fp_term, r.quad_err]
            for r in rep.rows]
    return rows, rep


def cmd_quadform(cfg: RunConfig):
    cfg.validate()
    A, b = build_problem(cfg)
    f = build_function(cfg, A)
    su = build_setup(cfg, A, f)
    rep = quadform_bound_curve(A, b, f, su.contour, su.w, cfg.sets, _kmax(cfg, A), S0=su.S0,
                               S_apriori=su.S_apriori, reorth=cfg.reorth,
                               precision=cfg.precision, tol=cfg.quad_tol, jobs=cfg.jobs,
                               fp_term=cfg.fp_term)
    rows = [[r.k, r.true_qf_err, r.res_w_sq, r.integral_term, r.bound, r.quad_err] for r in rep.rows]
    return rows, rep


def cmd_linsys(cfg: RunConfig):
    """Residual norms of Lanczos (Galerkin) and MINRES for ``(A - wI) x = b``.

    ``galerkin_pred`` is the Galerkin residual predicted from MINRES and
    ``cg_bound`` the relative CG bound ``2((sqrt(kappa)-1)/(sqrt(kappa)+1))^k``
    (empty when ``A - wI`` is not positive definite).
    """
    cfg.validate()
    A, b = build_problem(cfg)
    w = 0.0 if cfg.w is None else float(cfg.w)
    fact = lanczos(A, b, _kmax(cfg, A), reorth=cfg.reorth, precision=cfg.precision)
    hist = residual_history(fact, w)
    pred = galerkin_from_minres(hist.minres_res_2norms) * fact.b_norm
    lam = A.spectrum.eigenvalues
    kappa = (lam[-1] - w) / (lam[0] - w) if lam[0] > w else None
    rows = []
    for k in range(fact.k + 1):
        cg = cg_apriori_bound(kappa, k) if kappa is not None else None
        rows.append([k, hist.lanczos_res_2norms[k], hist.minres_res_2norms[k], pred[k], cg])
    return rows, hist


def cmd_gen(cfg: RunConfig):
    cfg.validate()
    if not cfg.out:
        raise ValidationError("gen needs --out")
    A = problem_spec(cfg).operator()
    keep = {"problem", "n", "lmin", "lmax", "rho", "lambda1", "lambdan", "kappa", "m", "seed"}
    meta = {k: v for k, v in asdict(cfg).items() if k in keep and v is not None}
    write_matrix_market(A, cfg.out, comment=tomli_w.dumps(meta).strip())
    return A


# --------------------------------------------------------------------------
# argument handling


def _add_common(p):
    p.add_argument("--config", help="TOML config file; flags override its values")
    g = p.add_argument_group("problem")
    g.add_argument("--problem", choices=sorted(GENERATORS))
    g.add_argument("--matrix", help="Matrix Market file used instead of a generator")
    for name, typ in (("n", int), ("lmin", float), ("lmax", float), ("rho", float),
                      ("lambda1", float), ("lambdan", float), ("kappa", float), ("m", int)):
        g.add_argument(f"--{name}", type=typ)
    g.add_argument("--rhs", choices=("equal", "gaussian"))
    g.add_argument("--seed", type=int)
    p.add_argument("--out", help="output path (stdout when omitted)")


def _add_experiment(p, with_f=True):
    if with_f:
        p.add_argument("--f", help="sqrt, log, inv, xq, exp, one, step, abs, stepx, poly")
        p.add_argument("--a", type=float, help="breakpoint of step, abs and stepx")
        p.add_argument("--q", type=float, help="power for xq")
        p.add_argument("--coeffs", type=lambda s: [float(c) for c in s.split(",")],
                       help="ascending polynomial coefficients, comma separated")
        p.add_argument("--contour", choices=("pacman", "circle", "double_circle"))
        p.add_argument("--r", type=float, help="Pac-Man inner radius")
        p.add_argument("--eps", type=float, help="double-circle gap")
        p.add_argument("--norm", choices=("2", "a", "a2"))
        p.add_argument("--sets", choices=("apriori", "aposteriori"))
        p.add_argument("--S0", help='spectrum enclosure "l:u[,l:u]"')
        p.add_argument("--quad-tol", dest="quad_tol", type=float)
        p.add_argument("--jobs", type=int)
    p.add_argument("--w", type=float, help="shift of the auxiliary linear system")
    p.add_argument("--kmax", type=int)
    p.add_argument("--precision", choices=("fp64", "fp32"))
    p.add_argument("--no-reorth", dest="reorth", action="store_false", default=None)
    if with_f:
        p.add_argument("--fp-term", dest="fp_term", action="store_true", default=None)


def make_parser():
    parser = argparse.ArgumentParser(prog="lanfa", description="Lanczos-FA error bounds")
    parser.add_argument("--version", action="version", version=f"lanfa {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, hlp in (("run", "bound curve for f(A) b"),
                      ("quadform", "bound curve for b^T f(A) b")):
        p = sub.add_parser(name, help=hlp)
        _add_common(p)
        _add_experiment(p)
    p = sub.add_parser("linsys", help="Lanczos and MINRES residuals for (A - wI) x = b")
    _add_common(p)
    _add_experiment(p, with_f=False)
    p = sub.add_parser("gen", help="write a bundled problem as Matrix Market")
    _add_common(p)
    return parser


def config_from_args(args) -> RunConfig:
    base = {}
    if getattr(args, "config", None):
        with open(args.config, "rb") as fh:
            base = tomllib.load(fh)
    names = {f.name for f in fields(RunConfig)}
    overrides = {k: v for k, v in vars(args).items() if k in names and v is not None}
    base.update(overrides)
    return RunConfig.from_dict(base)


COMMANDS = {"run": (cmd_run, RUN_COLUMNS), "quadform": (cmd_quadform, QUADFORM_COLUMNS),
            "linsys": (cmd_linsys, LINSYS_COLUMNS)}


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = config_from_args(args)
        if args.command == "gen":
            cmd_gen(cfg)
            return EXIT_OK
        fn, columns = COMMANDS[args.command]
        rows, rep = fn(cfg)
    except (OSError, tomllib.TOMLDecodeError, TypeError, MatrixMarketError) as exc:
        print(f"lanfa: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SingularShiftError, SingularIntegrandError, np.linalg.LinAlgError,
            FloatingPointError) as exc:
        print(f"lanfa: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValidationError, DomainError, EnclosureError) as exc:
        print(f"lanfa: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LanfaError as exc:
        print(f"lanfa: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    write_csv(cfg, columns, rows)
    if args.command in ("run", "quadform"):
        bad = [r.k for r in rep.rows if not r.holds]
        if bad:
            print(f"lanfa: bound violated at k = {bad}", file=sys.stderr)
            return EXIT_VIOLATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
