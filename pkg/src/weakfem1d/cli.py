"""Command-line front end for solves and convergence studies.

    python -m weakfem1d solve --problem paper-5.6 --k 2 --mesh 8 --method both
    python -m weakfem1d convergence --problem paper-5.6 --k 0 --levels 4,8,16,32 --format markdown

Settings may also come from a JSON file (``--config run.json``) holding the
same keys as :class:`RunConfig`; command-line flags override file values.
``problem`` is a registry key or an inline object::

    {"a": 0, "b": 1, "a2": [{"poly": [1, 0, 1]}], "a0": 0, "a1": 1,
     "f": 1, "solution": {...}, "a_min": 1, "name": "mine"}

with coefficients written as described in :mod:`weakfem1d.expressions`.
``f`` may be omitted when ``solution`` is given.  ``a_min`` is required: it is
the certified lower bound of a2 used by the stability check.

Exit status: 0 success, 2 invalid configuration, 3 file error, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from typing import Any

import numpy as np

from . import __version__
from .analysis import convergence_study, errors
from .expressions import parse_expression
from .mesh import mesh_from_config, uniform_mesh
from .problem import REGISTRY, GeneralProblem, ManufacturedSolution, Problem, get_problem, to_self_adjoint
from .solver import AssemblyError, solve, stability_check
from .weak_space import check_degrees

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4
MAX_DEGREE = 6
COMMANDS = ("solve", "convergence")
METHODS = ("global", "sweep", "both")
FORMATS = ("csv", "markdown", "json")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    problem: Any = "paper-5.6"
    k: int = 1
    r: int | None = None
    mesh: Any = field(default_factory=lambda: {"uniform": 8})
    levels: list[int] = field(default_factory=lambda: [4, 8, 16, 32, 64])
    method: str = "global"
    quad_order: int | None = None
    format: str = "json"
    out: str | None = None
    allow_higher_r: bool = False

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ConfigError(f"command must be one of {COMMANDS}, got {self.command!r}")
        if isinstance(self.k, bool) or not isinstance(self.k, int) or not 0 <= self.k <= MAX_DEGREE:
            raise ConfigError(f"k must be an integer in 0..{MAX_DEGREE}, got {self.k!r}")
        if self.r is not None:
            if isinstance(self.r, bool) or not isinstance(self.r, int):
                raise ConfigError(f"r must be an integer, got {self.r!r}")
            try:
                check_degrees(self.k, self.r, self.allow_higher_r)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.format!r}")
        if self.quad_order is not None and (not isinstance(self.quad_order, int) or not 1 <= self.quad_order <= 64):
            raise ConfigError(f"quad_order must be an integer in 1..64, got {self.quad_order!r}")
        if self.command == "convergence":
            if not isinstance(self.levels, list) or not self.levels:
                raise ConfigError("convergence needs a nonempty list of element counts")
            if any(isinstance(n, bool) or not isinstance(n, int) or n < 1 for n in self.levels):
                raise ConfigError(f"levels must be positive integers, got {self.levels!r}")
        if not isinstance(self.problem, (str, dict)):
            raise ConfigError("problem must be a registry key or an inline object")
        return self

    @property
    def n_q(self) -> int:
        return self.k + 4 if self.quad_order is None else self.quad_order


# ---------------------------------------------------------------------------
# problem construction
# ---------------------------------------------------------------------------

_INLINE_KEYS = {"a", "b", "a2", "a0", "a1", "f", "solution", "a_min", "name"}


def build_problem(spec: Any) -> tuple[Problem, ManufacturedSolution | None]:
    """Registry key or inline object -> (self-adjoint problem, exact solution or None)."""
    if isinstance(spec, str):
        try:
            return get_problem(spec)
        except KeyError:
            raise ConfigError(f"unknown problem {spec!r}; known: {', '.join(sorted(REGISTRY))}") from None
    unknown = set(spec) - _INLINE_KEYS
    if unknown:
        raise ConfigError(f"unknown inline problem keys {sorted(unknown)}")
    for key in ("a2", "a_min"):
        if key not in spec:
            raise ConfigError(f"inline problem needs {key!r}")
    try:
        a, b = float(spec.get("a", 0.0)), float(spec.get("b", 1.0))
        a2 = parse_expression(spec["a2"])
        a0 = parse_expression(spec.get("a0", 0))
        a1 = parse_expression(spec["a1"]) if "a1" in spec else None
        sol = parse_expression(spec["solution"]) if "solution" in spec else None
        name = str(spec.get("name", "inline"))
        grid = np.linspace(a, b, 4097)
        a_min = float(spec["a_min"])
        if not a_min > 0:
            raise ConfigError(f"a_min must be positive, got {a_min}")
        if np.any(a2(grid) < a_min):
            raise ConfigError(f"a2 drops below a_min = {a_min} on [{a}, {b}]")
        if np.any(a0(grid) < 0):
            raise ConfigError("a0 must be nonnegative")
        m = None
        if sol is not None:
            du = sol.derivative()
            m = ManufacturedSolution(sol, du, du.derivative())
            m.check_boundary(a, b, tol=1e-10)
        if "f" in spec:
            f = parse_expression(spec["f"])
        elif m is not None:
            a2p = a2.derivative()

            def f(x, a1=a1):
                x = np.asarray(x, dtype=float)
                out = -(a2p(x) * m.u_prime(x) + a2(x) * m.u_double_prime(x)) + a0(x) * m.u(x)
                return out + a1(x) * m.u_prime(x) if a1 is not None else out
        else:
            raise ConfigError("inline problem needs 'f' or 'solution'")
        if a1 is None:
            return Problem(a, b, a2, a0, f, a_min, a2_prime=a2.derivative(), name=name), m
        g = GeneralProblem(a, b, a1, a2, a0, f, a_min, a2_prime=a2.derivative(), name=name)
        return to_self_adjoint(g)[0], m
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid inline problem: {exc}") from None


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _provenance(cfg: RunConfig) -> dict:
    return {
        "package": "weakfem1d",
        "version": __version__,
        "command": cfg.command,
        "problem": cfg.problem,
        "k": cfg.k,
        "r": cfg.k + 1 if cfg.r is None else cfg.r,
        "n_q": cfg.n_q,
        "method": cfg.method,
    }


def _max_discrepancy(s1, s2) -> float:
    return float(np.max(np.abs(s1.u_h.to_vector() - s2.u_h.to_vector())))


def run_solve(cfg: RunConfig) -> str:
    p, m = build_problem(cfg.problem)
    try:
        mesh = mesh_from_config(cfg.mesh if not isinstance(cfg.mesh, int) else {"uniform": cfg.mesh}, p.a, p.b)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid mesh: {exc}") from None
    primary = "sweep" if cfg.method == "sweep" else "global"
    opts = dict(n_q=cfg.n_q, r=cfg.r, allow_higher_r=cfg.allow_higher_r)
    sol = solve(p, mesh, cfg.k, method=primary, **opts)
    result: dict[str, Any] = {"provenance": _provenance(cfg)}
    result["provenance"]["mesh"] = cfg.mesh
    result["nodes"] = mesh.nodes.tolist()
    result["node_values"] = sol.u_h.node_values.tolist()
    result["interior"] = sol.u_h.interior.tolist()
    st = stability_check(sol, p)
    result["stability"] = {"lhs": st.lhs, "bound": st.rhs, "factor": st.factor, "f_norm": st.f_norm, "holds": st.holds}
    result["diagnostics"] = {primary: sol.diagnostics}
    if cfg.method == "both":
        other = solve(p, mesh, cfg.k, method="sweep", **opts)
        result["diagnostics"]["sweep"] = other.diagnostics
        result["dof_discrepancy"] = _max_discrepancy(sol, other)
    if m is not None:
        result["errors"] = asdict(errors(sol, m, cfg.n_q))
    return _format_solve(result, cfg.format)


def _summary_pairs(result: dict) -> list[tuple[str, str]]:
    st = result["stability"]
    pairs = [("stability lhs", f"{st['lhs']:.6e}"), ("stability bound", f"{st['bound']:.6e}"),
             ("stability holds", str(st["holds"]).lower())]
    if "dof_discrepancy" in result:
        pairs.append(("max dof discrepancy", f"{result['dof_discrepancy']:.6e}"))
    for key, val in result.get("errors", {}).items():
        if val is not None:
            pairs.append((f"error {key}", f"{val:.6e}"))
    return pairs


def _format_solve(result: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(result, indent=2, sort_keys=True) + "\n"
    nodes, vals, interior = result["nodes"], result["node_values"], result["interior"]
    k = len(interior[0]) - 1
    head = ["i", "x_i", "u_h(x_i)"] + [f"c{j}" for j in range(k + 1)]
    rows = []
    for i, (x, v) in enumerate(zip(nodes, vals)):
        coef = [f"{c:.10e}" for c in interior[i]] if i < len(interior) else [""] * (k + 1)
        rows.append([str(i), f"{x:.10e}", f"{v:.10e}"] + coef)
    if fmt == "csv":
        buf = io.StringIO()
        for key, val in _summary_pairs(result):
            buf.write(f"# {key}: {val}\n")
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(head)
        wr.writerows(rows)
        return buf.getvalue()
    widths = [max(len(r[j]) for r in [head] + rows) for j in range(len(head))]

    def line(r):
        return "| " + " | ".join(c.rjust(w) for c, w in zip(r, widths)) + " |"

    out = [line(head), "|" + "|".join("-" * (w + 1) + ":" for w in widths) + "|"]
    out += [line(r) for r in rows]
    out += [""] + [f"- {key}: {val}" for key, val in _summary_pairs(result)]
    return "\n".join(out) + "\n"


def run_convergence(cfg: RunConfig) -> str:
    p, m = build_problem(cfg.problem)
    if m is None:
        raise ConfigError("convergence needs a problem with a known exact solution")
    key = cfg.problem if isinstance(cfg.problem, str) else (p, m)
    primary = "sweep" if cfg.method == "sweep" else "global"
    rep = convergence_study(key, cfg.k, cfg.levels, method=primary, n_q=cfg.n_q, r=cfg.r,
                            allow_higher_r=cfg.allow_higher_r)
    rep.metadata.update(_provenance(cfg))
    discrepancies = None
    if cfg.method == "both":
        discrepancies = []
        for n in cfg.levels:
            mesh = uniform_mesh(p.a, p.b, n)
            opts = dict(n_q=cfg.n_q, r=cfg.r, allow_higher_r=cfg.allow_higher_r)
            discrepancies.append(_max_discrepancy(solve(p, mesh, cfg.k, method="global", **opts),
                                                  solve(p, mesh, cfg.k, method="sweep", **opts)))
    if cfg.format == "json":
        d = rep.as_dict()
        if discrepancies is not None:
            for lv, dd in zip(d["levels"], discrepancies):
                lv["dof_discrepancy"] = dd
            d["max_dof_discrepancy"] = max(discrepancies)
        return json.dumps(d, indent=2, sort_keys=True) + "\n"
    text = rep.to_csv() if cfg.format == "csv" else rep.to_markdown()
    if discrepancies is not None:
        marker = "#" if cfg.format == "csv" else "-"
        text += f"{marker} max dof discrepancy: {max(discrepancies):.6e}\n"
    return text


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------


def _levels(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"levels must be comma-separated integers, got {text!r}") from None


def _problem(text: str):
    text = text.strip()
    if text.startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise argparse.ArgumentTypeError(f"inline problem is not valid JSON: {exc}") from None
    return text


def _mesh(text: str):
    text = text.strip()
    if text.isdigit():
        return {"uniform": int(text)}
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        raise argparse.ArgumentTypeError(f"mesh must be an element count or JSON, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="weakfem1d", description="Weak Galerkin solver for two-point boundary value problems.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command")
    for name, help_ in (("solve", "solve on one mesh"), ("convergence", "error table over uniform refinements")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", help="JSON file with RunConfig keys; flags override it")
        sp.add_argument("--problem", type=_problem, help="registry key or inline JSON object")
        sp.add_argument("--k", type=int, help="polynomial degree of the interior part")
        sp.add_argument("--r", type=int, help="degree of the weak derivative (default k+1)")
        sp.add_argument("--allow-higher-r", action="store_true", default=None, help="permit r > k+1")
        sp.add_argument("--method", choices=METHODS)
        sp.add_argument("--quad-order", type=int, help="Gauss points per element (default k+4)")
        sp.add_argument("--format", choices=FORMATS)
        sp.add_argument("--out", help="output file (default stdout)")
        if name == "solve":
            sp.add_argument("--mesh", type=_mesh, help="element count or JSON node list / {\"uniform\": n}")
        else:
            sp.add_argument("--levels", type=_levels, help="comma-separated element counts")
    return ap


def load_config(args: argparse.Namespace) -> RunConfig:
    data: dict[str, Any] = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise OSError(f"cannot read config {args.config}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {args.config} is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        names = {f.name for f in fields(RunConfig)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
    data["command"] = args.command
    for key in ("problem", "k", "r", "method", "quad_order", "format", "out", "mesh", "levels", "allow_higher_r"):
        val = getattr(args, key, None)
        if val is not None:
            data[key] = val
    return RunConfig(**data).validate()


def _check_writable(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent):
        raise OSError(f"output directory does not exist: {parent}")
    if os.path.isdir(path) or not os.access(parent, os.W_OK) or (os.path.exists(path) and not os.access(path, os.W_OK)):
        raise OSError(f"output path is not writable: {path}")


def run(cfg: RunConfig) -> str:
    """Execute a validated configuration and return the rendered artifact."""
    return run_solve(cfg) if cfg.command == "solve" else run_convergence(cfg)


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command is None:
        ap.print_help(sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args)
        if cfg.out:
            _check_writable(cfg.out)
        text = run(cfg)
        if cfg.out:
            with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except ConfigError as exc:
        print(f"weakfem1d: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"weakfem1d: file error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (AssemblyError, np.linalg.LinAlgError, FloatingPointError, ArithmeticError) as exc:
        print(f"weakfem1d: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        # raised by the library for inputs the configuration layer cannot see
        # (quadrature hitting a non-finite coefficient, bad mesh nodes, ...)
        print(f"weakfem1d: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
