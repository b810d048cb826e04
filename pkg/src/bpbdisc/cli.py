"""Command line: ``bpbdisc run | map | zoo | verify``.

Exit codes: 0 success, 1 a conclusion or check failed, 2 usage or config
error, 3 a pipeline step refused (the step is named on stderr and in the
report).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import report, zoo
from .core import FiniteDomain, OperatorIntoDisc, bpb_operator
from .discfun import is_power_of_two
from .errors import BpbError, ConfigError

OUTPUT_ENV = "BPBDISC_OUTPUT_DIR"
DEFAULT_OUTPUT = "bpbdisc_out"

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_STEP = 0, 1, 2, 3


def output_dir(explicit: str | None = None, config_value: str | None = None) -> Path:
    path = Path(explicit or config_value or os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT)
    path.mkdir(parents=True, exist_ok=True)
    return path


@dataclass
class RunConfig:
    eps: float
    theta0: float = 0.7
    n: int = 2
    p: float = 2.0
    operator: dict = field(default_factory=lambda: {"zoo": "rank-one"})
    degree: int = 1
    grid: int = 4096
    map_grid: int = 2048
    damping: float = 0.5
    seed: int = 0
    output_dir: str | None = None

    @classmethod
    def from_dict(cls, d: dict, base_dir: Path | None = None) -> RunConfig:
        if "eps" not in d:
            raise ConfigError("config needs 'eps'")
        dom = d.get("domain", {})
        p = dom.get("p", 2.0)
        p = math.inf if str(p).lower() in ("inf", "infinity") else float(p)
        cfg = cls(eps=float(d["eps"]), theta0=float(d.get("theta0", 0.7)), n=int(dom.get("n", 2)), p=p,
                  operator=dict(d.get("operator", {"zoo": "rank-one"})), degree=int(d.get("degree", 1)),
                  grid=int(d.get("grid", 4096)), map_grid=int(d.get("map_grid", 2048)),
                  damping=float(d.get("damping", 0.5)), seed=int(d.get("seed", 0)),
                  output_dir=d.get("output_dir"))
        if "matrix_file" in cfg.operator and base_dir is not None:
            cfg.operator["matrix_file"] = str((base_dir / cfg.operator["matrix_file"]).resolve())
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if not 0.0 < self.eps < 1.0:
            raise ConfigError(f"eps must lie in (0, 1), got {self.eps}")
        if not math.isfinite(self.theta0):
            raise ConfigError("theta0 must be finite")
        if not is_power_of_two(self.grid) or not is_power_of_two(self.map_grid):
            raise ConfigError("grid sizes must be powers of two")
        if self.map_grid < 256:
            raise ConfigError("map_grid must be at least 256")
        if self.n < 1 or not self.p >= 1.0:
            raise ConfigError("domain needs n >= 1 and p >= 1")
        if not 0.0 < self.damping <= 1.0:
            raise ConfigError("damping must lie in (0, 1]")
        if "zoo" not in self.operator and "matrix_file" not in self.operator:
            raise ConfigError("operator needs 'zoo' or 'matrix_file'")

    def to_dict(self) -> dict:
        return {"eps": self.eps, "theta0": self.theta0,
                "domain": {"n": self.n, "p": "inf" if math.isinf(self.p) else self.p},
                "operator": self.operator, "degree": self.degree, "grid": self.grid,
                "map_grid": self.map_grid, "damping": self.damping, "seed": self.seed}


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return RunConfig.from_dict(data, base_dir=path.parent)


def build_input(cfg: RunConfig) -> zoo.PipelineInput:
    op = cfg.operator
    if "matrix_file" in op:
        try:
            data = json.loads(Path(op["matrix_file"]).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read operator file: {exc}") from None
        data.setdefault("domain", {"n": cfg.n, "p": cfg.p})
        T = OperatorIntoDisc.from_dict(data)
        x0 = op.get("x0", data.get("x0"))
        if x0 is None:
            raise ConfigError("explicit operators need 'x0' as [re, im] pairs")
        x0 = np.array([complex(a, b) for a, b in x0])
        if x0.size != T.domain.n:
            raise ConfigError("x0 length does not match the domain")
        return zoo.PipelineInput(T, x0, cfg.theta0, "explicit operator", {"matrix_file": op["matrix_file"]})
    entry = zoo.get(op["zoo"]) if op["zoo"] in zoo.REGISTRY else None
    if entry is None or entry.pipeline is None:
        usable = [k for k, e in zoo.REGISTRY.items() if e.pipeline is not None]
        raise ConfigError(f"zoo entry {op['zoo']!r} cannot drive a run; use one of {usable}")
    params = {"n": cfg.n, "p": cfg.p, "degree": cfg.degree, "eps": cfg.eps, "theta0": cfg.theta0,
              "seed": cfg.seed, **op.get("params", {})}
    return entry.pipeline(**params)


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_run(args) -> int:
    from . import plots
    from .peak import write_eta_csv
    from .stolz import write_boundary_csv

    try:
        cfg = load_config(args.config)
        inp = build_input(cfg)
    except (ConfigError, KeyError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = output_dir(args.out, cfg.output_dir)
    try:
        res = bpb_operator(inp.T, inp.x0, inp.theta0, cfg.eps, map_grid=cfg.map_grid,
                           damping=cfg.damping, sweep_grid=cfg.grid, seed=cfg.seed)
    except BpbError as exc:
        body = {"status": "failed", "failed_step": exc.step, "message": str(exc), "config": cfg.to_dict()}
        report.write(out / "report.json", report.envelope("bpb-operator", body, args.timestamp))
        print(f"failed step [{exc.step}]: {exc}", file=sys.stderr)
        return EXIT_STEP

    body = {"status": "verified" if res.ok else "unverified", "config": cfg.to_dict(),
            "operator": inp.description, "operator_params": inp.params, "result": res.to_dict()}
    report.write(out / "report.json", report.envelope("bpb-operator", body, args.timestamp))
    write_eta_csv(res.N.eta, out / "eta_boundary.csv")
    write_boundary_csv(cfg.eps, out / "stolz_boundary.csv")
    plots.summary_svg(out / "summary.svg", res)

    d = res.distances
    conclusions = {k: d[k] for k in ("Ny0_norm", "x0_y0", "T_minus_N")}
    for k, m in conclusions.items():
        print(f"{'PASS' if m['ok'] else 'FAIL'} {k}: {m['value']:.6g} {m['relation']} {m['target']:.6g}")
    print(f"report written to {out / 'report.json'}")
    return EXIT_OK if all(m["ok"] for m in conclusions.values()) and res.ok else EXIT_FAILED


def map_diagnostics(cmap) -> dict:
    from .margins import margin
    from .stolz import delta1, max_modulus_on_circle

    diag = {
        "residual": margin(cmap.residual, 1e-6, strict=True),
        "psi_at_0": margin(abs(cmap(0.0)), 0.0),
        "psi_at_1": margin(abs(cmap(1.0) - 1.0), 1e-6, strict=True),
        "schwarz": {f"r={r:.1f}": margin(max_modulus_on_circle(cmap, r, 1024), r + 1e-6)
                    for r in np.arange(1, 10) / 10},
    }
    try:
        d1 = delta1(cmap)
        diag["delta1"] = margin(d1, cmap.eps, strict=True)
        diag["delta1_inclusion"] = margin(max_modulus_on_circle(cmap, d1, 1024), cmap.eps**2, strict=True)
    except BpbError as exc:
        diag["delta1_error"] = str(exc)
    return diag


def cmd_map(args) -> int:
    from .stolz import theodorsen_solve, write_boundary_csv

    if not 0.0 < args.eps < 1.0:
        print("config error: eps must lie in (0, 1)", file=sys.stderr)
        return EXIT_USAGE
    try:
        cmap = theodorsen_solve(args.eps, args.grid, args.damping)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = output_dir(args.out)
    diag = map_diagnostics(cmap)
    body = {"map": cmap.to_dict(), "diagnostics": diag}
    report.write(out / "map.json", report.envelope("conformal-map", body, args.timestamp))
    write_boundary_csv(args.eps, out / "stolz_boundary.csv")
    cmap.write_correspondence_csv(out / "map_correspondence.csv")
    from .margins import all_ok

    ok = cmap.converged and all_ok(diag) and "delta1_error" not in diag
    print(f"{'PASS' if ok else 'FAIL'} eps={args.eps:g} residual={cmap.residual:.3g} "
          f"iterations={cmap.iterations} delta1={diag.get('delta1', {}).get('value', float('nan')):.6g}")
    if not cmap.converged:
        print("conformal map did not converge; retry with smaller --damping", file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAILED


def cmd_zoo(args) -> int:
    if args.list:
        for name in sorted(zoo.REGISTRY):
            e = zoo.REGISTRY[name]
            tag = " [pipeline]" if e.pipeline is not None else ""
            print(f"{name:20s} {e.summary}{tag}")
        return EXIT_OK
    try:
        entry = zoo.get(args.name)
    except KeyError as exc:
        print(f"usage error: {exc.args[0]}", file=sys.stderr)
        return EXIT_USAGE
    demo = entry.demo()
    out = output_dir(args.out)
    report.write(out / f"zoo_{entry.name}.json", report.envelope("zoo", {"name": entry.name, "demo": demo},
                                                                 args.timestamp))
    if "table" in demo:
        zoo.write_equicontinuity_csv(demo["table"], out / f"zoo_{entry.name}.csv")
    print(report.dumps({"name": entry.name, "summary": entry.summary, "demo": demo}), end="")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_suite

    checks = run_suite(args.suite)
    out = output_dir(args.out)
    ok = all(c["ok"] for c in checks)
    report.write(out / f"verify_{args.suite}.json",
                 report.envelope("verify", {"suite": args.suite, "passed": ok, "checks": checks}, args.timestamp))
    for c in checks:
        print(f"{'PASS' if c['ok'] else 'FAIL'} {args.suite}:{c['name']}")
    return EXIT_OK if ok else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    from .verify import SUITES

    parser = argparse.ArgumentParser(prog="bpbdisc", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help=f"output directory (default: ${OUTPUT_ENV} or ./{DEFAULT_OUTPUT})")
    common.add_argument("--timestamp", help=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", parents=[common], help="perturb an operator into a norm-attaining one")
    p_run.add_argument("--config", required=True, help="JSON run configuration")
    p_run.set_defaults(func=cmd_run)

    p_map = sub.add_parser("map", parents=[common], help="solve and check the Stolz-region Riemann map")
    p_map.add_argument("--eps", type=float, required=True)
    p_map.add_argument("--grid", type=int, default=2048)
    p_map.add_argument("--damping", type=float, default=0.5)
    p_map.set_defaults(func=cmd_map)

    p_zoo = sub.add_parser("zoo", parents=[common], help="list or show example operators")
    g = p_zoo.add_mutually_exclusive_group(required=True)
    g.add_argument("--list", action="store_true")
    g.add_argument("--name")
    p_zoo.set_defaults(func=cmd_zoo)

    p_ver = sub.add_parser("verify", parents=[common], help="run a self-check suite")
    p_ver.add_argument("--suite", required=True, choices=sorted(SUITES))
    p_ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
