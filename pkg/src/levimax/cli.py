"""``levi`` command-line front end.

Exit codes: 0 ok, 1 input error, 2 a checked condition fails, 3 numerical
failure (projection, division pole, degenerate gradient).
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__, dfn, reproduce
from .conditions import (
    TAU_SIGN,
    ConditionVerdict,
    VerdictKind,
    admissible_t_window,
    evaluate_point,
    radius_sweep,
    sample_ball,
    scan_region,
)
from .expr import DefiningFunction, DslSyntaxError, eval_gradient_norms
from .levi import BoundaryPoint, project_to_boundary, spectrum_at
from .model import GaussianProfile, ModelData, certify_A_lower_bound, finite_tau_norm, rescaling_frame
from .report import SCHEMA_VERSION, dumps
from .upsilon import (
    UpsilonField,
    example1_upsilon_field,
    example2_b_window,
    example2_required_A,
    example2_upsilon_field,
    expression_field,
    upsilon_positive_projection,
    upsilon_scaled_tangential,
    upsilon_zq_construction,
    validate_upsilon,
    zq_anchor,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CONDITION = 2
EXIT_NUMERIC = 3

COMMANDS = ("analyze", "scan", "certify", "model", "reproduce")
BLOCKING = ("zq", "necessary", "necessary_at_A")


class InputError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    input: str | None = None
    q: int | None = None
    A: float | None = None
    t: float | None = None
    center: str | None = None
    radius: float = 0.05
    samples: int = 200
    seed: int = 0
    tau_sign: float = TAU_SIGN
    out: str | None = None
    radius_sweep: tuple[float, ...] = ()
    tau: tuple[float, ...] = ()
    which: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        if not self.tau_sign > 0:
            raise InputError("--tau-sign must be positive")
        if not self.radius > 0:
            raise InputError("--radius must be positive")
        if self.samples < 1:
            raise InputError("--samples must be at least 1")
        if any(r <= 0 for r in self.radius_sweep) or any(t <= 0 for t in self.tau):
            raise InputError("sweep values must be positive")


@dataclass
class Outcome:
    report: dict[str, Any]
    exit_code: int
    table: list[tuple[str, str]] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Shared plumbing


def _fmt(x: Any) -> str:
    if isinstance(x, (complex, np.complexfloating)):
        return f"{x.real:.10g}{x.imag:+.10g}i"
    if isinstance(x, ConditionVerdict):
        return x.kind.value if x.value is None else f"{x.kind.value} ({_fmt(x.value)})"
    if isinstance(x, (float, np.floating)):
        return "inf" if math.isinf(x) else f"{x:.10g}"
    if isinstance(x, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    return str(x)


def _load(cfg: RunConfig) -> tuple[dfn.DfnFile, DefiningFunction]:
    if cfg.input is None:
        raise InputError("an INPUT.dfn file is required")
    try:
        data = dfn.load(cfg.input)
    except OSError as err:
        raise InputError(f"cannot read {cfg.input}: {err.strerror or err}") from None
    f = data.function
    if cfg.t is not None:
        if "t" not in f.params:
            raise InputError("--t given but the input declares no parameter t")
        f = f.with_params(t=cfg.t)
    return data, f


def _q(cfg: RunConfig, f: DefiningFunction) -> int:
    if f.n < 2:
        raise InputError("need at least two complex variables")
    q = f.n - 1 if cfg.q is None else cfg.q
    if not 1 <= q <= f.n - 1:
        raise InputError(f"--q must lie in [1, {f.n - 1}]")
    return q


def _point_spec(cfg: RunConfig, data: dfn.DfnFile, f: DefiningFunction) -> dfn.PointSpec:
    text = cfg.center if cfg.center is not None else data.anchor
    if text is None:
        return dfn.PointSpec(np.zeros(f.n, dtype=complex), ())
    return dfn.parse_point(text, f.n, f.params)


def _anchor(cfg: RunConfig, data: dfn.DfnFile, f: DefiningFunction) -> BoundaryPoint:
    spec = _point_spec(cfg, data, f)
    return project_to_boundary(f, spec.values, direction=spec.direction())


def _point_json(bp: BoundaryPoint) -> dict[str, Any]:
    return {"coordinates": bp.coordinates, "residual": bp.residual, "iterations": bp.iterations}


def _blocked(verdicts: dict[str, ConditionVerdict]) -> bool:
    return any(
        verdicts[k].kind in (VerdictKind.FAILS, VerdictKind.INFEASIBLE) for k in BLOCKING if k in verdicts
    )


def _envelope(cfg: RunConfig, f: DefiningFunction | None) -> dict[str, Any]:
    out: dict[str, Any] = {"schema_version": SCHEMA_VERSION, "command": cfg.command}
    if f is not None:
        out["input"] = Path(cfg.input).name
        out["n"] = f.n
        out["params"] = dict(sorted(f.params.items()))
        out["defining_function"] = f.source().strip()
    return out


# ---------------------------------------------------------------------------
# Commands


def cmd_analyze(cfg: RunConfig) -> Outcome:
    data, f = _load(cfg)
    q = _q(cfg, f)
    bp = _anchor(cfg, data, f)
    res = evaluate_point(bp, q, cfg.tau_sign, cfg.A)
    jet = bp.jet
    spec = res["spectrum"]
    lam = spec.eigenvalues
    dnorm, gnorm = eval_gradient_norms(jet)
    scale = float(np.max(np.abs(lam))) if lam.size else 0.0
    verdicts = res["verdicts"]
    code = EXIT_CONDITION if _blocked(verdicts) else EXIT_OK
    report = _envelope(cfg, f)
    report.update(
        q=q,
        A=cfg.A,
        point=_point_json(bp),
        jet={"value": jet.value, "dz": jet.dz, "dzdzbar": jet.dzdzbar, "dzdz": jet.dzdz},
        gradient={"del_rho": dnorm, "grad_rho": gnorm},
        frame=res["frame"].columns,
        levi_matrix=res["levi"],
        eigenvalues=lam,
        eigenvectors=spec.eigenvectors,
        formulas={
            "trace": res["trace"],
            "det": res["det"],
            "trace_residual": abs(res["trace"] - float(np.sum(lam))) / (1.0 + scale),
            "det_residual": abs(res["det"] - float(np.prod(lam))) / (1.0 + scale ** lam.size),
        },
        verdicts=verdicts,
        exit_code=code,
    )
    table = [("point", _fmt(bp.coordinates)), ("eigenvalues", _fmt(lam))]
    table += [(k, _fmt(v)) for k, v in verdicts.items()]
    return Outcome(report, code, table)


def _record_json(r) -> dict[str, Any]:
    if r.error is not None:
        return {"index": r.index, "seed": r.seed, "error": r.error}
    return {
        "index": r.index,
        "point": r.point,
        "residual": r.residual,
        "eigenvalues": r.eigenvalues,
        "trace": r.trace,
        "det": r.det,
        "verdicts": r.verdicts,
    }


def cmd_scan(cfg: RunConfig) -> Outcome:
    data, f = _load(cfg)
    q = _q(cfg, f)
    center = _point_spec(cfg, data, f).values
    rep = scan_region(f, center, cfg.radius, cfg.samples, q, cfg.seed, tau_sign=cfg.tau_sign, A=cfg.A)
    summary = rep.summary()
    code = EXIT_CONDITION if summary["any_condition_failure"] else EXIT_OK
    report = _envelope(cfg, f)
    report.update(q=q, A=cfg.A, center=center, radius=cfg.radius, samples=cfg.samples, seed=cfg.seed)
    report["summary"] = summary
    table = [
        ("projected", f"{summary['projected']}/{summary['points']}"),
        ("sup A_min", _fmt(summary["sup_A_min"])),
        ("Z(q) at all samples", _fmt(summary["zq_all_hold"])),
        ("det L <= 0 at all samples", _fmt(summary["det_nonpositive_all"])),
    ]
    if cfg.radius_sweep:
        sweep = radius_sweep(f, center, cfg.radius_sweep, cfg.samples, q, cfg.seed)
        report["radius_sweep"] = [{"radius": r, "sup_A_min": a} for r, a in sweep]
        table += [(f"sup A_min @ r={r:g}", _fmt(a)) for r, a in sweep]
    report["records"] = [_record_json(r) for r in rep.records]
    report["exit_code"] = code
    return Outcome(report, code, table)


def _key_float(keys: dict[str, str], name: str, default: float | None = None) -> float | None:
    raw = keys.get(name)
    if raw is None or raw == "auto":
        return default
    try:
        return float(raw)
    except ValueError:
        raise InputError(f"[upsilon] {name} must be a number or 'auto', got {raw!r}") from None


def _sample(cfg: RunConfig, f: DefiningFunction, center: np.ndarray) -> tuple[list[BoundaryPoint], int]:
    pts, dropped = [], 0
    for s in sample_ball(center, cfg.radius, cfg.samples, cfg.seed):
        try:
            pts.append(project_to_boundary(f, s))
        except ArithmeticError:
            dropped += 1
    if not pts:
        raise ArithmeticError("no sample point could be projected onto the boundary")
    return pts, dropped


def _build_field(cfg: RunConfig, data: dfn.DfnFile, f: DefiningFunction, q: int, pts: list[BoundaryPoint]):
    """Return (field, window constant A, extra report entries) or raise InputError."""
    up = data.upsilon
    keys = up.keys
    kind = keys.get("kind", "user" if up.entries else "")
    eta = _key_float(keys, "eta", 0.0)
    extra: dict[str, Any] = {"kind": kind}
    A_key = cfg.A if cfg.A is not None else _key_float(keys, "A")
    if kind == "example1":
        t = f.params.get("t")
        if t is None:
            raise InputError("kind = example1 needs the parameter t")
        A = A_key or 1.1 * max(1.0 + t, (1.0 + t) / t)
        return example1_upsilon_field(t, eta), A, extra
    if kind == "example2":
        t = f.params.get("t")
        if t is None:
            raise InputError("kind = example2 needs the parameter t")
        a = _key_float(keys, "a", 0.8)
        window = example2_b_window(t, a)
        extra["b_window"] = window
        b = _key_float(keys, "b")
        if b is None:
            if window.empty:
                extra["findings"] = [f"no admissible b for t = {t:g}, a = {a:g}: the b-window is empty"]
                return None, None, extra
            b = window.midpoint
        extra.update(a=a, b=b)
        A = A_key or 1.1 * example2_required_A(a, b)
        return example2_upsilon_field(a, b, t, eta), A, extra
    if kind == "scaled_tangential":
        mode = keys.get("mode", "pcvx")
        level = _key_float(keys, "level")
        if level is None:
            name = "eps_pcvx" if mode == "pcvx" else "eps_pccv"
            evals = [evaluate_point(bp, q, cfg.tau_sign) for bp in pts]
            eps_v = [e["verdicts"][name] for e in evals]
            if any(v.kind in (VerdictKind.FAILS, VerdictKind.INFEASIBLE) for v in eps_v):
                extra["findings"] = [f"{name} does not hold on the sample, so no scaling level is admissible"]
                return None, None, extra
            eps = min((v.value for v in eps_v if v.kind is VerdictKind.HOLDS), default=math.inf)
            amins = [e["verdicts"]["necessary"] for e in evals]
            sup_a = max((v.value for v in amins if v.kind is VerdictKind.HOLDS), default=1.0)
            a_nec = A_key or max(1.1 * sup_a, 2.5)
            window = admissible_t_window(eps, a_nec, mode)
            extra.update(epsilon=eps, A_necessary=a_nec, t_window=window)
            level = window.midpoint
        extra["level"] = level
        # the eigenvalue window constant only has to bracket the level itself
        A = 1.1 * max(1.0 / level, 1.0 / (1.0 - level))
        return UpsilonField("scaled_tangential", f.n, upsilon_scaled_tangential(pts[0].jet, level).entries,
                            eta, options={"t": level}), A, extra
    if kind == "positive_projection":
        frame, _, spec = spectrum_at(pts[0].jet)
        u = upsilon_positive_projection(frame, spec, cfg.tau_sign)
        return u, A_key or 2.5, extra
    if kind == "zq":
        a = _key_float(keys, "a", 0.05)
        b = _key_float(keys, "b", 0.95)
        anchor_bp = _anchor(cfg, data, f)
        anchor = zq_anchor(anchor_bp.jet, None, cfg.tau_sign)
        _, _, spec = spectrum_at(anchor_bp.jet)
        u = upsilon_zq_construction(anchor_bp.jet, spec, a, b, cfg.tau_sign, anchor)
        extra.update(a=a, b=b, negative_count=anchor.m, anchor=anchor_bp.coordinates)
        return u, A_key or 1.1 * max(1.0 / a, 1.0 / (1.0 - b)), extra
    if kind == "user":
        if not up.entries:
            raise InputError("kind = user needs Y[k,j] entries")
        if any(not (1 <= k <= f.n and 1 <= j <= f.n) for k, j in up.entries):
            raise InputError(f"Y indices must lie in [1, {f.n}]")
        if A_key is None:
            raise InputError("kind = user needs A (key or --A)")
        return expression_field(up.entries, f.n, f.params, up.lets, eta), A_key, extra
    raise InputError(f"unknown [upsilon] kind {kind!r}")


def cmd_certify(cfg: RunConfig) -> Outcome:
    data, f = _load(cfg)
    if data.upsilon is None:
        raise InputError("certify needs an [upsilon] section")
    q = _q(cfg, f)
    # sample around --center; otherwise around the anchor the Z(q) field is
    # frozen at, or the origin for fields that certify a neighbourhood of 0
    if data.upsilon.keys.get("kind") == "zq":
        center = _anchor(cfg, data, f).coordinates
    elif cfg.center is not None:
        center = dfn.parse_point(cfg.center, f.n, f.params).values
    else:
        center = np.zeros(f.n, dtype=complex)
    pts, dropped = _sample(cfg, f, center)
    u, A, extra = _build_field(cfg, data, f, q, pts)
    report = _envelope(cfg, f)
    report.update(q=q, radius=cfg.radius, samples=cfg.samples, seed=cfg.seed, dropped=dropped)
    report["upsilon"] = extra
    if u is None:
        report["passed"] = False
        report["findings"] = extra.pop("findings")
        report["exit_code"] = EXIT_CONDITION
        return Outcome(report, EXIT_CONDITION, [("passed", "False")] + [("finding", s) for s in report["findings"]])
    if not A > 2:
        raise InputError(f"the window constant must exceed 2, got {A:g}")
    val = validate_upsilon(u, f, A, q, pts, cfg.tau_sign)
    if u.is_expression:
        report["upsilon"]["entries"] = u.source()
    report["A_window"] = A
    report["window"] = list(val.window)
    report["hypotheses"] = val.hypotheses
    report["margins"] = {
        "hermitian_residual": val.hermitian_residual,
        "psd_margin": val.psd_margin,
        "complement_psd_margin": val.complement_psd_margin,
        "kernel_residual": val.kernel_residual,
        "window_count_min": val.window_count_min,
        "window_margin": val.window_margin,
        "weak_zq_margin": val.weak_zq_margin,
        "theta_sup": val.theta_sup,
        "decay_slope_min": val.decay_slope_min,
        "decay_exact": val.decay_exact,
    }
    report["findings"] = val.findings
    report["passed"] = val.passed
    code = EXIT_OK if val.passed else EXIT_CONDITION
    report["exit_code"] = code
    table = [(k, _fmt(v)) for k, v in val.hypotheses.items()] + [("finding", s) for s in val.findings]
    return Outcome(report, code, table)


def cmd_model(cfg: RunConfig) -> Outcome:
    data, f = _load(cfg)
    q = _q(cfg, f)
    bp = _anchor(cfg, data, f)
    res = evaluate_point(bp, q, cfg.tau_sign)
    lam = res["spectrum"].eigenvalues
    report = _envelope(cfg, f)
    report.update(q=q, A=cfg.A, point=_point_json(bp), eigenvalues=lam)
    table = [("eigenvalues", _fmt(lam))]
    if not np.any(np.abs(lam) > cfg.tau_sign * (1.0 + float(np.max(np.abs(lam))))):
        report["certificate"] = {"kind": "trivial", "a_lower_bound": "trivial"}
        report["exit_code"] = EXIT_OK
        return Outcome(report, EXIT_OK, table + [("certificate", "trivial (Levi form vanishes)")])
    cert = certify_A_lower_bound(ModelData(lam, q), cfg.tau_sign)
    report["certificate"] = {
        "kind": cert.kind.value,
        "a_lower_bound": cert.a_lower_bound,
        "profile": cert.profile.s,
        "ratio_sum": cert.ratio_sum,
    }
    report["necessary_min_A"] = res["verdicts"]["necessary"]
    table.append(("A lower bound", _fmt(cert.a_lower_bound)))
    table.append(("necessary A_min", _fmt(res["verdicts"]["necessary"])))
    if cfg.tau:
        lam_n = rescaling_frame(bp).lam
        profile = GaussianProfile(1.0 + 2.0 * np.maximum(0.0, -lam_n))
        rows = []
        for tau in cfg.tau:
            est = finite_tau_norm(f, bp, tau, profile, cfg.samples, cfg.seed)
            rows.append({"tau": tau, "value": est.value, "stderr": est.stderr, "model_value": est.model_value})
            table.append((f"tau={tau:g}", f"{est.value:.8g} ± {est.stderr:.2g} (model {est.model_value:.8g})"))
        for prev, cur in zip(rows, rows[1:]):
            cur["cauchy"] = abs(cur["value"] - prev["value"]) <= 3.0 * math.hypot(cur["stderr"], prev["stderr"])
        report["profile"] = profile.s
        report["tau_sequence"] = rows
    code = EXIT_OK
    if cert.kind is VerdictKind.INFEASIBLE or (cfg.A is not None and cfg.A < cert.a_lower_bound):
        code = EXIT_CONDITION
    report["exit_code"] = code
    return Outcome(report, code, table)


def cmd_reproduce(cfg: RunConfig) -> Outcome:
    which = cfg.which or (Path(cfg.input).stem if cfg.input else None)
    if which not in ("example1", "example2"):
        raise InputError("reproduce takes 'example1' or 'example2'")
    rows = reproduce.run(which, cfg.seed)
    ok = all(r.passed for r in rows)
    code = EXIT_OK if ok else EXIT_CONDITION
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "reproduce",
        "example": which,
        "seed": cfg.seed,
        "rows": rows,
        "passed": ok,
        "exit_code": code,
    }
    table = [(("PASS " if r.passed else "FAIL ") + r.check, _fmt(r.observed)) for r in rows]
    return Outcome(report, code, table)


HANDLERS = {
    "analyze": cmd_analyze,
    "scan": cmd_scan,
    "certify": cmd_certify,
    "model": cmd_model,
    "reproduce": cmd_reproduce,
}


# ---------------------------------------------------------------------------
# Argument handling


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="levi", description="Levi-form conditions for maximal estimates.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        if name == "reproduce":
            p.add_argument("which", choices=("example1", "example2"))
        else:
            p.add_argument("input", metavar="INPUT.dfn")
        p.add_argument("--q", type=int)
        p.add_argument("--A", type=float, dest="A")
        p.add_argument("--t", type=float, help="override the parameter t of the input")
        p.add_argument("--center", help="comma-separated complex point; '?' marks the coordinate to solve for")
        p.add_argument("--radius", type=float, default=0.05)
        p.add_argument("--samples", type=int, default=200)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tau-sign", type=float, default=TAU_SIGN, dest="tau_sign")
        p.add_argument("--out", help="write the JSON report here instead of stdout")
        if name == "scan":
            p.add_argument("--radius-sweep", type=_floats, default=(), dest="radius_sweep")
        if name == "model":
            p.add_argument("--tau", type=_floats, default=(), help="comma-separated rescaling levels")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=ns.command,
        input=getattr(ns, "input", None),
        q=ns.q,
        A=ns.A,
        t=ns.t,
        center=ns.center,
        radius=ns.radius,
        samples=ns.samples,
        seed=ns.seed,
        tau_sign=ns.tau_sign,
        out=ns.out,
        radius_sweep=tuple(getattr(ns, "radius_sweep", ())),
        tau=tuple(getattr(ns, "tau", ())),
        which=getattr(ns, "which", None),
    )


def run(cfg: RunConfig) -> Outcome:
    return HANDLERS[cfg.command](cfg)


def _print_table(out: Outcome, stream):
    width = max((len(k) for k, _ in out.table), default=0)
    for k, v in out.table:
        print(f"{k.ljust(width)}  {v}", file=stream)
    print(f"{'exit'.ljust(width)}  {out.exit_code}", file=stream)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        cfg = config_from_args(ns)
        with np.errstate(all="ignore"):
            out = run(cfg)
    except DslSyntaxError as err:
        print(f"levi: parse error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except ArithmeticError as err:
        print(f"levi: numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, KeyError) as err:
        print(f"levi: input error: {err}", file=sys.stderr)
        return EXIT_INPUT
    text = dumps(out.report)
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    _print_table(out, sys.stderr)
    return out.exit_code


if __name__ == "__main__":
    sys.exit(main())
