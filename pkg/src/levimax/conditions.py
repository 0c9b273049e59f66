"""Pointwise eigenvalue conditions and their aggregation over boundary samples."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .expr import DefiningFunction, Jet2
from .levi import (
    BoundaryPoint,
    LeviSpectrum,
    levi_det_formula,
    levi_trace_formula,
    project_to_boundary,
    spectrum_at,
)

TAU_SIGN = 1e-9
ABS_FLOOR = 1e-13


class VerdictKind(str, enum.Enum):
    HOLDS = "holds"
    FAILS = "fails"
    TRIVIAL = "trivial"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class ConditionVerdict:
    kind: VerdictKind
    value: float | None = None
    witness: Mapping[str, Any] | None = None

    def __post_init__(self):
        if (self.value is not None) != (self.kind is VerdictKind.HOLDS):
            raise ValueError("a value is carried exactly when the verdict holds")
        if (self.witness is not None) != (self.kind is VerdictKind.FAILS):
            raise ValueError("a witness is carried exactly when the verdict fails")

    @property
    def ok(self) -> bool:
        return self.kind in (VerdictKind.HOLDS, VerdictKind.TRIVIAL)


@dataclass(frozen=True)
class SignCounts:
    negative: int
    zero: int
    positive: int
    tolerance: float


def _eigenvalues(spec: LeviSpectrum | Sequence[float]) -> np.ndarray:
    lam = spec.eigenvalues if isinstance(spec, LeviSpectrum) else spec
    lam = np.asarray(lam, dtype=float)
    if np.any(np.diff(lam) < 0):
        lam = np.sort(lam)
    return lam


def sign_threshold(lam: np.ndarray, tau_sign: float = TAU_SIGN) -> float:
    scale = float(np.max(np.abs(lam))) if lam.size else 0.0
    return max(tau_sign * (1.0 + scale), ABS_FLOOR)


def classify_signs(spec, tau_sign: float = TAU_SIGN) -> SignCounts:
    if tau_sign <= 0:
        raise ValueError("tau_sign must be positive")
    lam = _eigenvalues(spec)
    thr = sign_threshold(lam, tau_sign)
    neg = int(np.sum(lam < -thr))
    pos = int(np.sum(lam > thr))
    return SignCounts(neg, lam.size - neg - pos, pos, thr)


def _cleaned(spec, tau_sign: float) -> tuple[np.ndarray, float, float]:
    """Eigenvalues with the ones inside the sign tolerance set to zero."""
    lam = _eigenvalues(spec)
    thr = sign_threshold(lam, tau_sign)
    out = np.where(np.abs(lam) <= thr, 0.0, lam)
    scale = float(np.max(np.abs(lam))) if lam.size else 0.0
    return out, thr, scale


def _check_q(q: int, size: int):
    if not 1 <= q <= size:
        raise ValueError(f"q must lie in [1, {size}], got {q}")


def check_Zq(spec, q: int, tau_sign: float = TAU_SIGN) -> ConditionVerdict:
    """Z(q): at least q+1 negative or n-q positive eigenvalues.

    A Levi form that vanishes identically is reported as trivially satisfied
    rather than failing: the sign count carries no information there.
    """
    lam = _eigenvalues(spec)
    _check_q(q, lam.size)
    n = lam.size + 1
    counts = classify_signs(lam, tau_sign)
    if counts.negative == 0 and counts.positive == 0:
        return ConditionVerdict(VerdictKind.TRIVIAL)
    slack = max(counts.negative - q, counts.positive - (n - 1 - q))
    if slack >= 1:
        return ConditionVerdict(VerdictKind.HOLDS, float(slack))
    return ConditionVerdict(
        VerdictKind.FAILS,
        witness={"eigenvalues": lam.tolist(), "negative": counts.negative, "positive": counts.positive},
    )


def necessary_min_A(spec, q: int, tau_sign: float = TAU_SIGN) -> ConditionVerdict:
    """Smallest A compatible with the pointwise necessary condition."""
    lam, thr, scale = _cleaned(spec, tau_sign)
    _check_q(q, lam.size)
    neg = -np.sum(lam[lam < 0])
    left = float(np.sum(lam[:q]) + neg)
    right = float(np.sum(np.abs(lam)))
    if right <= thr:
        return ConditionVerdict(VerdictKind.TRIVIAL)
    if left <= tau_sign * scale:
        return ConditionVerdict(VerdictKind.INFEASIBLE)
    return ConditionVerdict(VerdictKind.HOLDS, right / left)


def necessary_condition_at(spec, q: int, A: float, tau_sign: float = TAU_SIGN) -> ConditionVerdict:
    """Whether a given A meets the necessary condition at this spectrum."""
    base = necessary_min_A(spec, q, tau_sign)
    if base.kind is not VerdictKind.HOLDS:
        return base
    if A >= base.value * (1.0 - 1e-12):
        return ConditionVerdict(VerdictKind.HOLDS, base.value)
    return ConditionVerdict(
        VerdictKind.FAILS, witness={"A": A, "A_min": base.value, "eigenvalues": _eigenvalues(spec).tolist()}
    )


def _epsilon(num: float, den: float) -> ConditionVerdict:
    if den == 0.0:
        # num is a sum of non-negative (cleaned) values here
        return ConditionVerdict(VerdictKind.TRIVIAL)
    if num <= 0.0:
        return ConditionVerdict(VerdictKind.INFEASIBLE)
    return ConditionVerdict(VerdictKind.HOLDS, num / den)


def epsilon_almost_pseudoconvex(spec, q: int, tau_sign: float = TAU_SIGN) -> ConditionVerdict:
    lam, _, _ = _cleaned(spec, tau_sign)
    _check_q(q, lam.size)
    return _epsilon(float(np.sum(lam[:q])), float(-np.sum(lam[lam < 0])))


def epsilon_almost_pseudoconcave(spec, q: int, tau_sign: float = TAU_SIGN) -> ConditionVerdict:
    lam, _, _ = _cleaned(spec, tau_sign)
    _check_q(q, lam.size)
    return _epsilon(float(-np.sum(lam[q:])), float(np.sum(lam[lam > 0])))


def upsilon_contraction(jet: Jet2, upsilon: np.ndarray) -> float:
    """Σ_{j,k} Υ^{k̄j} ρ_{jk̄}, with ``upsilon[k, j]`` = Υ^{k̄j}."""
    return float(np.real(np.trace(np.asarray(upsilon) @ jet.dzdzbar)))


def check_weak_zq(spec, q: int, jet: Jet2, upsilon: np.ndarray) -> float:
    """Margin of the weak Z(q) inequality; it holds when the margin is ≥ -τ."""
    lam = _eigenvalues(spec)
    _check_q(q, lam.size)
    u = np.asarray(upsilon, dtype=complex)
    if np.max(np.abs(u - np.conj(u).T)) > 1e-10 * (1.0 + np.max(np.abs(u))):
        raise ValueError("Υ must be Hermitian")
    return float(np.sum(lam[:q])) - upsilon_contraction(jet, u)


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    @property
    def empty(self) -> bool:
        return not self.lo < self.hi

    def __contains__(self, x: float) -> bool:
        return self.lo < x < self.hi

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)


def admissible_t_window(eps: float, A: float, mode: str) -> Interval:
    """Open interval of scaling levels t allowed for the tangential Υ.

    ``eps`` may be ``math.inf`` for spectra with no offending eigenvalues.
    """
    if A <= 2:
        raise ValueError("the t-window needs A > 2")
    if not eps > 0:
        raise ValueError("eps must be positive")
    width = 1.0 / A if math.isinf(eps) else eps / ((1.0 + eps) * A - 2.0)
    width = min(width, 1.0 / A)
    if mode == "pcvx":
        return Interval(0.0, width)
    if mode == "pccv":
        return Interval(1.0 - width, 1.0)
    raise ValueError(f"mode must be 'pcvx' or 'pccv', got {mode!r}")


# ---------------------------------------------------------------------------
# Region scans


@dataclass
class PointRecord:
    index: int
    seed: np.ndarray
    point: np.ndarray | None = None
    residual: float | None = None
    eigenvalues: np.ndarray | None = None
    trace: float | None = None
    det: float | None = None
    verdicts: dict[str, ConditionVerdict] = field(default_factory=dict)
    error: str | None = None


def evaluate_point(bp: BoundaryPoint, q: int, tau_sign: float = TAU_SIGN, A: float | None = None) -> dict:
    """Spectrum, formula cross-checks and every verdict at one boundary point."""
    frame, lm, spec = spectrum_at(bp.jet)
    verdicts = {
        "zq": check_Zq(spec, q, tau_sign),
        "necessary": necessary_min_A(spec, q, tau_sign),
        "eps_pcvx": epsilon_almost_pseudoconvex(spec, q, tau_sign),
        "eps_pccv": epsilon_almost_pseudoconcave(spec, q, tau_sign),
    }
    if A is not None:
        verdicts["necessary_at_A"] = necessary_condition_at(spec, q, A, tau_sign)
    return {
        "frame": frame,
        "levi": lm,
        "spectrum": spec,
        "trace": levi_trace_formula(bp.jet),
        "det": levi_det_formula(bp.jet),
        "verdicts": verdicts,
    }


@dataclass
class ConditionReport:
    records: list[PointRecord]
    q: int
    seed: int
    radius: float
    count: int
    center: np.ndarray
    tau_sign: float = TAU_SIGN

    def summary(self) -> dict[str, Any]:
        ok = [r for r in self.records if r.error is None]
        out: dict[str, Any] = {"points": len(self.records), "projected": len(ok), "failed": len(self.records) - len(ok)}
        for name in ("zq", "necessary", "eps_pcvx", "eps_pccv"):
            kinds = {k.value: 0 for k in VerdictKind}
            for r in ok:
                kinds[r.verdicts[name].kind.value] += 1
            out[f"{name}_counts"] = kinds
        a_vals = [r.verdicts["necessary"].value for r in ok if r.verdicts["necessary"].kind is VerdictKind.HOLDS]
        out["sup_A_min"] = max(a_vals) if a_vals else None
        for name in ("eps_pcvx", "eps_pccv"):
            vals = [r.verdicts[name].value for r in ok if r.verdicts[name].kind is VerdictKind.HOLDS]
            out[f"inf_{name}"] = min(vals) if vals else None
        out["zq_all_hold"] = bool(ok) and all(r.verdicts["zq"].kind is VerdictKind.HOLDS for r in ok)
        dets_ok = []
        trace_res, det_res = 0.0, 0.0
        for r in ok:
            lam = r.eigenvalues
            scale = float(np.max(np.abs(lam))) if lam.size else 0.0
            tol = self.tau_sign * (1.0 + scale ** max(lam.size, 1))
            dets_ok.append(r.det <= tol)
            trace_res = max(trace_res, abs(r.trace - float(np.sum(lam))) / (1.0 + scale))
            det_res = max(det_res, abs(r.det - float(np.prod(lam))) / (1.0 + scale ** lam.size))
        out["det_nonpositive_all"] = bool(ok) and all(dets_ok)
        out["max_trace_residual"] = trace_res
        out["max_det_residual"] = det_res
        out["any_condition_failure"] = any(
            r.verdicts[name].kind in (VerdictKind.FAILS, VerdictKind.INFEASIBLE)
            for r in ok
            for name in ("zq", "necessary", "necessary_at_A")
            if name in r.verdicts
        )
        return out


def sample_ball(center, radius: float, count: int, seed: int) -> np.ndarray:
    """``count`` uniform points in the Euclidean ball of ℂⁿ = ℝ²ⁿ."""
    c = np.asarray(center, dtype=complex)
    d = 2 * c.size
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((count, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = radius * rng.random(count) ** (1.0 / d)
    x = g * r[:, None]
    return c[None, :] + x[:, : c.size] + 1j * x[:, c.size :]


def scan_region(
    f: DefiningFunction,
    center,
    radius: float,
    count: int,
    q: int,
    seed: int,
    params: Mapping[str, float] | None = None,
    tau_sign: float = TAU_SIGN,
    A: float | None = None,
) -> ConditionReport:
    """Seeded boundary sampling near ``center`` with all verdicts per point."""
    if radius <= 0 or count < 1:
        raise ValueError("need radius > 0 and count ≥ 1")
    seeds = sample_ball(center, radius, count, seed)
    records = []
    for idx, s in enumerate(seeds):
        rec = PointRecord(idx, s)
        try:
            bp = project_to_boundary(f, s, params)
            res = evaluate_point(bp, q, tau_sign, A)
        except (ArithmeticError, FloatingPointError, ValueError) as err:
            rec.error = f"{type(err).__name__}: {err}"
        else:
            rec.point = bp.coordinates
            rec.residual = bp.residual
            rec.eigenvalues = res["spectrum"].eigenvalues
            rec.trace = res["trace"]
            rec.det = res["det"]
            rec.verdicts = res["verdicts"]
        records.append(rec)
    return ConditionReport(records, q, seed, radius, count, np.asarray(center, dtype=complex), tau_sign)


def radius_sweep(
    f: DefiningFunction,
    center,
    radii: Sequence[float],
    count: int,
    q: int,
    seed: int,
    params: Mapping[str, float] | None = None,
) -> list[tuple[float, float | None]]:
    """Sample supremum of A_min for each radius."""
    return [
        (float(r), scan_region(f, center, r, count, q, seed, params).summary()["sup_A_min"]) for r in radii
    ]
