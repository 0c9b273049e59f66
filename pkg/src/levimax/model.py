"""Gaussian test functions on the quadric model and lower bounds for A.

All Gaussian integrals factor over the tangential variables, so every
quantity reduces to one-dimensional radial integrals evaluated by
Gauss-Legendre quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .conditions import TAU_SIGN, VerdictKind, sign_threshold
from .expr import DefiningFunction, eval_gradient_norms, eval_value
from .levi import BoundaryPoint, spectrum_at
from .upsilon import _ambient_eigenvectors

NODES = 64
R_FLOOR = 1e-8
R_CEIL = 1e8
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ModelData:
    lam: np.ndarray
    q: int
    A_candidate: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "lam", np.sort(np.asarray(self.lam, dtype=float)))


@dataclass(frozen=True)
class GaussianProfile:
    s: np.ndarray
    nodes: int = NODES

    def radius(self, lam: Sequence[float]) -> float:
        c = np.asarray(self.s) + np.asarray(lam)
        return truncation_radius(float(np.min(c)))


@lru_cache(maxsize=16)
def _legendre(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(nodes)


def truncation_radius(c: float) -> float:
    """Radius past which e^{-2c r²} carries less than 1e-12 of the mass."""
    return min(max(6.0 / math.sqrt(2.0 * c), R_FLOOR), R_CEIL)


def radial_moment(c: float, power: int, R: float | None = None, nodes: int = NODES) -> float:
    """∫_0^R r^power e^{-2c r²} dr by Gauss-Legendre."""
    if c <= 0:
        raise ValueError("weight e^{-2c r²} is not integrable for c ≤ 0")
    R = truncation_radius(c) if R is None else R
    x, w = _legendre(nodes)
    r = 0.5 * R * (x + 1.0)
    return float(0.5 * R * np.sum(w * r**power * np.exp(-2.0 * c * r * r)))


def gaussian_ratio(lam: float, s: float, R: float | None = None, nodes: int = NODES) -> float:
    """∫|∂ψ/∂w̄|² e^{-2λ|w|²} / ∫|ψ|² e^{-2λ|w|²} for ψ = e^{-s|w|²}."""
    c = s + lam
    if c <= 0 or s < 0:
        raise ValueError(f"non-integrable profile: s = {s}, λ = {lam}")
    R = truncation_radius(c) if R is None else R
    # |∂ψ/∂w̄|² = s²|w|² e^{-2s|w|²}; the angular factor cancels
    return s * s * radial_moment(c, 3, R, nodes) / radial_moment(c, 1, R, nodes)


def _search_bounds(lam: float) -> tuple[float, float]:
    scale = 1.0 + abs(lam)
    lo = -lam * (1.0 + 1e-3) if lam < 0 else 1e-9 * scale
    return lo, 100.0 * scale


def _minimize_one(lam: float, grid: np.ndarray | None, nodes: int) -> tuple[float, float]:
    lo, hi = _search_bounds(lam)
    if grid is None:
        grid = np.geomspace(lo, hi, 61)
    grid = np.asarray(grid, dtype=float)
    grid = grid[grid + lam > 0]
    vals = np.array([gaussian_ratio(lam, s, nodes=nodes) for s in grid])
    i = int(np.argmin(vals))
    a = math.log(grid[max(i - 1, 0)])
    b = math.log(grid[min(i + 1, len(grid) - 1)])

    def fn(logs: float) -> float:
        return gaussian_ratio(lam, math.exp(logs), nodes=nodes)

    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = fn(x1), fn(x2)
    for _ in range(80):
        if b - a < 1e-10:
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = fn(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = fn(x2)
    best_s, best = (math.exp(x1), f1) if f1 <= f2 else (math.exp(x2), f2)
    if vals[i] < best:
        best_s, best = float(grid[i]), float(vals[i])
    return best, best_s


def min_ratio_sum(
    lam: Sequence[float],
    grid: Sequence[np.ndarray | None] | None = None,
    nodes: int = NODES,
) -> tuple[float, np.ndarray]:
    """Minimize Σ_j gaussian_ratio(λ_j, s_j) coordinate by coordinate.

    The sum separates, so each coordinate is a one-dimensional search: a
    log-spaced grid followed by golden-section refinement.
    """
    lam = np.asarray(lam, dtype=float)
    grids = grid if grid is not None else [None] * lam.size
    total, s = 0.0, np.zeros(lam.size)
    for j, (lj, gj) in enumerate(zip(lam, grids)):
        val, s[j] = _minimize_one(float(lj), gj, nodes)
        total += val
    return total, s


@dataclass(frozen=True)
class Certificate:
    kind: VerdictKind
    a_lower_bound: float  # math.inf when no finite A survives
    profile: GaussianProfile
    ratio_sum: float


def violates(lam: Sequence[float], q: int, A_tilde: float, s: Sequence[float], nodes: int = NODES) -> bool:
    """Whether the Gaussian with rates ``s`` breaks 2c ≤ (Ã-1)·Σ ratio_j."""
    lam = np.sort(np.asarray(lam, dtype=float))
    c = float(np.sum(lam[lam > 0]) - A_tilde * np.sum(lam[:q]))
    ratios = sum(gaussian_ratio(float(l), float(sj), nodes=nodes) for l, sj in zip(lam, s))
    return 2.0 * c > (A_tilde - 1.0) * ratios


def certify_A_lower_bound(m: ModelData, tau_sign: float = TAU_SIGN, nodes: int = NODES) -> Certificate:
    """Largest Ã that some Gaussian profile rules out.

    For a fixed profile the test inequality is linear in Ã, so the supremum
    over violated Ã is (2P + Σratio) / (2S_q + Σratio), where P is the sum of
    the positive eigenvalues and S_q the sum of the q smallest. That quotient
    decreases in Σratio, so the optimal profile minimizes the ratio sum.
    """
    lam = m.lam
    if not np.any(lam != 0):
        raise ValueError("degenerate spectrum: all eigenvalues vanish")
    thr = sign_threshold(lam, tau_sign)
    lam = np.where(np.abs(lam) <= thr, 0.0, lam)
    if not 1 <= m.q <= lam.size:
        raise ValueError(f"q must lie in [1, {lam.size}]")
    ratio, s = min_ratio_sum(lam, nodes=nodes)
    profile = GaussianProfile(s, nodes)
    pos = float(np.sum(lam[lam > 0]))
    low = float(np.sum(lam[: m.q]))
    den = 2.0 * low + ratio
    scale = float(np.max(np.abs(lam)))
    if den <= 2.0 * tau_sign * scale:
        return Certificate(VerdictKind.INFEASIBLE, math.inf, profile, ratio)
    return Certificate(VerdictKind.HOLDS, (2.0 * pos + ratio) / den, profile, ratio)


# ---------------------------------------------------------------------------
# Rescaled test-form norms


def model_l2_limit(lam: Sequence[float], s: Sequence[float], nodes: int = NODES) -> float:
    """∫_{ℂ^{n-1}} |ψ₁|² e^{-2𝓛} dV for ψ₁ = Π e^{-s_j|w_j|²}.

    Each complex variable carries the volume i·dw∧dw̄ = 2 dx dy.
    """
    out = 1.0
    for lj, sj in zip(lam, s):
        out *= 2.0 * 2.0 * math.pi * radial_moment(float(lj) + float(sj), 1, nodes=nodes)
    return out


@dataclass(frozen=True)
class TauNorm:
    value: float
    stderr: float
    tau: float
    samples: int
    model_value: float
    normalized_lam: np.ndarray


@dataclass(frozen=True)
class RescalingFrame:
    """Coordinates z = p + Q·ζ adapted to the Levi eigenvectors at p.

    ρ is divided by ``kappa`` so that ∂ρ/∂ζ_n = i/2 at p, which makes the
    domain locally {Im ζ_n > φ(ζ', Re ζ_n)}.
    """

    point: np.ndarray
    rotation: np.ndarray
    kappa: float
    lam: np.ndarray  # Levi eigenvalues of the normalized ρ
    f_tangential: np.ndarray  # ∂²φ/∂ζ_j∂ζ_k, j,k < n
    f_mixed: np.ndarray  # ∂²φ/∂ζ_j∂x_n, j < n
    f_normal: float  # ∂²φ/∂x_n²

    def f(self, wp: np.ndarray, wn: np.ndarray) -> np.ndarray:
        """The holomorphic quadratic f evaluated at (w', w_n), batched."""
        quad = np.einsum("mj,jk,mk->m", wp, self.f_tangential, wp)
        return quad + 2.0 * (wp @ self.f_mixed) * wn + 0.5 * self.f_normal * wn * wn


def rescaling_frame(bp: BoundaryPoint) -> RescalingFrame:
    jet = bp.jet
    frame, _, spec = spectrum_at(jet)
    dnorm, _ = eval_gradient_norms(jet)
    u = _ambient_eigenvectors(frame, spec)
    q = np.column_stack([u.T, 1j * frame.normal])
    kappa = 2.0 * dnorm
    dww = q.T @ jet.dzdz @ q / kappa
    dwwbar = q.T @ jet.dzdzbar @ np.conj(q) / kappa
    n = jet.n
    mixed = dww[: n - 1, n - 1] + dwwbar[: n - 1, n - 1]
    normal = float(2.0 * np.real(dww[n - 1, n - 1]) + 2.0 * np.real(dwwbar[n - 1, n - 1]))
    return RescalingFrame(
        bp.coordinates.copy(), q, kappa, spec.eigenvalues / kappa, dww[: n - 1, : n - 1], mixed, normal
    )


def _boundary_height(f: DefiningFunction, rf: RescalingFrame, tau: float, wp, x, y_guess, params) -> np.ndarray:
    """Solve τ²ρ(p + Q ζ)/κ = 0 for Im w_n, with ζ' = w'/τ, ζ_n = (x + i y/τ)/τ."""

    def g(y):
        zeta = np.column_stack([wp / tau, (x + 1j * y / tau) / tau])
        z = rf.point[None, :] + zeta @ rf.rotation.T
        return tau * tau * np.real(eval_value(f.ast, z, params)) / rf.kappa

    width = 1.0 + np.abs(y_guess)
    lo, hi = y_guess - width, y_guess + width
    glo, ghi = g(lo), g(hi)
    for _ in range(60):
        bad = np.sign(glo) == np.sign(ghi)
        if not np.any(bad):
            break
        width = np.where(bad, 2.0 * width, width)
        lo = np.where(bad, y_guess - width, lo)
        hi = np.where(bad, y_guess + width, hi)
        glo, ghi = g(lo), g(hi)
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        left = np.sign(gm) == np.sign(glo)
        lo = np.where(left, mid, lo)
        glo = np.where(left, gm, glo)
        hi = np.where(left, hi, mid)
    return 0.5 * (lo + hi)


def finite_tau_norm(
    f: DefiningFunction,
    p: BoundaryPoint,
    tau: float,
    profile: GaussianProfile,
    samples: int,
    seed: int,
    params=None,
    chunk: int = 4096,
) -> TauNorm:
    """Monte Carlo estimate of τ^{2n+1}‖u^τ‖² on Ω near the anchor p.

    Proposal: the Gaussian that makes the τ → ∞ integrand constant, so the
    variance measures exactly how far the true domain is from its model.
    The height Im w_n is drawn as boundary height plus an Exp(2) variable,
    which integrates the e^{-2 Im w_n} factor exactly.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    merged = {**f.params, **(params or {})}
    rf = rescaling_frame(p)
    lam = rf.lam
    s = np.asarray(profile.s, dtype=float)
    c = s + lam
    if np.any(c <= 0):
        raise ValueError("profile is not integrable against the model weight")
    k = lam.size
    n = k + 1
    total_w, total_w2, count = 0.0, 0.0, 0
    streams = np.random.SeedSequence(seed).spawn(max(1, -(-samples // chunk)))
    for b, ss in enumerate(streams):
        m = min(chunk, samples - b * chunk)
        rng = np.random.default_rng(ss)
        sd = 1.0 / np.sqrt(4.0 * c)
        wp = rng.standard_normal((m, k)) * sd + 1j * rng.standard_normal((m, k)) * sd
        x = rng.standard_normal(m) * 0.5
        e = rng.exponential(0.5, m)
        levi = np.sum(lam * np.abs(wp) ** 2, axis=1)
        guess = levi + np.real(rf.f(wp, x))
        y0 = _boundary_height(f, rf, tau, wp, x, guess, merged)
        y = y0 + e
        ref = np.real(rf.f(wp, x + 1j * y / tau))
        log_w = (
            (n - 1) * math.log(2.0)
            + np.sum(np.log(np.pi / (2.0 * c)))
            + 2.0 * levi
            + 2.0 * ref
            - 2.0 * y0
        )
        w = np.exp(log_w)
        zeta = np.column_stack([wp / tau, (x + 1j * y / tau) / tau])
        inside = np.real(eval_value(f.ast, rf.point[None, :] + zeta @ rf.rotation.T, merged)) < 0
        w = np.where(inside, w, 0.0)
        total_w += float(np.sum(w))
        total_w2 += float(np.sum(w * w))
        count += m
    mean = total_w / count
    var = max(total_w2 / count - mean * mean, 0.0)
    return TauNorm(mean, math.sqrt(var / count), tau, count, model_l2_limit(lam, s), lam)
