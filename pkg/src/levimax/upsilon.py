"""Candidate Υ matrices, their divergence Υ^j, the scalar Θ and validation.

Matrices are stored with the barred index first: ``Y[k, j]`` is Υ^{k̄j}. With
that layout the contraction with the complex Hessian is ``trace(Y @ H)`` and
the kernel condition reads ``dzbar @ Y == 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from . import catalog
from .conditions import TAU_SIGN, Interval, check_weak_zq, classify_signs, sign_threshold
from .expr import (
    DefiningFunction,
    Jet2,
    Node,
    RealJet,
    eval_gradient_norms,
    eval_jet2,
    eval_value,
    parse_defining_function,
    parse_expression,
    real_jets,
    to_source,
    wirtinger_from_real,
)
from .levi import (
    BoundaryPoint,
    Frame,
    LeviSpectrum,
    levi_spectrum,
    project_to_boundary,
    spectrum_at,
    tangential_frame,
)


@dataclass
class UpsilonField:
    """A Hermitian n×n field, either expression-valued or pointwise.

    Pointwise kinds keep the recipe in ``options`` so the same field can be
    re-evaluated at other points of a sample.
    """

    kind: str
    n: int
    entries: Any
    eta: float = 0.0
    params: dict[str, float] = field(default_factory=dict)
    options: dict[str, Any] = field(default_factory=dict)

    @property
    def is_expression(self) -> bool:
        return not isinstance(self.entries, np.ndarray)

    def nodes(self) -> list[Node]:
        return [self.entries[k][j] for k in range(self.n) for j in range(self.n)]

    def matrix(self, point=None, jet: Jet2 | None = None) -> np.ndarray:
        """Numeric Υ at a point; pointwise kinds rebuild from the ρ-jet there."""
        if self.is_expression:
            z = np.asarray(point if point is not None else jet.point, dtype=complex)[None, :]
            vals = [eval_value(node, z, self.params)[0] for node in self.nodes()]
            return np.array(vals, dtype=complex).reshape(self.n, self.n)
        if jet is None or self.kind in ("constant", "user"):
            return np.array(self.entries, dtype=complex)
        if self.kind == "scaled_tangential":
            return upsilon_scaled_tangential(jet, self.options["t"]).entries
        if self.kind == "positive_projection":
            frame, _, spec = spectrum_at(jet)
            return upsilon_positive_projection(frame, spec, self.options.get("tau_sign", TAU_SIGN)).entries
        if self.kind == "zq":
            o = self.options
            return _zq_matrix(jet, o["anchor"], o["a"], o["b"])
        raise ValueError(f"cannot re-evaluate Υ of kind {self.kind!r}")

    def source(self) -> dict[str, str]:
        """Entries as DSL text keyed ``"k,j"`` (1-based)."""
        if not self.is_expression:
            raise ValueError("pointwise fields have no expression form")
        return {f"{k + 1},{j + 1}": to_source(self.entries[k][j]) for k in range(self.n) for j in range(self.n)}


def constant_field(matrix, eta: float = 0.0) -> UpsilonField:
    m = np.asarray(matrix, dtype=complex)
    return UpsilonField("constant", m.shape[0], m, eta)


def expression_field(
    entries: Mapping[tuple[int, int], str] | Sequence[Sequence[str]],
    n: int,
    params: Mapping[str, float] | None = None,
    lets: str = "",
    eta: float = 0.0,
    kind: str = "user",
    complete_hermitian: bool = True,
) -> UpsilonField:
    """Build an expression field from DSL strings.

    ``entries`` maps 1-based ``(k, j)`` to the text of Υ^{k̄j}. A missing entry
    whose mirror is present becomes ``conj(mirror)``; other gaps are zero.
    ``lets`` may hold ``let NAME = expr`` lines shared by all entries.
    """
    params = dict(params or {})
    lets_nodes: dict[str, Node] = {}
    for line in lets.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if not line.startswith("let "):
            raise ValueError(f"expected a let line, got {line!r}")
        name, text = line[4:].split("=", 1)
        lets_nodes[name.strip()] = parse_expression(text, params, lets_nodes)
    if not isinstance(entries, Mapping):
        entries = {(k + 1, j + 1): entries[k][j] for k in range(n) for j in range(n)}
    grid: list[list[Node | None]] = [[None] * n for _ in range(n)]
    for (k, j), text in entries.items():
        grid[k - 1][j - 1] = parse_expression(text, params, lets_nodes)
    zero = parse_expression("0")
    for k in range(n):
        for j in range(n):
            if grid[k][j] is None:
                mirror = grid[j][k]
                if complete_hermitian and mirror is not None and (j + 1, k + 1) in entries:
                    grid[k][j] = parse_expression("conj(m)", lets={"m": mirror})
                else:
                    grid[k][j] = zero
    return UpsilonField(kind, n, grid, eta, params)


# ---------------------------------------------------------------------------
# Pointwise constructions


def upsilon_scaled_tangential(jet: Jet2, t: float) -> UpsilonField:
    """t times the orthogonal projection onto the complex tangent space."""
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")
    dnorm, _ = eval_gradient_norms(jet)
    if dnorm == 0.0:
        raise ArithmeticError("∂ρ vanishes")
    n = jet.n
    y = t * (np.eye(n) - np.outer(jet.dz, jet.dzbar) / dnorm**2)
    return UpsilonField("scaled_tangential", n, y, options={"t": t})


def _ambient_eigenvectors(frame: Frame, spec: LeviSpectrum) -> np.ndarray:
    """Row ℓ: coefficients on ∂/∂z of the tangent vector with eigenvalue λ_ℓ."""
    return np.conj(spec.eigenvectors).T @ frame.tangential


def upsilon_positive_projection(frame: Frame, spec: LeviSpectrum, tau_sign: float = TAU_SIGN) -> UpsilonField:
    u = _ambient_eigenvectors(frame, spec)
    thr = sign_threshold(spec.eigenvalues, tau_sign)
    keep = u[spec.eigenvalues > thr]
    y = np.conj(keep).T @ keep  # Y[k, j] = Σ conj(u^k) u^j
    n = frame.columns.shape[0]
    return UpsilonField("positive_projection", n, y, options={"tau_sign": tau_sign})


@dataclass(frozen=True)
class ZqAnchor:
    """Rotation to Levi-adapted coordinates and the negative count, frozen at a point."""

    rotation: np.ndarray  # column ℓ < n-1: eigen-tangent vector; last column: unit normal
    m: int
    point: np.ndarray


def zq_anchor(jet: Jet2, spec: LeviSpectrum | None = None, tau_sign: float = TAU_SIGN) -> ZqAnchor:
    frame = tangential_frame(jet)
    if spec is None:
        _, _, spec = spectrum_at(jet)
    u = _ambient_eigenvectors(frame, spec)
    q = np.column_stack([u.T, frame.normal])
    m = classify_signs(spec, tau_sign).negative
    return ZqAnchor(q, m, None if jet.point is None else jet.point.copy())


def _zq_matrix(jet: Jet2, anchor: ZqAnchor, a: float, b: float) -> np.ndarray:
    q = anchor.rotation
    n = q.shape[0]
    g = q.T @ jet.dz  # ∂ρ/∂w in the adapted coordinates
    gbar = np.conj(g)
    c = np.array([b] * anchor.m + [a] * (n - 1 - anchor.m), dtype=float)
    yw = np.zeros((n, n), dtype=complex)
    yw[: n - 1, : n - 1] = np.diag(c)
    yw[n - 1, : n - 1] = -c * gbar[: n - 1] / gbar[n - 1]
    yw[: n - 1, n - 1] = -c * g[: n - 1] / g[n - 1]
    yw[n - 1, n - 1] = np.sum(c * np.abs(g[: n - 1]) ** 2) / abs(g[n - 1]) ** 2
    # back to z: Υ_z = conj(Q) Υ_w Qᵀ
    return np.conj(q) @ yw @ q.T


def upsilon_zq_construction(
    jet: Jet2,
    spec: LeviSpectrum,
    a: float,
    b: float,
    tau_sign: float = TAU_SIGN,
    anchor: ZqAnchor | None = None,
) -> UpsilonField:
    """Υ with level b on the negative Levi directions and a on the rest.

    Built in coordinates adapted to the anchor (its own point unless given),
    with the normal row and column corrected so ∂ρ stays in the kernel.
    """
    if not 0.0 < a < b < 1.0:
        raise ValueError("need 0 < a < b < 1")
    anchor = anchor or zq_anchor(jet, spec, tau_sign)
    y = _zq_matrix(jet, anchor, a, b)
    return UpsilonField("zq", jet.n, y, options={"a": a, "b": b, "m": anchor.m, "anchor": anchor})


# ---------------------------------------------------------------------------
# The two example fields

_EX2_LETS = """\
let S = abs2(z1) + abs2(z2)
let f1 = abs2(z1)/S
let f2 = abs2(z2)/S
let g = 4*f1*f2
"""

EXAMPLE2_PSI = """\
param a = 0.8
param b = 0.1
let S = abs2(z1) + abs2(z2)
S*(a - b*4*abs2(z1)*abs2(z2)/S^2)
"""


def _normal_extension(block: Mapping[tuple[int, int], str], dzbar: Sequence[str]) -> dict[tuple[int, int], str]:
    """Complete a 2×2 block to 3×3 so that ∂ρ/∂z̄ (with ∂ρ/∂z̄₃ = -i/2) is in the kernel."""
    out = dict(block)
    r1b, r2b = (f"({d})" for d in dzbar)
    r1, r2 = (f"conj{d}" for d in (r1b, r2b))
    c = {j: f"({r1b}*({block[(1, j)]}) + {r2b}*({block[(2, j)]}))" for j in (1, 2)}
    for j in (1, 2):
        out[(3, j)] = f"-2*i*{c[j]}"
        out[(j, 3)] = f"2*i*conj{c[j]}"
    out[(3, 3)] = f"re(4*({c[1]}*{r1} + {c[2]}*{r2}))"
    return out


def example1_upsilon_field(t: float, eta: float = 0.0) -> UpsilonField:
    """The field that certifies the cubic domain ``example1`` for every A > 1 + t."""
    block = {
        (1, 1): "1/(1+t) - re(z1)/2",
        (2, 2): "t/(1+t) + re(z1)/(2*t)",
        (2, 1): "conj(z2)/t",
        (1, 2): "z2/t",
    }
    entries = _normal_extension(block, catalog.EXAMPLE1_DZBAR)
    return expression_field(entries, 3, {"t": t}, eta=eta, kind="example1")


def _m_block() -> dict[tuple[int, int], str]:
    psi11 = "a - 4*b*f2^2 + 2*b*f2*g"
    psi22 = "a - 4*b*f1^2 + 2*b*f1*g"
    return {
        (1, 1): psi22,
        (2, 2): psi11,
        (2, 1): "2*b*z1*conj(z2)*g/S",
        (1, 2): "2*b*z2*conj(z1)*g/S",
    }


def example2_m_field(a: float, b: float) -> UpsilonField:
    """The 2×2 divergence-free block M built from ψ."""
    return expression_field(_m_block(), 2, {"a": a, "b": b}, lets=_EX2_LETS, kind="example2_m")


def example2_upsilon_field(a: float, b: float, t: float, eta: float = 0.0) -> UpsilonField:
    entries = _normal_extension(_m_block(), catalog.EXAMPLE2_DZBAR)
    field_ = expression_field(entries, 3, {"a": a, "b": b, "t": t}, lets=_EX2_LETS, eta=eta, kind="example2")
    field_.options.update(a=a, b=b, t=t)
    return field_


def _check_example2(point, a: float, b: float):
    if not (0.0 < a < 1.0 and 0.0 < b < min(a / 4.0, 1.0 - a)):
        raise ValueError("need 0 < a < 1 and 0 < b < min(a/4, 1-a)")
    z = np.asarray(point, dtype=complex)
    if abs(z[0]) ** 2 + abs(z[1]) ** 2 == 0.0:
        raise ArithmeticError("ψ-based field is undefined where z1 = z2 = 0 (removable only in the limit)")
    return z


def psi_hessian(point, a: float, b: float) -> np.ndarray:
    psi = parse_defining_function(EXAMPLE2_PSI).with_params(a=a, b=b)
    return eval_jet2(psi, np.asarray(point, dtype=complex)[:2]).dzdzbar


def upsilon_example2(point, a: float, b: float, t: float) -> UpsilonField:
    """Pointwise field for the quartic domain ``example2`` from the numerically differentiated ψ."""
    z = _check_example2(point, a, b)
    h = psi_hessian(z, a, b)
    m = np.real(np.trace(h)) * np.eye(2) - h  # M^{k̄j} = δ Tr - ψ_{k j̄}
    rho = catalog.load("example2", t=t)
    dzbar = eval_jet2(rho, z[:3]).dzbar
    y = np.zeros((3, 3), dtype=complex)
    y[:2, :2] = m
    c = dzbar[:2] @ m
    y[2, :2] = -2j * c
    y[:2, 2] = np.conj(y[2, :2])
    y[2, 2] = 4.0 * np.real(c @ np.conj(dzbar[:2]))
    return UpsilonField("example2_pointwise", 3, y, options={"a": a, "b": b, "t": t})


def mu_example2(point, a: float, b: float, t: float) -> float:
    z = np.asarray(point, dtype=complex)
    s = abs(z[0]) ** 2 + abs(z[1]) ** 2
    if s == 0.0:
        raise ArithmeticError("μ is undefined where z1 = z2 = 0")
    g = 4.0 * abs(z[0]) ** 2 * abs(z[1]) ** 2 / s**2
    return s * ((1 - t) * a - 4 * b + (5 + t) * b * g - (1 + 2 * t) * b * g * g)


def example2_contraction(point, a: float, b: float, t: float) -> float:
    """Σ_{j,k≤2} ρ_{jk̄} M^{k̄j} assembled from numerical jets of ρ and ψ."""
    z = _check_example2(point, a, b)
    h = psi_hessian(z, a, b)
    m = np.real(np.trace(h)) * np.eye(2) - h
    hr = eval_jet2(catalog.load("example2", t=t), z[:3]).dzdzbar[:2, :2]
    return float(np.real(np.trace(m @ hr)))


EXAMPLE2_THRESHOLD = (13.0 + 2.0 * math.sqrt(31.0)) / 9.0


def example2_window_predicate(t: float) -> bool:
    """Closed-form nonemptiness test of the b-window for a = 4/5, valid for t ≥ 1."""
    return (1 - t) / 5 * (-4 + (5 + t) ** 2 / (4 * (1 + 2 * t))) ** -1 < 1 / 5


def _g_max(t: float) -> float:
    """max over g ∈ [0, 1] of (5+t)g - (1+2t)g²."""
    vertex = (5 + t) / (2 * (1 + 2 * t))
    g = min(max(vertex, 0.0), 1.0)
    return (5 + t) * g - (1 + 2 * t) * g * g


def example2_b_window(t: float, a: float = 0.8) -> Interval:
    """Levels b for which Tr𝓛 - μ is bounded below by a positive multiple of |z'|².

    Combines the eigenvalue constraint b < min(a/4, 1-a) with positivity of
    (1-t)(1-a) + (4 - max_g[(5+t)g - (1+2t)g²])·b.
    """
    hi = min(a / 4.0, 1.0 - a)
    const = (1 - t) * (1 - a)
    coef = 4.0 - _g_max(t)
    if coef > 0:
        return Interval(max(0.0, -const / coef), hi)
    if const <= 0:
        return Interval(hi, hi)
    return Interval(0.0, hi if coef == 0 else min(hi, const / -coef))


def example2_required_A(a: float, b: float) -> float:
    """Smallest A whose window (1/A, 1-1/A) contains [a-4b, a+b]."""
    return max(1.0 / (a - 4 * b), 1.0 / (1.0 - a - b))


def example2_s_window(t: float) -> Interval:
    if t <= 1:
        raise ValueError("the s-window is stated for t > 1")
    return Interval(0.0, (2 * t - 1) / (4 * (1 - t) ** 2))


def a_bound_from_s(s: float) -> float:
    """A that the necessary condition allows once det𝓛 ≤ -s(Tr𝓛)²."""
    u = math.sqrt(1 + 4 * s)
    return 2 * u / (u - 1)


# ---------------------------------------------------------------------------
# Divergence and Θ


def _jets(u: UpsilonField, points) -> tuple[list[list[RealJet]], list[list[Any]], np.ndarray]:
    if not u.is_expression:
        raise ValueError("derivatives need an expression-valued Υ")
    z = np.atleast_2d(np.asarray(points, dtype=complex))
    n = u.n
    zz = z[:, : max(n, z.shape[1])]
    nodes = u.nodes()
    flat = real_jets(nodes, zz, u.params)
    nz = zz.shape[1]
    jets = [[flat[k * n + j] for j in range(n)] for k in range(n)]
    wirt = [[wirtinger_from_real(jets[k][j], nz) for j in range(n)] for k in range(n)]
    return jets, wirt, zz


def _divergence(wirt, n: int) -> np.ndarray:
    # Υ^j = Σ_k ∂/∂z̄_k Υ^{k̄j}
    m = wirt[0][0].dzbar.shape[0]
    out = np.zeros((m, n), dtype=complex)
    for j in range(n):
        for k in range(n):
            out[:, j] += wirt[k][j].dzbar[:, k]
    return out


def upsilon_divergence(u: UpsilonField, point) -> np.ndarray:
    _, wirt, _ = _jets(u, point)
    return _divergence(wirt, u.n)[0]


def theta_terms(u: UpsilonField, eta: float, points) -> np.ndarray:
    """The four summands of Θ, evaluated term by term; shape ``(m, 4)``.

    Products Υ·Υ are differentiated through jet multiplication rather than by
    expanding the product rule by hand.
    """
    jets, wirt, zz = _jets(u, points)
    n, nz = u.n, zz.shape[1]
    m = zz.shape[0]
    t1 = np.zeros(m, dtype=complex)
    t2 = np.zeros(m, dtype=complex)
    t3 = np.zeros(m, dtype=complex)
    for k in range(n):
        for j in range(n):
            t1 += wirt[k][j].dzdzbar[:, j, k]
            prod = jets[k][0] * jets[0][j]
            for l in range(1, n):
                prod = prod + jets[k][l] * jets[l][j]
            t2 += wirtinger_from_real(prod, nz).dzdzbar[:, j, k]
            for l in range(n):
                t3 += wirt[k][l].dz[:, j] * wirt[l][j].dzbar[:, k]
    div = _divergence(wirt, n)
    t4 = np.sum(np.abs(div) ** 2, axis=1)
    return np.column_stack([t1, -eta * t2, eta * t3, -(1 - eta) * t4])


def theta(u: UpsilonField, eta: float, point) -> float:
    """Θ_{Υ,η} at one point from its defining sum."""
    return float(np.real(np.sum(theta_terms(u, eta, point)[0])))


def theta_identity(u: UpsilonField, eta: float, points) -> np.ndarray:
    """Θ via the expanded form that only needs second derivatives of entries."""
    _, wirt, zz = _jets(u, points)
    n = u.n
    m = zz.shape[0]
    # dU[:, j, k] = ∂_j Υ^k = Σ_l ∂_j ∂̄_l Υ^{l̄k}
    dU = np.zeros((m, n, n), dtype=complex)
    for k in range(n):
        for l in range(n):
            dU[:, :, k] += wirt[l][k].dzdzbar[:, :n, l]
    values = np.zeros((m, n, n), dtype=complex)
    for k in range(n):
        for j in range(n):
            values[:, k, j] = wirt[k][j].value
    first = np.einsum("mjj->m", dU)
    cross = np.zeros(m, dtype=complex)
    for j in range(n):
        for k in range(n):
            cross += (np.conj(dU[:, k, j]) + dU[:, j, k]) * values[:, k, j]
    div = _divergence(wirt, n)
    return np.real(first - eta * cross - np.sum(np.abs(div) ** 2, axis=1))


# ---------------------------------------------------------------------------
# Validation


@dataclass
class ValidationReport:
    hermitian_residual: float
    psd_margin: float
    complement_psd_margin: float
    kernel_residual: float
    window_count_min: int
    window_margin: float
    weak_zq_margin: float
    theta_sup: float | None
    decay_slope_min: float | None
    decay_exact: bool
    points: int
    per_point: list[dict[str, Any]]
    hypotheses: dict[str, bool]
    findings: list[str]
    window: tuple[float, float]

    @property
    def passed(self) -> bool:
        return all(self.hypotheses.values())


def kernel_residual(jet: Jet2, y: np.ndarray) -> float:
    return float(np.max(np.abs(jet.dzbar @ y)))


def kernel_decay(u: UpsilonField, f: DefiningFunction, bp: BoundaryPoint, steps: int = 6) -> tuple[bool, float | None]:
    """Fit log-residual against log|ρ| along the inward normal.

    Returns (exact, slope): exact when the residual vanishes to rounding at
    every offset, in which case no slope is fitted.
    """
    jet = bp.jet
    normal = jet.dzbar / np.linalg.norm(jet.dzbar)
    offsets = 1e-2 * 0.5 ** np.arange(steps)
    rhos, res = [], []
    for d in offsets:
        z = bp.coordinates - d * normal
        j = eval_jet2(f, z)
        y = u.matrix(z, j)
        rhos.append(abs(j.value))
        res.append(kernel_residual(j, y))
    res = np.array(res)
    floor = 1e-12 * (1.0 + np.max(np.abs(u.matrix(bp.coordinates, jet)))) * (1.0 + np.linalg.norm(jet.dz))
    if np.all(res <= floor):
        return True, None
    slope = np.polyfit(np.log(rhos), np.log(np.maximum(res, 1e-300)), 1)[0]
    return False, float(slope)


def validate_upsilon(
    u: UpsilonField,
    f: DefiningFunction,
    A: float,
    q: int,
    points: Sequence[BoundaryPoint] | np.ndarray,
    tau_sign: float = TAU_SIGN,
    decay_points: int = 5,
) -> ValidationReport:
    """Check every pointwise hypothesis of the sufficient condition on a sample."""
    if A <= 2:
        raise ValueError("validation needs A > 2")
    bps = [p if isinstance(p, BoundaryPoint) else project_to_boundary(f, p) for p in points]
    n = f.n
    lo, hi = 1.0 / A, 1.0 - 1.0 / A
    rows = []
    thetas = []
    if u.is_expression and bps:
        thetas = list(theta_identity(u, u.eta, np.array([bp.coordinates for bp in bps])))
    for idx, bp in enumerate(bps):
        jet = bp.jet
        y = u.matrix(bp.coordinates, jet)
        herm = float(np.max(np.abs(y - np.conj(y).T)))
        yh = 0.5 * (y + np.conj(y).T)
        eig = levi_spectrum(yh).eigenvalues
        top = np.sort(eig)[::-1][: n - 1]
        _, _, spec = spectrum_at(jet)
        scale = spec.scale
        row = {
            "index": idx,
            "hermitian_residual": herm,
            "eigenvalues": eig,
            "psd_margin": float(eig[0]),
            "complement_psd_margin": float(1.0 - eig[-1]),
            "kernel_residual": kernel_residual(jet, y),
            "window_count": int(np.sum((eig > lo) & (eig < hi))),
            "window_margin": float(np.min(np.minimum(top - lo, hi - top))),
            "weak_zq_margin": check_weak_zq(spec, q, jet, yh),
            "weak_zq_tolerance": tau_sign * (1.0 + scale),
            "gradient": float(np.linalg.norm(jet.dz)),
        }
        if thetas:
            row["theta"] = float(thetas[idx])
        rows.append(row)

    exact, slopes = True, []
    if u.is_expression:
        for bp in bps[:decay_points]:
            e, s = kernel_decay(u, f, bp)
            exact = exact and e
            if s is not None:
                slopes.append(s)

    def agg(key, fn, default=0.0):
        return fn([r[key] for r in rows]) if rows else default

    kernel_max = agg("kernel_residual", max)
    kernel_tol = max((1e-10 * (1.0 + r["gradient"]) for r in rows), default=1e-10)
    hyp = {
        "hermitian": agg("hermitian_residual", max) <= 1e-10,
        "psd": agg("psd_margin", min) >= -1e-10,
        "complement_psd": agg("complement_psd_margin", min) >= -1e-10,
        "kernel": kernel_max <= kernel_tol,
        "interior_decay": exact or (bool(slopes) and min(slopes) >= 0.9),
        "eigenvalue_window": bool(rows) and all(r["window_count"] >= n - 1 for r in rows),
        "weak_zq": bool(rows) and all(r["weak_zq_margin"] >= -r["weak_zq_tolerance"] for r in rows),
    }
    if thetas:
        hyp["theta_bounded"] = bool(np.all(np.isfinite(thetas)))
    findings = []
    if not hyp["eigenvalue_window"]:
        worst = min(r["window_count"] for r in rows) if rows else 0
        findings.append(f"only {worst} of the required {n - 1} eigenvalues lie in ({lo:.6g}, {hi:.6g})")
    if not hyp["kernel"]:
        findings.append(f"∂ρ is not in the kernel: residual {kernel_max:.3e}")
    if not hyp["weak_zq"]:
        findings.append(f"weak Z(q) margin negative: {agg('weak_zq_margin', min):.3e}")
    if not hyp["psd"] or not hyp["complement_psd"]:
        findings.append("eigenvalues of Υ leave [0, 1]")
    if not hyp["hermitian"]:
        findings.append("Υ is not Hermitian")
    if not hyp["interior_decay"]:
        findings.append(f"kernel residual decays slower than O(|ρ|): slope {min(slopes) if slopes else float('nan'):.3f}")
    return ValidationReport(
        hermitian_residual=agg("hermitian_residual", max),
        psd_margin=agg("psd_margin", min),
        complement_psd_margin=agg("complement_psd_margin", min),
        kernel_residual=kernel_max,
        window_count_min=int(agg("window_count", min, 0)),
        window_margin=agg("window_margin", min),
        weak_zq_margin=agg("weak_zq_margin", min),
        theta_sup=float(np.max(np.abs(thetas))) if thetas else None,
        decay_slope_min=min(slopes) if slopes else None,
        decay_exact=exact if u.is_expression else True,
        points=len(rows),
        per_point=rows,
        hypotheses=hyp,
        findings=findings,
        window=(lo, hi),
    )
