"""Boundary points, the orthonormal tangential frame and the Levi form."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .expr import DefiningFunction, Jet2, as_points, eval_gradient_norms, eval_jet2, eval_value

BOUNDARY_RTOL = 1e-12
GRADIENT_FLOOR = 1e-10
MAX_NEWTON = 50
HERMITIAN_TOL = 1e-10
JACOBI_TOL = 1e-14


class DegenerateGradientError(ArithmeticError):
    pass


class ProjectionError(ArithmeticError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (last residual {residual:.3e})")
        self.residual = residual


class NonHermitianError(ValueError):
    pass


@dataclass(frozen=True)
class BoundaryPoint:
    coordinates: np.ndarray
    residual: float
    jet: Jet2
    iterations: int = 0


@dataclass(frozen=True)
class Frame:
    """Row ``j`` holds the coefficients of L_j on ∂/∂z_1..∂/∂z_n.

    The first n-1 rows are tangential, the last one is the unit complex normal.
    ``pivot`` is the 0-based coordinate that played the role of z_n.
    """

    columns: np.ndarray
    pivot: int

    @property
    def tangential(self) -> np.ndarray:
        return self.columns[:-1]

    @property
    def normal(self) -> np.ndarray:
        return self.columns[-1]


@dataclass(frozen=True)
class LeviSpectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    scale: float

    @property
    def size(self) -> int:
        return len(self.eigenvalues)


# ---------------------------------------------------------------------------
# Projection onto the boundary


def boundary_tolerance(jet: Jet2) -> float:
    return BOUNDARY_RTOL * (1.0 + eval_gradient_norms(jet)[1])


def _rho(f: DefiningFunction, z: np.ndarray, params) -> float:
    return float(eval_value(f.ast, z[None, :], params)[0].real)


def project_to_boundary(
    f: DefiningFunction,
    seed,
    params: Mapping[str, float] | None = None,
    direction=None,
    max_iter: int = MAX_NEWTON,
    gradient_floor: float = GRADIENT_FLOOR,
) -> BoundaryPoint:
    """Newton iteration from ``seed`` onto {ρ = 0}.

    By default each step moves along the real gradient at the current
    iterate. With ``direction`` given, the search stays on the complex line
    ``seed + s·direction`` for real s, which is handy for hitting a boundary
    point with prescribed tangential coordinates.
    """
    merged = {**f.params, **(params or {})}
    z, _ = as_points(seed, f.n)
    z = z[0, : f.n].copy()
    fixed = None if direction is None else np.asarray(direction, dtype=complex)[: f.n]

    jet = eval_jet2(f, z, merged)
    dnorm, gnorm = eval_gradient_norms(jet)
    if gnorm < gradient_floor:
        raise DegenerateGradientError(f"|∇ρ| = {gnorm:.3e} below floor at {z}")

    for it in range(max_iter + 1):
        rho = jet.value
        if abs(rho) <= boundary_tolerance(jet):
            return BoundaryPoint(z, abs(rho), jet, it)
        if it == max_iter:
            break
        # real gradient in complex form is 2·∂ρ/∂z̄
        step_dir = 2.0 * jet.dzbar if fixed is None else fixed
        slope = float(np.real(np.vdot(step_dir, 2.0 * jet.dzbar)))
        if abs(slope) < gradient_floor**2:
            raise DegenerateGradientError(f"no descent along search direction at {z}")
        trial = z - (rho / slope) * step_dir
        rho_trial = _rho(f, trial, merged)
        if abs(rho_trial) >= abs(rho) and np.sign(rho_trial) != np.sign(rho):
            trial = _bisect(f, z, trial, rho, rho_trial, merged)
        elif abs(rho_trial) >= abs(rho):
            trial = z - 0.5 * (rho / slope) * step_dir
        z = trial
        jet = eval_jet2(f, z, merged)
        if eval_gradient_norms(jet)[1] < gradient_floor:
            raise DegenerateGradientError(f"|∇ρ| fell below floor at {z}")
    raise ProjectionError(f"no convergence after {max_iter} Newton steps", abs(jet.value))


def _bisect(f, a, b, fa, fb, params, steps: int = 60):
    for _ in range(steps):
        mid = 0.5 * (a + b)
        fm = _rho(f, mid, params)
        if fm == 0.0:
            return mid
        if np.sign(fm) == np.sign(fa):
            a, fa = mid, fm
        else:
            b, fb = mid, fm
        if abs(fm) < 1e-15:
            break
    return a if abs(fa) < abs(fb) else b


def project_many(
    f: DefiningFunction,
    seeds,
    params: Mapping[str, float] | None = None,
) -> list[BoundaryPoint | Exception]:
    """Project each seed, recording failures in place of points."""
    out: list[BoundaryPoint | Exception] = []
    for s in np.atleast_2d(np.asarray(seeds, dtype=complex)):
        try:
            out.append(project_to_boundary(f, s, params))
        except (ArithmeticError, FloatingPointError) as err:
            out.append(err)
    return out


# ---------------------------------------------------------------------------
# Frame and Levi form


def _pivot_order(n: int, pivot: int) -> np.ndarray:
    return np.array([j for j in range(n) if j != pivot] + [pivot])


def tangential_frame(jet: Jet2) -> Frame:
    """Orthonormal (1,0) frame whose first n-1 vectors annihilate ρ."""
    n = jet.n
    dnorm, _ = eval_gradient_norms(jet)
    if dnorm == 0.0:
        raise DegenerateGradientError("∂ρ vanishes; no tangential frame")
    pivot = int(np.argmax(np.abs(jet.dz)))
    order = _pivot_order(n, pivot)
    dzbar = jet.dzbar[order]
    last = abs(dzbar[-1])
    a = dzbar / dnorm
    b = dzbar / (dnorm + last)
    b[-1] = dzbar[-1] / last
    rows = np.zeros((n, n), dtype=complex)
    for j in range(n - 1):
        rows[j] = -np.conj(a[j]) * b
        rows[j, j] += 1.0
    rows[-1] = a
    columns = np.zeros_like(rows)
    columns[:, order] = rows
    return Frame(columns, pivot)


def levi_matrix(jet: Jet2, frame: Frame) -> np.ndarray:
    """Complex Hessian restricted to the tangential frame vectors."""
    t = frame.tangential
    m = t @ jet.dzdzbar @ np.conj(t).T
    return 0.5 * (m + np.conj(m).T)


def _jacobi(a: np.ndarray, order: str, tol: float, max_sweeps: int = 60):
    a = a.copy()
    n = a.shape[0]
    v = np.eye(n)
    norm = np.linalg.norm(a)
    offdiag = ~np.eye(n, dtype=bool)
    pairs = [(p, q) for p in range(n - 1) for q in range(p + 1, n)]
    if order == "reverse":
        pairs.reverse()
    elif order != "forward":
        raise ValueError(f"unknown sweep order {order!r}")
    for _ in range(max_sweeps):
        off = np.linalg.norm(a[offdiag])
        if off <= tol * norm or norm == 0.0:
            break
        for p, q in pairs:
            apq = a[p, q]
            if apq == 0.0:
                continue
            theta = (a[q, q] - a[p, p]) / (2.0 * apq)
            if abs(theta) > 1e150:
                t = 0.5 / theta  # θ² would overflow
            else:
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            colp, colq = a[:, p].copy(), a[:, q].copy()
            a[:, p] = c * colp - s * colq
            a[:, q] = s * colp + c * colq
            rowp, rowq = a[p, :].copy(), a[q, :].copy()
            a[p, :] = c * rowp - s * rowq
            a[q, :] = s * rowp + c * rowq
            a[p, q] = a[q, p] = 0.0
            vp, vq = v[:, p].copy(), v[:, q].copy()
            v[:, p] = c * vp - s * vq
            v[:, q] = s * vp + c * vq
    else:
        raise ArithmeticError("Jacobi sweeps did not converge")
    return np.diag(a).copy(), v


def _fix_phase(v: np.ndarray) -> np.ndarray:
    mags = np.abs(v)
    k = int(np.argmax(mags > 1e-8 * mags.max()))
    return v * (np.conj(v[k]) / mags[k])


def levi_spectrum(
    m: np.ndarray,
    sweep_order: str = "forward",
    tol: float = JACOBI_TOL,
) -> LeviSpectrum:
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi.

    Runs on the real symmetric embedding [[Re, -Im], [Im, Re]], whose spectrum
    is the complex one with every value doubled.
    """
    m = np.asarray(m, dtype=complex)
    k = m.shape[0]
    if k == 0:
        return LeviSpectrum(np.zeros(0), np.zeros((0, 0), dtype=complex), 0.0)
    asym = np.max(np.abs(m - np.conj(m).T))
    if asym > HERMITIAN_TOL * (1.0 + np.max(np.abs(m))):
        raise NonHermitianError(f"matrix is not Hermitian (residual {asym:.3e})")
    x, y = m.real, m.imag
    emb = np.block([[x, -y], [y, x]])
    emb = 0.5 * (emb + emb.T)
    vals, vecs = _jacobi(emb, sweep_order, tol)
    idx = np.argsort(vals, kind="stable")
    vals, vecs = vals[idx], vecs[:, idx]

    # each complex eigenvector shows up twice (as v and i·v); keep one per pair
    accepted: list[np.ndarray] = []
    for col in range(2 * k):
        cand = vecs[:k, col] + 1j * vecs[k:, col]
        for u in accepted:
            cand = cand - np.vdot(u, cand) * u
        nrm = np.linalg.norm(cand)
        if nrm > 0.5:
            accepted.append(cand / nrm)
        if len(accepted) == k:
            break
    if len(accepted) != k:
        raise ArithmeticError("could not separate embedded eigenvector pairs")
    lam = vals[1::2].copy()
    # vectors were accepted in ascending order of their eigenvalue
    u = np.column_stack([_fix_phase(v) for v in accepted])
    scale = float(np.max(np.abs(lam))) if k else 0.0
    return LeviSpectrum(lam, u, scale)


def spectrum_at(jet: Jet2, sweep_order: str = "forward") -> tuple[Frame, np.ndarray, LeviSpectrum]:
    frame = tangential_frame(jet)
    lm = levi_matrix(jet, frame)
    return frame, lm, levi_spectrum(lm, sweep_order)


def levi_trace_formula(jet: Jet2) -> float:
    dnorm, _ = eval_gradient_norms(jet)
    if dnorm == 0.0:
        raise DegenerateGradientError("∂ρ vanishes")
    h = jet.dzdzbar
    quad = jet.dzbar @ h @ jet.dz
    return float(np.real(np.trace(h)) - np.real(quad) / dnorm**2)


def levi_det_formula(jet: Jet2) -> float:
    n = jet.n
    dnorm, _ = eval_gradient_norms(jet)
    pivot = int(np.argmax(np.abs(jet.dz)))
    rn = jet.dz[pivot]
    if rn == 0:
        raise DegenerateGradientError("vanishing pivot derivative")
    vecs = np.zeros((n - 1, n), dtype=complex)
    for row, j in enumerate(j for j in range(n) if j != pivot):
        vecs[row, j] = 1.0
        vecs[row, pivot] = -jet.dz[j] / rn
    hess = vecs @ jet.dzdzbar @ np.conj(vecs).T
    det = np.linalg.det(hess) if n > 1 else 1.0
    return float(np.real(det) * abs(rn) ** 2 / dnorm**2)

