import numpy as np
import pytest
from hypothesis import given, strategies as st

from levimax import catalog
from levimax.conditions import sample_ball, upsilon_contraction
from levimax.expr import eval_jet2, parse_defining_function
from levimax.levi import levi_spectrum, levi_trace_formula, project_to_boundary, spectrum_at, tangential_frame
from levimax.upsilon import (
    EXAMPLE2_THRESHOLD,
    a_bound_from_s,
    constant_field,
    example1_upsilon_field,
    example2_b_window,
    example2_contraction,
    example2_m_field,
    example2_required_A,
    example2_s_window,
    example2_upsilon_field,
    example2_window_predicate,
    expression_field,
    kernel_residual,
    mu_example2,
    theta,
    theta_identity,
    theta_terms,
    upsilon_divergence,
    upsilon_example2,
    upsilon_positive_projection,
    upsilon_scaled_tangential,
    upsilon_zq_construction,
    validate_upsilon,
)

from conftest import CORPUS, corpus_points, random_field_entries


def _eig(y):
    return levi_spectrum(0.5 * (y + y.conj().T)).eigenvalues


@pytest.mark.parametrize("t", [0.0, 0.3, 1.0])
def test_scaled_tangential_spectrum(t):
    _, pts = corpus_points("example2", 10, 0)
    for bp in pts:
        y = upsilon_scaled_tangential(bp.jet, t).entries
        assert _eig(y) == pytest.approx([0, t, t], abs=1e-12)
        assert kernel_residual(bp.jet, y) <= 1e-12
    with pytest.raises(ValueError):
        upsilon_scaled_tangential(pts[0].jet, 1.5)


@pytest.mark.parametrize("name", CORPUS)
def test_scaled_tangential_contraction(name):
    _, pts = corpus_points(name, 50, 2)
    for bp in pts:
        y = upsilon_scaled_tangential(bp.jet, 0.4).entries
        assert upsilon_contraction(bp.jet, y) == pytest.approx(0.4 * levi_trace_formula(bp.jet), abs=1e-10)


def test_positive_projection():
    f = catalog.load("pseudoconcave")
    bp = project_to_boundary(f, [0.1, 0.1, 0])
    frame, _, spec = spectrum_at(bp.jet)
    assert np.allclose(upsilon_positive_projection(frame, spec).entries, 0)

    f = catalog.load("example1", t=2.0)
    bp = project_to_boundary(f, [0.1, 0, 0], direction=[0, 0, 1j])
    frame, _, spec = spectrum_at(bp.jet)
    y = upsilon_positive_projection(frame, spec).entries
    assert np.linalg.norm(y @ y - y) <= 1e-12
    assert _eig(y) == pytest.approx([0, 0, 1], abs=1e-12)
    # z2 carries the negative eigenvalue, so the projection ignores it
    assert np.allclose(y[1, :], 0, atol=1e-12)
    assert np.allclose(y[:, 1], 0, atol=1e-12)
    assert y[0, 0].real > 0.99


@pytest.mark.parametrize("name", ["example1", "example2", "sphere"])
def test_positive_projection_sweep_invariance(name):
    _, pts = corpus_points(name, 20, 3)
    for bp in pts:
        frame = tangential_frame(bp.jet)
        _, lm, spec = spectrum_at(bp.jet)
        other = levi_spectrum(lm, "reverse")
        a = upsilon_positive_projection(frame, spec).entries
        b = upsilon_positive_projection(frame, other).entries
        assert np.allclose(a, b, atol=1e-12)


def _mixed():
    return parse_defining_function("-abs2(z1) + abs2(z2) - im(z3)")


def test_zq_construction_levels():
    a, b = 0.3, 0.6
    for f, want in [
        (catalog.load("convex_model"), [0, a, a]),
        (catalog.load("pseudoconcave"), [0, b, b]),
        (_mixed(), [0, a, b]),
    ]:
        jet = eval_jet2(f, [0, 0, 0])
        spec = spectrum_at(jet)[2]
        u = upsilon_zq_construction(jet, spec, a, b)
        assert _eig(u.entries) == pytest.approx(want, abs=1e-12)
        lam = spec.eigenvalues
        m = u.options["m"]
        want_c = b * np.sum(lam[:m]) + a * np.sum(lam[m:])
        assert upsilon_contraction(jet, u.entries) == pytest.approx(want_c, abs=1e-12)
    with pytest.raises(ValueError):
        upsilon_zq_construction(jet, spec, 0.6, 0.3)


def test_zq_construction_kernel_and_limit():
    _, pts = corpus_points("example2", 30, 5)
    for bp in pts:
        spec = spectrum_at(bp.jet)[2]
        u = upsilon_zq_construction(bp.jet, spec, 0.3, 0.6)
        assert kernel_residual(bp.jet, u.entries) <= 1e-12
    jet = eval_jet2(catalog.load("convex_model"), [0.1, 0.2j, 0.01])
    spec = spectrum_at(jet)[2]
    near = upsilon_zq_construction(jet, spec, 0.4 - 1e-9, 0.4).entries
    assert np.allclose(near, upsilon_scaled_tangential(jet, 0.4).entries, atol=1e-8)


def test_zq_anchor_reused_across_points():
    f = _mixed()
    anchor_jet = eval_jet2(f, [0, 0, 0])
    u = upsilon_zq_construction(anchor_jet, spectrum_at(anchor_jet)[2], 0.3, 0.6)
    for s in sample_ball(np.zeros(3), 0.05, 10, 0):
        bp = project_to_boundary(f, s)
        assert kernel_residual(bp.jet, u.matrix(bp.coordinates, bp.jet)) <= 1e-12


def test_example2_m_closed_forms():
    a, b = 0.8, 0.05
    m_field = example2_m_field(a, b)
    rng = np.random.default_rng(0)
    for _ in range(200):
        z = rng.normal(size=2) + 1j * rng.normal(size=2)
        m = m_field.matrix(z)
        s = np.sum(np.abs(z) ** 2)
        g = 4 * abs(z[0]) ** 2 * abs(z[1]) ** 2 / s**2
        assert np.linalg.det(m).real == pytest.approx(a * a - 4 * a * b * (1 - g) - b * b * g * g, abs=1e-10)
        assert np.trace(m).real == pytest.approx(2 * a - 4 * b * (1 - g), abs=1e-10)
        e = _eig(m)
        assert e[0] >= a - 4 * b - 1e-12 and e[-1] <= a + b + 1e-12


def test_example2_field_matches_pointwise_and_kernel():
    a, b, t = 0.8, 0.05, 2.5
    u = example2_upsilon_field(a, b, t)
    f = catalog.load("example2", t=t)
    for s in sample_ball(np.zeros(3), 0.3, 20, 4):
        bp = project_to_boundary(f, s)
        y = u.matrix(bp.coordinates)
        assert np.allclose(y, upsilon_example2(bp.coordinates, a, b, t).entries, atol=1e-10)
        assert kernel_residual(bp.jet, y) <= 1e-12


def test_example2_guards():
    with pytest.raises(ArithmeticError):
        upsilon_example2([0, 0, 1], 0.8, 0.05, 2.0)
    with pytest.raises(ValueError):
        upsilon_example2([1, 0, 0], 0.8, 0.5, 2.0)
    with pytest.raises(ArithmeticError):
        mu_example2([0, 0, 0], 0.8, 0.05, 2.0)


def test_mu_special_values():
    a, b, t = 0.8, 0.05, 2.0
    z1 = 0.7 + 0.2j
    assert mu_example2([z1, 0, 0], a, b, t) == pytest.approx(abs(z1) ** 2 * ((1 - t) * a - 4 * b))
    z = [0.6, 0.6j, 0]
    # g = 1: substitute into the polynomial directly
    assert mu_example2(z, a, b, t) == pytest.approx(0.72 * ((1 - t) * a - 4 * b + (5 + t) * b - (1 + 2 * t) * b))
    rng = np.random.default_rng(2)
    for _ in range(100):
        p = rng.normal(size=3) + 1j * rng.normal(size=3)
        assert example2_contraction(p, a, b, t) == pytest.approx(mu_example2(p, a, b, t), abs=1e-9)


def test_divergence_examples():
    assert np.allclose(upsilon_divergence(_const_expr(), [0.3, 1j]), 0)
    m = example2_m_field(0.8, 0.05)
    rng = np.random.default_rng(1)
    for _ in range(20):
        z = rng.normal(size=2) + 1j * rng.normal(size=2)
        assert np.allclose(upsilon_divergence(m, z), 0, atol=1e-12)
    n = 3
    mono = expression_field({(k, j): f"z{j}*conj(z{k})" for k in range(1, 4) for j in range(1, 4)}, n)
    z = np.array([0.3 + 0.1j, -1j, 2.0])
    assert np.allclose(upsilon_divergence(mono, z), n * z)


def _const_expr():
    return expression_field({(1, 1): "0.5", (1, 2): "0.1 + 0.2*i", (2, 2): "0.25"}, 2)


@pytest.mark.parametrize("eta", [0.0, 0.5, 1.0])
def test_theta_constant_field(eta):
    assert theta(_const_expr(), eta, [0.4, -0.2j]) == pytest.approx(0.0, abs=1e-15)


def test_theta_projection_first_terms_cancel():
    # rank-one projection onto (1, z1)
    u = expression_field(
        {(1, 1): "1/(1 + abs2(z1))", (1, 2): "z1/(1 + abs2(z1))", (2, 2): "abs2(z1)/(1 + abs2(z1))"}, 2
    )
    pts = np.array([[0.3 + 0.4j, 0], [-1.2, 0.5j], [0.05j, 1]])
    for p in pts:
        y = u.matrix(p)
        assert np.allclose(y @ y, y, atol=1e-12)
    terms = theta_terms(u, 1.0, pts)
    assert np.allclose(terms[:, 0] + terms[:, 1], 0, atol=1e-12)


@given(st.integers(0, 2**32 - 1), st.sampled_from([0.0, 0.5, 1.0]))
def test_theta_identity_random_fields(seed, eta):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 4))
    u = expression_field(random_field_entries(rng, n), n)
    pts = 0.5 * (rng.normal(size=(3, n)) + 1j * rng.normal(size=(3, n)))
    a = np.array([theta(u, eta, p) for p in pts])
    b = theta_identity(u, eta, pts)
    scale = 1 + np.max(np.abs(a))
    assert np.max(np.abs(a - b)) <= 1e-8 * scale


def test_window_predicate_grid():
    ts = 1.0 + 1e-4 * np.arange(20001)
    for t in ts:
        assert example2_window_predicate(t) == (t < EXAMPLE2_THRESHOLD)


def test_b_window_tracks_threshold():
    assert not example2_b_window(2.5).empty
    assert example2_b_window(2.7).empty
    assert not example2_b_window(EXAMPLE2_THRESHOLD - 1e-4).empty
    assert example2_b_window(EXAMPLE2_THRESHOLD + 1e-4).empty
    w = example2_b_window(2.5)
    assert w.hi == pytest.approx(0.2)
    assert example2_required_A(0.8, w.midpoint) > 2


def test_s_window():
    for t in (1.5, 3.0):
        w = example2_s_window(t)
        assert w.hi == pytest.approx((2 * t - 1) / (4 * (1 - t) ** 2))
        assert np.isfinite(a_bound_from_s(0.99 * w.hi))
    with pytest.raises(ValueError):
        example2_s_window(1.0)
    assert a_bound_from_s(2.0) == pytest.approx(2 * 3 / 2)


def test_validate_scaled_tangential_in_window():
    from levimax.upsilon import UpsilonField

    f = catalog.load("sphere")
    A = 3.0
    t = 0.5
    pts = [project_to_boundary(f, s) for s in sample_ball([0, 0, 1], 0.1, 15, 0)]
    u = UpsilonField("scaled_tangential", 3, np.zeros((3, 3)), options={"t": t})
    rep = validate_upsilon(u, f, A, 1, pts)
    assert rep.window_count_min == 2
    assert rep.kernel_residual <= 1e-12


def test_validate_example2_passes():
    a, t = 0.8, 2.5
    b = example2_b_window(t, a).midpoint
    A = 1.1 * example2_required_A(a, b)
    f = catalog.load("example2", t=t)
    rep = validate_upsilon(example2_upsilon_field(a, b, t), f, A, 2, sample_ball(np.zeros(3), 0.05, 30, 0))
    assert rep.passed, rep.findings


@pytest.mark.parametrize("t", [1.5, 2.0, 5.0])
def test_validate_example1_field(t):
    f = catalog.load("example1", t=t)
    A = 1.1 * max(1 + t, (1 + t) / t)
    rep = validate_upsilon(example1_upsilon_field(t), f, A, 2, sample_ball(np.zeros(3), 0.01, 20, 1))
    assert rep.passed, rep.findings


def test_validate_identity_fails():
    f = catalog.load("convex_model")
    rep = validate_upsilon(constant_field(np.eye(3)), f, 3.0, 1, sample_ball(np.zeros(3), 0.1, 5, 0))
    assert not rep.passed
    assert rep.complement_psd_margin == pytest.approx(0.0, abs=1e-12)
    assert rep.window_count_min == 0
    assert rep.findings
    with pytest.raises(ValueError):
        validate_upsilon(constant_field(np.eye(3)), f, 2.0, 1, [])
