import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from levimax import catalog

settings.register_profile(
    "repo", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile("repo")

CORPUS = ("example1", "example2", "flat", "sphere", "pseudoconcave", "convex_model")


def random_monomial(rng, n: int, deg: int) -> str:
    """A product of up to ``deg`` factors drawn from z_j, conj(z_j), re, im."""
    factors = []
    for _ in range(int(rng.integers(0, deg + 1))):
        j = int(rng.integers(1, n + 1))
        factors.append(rng.choice([f"z{j}", f"conj(z{j})", f"re(z{j})", f"im(z{j})"]))
    coef = f"({rng.normal():.6f} + {rng.normal():.6f}*i)"
    return "*".join([coef] + factors)


def random_poly(rng, n: int, deg: int = 3, terms: int = 3) -> str:
    return " + ".join(random_monomial(rng, n, deg) for _ in range(terms))


def random_field_entries(rng, n: int, deg: int = 3) -> dict:
    """Upper triangle of a Hermitian field; the lower half is filled by conjugation."""
    entries = {}
    for k in range(1, n + 1):
        for j in range(k, n + 1):
            p = random_poly(rng, n, deg)
            entries[(k, j)] = f"re({p})" if k == j else p
    return entries


def corpus_points(name: str, count: int, seed: int, radius: float = 0.3):
    """Seeded boundary points of a catalog domain, projected by gradient Newton."""
    from levimax.conditions import sample_ball
    from levimax.levi import project_to_boundary

    f = catalog.load(name)
    center = np.array([0, 0, 1], dtype=complex) if name == "sphere" else np.array([0.05, 0.03, 0.0], dtype=complex)
    pts = []
    for s in sample_ball(center, radius, count, seed):
        try:
            pts.append(project_to_boundary(f, s))
        except ArithmeticError:
            continue
    return f, pts


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# criterion number -> (passed, detail), filled in by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {k:>2}: {detail}")
