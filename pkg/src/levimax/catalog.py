"""Named defining functions used by the reproduction runs and the test corpus."""

from __future__ import annotations

from .expr import DefiningFunction, parse_defining_function

EXAMPLE1 = """\
# cubic-in-re(z1) hypersurface with a negative direction along z2
param t = 2
(2/3)*re(z1)^3 - t*abs2(z2)*re(z1) - im(z3)
"""

EXAMPLE2 = """\
# quartic hypersurface whose Levi form is indefinite for t > 1/2
param t = 2
(1/4)*(abs2(z1)^2 + abs2(z2)^2) - t*abs2(z1)*abs2(z2) - im(z3)
"""

FLAT = """\
-im(z3)
"""

SPHERE = """\
abs2(z1) + abs2(z2) + abs2(z3) - 1
"""

CONVEX_MODEL = """\
abs2(z1) + abs2(z2) - im(z3)
"""

PSEUDOCONCAVE = """\
-abs2(z1) - abs2(z2) - im(z3)
"""

SOURCES = {
    "example1": EXAMPLE1,
    "example2": EXAMPLE2,
    "flat": FLAT,
    "sphere": SPHERE,
    "convex_model": CONVEX_MODEL,
    "pseudoconcave": PSEUDOCONCAVE,
}


def load(name: str, **params: float) -> DefiningFunction:
    f = parse_defining_function(SOURCES[name])
    return f.with_params(**params) if params else f


# ∂ρ/∂z̄_k for the two example hypersurfaces, written in the DSL so that Υ
# fields built from them stay differentiable expressions
EXAMPLE1_DZBAR = (
    "re(z1)^2 - (t/2)*abs2(z2)",
    "-t*z2*re(z1)",
)
EXAMPLE2_DZBAR = (
    "(abs2(z1)/2 - t*abs2(z2))*z1",
    "(abs2(z2)/2 - t*abs2(z1))*z2",
)
