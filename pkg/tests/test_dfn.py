import numpy as np
import pytest

from levimax import dfn
from levimax.expr import DslSyntaxError

TEXT = """\
# comment line
param t = 2
(2/3)*re(z1)^3 - t*abs2(z2)*re(z1) - im(z3)

[anchor]
point = 0.1, 0, ?

[upsilon]
kind = user
A = 3
let s = 0.25
Y[1,1] = s
Y[2,2] = s
"""


def test_sections():
    d = dfn.loads(TEXT)
    assert d.function.params == {"t": 2.0}
    assert d.anchor == "0.1, 0, ?"
    assert d.upsilon.keys == {"kind": "user", "A": "3"}
    assert d.upsilon.entries == {(1, 1): "s", (2, 2): "s"}
    assert "let s" in d.upsilon.lets


def test_point_spec():
    p = dfn.parse_point("0.1, 0, ?", 3)
    assert p.free == (2,)
    assert np.allclose(p.direction(), [0, 0, 1j])
    p = dfn.parse_point("t*i, 1, 0", 3, {"t": 2.0})
    assert p.values[0] == 2j and p.direction() is None
    with pytest.raises(ValueError):
        dfn.parse_point("?, ?, 0", 3)
    with pytest.raises(ValueError):
        dfn.parse_point("0, 0", 3)


def test_errors_keep_line_numbers():
    with pytest.raises(DslSyntaxError) as err:
        dfn.loads("re(z1)\n[nope]\n")
    assert err.value.line == 2
    with pytest.raises(DslSyntaxError) as err:
        dfn.loads("re(z1)\n[upsilon]\nY[1,1] = 1\nY[1,1] = 2\n")
    assert err.value.line == 4
    with pytest.raises(DslSyntaxError) as err:
        dfn.loads("param t = 1\n\nre(z1) +\n[anchor]\npoint = 0\n")
    assert err.value.line == 3


def test_load_records_path(tmp_path):
    p = tmp_path / "x.dfn"
    p.write_text("-im(z2)\n")
    d = dfn.load(p)
    assert d.path == str(p) and d.function.n == 2
