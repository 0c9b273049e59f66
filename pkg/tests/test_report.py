import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from levimax.conditions import ConditionVerdict, Interval, VerdictKind
from levimax.report import dumps, to_plain, verdict_json


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_floats_round_trip(x):
    assert json.loads(dumps({"x": x}))["x"] == x


def test_sentinels():
    out = json.loads(dumps({"a": math.inf, "b": -math.inf, "c": math.nan, "d": -0.0}))
    assert out == {"a": "inf", "b": "-inf", "c": "nan", "d": 0.0}


def test_verdicts():
    assert verdict_json(ConditionVerdict(VerdictKind.HOLDS, 2.0)) == {"kind": "holds", "value": 2.0}
    assert verdict_json(ConditionVerdict(VerdictKind.TRIVIAL)) == {"kind": "trivial", "value": "trivial"}
    assert verdict_json(ConditionVerdict(VerdictKind.INFEASIBLE))["value"] == "infeasible"
    v = verdict_json(ConditionVerdict(VerdictKind.FAILS, witness={"A": 1.0}))
    assert v["value"] is None and v["witness"] == {"A": 1.0}


def test_to_plain_types():
    plain = to_plain({"z": np.array([1 + 2j]), "i": np.int64(3), "b": np.bool_(True), "w": Interval(0.0, 1.0)})
    assert plain == {"z": [[1.0, 2.0]], "i": 3, "b": True, "w": {"lo": 0.0, "hi": 1.0, "empty": False}}
    with pytest.raises(TypeError):
        to_plain(object())


def test_layout_stable():
    text = dumps({"row": [1.0, 2.5], "nested": {"k": [[0.0, 1.0]]}})
    assert '"row": [1.0, 2.5]' in text
    assert text.endswith("}\n")
