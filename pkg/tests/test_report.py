import json
import math

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from bpbdisc import report
from bpbdisc.margins import all_ok, lower_margin, margin

finite = st.floats(-1e6, 1e6)


@given(finite, finite)
def test_margin_slack_sign(v, t):
    m = margin(v, t)
    assert m["slack"] == t - v
    assert m["ok"] == (v <= t)
    assert margin(v, t, strict=True)["ok"] == (v < t)
    lm = lower_margin(v, t)
    assert lm["ok"] == (v >= t) and lm["relation"] == ">="


def test_margin_tolerance():
    assert margin(1.0 + 5e-7, 1.0, tol=1e-6)["ok"]
    assert not margin(1.0 + 5e-6, 1.0, tol=1e-6)["ok"]


def test_all_ok_nested():
    tree = {"a": margin(1, 2), "b": [margin(0, 1), {"c": lower_margin(3, 2)}], "note": 7}
    assert all_ok(tree)
    tree["b"][1]["d"] = margin(5, 1)
    assert not all_ok(tree)


def test_report_sanitises_numbers():
    body = {"x": np.float64(1.5), "n": np.int64(3), "bad": math.nan, "big": -math.inf,
            "arr": np.arange(3), "z": 1 + 2j, "flag": np.bool_(True)}
    env = report.envelope("k", body, timestamp="T")
    text = report.dumps(env)
    data = json.loads(text)
    assert data["bad"] == "nan" and data["big"] == "-inf" and data["arr"] == [0, 1, 2]
    assert data["z"] == [1.0, 2.0] and data["flag"] is True
    assert data["schema_version"] == report.SCHEMA_VERSION and data["generated_at"] == "T"
    assert report.dumps(env) == text


def test_default_timestamp_present():
    assert report.envelope("k", {})["generated_at"]
