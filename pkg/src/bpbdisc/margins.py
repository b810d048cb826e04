"""Verified inequalities recorded as (value, target, slack)."""

from __future__ import annotations


def margin(value: float, target: float, *, strict: bool = False, tol: float = 0.0) -> dict:
    """Record ``value <= target + tol`` (``<`` when strict); slack is ``target - value``."""
    value = float(value)
    target = float(target)
    slack = target - value
    ok = slack + tol > 0 if strict else slack + tol >= 0
    return {"value": value, "target": target, "slack": slack, "ok": bool(ok),
            "relation": "<" if strict else "<="}


def lower_margin(value: float, target: float, *, strict: bool = False) -> dict:
    """Record ``value >= target`` (``>`` when strict); slack is ``value - target``."""
    value = float(value)
    target = float(target)
    slack = value - target
    ok = slack > 0 if strict else slack >= 0
    return {"value": value, "target": target, "slack": slack, "ok": bool(ok),
            "relation": ">" if strict else ">="}


def all_ok(tree) -> bool:
    """True when every recorded margin inside a nested dict/list passes."""
    if isinstance(tree, dict):
        if "ok" in tree and "slack" in tree:
            return bool(tree["ok"])
        return all(all_ok(v) for v in tree.values())
    if isinstance(tree, (list, tuple)):
        return all(all_ok(v) for v in tree)
    return True
