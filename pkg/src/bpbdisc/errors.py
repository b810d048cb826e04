"""Exception types raised by the pipeline.

Every error carries a ``step`` label so that the CLI can name the proof
step that failed.
"""

from __future__ import annotations


class BpbError(Exception):
    step = "unspecified"

    def __init__(self, message: str, step: str | None = None):
        super().__init__(message)
        if step is not None:
            self.step = step


class OutsideDiscError(BpbError, ValueError):
    step = "evaluation"


class AliasingError(BpbError, ValueError):
    step = "boundary-grid"


class DegenerateMapError(BpbError, RuntimeError):
    step = "conformal-map"


class CapTooSmallError(BpbError, ValueError):
    step = "peak-constants"


class EquicontinuityError(BpbError, ValueError):
    step = "equicontinuity"


class HypothesisError(BpbError, ValueError):
    step = "hypothesis"


class BpbSearchError(BpbError, RuntimeError):
    step = "functional-bpb"

    def __init__(self, message: str, best: dict | None = None):
        super().__init__(message)
        self.best = best or {}


class NotSelfMapError(BpbError, ValueError):
    step = "composition-operator"


class ConfigError(BpbError, ValueError):
    step = "config"
