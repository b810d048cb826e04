"""Operators from an l_p domain into truncated disc-algebra polynomials."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .. import _kernels
from ..discfun import DiscPoly, check_in_disc, default_grid, grid_points, is_power_of_two
from ..errors import AliasingError, EquicontinuityError
from .domain import FiniteDomain, Functional


@dataclass(frozen=True)
class OperatorIntoDisc:
    """Column ``j`` of ``matrix`` holds the Taylor coefficients of ``T e_j``."""

    domain: FiniteDomain
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[1] != self.domain.n:
            raise ValueError(f"matrix shape {m.shape} does not match domain dimension {self.domain.n}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def degree(self) -> int:
        return self.matrix.shape[0] - 1

    def apply(self, x) -> DiscPoly:
        return DiscPoly(self.matrix @ np.asarray(x, dtype=np.complex128))

    def rows(self, z) -> np.ndarray:
        """``row(z) @ matrix`` for each point: the functionals ``x -> (Tx)(z)``."""
        return _kernels.polyval_columns(self.matrix, z)

    def __mul__(self, c) -> OperatorIntoDisc:
        return OperatorIntoDisc(self.domain, self.matrix * complex(c))

    __rmul__ = __mul__

    def to_dict(self) -> dict:
        return {"domain": self.domain.to_dict(),
                "matrix": [[[c.real, c.imag] for c in row] for row in self.matrix]}

    @classmethod
    def from_dict(cls, d: dict) -> OperatorIntoDisc:
        dom = d["domain"]
        p = math.inf if dom["p"] in ("inf", "infinity") else float(dom["p"])
        mat = np.array([[complex(a, b) for a, b in row] for row in d["matrix"]])
        return cls(FiniteDomain(int(dom["n"]), p), mat)


@dataclass(frozen=True)
class NormBracket:
    value: float
    upper: float
    grid_max: float
    theta: float
    M: int


def _row_norm_at(T: OperatorIntoDisc, theta: float) -> float:
    return float(_kernels.row_qnorms(T.rows(np.array([np.exp(1j * theta)])), T.domain.q)[0])


def operator_norm_bracket(T: OperatorIntoDisc, M: int | None = None) -> NormBracket:
    """``sup_z ||row(z) T||_q`` over the circle with a certified upper bound.

    Each ``Tx`` with unit ``x`` has degree at most d and sup-norm at most
    ``||T||``, so Bernstein's inequality bounds its angular derivative by
    ``d ||T||``.  Between grid nodes that gives
    ``||T|| <= grid_max / (1 - pi d / M)``.
    """
    if M is None:
        M = default_grid(T.degree)
    if not is_power_of_two(M) or M < 2 * (T.degree + 1):
        raise AliasingError(f"grid size {M} too small for degree {T.degree}")
    V = T.rows(grid_points(M))
    norms = _kernels.row_qnorms(V, T.domain.q)
    k = int(np.argmax(norms))
    grid_max = float(norms[k])
    theta_k = 2 * np.pi * k / M
    if grid_max == 0.0 or T.degree == 0:
        return NormBracket(grid_max, grid_max, grid_max, theta_k, M)
    res = minimize_scalar(lambda t: -_row_norm_at(T, t), bounds=(theta_k - 2 * np.pi / M, theta_k + 2 * np.pi / M),
                          method="bounded", options={"xatol": 1e-13})
    value = max(grid_max, float(-res.fun))
    ratio = math.pi * T.degree / M
    upper = grid_max / (1.0 - ratio) if ratio < 1 else math.inf
    return NormBracket(value, max(upper, value), grid_max, float(res.x) % (2 * np.pi), M)


def operator_norm(T: OperatorIntoDisc, M: int | None = None) -> float:
    return operator_norm_bracket(T, M).value


def point_functional(T: OperatorIntoDisc, theta0: float) -> Functional:
    """``x -> (Tx)(e^{i theta0})``."""
    return Functional(T.domain, T.rows(np.array([np.exp(1j * theta0)]))[0])


def evaluate_operator(T: OperatorIntoDisc, x, z):
    check_in_disc(z)
    return T.apply(x)(z)


# --------------------------------------------------------------------------
# equicontinuity
# --------------------------------------------------------------------------


def cap_boundary(theta0: float, delta: float, n: int = 1024) -> np.ndarray:
    """Boundary of ``{z in closed disc : |z - e^{i theta0}| <= delta}``.

    It is the arc of the unit circle inside the cap together with the arc
    of the circle ``|z - e^{i theta0}| = delta`` inside the disc.
    """
    z0 = np.exp(1j * theta0)
    if delta >= 2.0:
        return grid_points(2 * n)
    half = 2.0 * math.asin(delta / 2.0)
    arc = np.exp(1j * (theta0 + np.linspace(-half, half, n)))
    start = math.acos(-delta / 2.0)
    inner = z0 * (1.0 + delta * np.exp(1j * np.linspace(start, 2 * np.pi - start, n)))
    inner = inner / np.maximum(np.abs(inner), 1.0)
    return np.concatenate([arc, inner])


def deviation(T: OperatorIntoDisc, theta0: float, z) -> np.ndarray:
    """``Delta(z) = ||(row(z) - row(z0)) T||_q``: the worst ``|Tx(z) - Tx(z0)|`` over unit x."""
    base = T.rows(np.array([np.exp(1j * theta0)]))
    return _kernels.row_qnorms(T.rows(z) - base, T.domain.q)


def cap_sup(T: OperatorIntoDisc, theta0: float, delta: float, n: int = 1024) -> float:
    return float(np.max(deviation(T, theta0, cap_boundary(theta0, delta, n))))


def equicontinuity_delta2(T: OperatorIntoDisc, theta0: float, eps: float, *, margin: float = 0.1,
                          n: int = 1024, steps: int = 60, floor: float = 1e-9) -> float:
    """Cap radius on which every ``Tx`` (unit x) stays within eps of its value at the peak point.

    ``Delta`` is a supremum of moduli of analytic functions, hence
    subharmonic, so its maximum over a cap sits on the cap boundary and
    grows with the radius.  Bisection finds the largest admissible radius,
    which is then shrunk by ``margin``.  Returns 2 when the whole disc works.
    """
    if not eps > 0:
        raise EquicontinuityError("eps must be positive")
    if cap_sup(T, theta0, 2.0, n) < eps:
        return 2.0
    lo, hi = 0.0, 2.0
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if cap_sup(T, theta0, mid, n) < eps:
            lo = mid
        else:
            hi = mid
    if lo < floor:
        raise EquicontinuityError(
            f"no cap around theta0 = {theta0:.6g} keeps the deviation below eps = {eps:.3g}")
    return (1.0 - margin) * lo
