"""Example operators: multiplication, composition, rank-one, evaluation and a Hardy-space diagonal.

Also norm-attainment probes, equicontinuity tables and a name registry used
by the command line.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import convolution_matrix

from . import _kernels
from .core.domain import FiniteDomain, Functional, dual_norm, norming_vector
from .core.operators import OperatorIntoDisc, equicontinuity_delta2, operator_norm
from .discfun import DiscPoly, grid_points, hardy2_norm, sup_norm
from .errors import BpbError, NotSelfMapError


@dataclass(frozen=True)
class OperatorOnPoly:
    """Linear map on Taylor coefficients; the input carries the sup-norm."""

    matrix: np.ndarray
    truncation_bound: float = 0.0

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def d_in(self) -> int:
        return self.matrix.shape[1] - 1

    @property
    def d_out(self) -> int:
        return self.matrix.shape[0] - 1

    def apply(self, f: DiscPoly) -> DiscPoly:
        c = np.zeros(self.d_in + 1, dtype=np.complex128)
        k = min(f.coeffs.size, c.size)
        if np.any(f.coeffs[k:]):
            raise ValueError(f"input degree {f.degree} exceeds operator input degree {self.d_in}")
        c[:k] = f.coeffs[:k]
        return DiscPoly(self.matrix @ c)

    def image_of_one(self) -> DiscPoly:
        return DiscPoly(self.matrix[:, 0])


def mult_operator(phi: DiscPoly, d: int) -> OperatorOnPoly:
    """``f -> phi f`` on polynomials of degree ``d``; output degree ``d + deg phi``."""
    return OperatorOnPoly(convolution_matrix(phi.coeffs, d + 1, mode="full"))


def comp_operator(phi: DiscPoly, d: int, out_degree: int | None = None) -> OperatorOnPoly:
    """``f -> f o phi``; column k holds the coefficients of ``phi**k``.

    Without ``out_degree`` nothing is truncated.  With it, ``truncation_bound``
    bounds the sup-norm lost per unit ``||f||``: each ``|a_k| <= ||f||`` and the
    dropped part of ``phi**k`` has sup-norm at most its coefficient l1 norm.
    """
    if sup_norm(phi) > 1.0 + 1e-12:
        raise NotSelfMapError(f"sup-norm of phi is {sup_norm(phi):.12g} > 1")
    full = d * phi.degree
    cols = [np.array([1.0 + 0j])]
    for _ in range(d):
        cols.append(np.convolve(cols[-1], phi.coeffs))
    mat = np.zeros((full + 1, d + 1), dtype=np.complex128)
    for k, c in enumerate(cols):
        mat[: c.size, k] = c
    if out_degree is None or out_degree >= full:
        return OperatorOnPoly(mat)
    lost = float(np.sum(np.abs(mat[out_degree + 1:, :])))
    return OperatorOnPoly(mat[: out_degree + 1], truncation_bound=lost)


def rank_one(xstar: Functional, h: DiscPoly) -> OperatorIntoDisc:
    """``x -> xstar(x) h``."""
    if h.is_zero():
        raise ValueError("h must be nonzero")
    return OperatorIntoDisc(xstar.domain, np.outer(h.coeffs, xstar.vector))


def evaluation_functional(z0: complex, d: int) -> OperatorOnPoly:
    """``f -> f(z0)`` as a map into constants; its norm is 1, attained at ``f = 1``."""
    if abs(z0) > 1.0 + 1e-12:
        raise ValueError("evaluation point must lie in the closed disc")
    return OperatorOnPoly(np.power(complex(z0), np.arange(d + 1))[None, :])


@dataclass(frozen=True)
class HardyDiagonal:
    """``sum a_n z^n -> sum (1 - 1/(n+1)) a_n z^n`` from the disc algebra into H^2."""

    d: int

    @property
    def multipliers(self) -> np.ndarray:
        n = np.arange(self.d + 1)
        return 1.0 - 1.0 / (n + 1.0)

    def apply(self, f: DiscPoly) -> DiscPoly:
        c = np.zeros(self.d + 1, dtype=np.complex128)
        k = min(f.coeffs.size, c.size)
        c[:k] = f.coeffs[:k]
        return DiscPoly(self.multipliers * c)

    def ratio(self, f: DiscPoly) -> float:
        return hardy2_norm(self.apply(f)) / sup_norm(f)

    def best_basis(self) -> tuple[int, float]:
        m = self.multipliers
        k = int(np.argmax(m))
        return k, float(m[k])

    def gap(self) -> float:
        return 1.0 - self.best_basis()[1]


def hardy_diagonal(d: int) -> HardyDiagonal:
    if d < 0:
        raise ValueError("degree must be nonnegative")
    return HardyDiagonal(int(d))


# --------------------------------------------------------------------------
# attainment probes
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ProbeReport:
    best_x: np.ndarray
    best_value: float
    norm: float
    gap: float
    attained: bool
    trials: int
    seed: int

    @property
    def classification(self) -> str:
        return "attained within tol" if self.attained else "gap persists"

    def to_dict(self) -> dict:
        return {"best_x": [[float(c.real), float(c.imag)] for c in self.best_x],
                "best_value": self.best_value, "norm": self.norm, "gap": self.gap,
                "classification": self.classification, "trials": self.trials, "seed": self.seed}


def _sup_image(T: OperatorIntoDisc, x, z) -> tuple[float, int]:
    v = np.abs(_kernels.polyval(T.matrix @ x, z))
    k = int(np.argmax(v))
    return float(v[k]), k


def attainment_probe(T, trials: int = 16, seed: int = 0, *, steps: int = 50,
                     tol: float = 1e-6, M: int | None = None) -> ProbeReport:
    """Multi-start ascent of ``||Tx||_inf`` over the unit sphere.

    Each step moves the point to the norming vector of ``x -> Tx(z*)`` at the
    current peak ``z*``, which never decreases ``|Tx(z*)|``.  For the Hardy
    diagonal the supremum 1 is compared with the best basis vector and with
    random polynomials.
    """
    if isinstance(T, HardyDiagonal):
        return _hardy_probe(T, trials, seed, tol)
    rng = np.random.default_rng(seed)
    dom = T.domain
    M = M or max(4096, 1 << (4 * (T.degree + 1) - 1).bit_length())
    z = grid_points(M)
    norm = operator_norm(T)
    best_x, best = np.zeros(dom.n, dtype=np.complex128), 0.0
    for _ in range(max(1, trials)):
        x = dom.normalize(rng.standard_normal(dom.n) + 1j * rng.standard_normal(dom.n))
        val, k = _sup_image(T, x, z)
        for _ in range(steps):
            f = Functional(dom, T.rows(z[k:k + 1])[0])
            if f.norm() == 0.0:
                break
            x_new = norming_vector(f)
            new, k_new = _sup_image(T, x_new, z)
            if new <= val + 1e-15:
                break
            x, val, k = x_new, new, k_new
        if val > best:
            best, best_x = val, x
    gap = max(0.0, norm - best)
    return ProbeReport(best_x, best, norm, gap, gap <= tol, max(1, trials), seed)


def _hardy_probe(D: HardyDiagonal, trials: int, seed: int, tol: float) -> ProbeReport:
    k, value = D.best_basis()
    best_x = np.zeros(D.d + 1, dtype=np.complex128)
    best_x[k] = 1.0
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        c = rng.standard_normal(D.d + 1) + 1j * rng.standard_normal(D.d + 1)
        f = DiscPoly(c)
        r = D.ratio(f)
        if r > value:
            value, best_x = r, c / sup_norm(f)
    gap = 1.0 - value
    return ProbeReport(best_x, value, 1.0, gap, gap <= tol, trials, seed)


# --------------------------------------------------------------------------
# equicontinuity tables
# --------------------------------------------------------------------------


def equicontinuity_report(T: OperatorIntoDisc, theta_grid, eps_grid) -> list[dict]:
    """``delta2(theta0, eps)`` for every pair; refusals are marked unavailable."""
    rows = []
    for theta0 in theta_grid:
        for eps in eps_grid:
            try:
                d2 = equicontinuity_delta2(T, float(theta0), float(eps))
                rows.append({"theta0": float(theta0), "eps": float(eps), "delta2": d2, "status": "ok"})
            except BpbError as exc:
                rows.append({"theta0": float(theta0), "eps": float(eps), "delta2": None,
                             "status": f"unavailable: {exc}"})
    return rows


def write_equicontinuity_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["theta0", "eps", "delta2", "status"])
        for r in rows:
            d2 = "unavailable" if r["delta2"] is None else f"{r['delta2']:.17g}"
            out.writerow([f"{r['theta0']:.17g}", f"{r['eps']:.17g}", d2, r["status"].split(":")[0]])


# --------------------------------------------------------------------------
# pipeline inputs
# --------------------------------------------------------------------------


def peaked_h(theta0: float, degree: int = 1, tail: float = 0.05) -> DiscPoly:
    """Unit sup-norm polynomial with ``|h(e^{i theta0})| = ||h||_inf = 1``.

    ``h(z) = (1 - tail)(1 + w)/2 + tail w^degree`` with ``w = e^{-i theta0} z``;
    the triangle inequality makes ``e^{i theta0}`` the unique peak.
    """
    w = np.exp(-1j * theta0)
    c = np.zeros(max(degree, 1) + 1, dtype=np.complex128)
    if degree <= 1:
        c[0], c[1] = 0.5, 0.5 * w
    else:
        c[0], c[1] = 0.5 * (1 - tail), 0.5 * (1 - tail) * w
        c[degree] += tail * w**degree
    return DiscPoly(c)


def random_unit_functional(dom: FiniteDomain, rng) -> Functional:
    v = rng.standard_normal(dom.n) + 1j * rng.standard_normal(dom.n)
    return Functional(dom, v / dual_norm(v, dom.p))


def near_maximizer(f: Functional, level: float, rng) -> np.ndarray:
    """Unit vector ``x`` with ``|f(x)| = level`` for a unit functional ``f``.

    Slides from the norming vector of ``f`` along a random direction until
    the value drops to ``level``; the overall phase is random.
    """
    dom = f.domain
    u = norming_vector(f)
    if level >= 1.0 or dom.n == 1:
        return u * np.exp(2j * np.pi * rng.uniform())
    v = rng.standard_normal(dom.n) + 1j * rng.standard_normal(dom.n)
    v = v - f(v) * u  # keeps f(v) = 0
    lo, hi = 0.0, 1.0

    def value(s):
        return abs(f(dom.normalize(u + s * v)))

    while value(hi) > level and hi < 1e8:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if value(mid) > level:
            lo = mid
        else:
            hi = mid
    return dom.normalize(u + lo * v) * np.exp(2j * np.pi * rng.uniform())


@dataclass(frozen=True)
class PipelineInput:
    T: OperatorIntoDisc
    x0: np.ndarray
    theta0: float
    description: str
    params: dict = field(default_factory=dict)


def peaked_rank_one(n: int = 2, p: float = 2.0, degree: int = 1, eps: float = 0.3, theta0: float = 0.7,
                    seed: int = 0, tail: float = 0.05, attainment: float | None = None) -> PipelineInput:
    """Rank-one ``x* (x) h`` with ``||T|| = 1`` and ``|T x0(e^{i theta0})| = attainment``.

    The default attainment ``1 - eps/6`` sits inside the hypothesis window.
    """
    rng = np.random.default_rng(seed)
    dom = FiniteDomain(int(n), p)
    xstar = random_unit_functional(dom, rng)
    h = peaked_h(theta0, degree, tail)
    h = h * (1.0 / sup_norm(h))
    T = rank_one(xstar, h)
    level = 1.0 - eps / 6.0 if attainment is None else attainment
    x0 = near_maximizer(xstar, level, rng)
    return PipelineInput(T, x0, float(theta0), "rank-one x* (x) h peaking at e^(i theta0)",
                         {"n": n, "p": p, "degree": degree, "eps": eps, "theta0": theta0, "seed": seed,
                          "tail": tail, "attainment": level})


def violating_rank_one(n: int = 2, p: float = 2.0, degree: int = 1, eps: float = 0.3, theta0: float = 0.7,
                       seed: int = 0) -> PipelineInput:
    """Same operator, but ``x0`` misses the near-attainment hypothesis."""
    return peaked_rank_one(n=n, p=p, degree=degree, eps=eps, theta0=theta0, seed=seed,
                           attainment=max(0.0, 1.0 - eps / 3.0 - 0.1))


# --------------------------------------------------------------------------
# registry
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ZooEntry:
    name: str
    summary: str
    demo: Callable[[], dict]
    pipeline: Callable[..., PipelineInput] | None = None


def _demo_mult() -> dict:
    phi = DiscPoly([1.0, 1.0])
    op = mult_operator(phi, 8)
    return {"phi": [[1.0, 0.0], [1.0, 0.0]], "sup_norm_phi": sup_norm(phi),
            "sup_norm_M_phi_1": sup_norm(op.image_of_one())}


def _demo_comp() -> dict:
    phi = DiscPoly([0.0, 0.0, 1.0])
    op = comp_operator(phi, 8)
    return {"phi": "z^2", "C_phi_1": sup_norm(op.image_of_one()),
            "C_phi_z": [[float(c.real), float(c.imag)] for c in op.apply(DiscPoly([0.0, 1.0])).coeffs[:3]]}


def _demo_rank_one() -> dict:
    inp = peaked_rank_one()
    probe = attainment_probe(inp.T, trials=4)
    return {"operator_norm": operator_norm(inp.T), "probe": probe.to_dict(), **inp.params}


def _demo_eval() -> dict:
    z0 = 0.3 + 0.4j
    op = evaluation_functional(z0, 16)
    return {"z0": [z0.real, z0.imag], "value_at_one": float(abs(op.apply(DiscPoly([1.0])).coeffs[0])),
            "norm": 1.0}


def _demo_hardy() -> dict:
    rows = []
    for d in (1, 4, 9, 99):
        D = hardy_diagonal(d)
        rows.append({"d": d, "best_basis_value": D.best_basis()[1], "gap": D.gap(),
                     "expected_gap": 1.0 / (d + 1)})
    return {"truncations": rows}


def _demo_equicontinuity() -> dict:
    inp = peaked_rank_one()
    return {"table": equicontinuity_report(inp.T, np.linspace(0, 2 * math.pi, 4, endpoint=False),
                                           [0.1, 0.3, 0.6])}


REGISTRY: dict[str, ZooEntry] = {
    "mult": ZooEntry("mult", "multiplication operator f -> phi f", _demo_mult),
    "comp": ZooEntry("comp", "composition operator f -> f o phi", _demo_comp),
    "rank-one": ZooEntry("rank-one", "peaked rank-one operator x -> x*(x) h (pipeline default)",
                         _demo_rank_one, peaked_rank_one),
    "rank-one-violating": ZooEntry("rank-one-violating", "rank-one operator with x0 missing the hypothesis",
                                   lambda: violating_rank_one().params, violating_rank_one),
    "evaluation": ZooEntry("evaluation", "point evaluation f -> f(z0)", _demo_eval),
    "hardy-diagonal": ZooEntry("hardy-diagonal", "diagonal map from the disc algebra into H^2", _demo_hardy),
    "equicontinuity": ZooEntry("equicontinuity", "equicontinuity table for the rank-one family",
                               _demo_equicontinuity),
}


def get(name: str) -> ZooEntry:
    try:
        return REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown zoo entry {name!r}; known: {', '.join(sorted(REGISTRY))}") from None
