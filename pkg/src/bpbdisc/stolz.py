"""The Stolz region and a numerical Riemann map onto it.

The region is ``{z : |z| + (1 - eps)|1 - z| <= 1}``: a convex lens that
contains 0 in its interior and has a corner of half-angle ``arccos(1 - eps)``
at ``z = 1``.

Riemann map
-----------
The map ``psi : D -> region`` with ``psi(0) = 0`` and ``psi(1) = 1`` is built
in two stages.

1. The power map ``T(z) = 1 - (1 - z)**kappa`` with
   ``kappa = pi / (2 arccos(1 - eps))`` opens the corner at 1 into a smooth
   boundary point.  In corner-centred polar coordinates the region is
   ``|1 - z| <= (cos(beta) - a) / b`` with ``a = 1 - eps`` and
   ``b = (1 - a^2) / 2``, so the straightened boundary has the closed form
   ``1 - ((cos(beta) - a) / b)**kappa * exp(i kappa beta)``.  The straightened
   region is star-shaped about 0 and nearly circular for every eps in (0, 1).

2. Theodorsen's fixed-point iteration solves for the boundary correspondence
   of the straightened region, ``theta(phi) = phi + Im L(e^{i phi})`` with
   ``Re L = log rho(theta)``.  The harmonic conjugate is taken by a weighted
   least-squares fit of ``Re L`` on the circle.  The fit basis is
   ``(w - 1) * [polynomial + simple poles clustered exponentially at w = 1]``.
   The factor ``w - 1`` fixes ``L(1) = 0``, which pins the correspondence
   ``theta(0) = 0`` and hence ``psi(1) = 1``.  The clustered poles resolve the
   weak singularity left at the straightened corner.

Finally ``psi(w) = 1 - (1 - w exp(L(w)))**(1 / kappa)``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .discfun import check_in_disc, is_power_of_two
from .errors import DegenerateMapError

RESIDUAL_LIMIT = 1e-6


def stolz_value(eps: float, z):
    """``|z| + (1 - eps)|1 - z|``; the region is where this is at most 1."""
    z = np.asarray(z, dtype=np.complex128)
    out = np.abs(z) + (1.0 - eps) * np.abs(1.0 - z)
    return float(out) if out.ndim == 0 else out


def _check_eps(eps: float) -> None:
    if not (0.0 < eps < 1.0):
        raise ValueError(f"eps must lie in (0, 1), got {eps}")


def boundary_radius(eps: float, theta):
    """Polar radius of the boundary in direction ``theta`` (bisection)."""
    _check_eps(eps)
    out = _kernels.stolz_radius(eps, theta)
    return float(out) if np.ndim(out) == 0 else out


def boundary_points(eps: float, n: int = 2048) -> np.ndarray:
    theta = 2 * np.pi * np.arange(n) / n
    return boundary_radius(eps, theta) * np.exp(1j * theta)


def eps2_disc_check(eps: float, n: int = 4096) -> float:
    """Max of ``stolz_value - 1`` over the circle of radius eps**2 (<= 0 certifies inclusion)."""
    _check_eps(eps)
    z = eps**2 * np.exp(2j * np.pi * np.arange(n) / n)
    return float(np.max(stolz_value(eps, z)) - 1.0)


def corner_exponent(eps: float) -> float:
    """``kappa = pi / (2 beta0)``; the corner at 1 has interior angle ``pi / kappa``."""
    return 0.5 * math.pi / math.acos(1.0 - eps)


# --------------------------------------------------------------------------
# conformal map
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SolverSettings:
    n_poly: int = 80
    n_poles: int = 80
    sigma: float = 4.0
    cluster_min: float = 1e-15
    n_cluster: int = 300
    tol: float = 1e-11
    max_iter: int = 600


def _pole_offsets(n_poles: int, sigma: float) -> np.ndarray:
    j = np.arange(1, n_poles + 1)
    return np.exp(-sigma * (np.sqrt(n_poles) - np.sqrt(j)))


def _reduced_basis(w: np.ndarray, n_poly: int, offsets: np.ndarray) -> np.ndarray:
    """Columns ``S_k(w) = 1 + w + ... + w^{k-1}`` and ``1 / (w - 1 - d_j)``.

    The pole columns are left unnormalised on purpose: the pseudo-inverse
    cutoff is scale dependent and this scaling keeps the near-corner fit.
    """
    powers = w[:, None] ** np.arange(n_poly)[None, :]
    S = np.cumsum(powers, axis=1)
    P = 1.0 / (w[:, None] - (1.0 + offsets[None, :]))
    return np.hstack([S, P])


@dataclass(frozen=True)
class ConformalMap:
    """Numerical Riemann map of the unit disc onto the Stolz region.

    ``correspondence[j]`` is the polar angle of ``psi(e^{2 pi i j / M})``,
    increasing from 0 to ``2 pi``.  ``taylor`` holds ``c_0 = 0, c_1, ..., c_K``
    with ``K = M / 2`` (exported for reference; evaluation uses the exact
    corner factorisation).  ``rotation`` is the unimodular ``lambda`` such
    that ``psi(w) = psi_0(lambda w)`` with ``psi_0'(0) > 0``.
    """

    eps: float
    M: int
    kappa: float
    coef: np.ndarray
    offsets: np.ndarray
    n_poly: int
    correspondence: np.ndarray
    taylor: np.ndarray
    rotation: complex
    residual: float
    corner_residual: float
    iterations: int
    defect: float
    converged: bool
    damping: float
    continuation: tuple = field(default=())

    @property
    def alpha(self) -> float:
        return 1.0 / self.kappa

    def __call__(self, w):
        return map_eval(self, w)

    def _eval(self, w: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            logw = np.log(w)
        return self._eval_parts(w, logw, w - 1.0)

    def eval_log(self, logw) -> np.ndarray:
        """Evaluate at ``w = exp(logw)`` (``Re logw <= 0``).

        Callers that know ``log w`` exactly, such as an exponential peak
        function, keep full relative accuracy of ``1 - w`` near the corner.
        """
        logw = np.asarray(logw, dtype=np.complex128)
        with np.errstate(under="ignore"):
            w = np.exp(logw)
            wm1 = np.expm1(logw)
        return self._eval_parts(w, logw, wm1)

    def _eval_parts(self, w, logw, wm1) -> np.ndarray:
        basis = _reduced_basis(w, self.n_poly, self.offsets)
        with np.errstate(invalid="ignore", under="ignore"):
            E = logw + wm1 * (basis @ self.coef)
            gap = -np.expm1(E)  # 1 - G(w), relative accuracy near w = 1
            out = 1.0 - gap ** self.alpha
        out = np.where(gap == 0, 1.0 + 0j, out)
        out = np.where(w == 0, 0j, out)
        return out

    def derivative_at_zero(self) -> complex:
        basis = _reduced_basis(np.array([0j]), self.n_poly, self.offsets)
        L0 = complex(-(basis @ self.coef)[0])
        return self.alpha * np.exp(L0)

    def to_dict(self) -> dict:
        return {
            "eps": self.eps,
            "M": self.M,
            "kappa": self.kappa,
            "rotation": [self.rotation.real, self.rotation.imag],
            "residual": self.residual,
            "corner_residual": self.corner_residual,
            "iterations": self.iterations,
            "defect": self.defect,
            "converged": self.converged,
            "damping": self.damping,
            "continuation": list(self.continuation),
            "n_poly": self.n_poly,
            "pole_offsets": self.offsets.tolist(),
            "fit_coefficients": [[c.real, c.imag] for c in self.coef],
            "taylor": [[c.real, c.imag] for c in self.taylor],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, d: dict) -> ConformalMap:
        M = int(d["M"])
        coef = np.array([complex(a, b) for a, b in d["fit_coefficients"]])
        taylor = np.array([complex(a, b) for a, b in d["taylor"]])
        partial = cls(
            eps=float(d["eps"]), M=M, kappa=float(d["kappa"]), coef=coef,
            offsets=np.array(d["pole_offsets"], dtype=float), n_poly=int(d["n_poly"]),
            correspondence=np.zeros(M), taylor=taylor, rotation=complex(*d["rotation"]),
            residual=float(d["residual"]), corner_residual=float(d["corner_residual"]),
            iterations=int(d["iterations"]), defect=float(d["defect"]),
            converged=bool(d["converged"]), damping=float(d["damping"]),
            continuation=tuple(d.get("continuation", ())),
        )
        theta = np.unwrap(np.angle(partial._eval(np.exp(2j * np.pi * np.arange(M) / M))))
        return _replace(partial, correspondence=theta - theta[0])

    def write_correspondence_csv(self, path) -> None:
        phi = 2 * np.pi * np.arange(self.M) / self.M
        z = self._eval(np.exp(1j * phi))
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["phi", "theta", "re", "im", "stolz_value"])
            for f, t, zz in zip(phi, self.correspondence, z):
                out.writerow([f"{f:.17g}", f"{t:.17g}", f"{zz.real:.17g}", f"{zz.imag:.17g}",
                              f"{stolz_value(self.eps, zz):.17g}"])


def _replace(obj, **changes):
    from dataclasses import replace

    return replace(obj, **changes)


def map_eval(cmap: ConformalMap, w):
    """Evaluate the Riemann map on the closed disc."""
    check_in_disc(w)
    arr = np.asarray(w, dtype=np.complex128)
    out = cmap._eval(np.atleast_1d(arr).ravel()).reshape(arr.shape)
    return complex(out) if arr.ndim == 0 else out


def _sample_angles(M: int, settings: SolverSettings) -> np.ndarray:
    phi = 2 * np.pi * np.arange(M) / M
    phi = np.where(phi > np.pi, phi - 2 * np.pi, phi)
    cl = np.logspace(math.log10(settings.cluster_min), -0.7, settings.n_cluster)
    return np.concatenate([phi, cl, -cl])


class _TheodorsenProblem:
    """Least-squares conjugation operator on a fixed set of circle samples."""

    def __init__(self, M: int, settings: SolverSettings):
        self.settings = settings
        self.phi = _sample_angles(M, settings)
        w = np.exp(1j * self.phi)
        self.offsets = _pole_offsets(settings.n_poles, settings.sigma)
        self.Phi = (w - 1.0)[:, None] * _reduced_basis(w, settings.n_poly, self.offsets)
        weight = np.maximum(np.abs(1.0 - w), settings.cluster_min) ** -0.5
        A = np.hstack([self.Phi.real, -self.Phi.imag]) * weight[:, None]
        self.pinv = np.linalg.pinv(A, rcond=1e-14) * weight[None, :]
        self.ncol = self.Phi.shape[1]

    def fit(self, log_rho: np.ndarray) -> np.ndarray:
        c = self.pinv @ log_rho
        return c[: self.ncol] + 1j * c[self.ncol:]

    def iterate(self, eps: float, theta: np.ndarray, damping: float):
        s = self.settings
        history = []
        coef = None
        defect = math.inf
        it = 0
        for it in range(1, s.max_iter + 1):
            coef = self.fit(np.log(_kernels.straight_radius(eps, theta)))
            target = self.phi + (self.Phi @ coef).imag
            defect = float(np.max(np.abs(target - theta)))
            history.append(defect)
            theta = (1.0 - damping) * theta + damping * target
            if defect < s.tol:
                break
            # stop once the iteration sits on its rounding floor
            if it > 20 and defect > 0.5 * min(history[-15:-5]):
                break
        coef = self.fit(np.log(_kernels.straight_radius(eps, theta)))
        return coef, theta, it, defect


def theodorsen_solve(eps: float, M: int = 2048, damping: float = 0.5, *,
                     continuation: bool = True,
                     settings: SolverSettings | None = None) -> ConformalMap:
    """Compute the Riemann map of the unit disc onto the Stolz region.

    ``M`` is the uniform boundary grid (power of two, at least 256) on which
    the correspondence is tabulated and the residual is measured.  When the
    direct iteration does not settle, it is restarted by continuation in eps
    from 0.95 downward with halved damping.  A map that still fails is
    returned with ``converged=False`` and its residual.
    """
    _check_eps(eps)
    if not is_power_of_two(M) or M < 256:
        raise ValueError(f"M must be a power of two >= 256, got {M}")
    if not (0.0 < damping <= 1.0):
        raise ValueError("damping must lie in (0, 1]")
    settings = settings or SolverSettings()
    problem = _TheodorsenProblem(M, settings)

    coef, theta, iterations, defect = problem.iterate(eps, problem.phi.copy(), damping)
    path: tuple = ()
    if not defect < 1e-7 and continuation:
        path_eps = [e for e in np.geomspace(0.95, eps, 8)]
        theta = problem.phi.copy()
        total = 0
        for e in path_eps:
            coef, theta, it, defect = problem.iterate(float(e), theta, 0.5 * damping)
            total += it
        iterations += total
        path = tuple(float(e) for e in path_eps)

    kappa = corner_exponent(eps)
    raw = ConformalMap(
        eps=float(eps), M=M, kappa=kappa, coef=coef, offsets=problem.offsets,
        n_poly=settings.n_poly, correspondence=np.zeros(M), taylor=np.zeros(M // 2 + 1, complex),
        rotation=1 + 0j, residual=math.inf, corner_residual=math.inf, iterations=iterations,
        defect=defect, converged=False, damping=damping, continuation=path,
    )
    return _finish(raw)


def _finish(raw: ConformalMap) -> ConformalMap:
    eps, M = raw.eps, raw.M
    phi = 2 * np.pi * np.arange(M) / M
    z = raw._eval(np.exp(1j * phi))
    ang = np.angle(z)
    residual = float(np.max(np.abs(z - boundary_radius(eps, ang) * np.exp(1j * ang))))
    theta = np.unwrap(ang)
    theta = theta - theta[0]

    near = np.logspace(-14, -1, 400)
    near = np.concatenate([near, -near])
    zc = raw._eval(np.exp(1j * near))
    angc = np.angle(zc)
    corner_residual = float(np.max(np.abs(zc - boundary_radius(eps, angc) * np.exp(1j * angc))))

    fine = 8 * M
    samples = raw._eval(np.exp(2j * np.pi * np.arange(fine) / fine))
    taylor = (np.fft.fft(samples) / fine)[: M // 2 + 1]
    taylor[0] = 0.0

    d0 = raw.derivative_at_zero()
    rotation = d0 / abs(d0)
    monotone = bool(np.all(np.diff(theta) > 0)) and abs(theta[-1] + (theta[1] - theta[0]) - 2 * np.pi) < 1e-3
    converged = bool(raw.defect < 1e-6 and residual < RESIDUAL_LIMIT and monotone)
    return _replace(raw, correspondence=theta, taylor=taylor, rotation=complex(rotation),
                    residual=residual, corner_residual=corner_residual, converged=converged)


def max_modulus_on_circle(cmap: ConformalMap, r: float, n: int = 2048) -> float:
    w = r * np.exp(2j * np.pi * np.arange(n) / n)
    return float(np.max(np.abs(cmap._eval(w))))


def delta1(cmap: ConformalMap, eps: float | None = None, *, margin: float = 0.1,
           n: int = 2048) -> float:
    """Radius whose disc the map sends inside the disc of radius eps**2.

    Bisection over r in (0, eps) for the largest r with
    ``max_{|w| = r} |psi(w)| < eps**2``; the maximum-modulus principle makes
    the inner function nondecreasing in r.  The result is shrunk by
    ``margin`` (10 % by default), so it is strictly below eps.
    """
    eps = cmap.eps if eps is None else eps
    if not cmap.residual < RESIDUAL_LIMIT:
        raise DegenerateMapError(f"map residual {cmap.residual:.3g} too large to certify delta1")
    target = eps**2
    if max_modulus_on_circle(cmap, eps, n) < target:
        r_star = eps
    else:
        lo, hi = 0.0, eps
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if max_modulus_on_circle(cmap, mid, n) < target:
                lo = mid
            else:
                hi = mid
        r_star = lo
    d1 = (1.0 - margin) * r_star
    if not (0.0 < d1 < eps) or not max_modulus_on_circle(cmap, d1, n) < target:
        raise DegenerateMapError("delta1 certificate failed")
    return d1


def write_boundary_csv(eps: float, path, n: int = 2048) -> None:
    theta = 2 * np.pi * np.arange(n) / n
    r = boundary_radius(eps, theta)
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["theta", "radius", "re", "im"])
        for t, rr in zip(theta, r):
            z = rr * np.exp(1j * t)
            out.writerow([f"{t:.17g}", f"{rr:.17g}", f"{z.real:.17g}", f"{z.imag:.17g}"])
