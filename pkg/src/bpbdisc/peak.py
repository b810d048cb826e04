"""Peak function at a boundary point, the exponential bump h and eta = psi o h."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .discfun import DiscPoly, check_in_disc, grid_points
from .errors import CapTooSmallError
from .margins import margin
from .stolz import ConformalMap, stolz_value

N0_GUARD = 10**6
PEAK_SNAP = 8 * np.finfo(float).eps


@dataclass(frozen=True)
class PeakFunction:
    """``g1(z) = (e^{-i theta0} z - 1) / 2``: zero at the peak, Re < 0 elsewhere on the closed disc."""

    theta0: float

    @property
    def point(self) -> complex:
        return complex(np.exp(1j * self.theta0))

    def __call__(self, z):
        z = np.asarray(z, dtype=np.complex128)
        u = np.exp(-1j * self.theta0) * z - 1.0
        # the peak point itself is only known to rounding; snap it so that the
        # Hoelder-continuous corner of the Stolz map sees an exact zero
        u = np.where(np.abs(u) <= PEAK_SNAP, 0j, u)
        out = 0.5 * u
        return complex(out) if out.ndim == 0 else out


def make_g1(theta0: float) -> PeakFunction:
    return PeakFunction(float(theta0))


def gamma_min(peak: PeakFunction, delta2: float, n_check: int = 20000) -> float:
    """``delta2**2 / 4``, the minimum of ``-Re g1`` off the cap, after a grid cross-check."""
    if not delta2 > 0:
        raise CapTooSmallError(f"delta2 must be positive, got {delta2}")
    d = min(float(delta2), 2.0)
    gamma = 0.25 * d * d
    if grid_min_off_cap(peak, d, n_check) < gamma * (1.0 - 1e-9):
        raise CapTooSmallError("closed-form gamma exceeds the grid minimum of -Re g1")
    return gamma


def grid_min_off_cap(peak: PeakFunction, delta2: float, n: int) -> float:
    """Brute-force minimum of ``-Re g1`` over circle and interior points outside the cap."""
    t = 2 * np.pi * np.arange(n) / n
    rad = np.sqrt(np.linspace(0.0, 1.0, 64))
    pts = np.concatenate([np.exp(1j * t), (rad[:, None] * np.exp(1j * t[:: max(1, n // 512)])[None, :]).ravel()])
    # the edge of the cap on the circle carries the minimum
    half = 2.0 * math.asin(min(delta2 / 2.0, 1.0))
    pts = np.concatenate([pts, np.exp(1j * (peak.theta0 + np.array([half, -half])))])
    outside = np.abs(pts - peak.point) >= delta2 * (1.0 - 1e-12)
    if not np.any(outside):
        return math.inf
    return float(np.min(-np.real(peak(pts[outside]))))


@dataclass(frozen=True)
class BumpData:
    gamma: float
    eps1: float
    log_eps1: float
    n0: int
    delta1: float
    delta2: float
    theta0: float

    def in_cap(self, z):
        return np.abs(np.asarray(z) - np.exp(1j * self.theta0)) < self.delta2

    def to_dict(self) -> dict:
        return {"gamma": self.gamma, "eps1": self.eps1, "log_eps1": self.log_eps1, "n0": self.n0,
                "delta1": self.delta1, "delta2": self.delta2, "theta0": self.theta0}


def choose_eps1_n0(gamma: float, delta1: float, *, delta2: float = math.nan, theta0: float = 0.0,
                   guard: int = N0_GUARD) -> BumpData:
    """``eps1 = (delta1/2)**(1/gamma)`` and ``n0 = floor(ln(1/eps1)) + 1``, in log space."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    if not 0.0 < delta1 < 1.0:
        raise ValueError("delta1 must lie in (0, 1)")
    log_eps1 = math.log(delta1 / 2.0) / gamma
    if -log_eps1 + 1 > guard:
        raise CapTooSmallError(
            f"equicontinuity cap too small: n0 would be about {-log_eps1:.3g} (guard {guard}); "
            f"gamma = {gamma:.3g}")
    n0 = math.floor(-log_eps1) + 1
    return BumpData(gamma=gamma, eps1=math.exp(log_eps1), log_eps1=log_eps1, n0=n0,
                    delta1=delta1, delta2=delta2, theta0=theta0)


def log_h(bump: BumpData, peak: PeakFunction, z) -> np.ndarray:
    """``n0 * g1(z)`` with the real part clamped to be nonpositive."""
    g = np.asarray(peak(z), dtype=np.complex128) * bump.n0
    return np.minimum(g.real, 0.0) + 1j * g.imag


def eval_h(bump: BumpData, peak: PeakFunction, z):
    """``exp(n0 g1(z))`` from its log-modulus and phase; ``|h| <= 1``."""
    check_in_disc(z)
    lg = log_h(bump, peak, z)
    with np.errstate(under="ignore"):
        out = np.exp(lg.real) * np.exp(1j * lg.imag)
    return complex(out) if np.ndim(z) == 0 else out


@dataclass(frozen=True)
class EtaFunction:
    eps: float
    peak: PeakFunction
    bump: BumpData
    cmap: ConformalMap

    def __call__(self, z):
        return eval_eta(self, z)

    def values(self, z: np.ndarray) -> np.ndarray:
        """Unchecked vectorised evaluation for internal sweeps."""
        z = np.asarray(z, dtype=np.complex128)
        return self.cmap.eval_log(log_h(self.bump, self.peak, z.ravel())).reshape(z.shape)


def make_eta(eps: float, theta0: float, cmap: ConformalMap, bump: BumpData) -> EtaFunction:
    return EtaFunction(float(eps), make_g1(theta0), bump, cmap)


def eval_eta(eta: EtaFunction, z):
    check_in_disc(z)
    out = eta.values(z)
    return complex(out) if np.ndim(z) == 0 else out


def validation_points(eta: EtaFunction, n_boundary: int = 4096, n_interior: int = 10_000,
                      seed: int = 0) -> np.ndarray:
    """Uniform circle grid, a cluster around the peak, and random interior points."""
    rng = np.random.default_rng(seed)
    theta0 = eta.peak.theta0
    scale = 1.0 / eta.bump.n0
    near = theta0 + scale * np.sinh(np.linspace(-12.0, 12.0, 4001)) / 10.0
    circle = np.concatenate([grid_points(n_boundary), np.exp(1j * near)])
    r = np.sqrt(rng.uniform(0.0, 1.0, n_interior))
    interior = r * np.exp(1j * rng.uniform(0.0, 2 * np.pi, n_interior))
    radial = (1.0 - np.geomspace(1e-12, 1.0, 200))[:, None] * np.exp(1j * near[::200])[None, :]
    return np.concatenate([circle, interior, radial.ravel()])


def validate_eta(eta: EtaFunction, n_boundary: int = 4096, n_interior: int = 10_000,
                 seed: int = 0) -> dict:
    """Grid checks of the three properties of eta, as (value, target, slack) triples."""
    z = validation_points(eta, n_boundary, n_interior, seed)
    v = eta.values(z)
    stolz = stolz_value(eta.eps, v)
    off = ~eta.bump.in_cap(z)
    peak_err = abs(eta.values(np.array([eta.peak.point]))[0] - 1.0)
    off_max = float(np.max(np.abs(v[off]))) if np.any(off) else 0.0
    sup = float(np.max(np.abs(v)))
    return {
        "peak_value_error": margin(peak_err, 1e-8),
        "stolz_max": margin(float(np.max(stolz)), 1.0 + 1e-6),
        "sup_modulus": margin(sup, 1.0 + 1e-6),
        "off_cap_max_modulus": margin(off_max, eta.eps**2, strict=True),
        "n_points": int(z.size),
        "n_off_cap": int(np.count_nonzero(off)),
    }


def write_eta_csv(eta: EtaFunction, path, M: int = 4096) -> None:
    theta = 2 * np.pi * np.arange(M) / M
    v = eta.values(np.exp(1j * theta))
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["theta", "re", "im", "modulus", "stolz_value"])
        for t, e in zip(theta, v):
            out.writerow([f"{t:.17g}", f"{e.real:.17g}", f"{e.imag:.17g}", f"{abs(e):.17g}",
                          f"{stolz_value(eta.eps, e):.17g}"])


def project_polynomial(eta: EtaFunction, degree: int, M: int | None = None) -> tuple[DiscPoly, float]:
    """Least-squares degree-``degree`` fit to boundary samples, with its sup error.

    On a uniform grid the fit is the truncated discrete Fourier series.  The
    error is measured on a grid four times finer than the fitting grid.
    """
    if M is None:
        M = max(4096, 1 << int(4 * (degree + 1) - 1).bit_length())
    samples = eta.values(grid_points(M))
    coeffs = (np.fft.fft(samples) / M)[: degree + 1]
    poly = DiscPoly(coeffs)
    fine = grid_points(4 * M)
    err = float(np.max(np.abs(_kernels.polyval(poly.coeffs, fine) - eta.values(fine))))
    return poly, err
