"""Self-check suites run by ``bpbdisc verify --suite NAME``.

Each suite returns a list of check records ``{"name", "ok", ...}``.
"""

from __future__ import annotations

import math
import time

import numpy as np

from . import zoo
from .core import (
    ConstantEta,
    FiniteDomain,
    Functional,
    OperatorIntoDisc,
    PerturbedOperator,
    bpb_functional,
    bpb_operator,
    eval_N,
    ideal_decompose,
    operator_norm,
)
from .discfun import DiscPoly, next_power_of_two, sup_norm
from .peak import choose_eps1_n0, gamma_min, make_eta, make_g1, validate_eta
from .stolz import boundary_radius, delta1, eps2_disc_check, max_modulus_on_circle, stolz_value, theodorsen_solve


def _check(name: str, ok, **detail) -> dict:
    return {"name": name, "ok": bool(ok), **{k: _plain(v) for k, v in detail.items()}}


def _plain(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


# --------------------------------------------------------------------------
# functional step
# --------------------------------------------------------------------------


def random_functional_instance(rng, n: int, eps: float):
    """Unit ``f`` and unit ``x`` on (C^n, l_2) with ``|f(x)| > 1 - eps``.

    ``x = phase * (a u + sqrt(1 - a^2) w)`` with ``u`` the representing unit
    vector of ``f`` and ``w`` orthogonal to it, so ``|f(x)| = a``.
    """
    dom = FiniteDomain(n, 2.0)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    f = Functional(dom, v)
    u = np.conj(v)
    a = 1.0 - eps * rng.uniform(0.0, 0.999)
    w = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    w -= np.vdot(u, w) * u
    nw = np.linalg.norm(w)
    if n == 1 or nw < 1e-12:
        a, w = 1.0, np.zeros(n)
    else:
        w /= nw
    x = np.exp(2j * np.pi * rng.uniform()) * (a * u + math.sqrt(max(0.0, 1.0 - a * a)) * w)
    return f, x


def suite_functional_bpb(instances: int = 10_000, seed: int = 0) -> list[dict]:
    rng = np.random.default_rng(seed)
    worst_attain = worst_closed = 0.0
    min_slack = math.inf
    max_fgap = 0.0
    for _ in range(instances):
        n = int(rng.integers(1, 9))
        eps = float(10 ** rng.uniform(-3, math.log10(0.9)))
        f, x = random_functional_instance(rng, n, eps)
        res = bpb_functional(f, x, eps)
        worst_attain = max(worst_attain, abs(abs(res.g(res.y)) - 1.0))
        dist = np.linalg.norm(x - res.y)
        worst_closed = max(worst_closed, abs(dist**2 - (2.0 - 2.0 * abs(f(x)))))
        min_slack = min(min_slack, math.sqrt(2 * eps) - dist)
        max_fgap = max(max_fgap, (f - res.g).norm())
    checks = [
        _check("attains", worst_attain <= 1e-10, worst=worst_attain, tol=1e-10),
        _check("x_distance", min_slack > 0, min_slack=min_slack),
        _check("functional_unchanged", max_fgap == 0.0, worst=max_fgap),
        _check("closed_form_distance", worst_closed <= 1e-10, worst=worst_closed, tol=1e-10),
    ]
    for p in (1.0, 3.0, math.inf):
        ok, worst = True, math.inf
        for k in range(20):
            dom = FiniteDomain(4, p)
            f = zoo.random_unit_functional(dom, rng)
            eps = float(rng.uniform(0.05, 0.5))
            x = zoo.near_maximizer(f, 1.0 - eps * 0.9, rng)
            r = bpb_functional(f, x, eps, seed=k)
            b = math.sqrt(2 * eps)
            slack = min(b - r.dist_x, b - r.dist_f, 1e-10 - abs(abs(r.g(r.y)) - 1))
            worst = min(worst, slack)
            ok &= slack > 0
        checks.append(_check(f"general_p_{p}", ok, min_slack=worst))
    return checks


# --------------------------------------------------------------------------
# Stolz map
# --------------------------------------------------------------------------


def suite_stolz(eps_values=(0.2, 0.5, 0.8), M: int = 2048) -> list[dict]:
    checks = []
    for eps in eps_values:
        t = time.perf_counter()
        m = theodorsen_solve(eps, M)
        elapsed = time.perf_counter() - t
        phi = 2 * np.pi * np.arange(M) / M
        z = m(np.exp(1j * phi))
        schwarz = max(max_modulus_on_circle(m, r, 1024) - r for r in np.arange(1, 10) / 10)
        d1 = delta1(m)
        tag = f"eps={eps}"
        checks += [
            _check(f"{tag}:residual", m.residual < 1e-6, value=m.residual, tol=1e-6, seconds=elapsed),
            _check(f"{tag}:psi0", m(0.0) == 0, value=abs(m(0.0))),
            _check(f"{tag}:psi1", abs(m(1.0) - 1) < 1e-6, value=abs(m(1.0) - 1)),
            _check(f"{tag}:schwarz", schwarz <= 1e-6, worst=schwarz),
            _check(f"{tag}:membership", np.max(stolz_value(eps, z)) <= 1 + 1e-6,
                   worst=float(np.max(stolz_value(eps, z)) - 1)),
            _check(f"{tag}:delta1", max_modulus_on_circle(m, d1, 1024) < eps**2 and d1 < eps, delta1=d1),
            _check(f"{tag}:monotone", bool(np.all(np.diff(m.correspondence) > 0))),
            _check(f"{tag}:eps2_disc", eps2_disc_check(eps) <= 0, value=eps2_disc_check(eps)),
        ]
    for eps in (0.1, 0.5, 0.9):
        a = (1 - eps) ** 2
        theta = np.linspace(0, 2 * np.pi, 257)
        B = 1 - a * np.cos(theta)
        closed = (B - np.sqrt(np.maximum(B * B - (1 - a) ** 2, 0))) / (1 - a)
        err = float(np.max(np.abs(boundary_radius(eps, theta) - closed)))
        checks.append(_check(f"eps={eps}:radius_closed_form", err < 1e-10, worst=err))
    return checks


# --------------------------------------------------------------------------
# eta
# --------------------------------------------------------------------------


def build_eta(eps: float, theta0: float = 0.7, delta2: float = 0.3, cmap=None):
    cmap = cmap or theodorsen_solve(eps)
    d1 = delta1(cmap)
    peak = make_g1(theta0)
    bump = choose_eps1_n0(gamma_min(peak, delta2), d1, delta2=delta2, theta0=theta0)
    return make_eta(eps, theta0, cmap, bump)


def suite_eta(eps_values=(0.1, 0.3, 0.6)) -> list[dict]:
    checks = []
    for eps in eps_values:
        eta = build_eta(eps)
        v = validate_eta(eta)
        for key in ("peak_value_error", "stolz_max", "off_cap_max_modulus"):
            checks.append(_check(f"eps={eps}:{key}", v[key]["ok"], value=v[key]["value"], target=v[key]["target"]))
    return checks


# --------------------------------------------------------------------------
# zoo
# --------------------------------------------------------------------------


def _random_poly(rng, degree: int) -> DiscPoly:
    return DiscPoly(rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1))


def suite_zoo(instances: int = 50, seed: int = 0) -> list[dict]:
    rng = np.random.default_rng(seed)
    worst_mult = worst_rank = 0.0
    for _ in range(instances):
        phi = _random_poly(rng, int(rng.integers(0, 9)))
        op = zoo.mult_operator(phi, int(rng.integers(0, 9)))
        worst_mult = max(worst_mult, abs(sup_norm(op.image_of_one()) - sup_norm(phi)))
        dom = FiniteDomain(int(rng.integers(1, 9)), 2.0)
        xstar = Functional(dom, rng.standard_normal(dom.n) + 1j * rng.standard_normal(dom.n))
        h = _random_poly(rng, int(rng.integers(0, 33)))
        T = zoo.rank_one(xstar, h)
        worst_rank = max(worst_rank, abs(operator_norm(T) - xstar.norm() * sup_norm(h)))
    comp = zoo.comp_operator(DiscPoly([0.1, 0.5, 0.3j]), 6)
    checks = [
        _check("mult_norm_identity", worst_mult <= 1e-8, worst=worst_mult),
        _check("comp_one", sup_norm(comp.image_of_one()) == 1.0, value=sup_norm(comp.image_of_one())),
        _check("rank_one_norm", worst_rank <= 1e-6, worst=worst_rank),
    ]
    for d in (1, 4, 9, 99):
        gap = zoo.hardy_diagonal(d).gap()
        checks.append(_check(f"hardy_gap_d={d}", abs(gap - 1 / (d + 1)) <= 1e-10, value=gap))
    return checks


# --------------------------------------------------------------------------
# operator-norm oracle
# --------------------------------------------------------------------------


def brute_operator_norm(T: OperatorIntoDisc, samples: int = 10_000, seed: int = 0, polish: int = 5,
                        steps: int = 150) -> float:
    """``sup_x ||Tx||_inf`` from random unit vectors (l_2 domain), polished by projected ascent.

    Random sampling alone falls short in several complex dimensions, so the
    best samples are improved by projected subgradient ascent of
    ``|Tx(z*)|``.  No dual norm is used.
    """
    rng = np.random.default_rng(seed)
    n, d = T.domain.n, T.degree
    X = rng.standard_normal((n, samples)) + 1j * rng.standard_normal((n, samples))
    X /= np.linalg.norm(X, axis=0)
    coarse = next_power_of_two(4 * (d + 1))
    C = T.matrix @ X
    vals = np.abs(np.fft.ifft(C, n=max(coarse, d + 1), axis=0) * max(coarse, d + 1)).max(axis=0)
    fine = max(64, next_power_of_two(32 * (d + 1)))

    def sup_of(x):
        s = np.fft.ifft(T.matrix @ x, n=fine) * fine
        k = int(np.argmax(np.abs(s)))
        return float(abs(s[k])), k

    best = 0.0
    for j in np.argsort(vals)[-polish:]:
        x = X[:, j]
        val, k = sup_of(x)
        step = 1.0
        for _ in range(steps):
            z = np.exp(2j * np.pi * k / fine)
            row = np.power(z, np.arange(d + 1)) @ T.matrix
            w = row @ x
            grad = np.conj(row) * (w / abs(w) if w != 0 else 1.0)
            cand = x + step * grad
            cand /= np.linalg.norm(cand)
            cval, ck = sup_of(cand)
            if cval > val:
                x, val, k = cand, cval, ck
                step *= 1.5
            else:
                step *= 0.5
                if step < 1e-10:
                    break
        best = max(best, val)
    return best


def random_operator(rng, n_max: int = 8, d_max: int = 32) -> OperatorIntoDisc:
    n = int(rng.integers(1, n_max + 1))
    d = int(rng.integers(0, d_max + 1))
    mat = rng.standard_normal((d + 1, n)) + 1j * rng.standard_normal((d + 1, n))
    mat *= rng.uniform(0.5, 1.0) ** np.arange(d + 1)[:, None]
    return OperatorIntoDisc(FiniteDomain(n, 2.0), mat)


def suite_oracle(operators: int = 200, seed: int = 0, samples: int = 10_000) -> list[dict]:
    rng = np.random.default_rng(seed)
    worst_rel = 0.0
    worst_dom = -math.inf
    for k in range(operators):
        T = random_operator(rng)
        sweep = operator_norm(T)
        brute = brute_operator_norm(T, samples=samples, seed=k)
        worst_rel = max(worst_rel, abs(sweep - brute) / sweep)
        worst_dom = max(worst_dom, brute - sweep)
    return [_check("agreement_2pct", worst_rel <= 0.02, worst_relative=worst_rel),
            _check("sweep_dominates", worst_dom <= 1e-9, worst_excess=worst_dom)]


# --------------------------------------------------------------------------
# ideal decomposition
# --------------------------------------------------------------------------


def suite_ideal(probes: int = 100, seed: int = 0) -> list[dict]:
    rng = np.random.default_rng(seed)
    inp = zoo.peaked_rank_one(n=3, eps=0.3)
    eta = build_eta(0.3, theta0=inp.theta0)
    dom = inp.T.domain
    psi2 = zoo.random_unit_functional(dom, rng)
    N = PerturbedOperator(eta, psi2, inp.T, 0.3)
    N1, N2 = ideal_decompose(N)
    worst = 0.0
    for _ in range(probes):
        x = rng.standard_normal(dom.n) + 1j * rng.standard_normal(dom.n)
        z = math.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
        worst = max(worst, abs(N1.apply_at(x, z) + N2.apply_at(x, z) - eval_N(N, x, z)))
    zero = ideal_decompose(PerturbedOperator(eta, Functional(dom, np.zeros(dom.n)), inp.T, 0.3))[0]
    return [_check("sum_identity", worst <= 1e-12, worst=worst),
            _check("rank_one", N1.rank() == 1, rank=N1.rank()),
            _check("zero_functional", zero.rank() == 0, rank=zero.rank()),
            _check("constant_eta_double", ConstantEta(0.0).values(np.zeros(3)).sum() == 0)]


# --------------------------------------------------------------------------
# pipeline
# --------------------------------------------------------------------------


def suite_pipeline(eps_values=(0.1, 0.3, 0.6), dims=((2, 4), (8, 32))) -> list[dict]:
    checks = []
    for n, degree in dims:
        for eps in eps_values:
            inp = zoo.peaked_rank_one(n=n, degree=degree, eps=eps)
            t = time.perf_counter()
            res = bpb_operator(inp.T, inp.x0, inp.theta0, eps)
            elapsed = time.perf_counter() - t
            d = res.distances
            checks.append(_check(
                f"n={n}:deg={degree}:eps={eps}", res.ok and elapsed <= 30,
                Ny0=d["Ny0_norm"]["value"], x0_y0_slack=d["x0_y0"]["slack"],
                T_minus_N_slack=d["T_minus_N"]["slack"], seconds=elapsed))
    return checks


SUITES = {
    "functional-bpb": suite_functional_bpb,
    "stolz": suite_stolz,
    "eta": suite_eta,
    "zoo": suite_zoo,
    "oracle": suite_oracle,
    "ideal": suite_ideal,
    "pipeline": suite_pipeline,
}


def run_suite(name: str) -> list[dict]:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; known: {', '.join(SUITES)}")
    return SUITES[name]()
