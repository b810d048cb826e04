"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

The checks recompute their quantities with oracles written here (dense
grids, direct formulas, random sampling) rather than trusting the values
the library reports about itself.
"""

import json
import math
import time

import numpy as np
import pytest
from conftest import ACCEPTANCE
from scipy.optimize import minimize_scalar

from bpbdisc import cli, zoo
from bpbdisc.core import (
    FiniteDomain,
    Functional,
    OperatorIntoDisc,
    PerturbedOperator,
    bpb_functional,
    equicontinuity_delta2,
    ideal_decompose,
    operator_norm,
)
from bpbdisc.discfun import DiscPoly
from bpbdisc.peak import BumpData, choose_eps1_n0, gamma_min, make_eta, make_g1
from bpbdisc.stolz import delta1, theodorsen_solve

EPS_VALUES = (0.1, 0.3, 0.6)
SHAPES = ((2, 4), (8, 32))


def record(k: int, ok: bool, text: str) -> None:
    ACCEPTANCE[k] = (bool(ok), text)
    print(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {text}")
    assert ok, text


def stolz(eps, z):
    return np.abs(z) + (1 - eps) * np.abs(1 - z)


def dense_sup(coeffs, n=1 << 14):
    """Sup of |p| on the circle: dense grid, then a bounded 1-d polish at the best node."""
    c = np.asarray(coeffs, dtype=complex)
    t = 2 * np.pi * np.arange(n) / n
    vals = np.abs(np.polyval(c[::-1], np.exp(1j * t)))
    k = int(np.argmax(vals))
    res = minimize_scalar(lambda s: -abs(np.polyval(c[::-1], np.exp(1j * s))),
                          bounds=(t[k] - 2 * np.pi / n, t[k] + 2 * np.pi / n), method="bounded",
                          options={"xatol": 1e-14})
    return max(float(vals[k]), -float(res.fun))


def disc_samples(rng, n):
    return np.sqrt(rng.uniform(size=n)) * np.exp(2j * np.pi * rng.uniform(size=n))


# --------------------------------------------------------------------------
# criteria 1, 2, 8 share the end-to-end runs
# --------------------------------------------------------------------------


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    out = []
    for n, deg in SHAPES:
        for eps in EPS_VALUES:
            d = tmp_path_factory.mktemp(f"acc_n{n}_d{deg}_e{eps}")
            cfg = {"eps": eps, "theta0": 0.7, "domain": {"n": n, "p": 2}, "operator": {"zoo": "rank-one"},
                   "degree": deg, "seed": 0}
            (d / "cfg.json").write_text(json.dumps(cfg))
            t0 = time.perf_counter()
            code = cli.main(["run", "--config", str(d / "cfg.json"), "--out", str(d), "--timestamp", "acc"])
            seconds = time.perf_counter() - t0
            rep = json.loads((d / "report.json").read_text())
            out.append({"n": n, "deg": deg, "eps": eps, "code": code, "seconds": seconds, "report": rep})
    return out


def _cvec(pairs):
    return np.array([complex(a, b) for a, b in pairs])


def rebuild(run):
    """The operator, x0, y0 and N of a run, rebuilt from the report and the zoo."""
    rep = run["report"]["result"]
    eps = run["eps"]
    inp = zoo.peaked_rank_one(n=run["n"], degree=run["deg"], eps=eps, theta0=0.7, seed=0)
    x0, y0, psi2 = _cvec(rep["x0"]), _cvec(rep["y0"]), _cvec(rep["psi2"])
    c = rep["constants"]
    bump = BumpData(gamma=c["gamma"]["value"], eps1=rep["provenance"]["notes"]["eps1"],
                    log_eps1=c["log_eps1"]["value"], n0=int(c["n0"]["value"]),
                    delta1=c["delta1"]["value"], delta2=c["delta2"]["value"], theta0=0.7)
    eta = make_eta(eps, 0.7, theodorsen_solve(eps, 2048), bump)
    N = PerturbedOperator(eta, Functional(inp.T.domain, psi2), inp.T, eps)
    return inp, x0, y0, N


def peak_sweep(theta0, n0, M=8192):
    """Uniform circle grid plus a sinh cluster resolving the bump near the peak."""
    near = theta0 + np.sinh(np.linspace(-14, 14, 8001)) / (10 * n0)
    return np.concatenate([np.exp(2j * np.pi * np.arange(M) / M), np.exp(1j * near)])


def test_criterion_1_end_to_end(runs):
    lines, ok = [], True
    for run in runs:
        inp, x0, y0, N = rebuild(run)
        eps = run["eps"]
        T = inp.T
        np.testing.assert_allclose(x0, inp.x0, atol=1e-15)
        assert abs(operator_norm(T) - 1) < 1e-9
        assert abs(T.rows(np.array([np.exp(0.7j)]))[0] @ x0) > 1 - eps / 3
        z = peak_sweep(0.7, N.eta.bump.n0)
        # ||N y0||: its value at the peak and its sup over the sweep
        e = N.eta.values(z)
        ny0 = e * N.psi2(y0) + (1 - eps) * (1 - e) * np.polyval((T.matrix @ y0)[::-1], z)
        at_peak = abs(N.eta.values(np.array([np.exp(0.7j)]))[0] * N.psi2(y0))
        ny0_err = max(abs(at_peak - 1), abs(np.max(np.abs(ny0)) - 1))
        dist = float(np.linalg.norm(x0 - y0))
        # ||T - N|| over the l2 unit ball is the sup of the l2 norm of the difference row
        rows_T = np.stack([np.polyval(T.matrix[::-1, j], z) for j in range(T.domain.n)], axis=1)
        diff_rows = e[:, None] * (N.psi2.vector[None, :] - (1 - eps) * rows_T) - eps * rows_T
        tn = float(np.max(np.linalg.norm(diff_rows, axis=1)))
        reported = run["report"]["result"]["distances"]["T_minus_N"]["value"]
        good = (run["code"] == 0 and ny0_err <= 1e-8 and dist < math.sqrt(2 * eps) and tn < 8 * eps
                and abs(tn - reported) <= 1e-3 * reported and run["seconds"] <= 30)
        ok &= good
        lines.append(f"n={run['n']} deg={run['deg']} eps={eps}: exit {run['code']}, |Ny0|-1={ny0_err:.1e}, "
                     f"|x0-y0|={dist:.4f}<{math.sqrt(2 * eps):.4f}, |T-N|={tn:.4f}<{8 * eps:.1f}, "
                     f"{run['seconds']:.1f}s")
    print("\n".join(lines))
    record(1, ok, f"end-to-end rank-one runs ({len(runs)} configurations)")


def test_criterion_2_proof_chain(runs):
    ok, worst = True, {}
    for run in runs:
        eps = run["eps"]
        ch = run["report"]["result"]["chain"]
        checks = {
            "psi1_minus_psi2": ch["psi1_minus_psi2"]["value"] < math.sqrt(2 * eps),
            "one_minus_psi_norm": ch["one_minus_psi_norm"]["value"] <= eps / 3,
            "off_cap_term": ch["off_cap_term"]["value"] <= 2 * eps**2 + 1e-6,
            "cap_term": ch["cap_term"]["value"] <= eps + 1e-6,
        }
        ok &= all(checks.values())
        for k, v in checks.items():
            worst[k] = worst.get(k, True) and v
    record(2, ok, "proof-chain intermediates within their bounds: " + ", ".join(
        f"{k}={'ok' if v else 'VIOLATED'}" for k, v in worst.items()))


def test_criterion_8_ideal_decomposition(runs):
    run = next(r for r in runs if r["n"] == 8 and r["eps"] == 0.3)
    inp, _, _, N = rebuild(run)
    N1, N2 = ideal_decompose(N)
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(100):
        x = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        z = disc_samples(rng, 1)[0]
        e = N.eta.values(np.array([z]))[0]
        direct = e * (N.psi2.vector @ x) + (1 - N.eps) * (1 - e) * np.polyval((inp.T.matrix @ x)[::-1], z)
        worst = max(worst, abs(N1.apply_at(x, z) + N2.apply_at(x, z) - direct))
    z = np.concatenate([disc_samples(rng, 256), np.exp(2j * np.pi * np.arange(256) / 256)])
    rows = N1.rows(z)
    sv = np.linalg.svd(rows, compute_uv=False)
    rank = int(np.sum(sv > 1e-12 * sv[0]))
    record(8, worst <= 1e-12 and rank == 1, f"N1 + N2 = N to {worst:.1e} on 100 probes; rank N1 = {rank}")


# --------------------------------------------------------------------------
# criterion 3: conformal map
# --------------------------------------------------------------------------


def test_criterion_3_conformal_map():
    t0 = time.perf_counter()
    ok, parts = True, []
    for eps in (0.2, 0.5, 0.8):
        m = theodorsen_solve(eps, 2048)
        phi = 2 * np.pi * np.arange(2048) / 2048
        z = m(np.exp(1j * phi))
        # residual against the boundary: the boundary point on the same ray solves a quadratic
        a2 = (1 - eps) ** 2
        A, B = 1 - a2, 1 - a2 * np.cos(np.angle(z))
        r_exact = A / (B + np.sqrt(np.maximum(B * B - A * A, 0)))
        residual = float(np.max(np.abs(np.abs(z) - r_exact)))
        schwarz = max(float(np.max(np.abs(m(r * np.exp(2j * np.pi * np.arange(1024) / 1024))))) - r
                      for r in np.arange(1, 10) / 10)
        member = float(np.max(stolz(eps, z)) - 1)
        d1 = delta1(m)
        cert = float(np.max(np.abs(m(d1 * np.exp(2j * np.pi * np.arange(1024) / 1024)))))
        good = (residual < 1e-6 and m(0.0) == 0 and abs(m(1.0) - 1) < 1e-6 and schwarz <= 1e-6
                and member <= 1e-6 and cert < eps**2 and d1 < eps)
        ok &= good
        parts.append(f"eps={eps}: residual {residual:.1e}, delta1 {d1:.4f}")
    seconds = time.perf_counter() - t0
    record(3, ok and seconds <= 10, "; ".join(parts) + f"; {seconds:.1f}s")


# --------------------------------------------------------------------------
# criterion 4: the bump
# --------------------------------------------------------------------------


def test_criterion_4_eta():
    rng = np.random.default_rng(4)
    T = zoo.peaked_rank_one(n=2, degree=4).T
    ok, parts = True, []
    for eps in EPS_VALUES:
        d2 = equicontinuity_delta2(T, 0.7, eps)
        cmap = theodorsen_solve(eps, 2048)
        g1 = make_g1(0.7)
        eta = make_eta(eps, 0.7, cmap, choose_eps1_n0(gamma_min(g1, d2), delta1(cmap), delta2=d2, theta0=0.7))
        z0 = np.exp(0.7j)
        peak_err = abs(eta(z0) - 1)
        boundary = np.exp(2j * np.pi * np.arange(4096) / 4096)
        z = np.concatenate([boundary, disc_samples(rng, 10_000), peak_sweep(0.7, eta.bump.n0, 512)])
        v = eta(z)
        worst_stolz = float(np.max(stolz(eps, v)))
        off = np.abs(z - z0) >= d2
        off_max = float(np.max(np.abs(v[off])))
        good = peak_err <= 1e-8 and worst_stolz <= 1 + 1e-6 and off_max < eps**2
        ok &= good
        parts.append(f"eps={eps}: |eta(peak)-1|={peak_err:.1e}, max stolz {worst_stolz:.8f}, "
                     f"off-cap {off_max:.2e}<{eps**2:.2f}")
    record(4, ok, "; ".join(parts))


# --------------------------------------------------------------------------
# criterion 5: functional step, p = 2
# --------------------------------------------------------------------------


def test_criterion_5_functional_bpb():
    rng = np.random.default_rng(5)
    count = 10_000
    dims = rng.integers(1, 9, size=count)
    eps_all = rng.uniform(0.001, 1.0, size=count)
    instances = []
    for n, eps in zip(dims, eps_all):
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        v /= np.linalg.norm(v)
        u = np.conj(v)
        w = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        w -= (v @ w) * u
        nw = np.linalg.norm(w)
        level = 1 - eps * rng.uniform(0.0, 0.999) if nw > 1e-12 else 1.0
        x = level * u + (math.sqrt(max(0.0, 1 - level * level)) * w / nw if nw > 1e-12 else 0)
        instances.append((Functional(FiniteDomain(int(n), 2.0), v), x * np.exp(2j * np.pi * rng.uniform()),
                          float(eps)))
    t0 = time.perf_counter()
    results = [bpb_functional(f, x, eps) for f, x, eps in instances]
    seconds = time.perf_counter() - t0
    attain = dist_ok = fg = closed = 0.0
    bad = 0
    for (f, x, eps), res in zip(instances, results):
        g, y = res.g, res.y
        attain = max(attain, abs(abs(g.vector @ y) - 1))
        dxy = np.linalg.norm(x - y)
        bad += not dxy < math.sqrt(2 * eps)
        fg = max(fg, np.linalg.norm(f.vector - g.vector))
        closed = max(closed, abs(dxy**2 - (2 - 2 * abs(f.vector @ x))))
    ok = attain <= 1e-10 and bad == 0 and fg == 0 and closed <= 1e-10 and seconds <= 5
    record(5, ok, f"{count} instances: max ||g(y)|-1| {attain:.1e}, distance failures {bad}, "
                  f"max ||f-g|| {fg}, closed-form error {closed:.1e}, {seconds:.2f}s")


# --------------------------------------------------------------------------
# criterion 6: zoo identities
# --------------------------------------------------------------------------


def test_criterion_6_zoo():
    from bpbdisc.discfun import sup_norm

    rng = np.random.default_rng(6)
    worst_mult = worst_rank = 0.0
    comp_exact = True
    for _ in range(50):
        dphi = int(rng.integers(0, 9))
        phi = DiscPoly(rng.standard_normal(dphi + 1) + 1j * rng.standard_normal(dphi + 1))
        M = zoo.mult_operator(phi, int(rng.integers(0, 9)))
        oracle = dense_sup(phi.coeffs)
        worst_mult = max(worst_mult, abs(sup_norm(M.image_of_one()) - oracle), abs(sup_norm(phi) - oracle))
        # a self-map of the disc for the composition operator
        psi = DiscPoly(rng.standard_normal(dphi + 1) + 1j * rng.standard_normal(dphi + 1))
        psi = psi * (rng.uniform(0.1, 1.0) / dense_sup(psi.coeffs) / (1 + 1e-9))
        C = zoo.comp_operator(psi, int(rng.integers(0, 6)))
        comp_exact &= sup_norm(C.image_of_one()) == 1.0
        n = int(rng.integers(1, 9))
        xs = Functional(FiniteDomain(n, 2.0), rng.standard_normal(n) + 1j * rng.standard_normal(n))
        dh = int(rng.integers(0, 33))
        h = DiscPoly(rng.standard_normal(dh + 1) + 1j * rng.standard_normal(dh + 1))
        T = zoo.rank_one(xs, h)
        expected = np.linalg.norm(xs.vector) * dense_sup(h.coeffs)
        worst_rank = max(worst_rank, abs(operator_norm(T) - expected))
    hardy = max(abs(zoo.hardy_diagonal(d).gap() - 1 / (d + 1)) for d in (1, 4, 9, 99))
    best4 = zoo.hardy_diagonal(4).best_basis()[1]
    ok = worst_mult <= 1e-8 and comp_exact and worst_rank <= 1e-6 and hardy <= 1e-10 and best4 == 0.8
    record(6, ok, f"mult {worst_mult:.1e}, comp exact {comp_exact}, rank-one {worst_rank:.1e}, "
                  f"hardy gap {hardy:.1e} (d=4 best {best4})")


# --------------------------------------------------------------------------
# criterion 7: operator norm against brute force
# --------------------------------------------------------------------------


def brute_force_norm(T: OperatorIntoDisc, rng, samples=10_000, polish=5):
    """Best of random unit vectors, each judged on a fine FFT grid; top samples polished.

    The polish repeatedly replaces x by the unit vector that maximises
    |(Tx)(z*)| at the current peak z*; values never decrease.
    """
    n, d = T.domain.n, T.degree
    grid = max(256, 1 << int(16 * (d + 1) - 1).bit_length())
    X = rng.standard_normal((n, samples)) + 1j * rng.standard_normal((n, samples))
    X /= np.linalg.norm(X, axis=0)
    vals = np.abs(np.fft.ifft(T.matrix @ X, n=grid, axis=0) * grid)
    best_cols = np.argsort(vals.max(axis=0))[-polish:]
    best = float(vals.max())
    powers = np.arange(d + 1)
    for j in best_cols:
        x = X[:, j]
        for _ in range(50):
            s = np.fft.ifft(T.matrix @ x, n=grid) * grid
            k = int(np.argmax(np.abs(s)))
            best = max(best, float(abs(s[k])))
            row = np.exp(2j * np.pi * k * powers / grid) @ T.matrix
            x_new = np.conj(row) / np.linalg.norm(row)
            if np.allclose(x_new, x, atol=1e-14):
                break
            x = x_new
    return best


def test_criterion_7_oracle():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(200):
        n, d = int(rng.integers(1, 9)), int(rng.integers(0, 33))
        mat = (rng.standard_normal((d + 1, n)) + 1j * rng.standard_normal((d + 1, n)))
        mat *= rng.uniform(0.5, 1.0) ** np.arange(d + 1)[:, None]
        T = OperatorIntoDisc(FiniteDomain(n, 2.0), mat)
        sweep = operator_norm(T)
        worst = max(worst, abs(sweep - brute_force_norm(T, rng)) / sweep)
    record(7, worst <= 0.02, f"200 operators, worst relative disagreement {worst:.2e}")
