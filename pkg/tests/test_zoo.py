import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bpbdisc import zoo
from bpbdisc.core import FiniteDomain, Functional, OperatorIntoDisc, operator_norm, point_functional
from bpbdisc.discfun import DiscPoly, sup_norm
from bpbdisc.errors import NotSelfMapError

coeffs = st.lists(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
                  min_size=1, max_size=9)


def test_mult_examples():
    op = zoo.mult_operator(DiscPoly([0, 1]), 3)
    np.testing.assert_array_equal(op.apply(DiscPoly([1])).coeffs[:2], [0, 1])
    assert sup_norm(op.image_of_one()) == pytest.approx(1.0)
    f = DiscPoly([1, 2j, 3])
    np.testing.assert_allclose(zoo.mult_operator(DiscPoly([1]), 2).apply(f).coeffs, f.coeffs)
    assert sup_norm(zoo.mult_operator(DiscPoly([1, 1]), 4).image_of_one()) == pytest.approx(2.0)


@given(coeffs, st.integers(0, 6), st.integers(0, 2**31))
@settings(max_examples=50)
def test_mult_norm_identity(c, d, seed):
    phi = DiscPoly(c)
    op = zoo.mult_operator(phi, d)
    s = sup_norm(phi)
    assert abs(sup_norm(op.image_of_one()) - s) <= 1e-8 * (1 + s)
    rng = np.random.default_rng(seed)
    f = DiscPoly(rng.standard_normal(d + 1) + 1j * rng.standard_normal(d + 1))
    # ||phi f|| <= ||phi|| ||f|| and the product matches direct convolution
    pf = op.apply(f)
    np.testing.assert_allclose(pf.coeffs, np.convolve(phi.coeffs, f.coeffs), atol=1e-12 * (1 + s) * 10)
    assert sup_norm(pf) <= s * sup_norm(f) * (1 + 1e-9) + 1e-12


def test_comp_examples():
    op = zoo.comp_operator(DiscPoly([0, 1]), 4)
    f = DiscPoly([1, 2, 3, 4, 5])
    np.testing.assert_allclose(op.apply(f).coeffs, f.coeffs)
    sq = zoo.comp_operator(DiscPoly([0, 0, 1]), 3)
    assert sup_norm(sq.image_of_one()) == 1.0
    np.testing.assert_allclose(sq.apply(DiscPoly([0, 1])).coeffs[:3], [0, 0, 1])


def test_comp_rejects_non_self_map():
    with pytest.raises(NotSelfMapError):
        zoo.comp_operator(DiscPoly([0.5, 0.8]), 3)


def test_comp_truncation_bound():
    phi = DiscPoly([0.1, 0.5, 0.3j])
    full = zoo.comp_operator(phi, 5)
    cut = zoo.comp_operator(phi, 5, out_degree=4)
    f = DiscPoly(np.ones(6) / 6)
    lost = sup_norm(full.apply(f) - DiscPoly(np.pad(cut.apply(f).coeffs, (0, full.d_out - 4))))
    assert lost <= cut.truncation_bound * sup_norm(f) + 1e-12


def test_rank_one_examples():
    dom = FiniteDomain(3, 2.0)
    T = zoo.rank_one(Functional(dom, [1, 0, 0]), DiscPoly([1]))
    assert operator_norm(T) == pytest.approx(1.0)
    assert sup_norm(T.apply([1, 0, 0])) == pytest.approx(1.0)
    # the zero functional gives the zero operator
    Z = zoo.rank_one(Functional(dom, [0, 0, 0]), DiscPoly([1, 2]))
    assert operator_norm(Z) == 0.0


@given(st.integers(1, 8), coeffs, st.integers(0, 2**31), st.sampled_from([1.0, 2.0, 4.0, np.inf]))
@settings(max_examples=50)
def test_rank_one_norm_identity(n, c, seed, p):
    h = DiscPoly(c)
    if h.is_zero():
        return
    rng = np.random.default_rng(seed)
    xs = Functional(FiniteDomain(n, p), rng.standard_normal(n) + 1j * rng.standard_normal(n))
    T = zoo.rank_one(xs, h)
    expected = xs.norm() * sup_norm(h)
    assert abs(operator_norm(T) - expected) <= 1e-6 * max(1.0, expected)


def test_evaluation_functional():
    op = zoo.evaluation_functional(0.3 + 0.4j, 5)
    assert op.apply(DiscPoly([1])).coeffs[0] == 1
    f = DiscPoly([1, 2, 3])
    assert op.apply(f).coeffs[0] == pytest.approx(f(0.3 + 0.4j))
    with pytest.raises(ValueError):
        zoo.evaluation_functional(2.0, 3)


@pytest.mark.parametrize("d", [1, 4, 9, 99])
def test_hardy_diagonal_gap(d):
    D = zoo.hardy_diagonal(d)
    assert abs(D.gap() - 1 / (d + 1)) <= 1e-10
    k, v = D.best_basis()
    assert k == d


def test_hardy_diagonal_examples():
    D = zoo.hardy_diagonal(9)
    assert D.ratio(DiscPoly.monomial(4)) == pytest.approx(0.8, abs=1e-12)
    assert D.apply(DiscPoly([1])).is_zero()
    gaps = [zoo.hardy_diagonal(d).best_basis()[1] for d in range(1, 30)]
    assert all(b < 1 for b in gaps) and all(np.diff(gaps) > 0)


def test_attainment_probe():
    inp = zoo.peaked_rank_one(n=3)
    rep = zoo.attainment_probe(inp.T, trials=4)
    assert rep.attained and rep.best_value == pytest.approx(1.0, abs=1e-6)
    zero = OperatorIntoDisc(FiniteDomain(2, 2.0), np.zeros((2, 2)))
    assert zoo.attainment_probe(zero, trials=2).best_value == 0.0
    hd = zoo.attainment_probe(zoo.hardy_diagonal(4), trials=20)
    assert not hd.attained and hd.gap >= 0.2 - 1e-12
    assert rep.to_dict()["classification"] == "attained within tol"


def test_peaked_inputs_satisfy_hypothesis():
    for eps in (0.1, 0.3, 0.6):
        inp = zoo.peaked_rank_one(n=8, degree=32, eps=eps)
        assert operator_norm(inp.T) == pytest.approx(1.0, abs=1e-9)
        val = abs(point_functional(inp.T, inp.theta0)(inp.x0))
        assert val > 1 - eps / 3
        assert inp.T.domain.norm(inp.x0) == pytest.approx(1.0, abs=1e-12)
        bad = zoo.violating_rank_one(eps=eps)
        assert abs(point_functional(bad.T, bad.theta0)(bad.x0)) <= 1 - eps / 3


def test_peaked_h_peaks_at_theta0():
    for deg in (1, 2, 7, 32):
        h = zoo.peaked_h(1.1, deg)
        assert abs(h(np.exp(1.1j))) == pytest.approx(1.0, abs=1e-14)
        assert sup_norm(h) == pytest.approx(1.0, abs=1e-10)


def test_equicontinuity_table(tmp_path):
    inp = zoo.peaked_rank_one()
    rows = zoo.equicontinuity_report(inp.T, [0.0, 0.7, 3.0], [0.1, 0.3, 0.6])
    assert all(r["status"] == "ok" and 0 < r["delta2"] <= 2 for r in rows)
    for theta in (0.0, 0.7, 3.0):
        col = [r["delta2"] for r in rows if r["theta0"] == theta]
        assert col == sorted(col)
    path = tmp_path / "eq.csv"
    zoo.write_equicontinuity_csv(rows, path)
    with open(path) as fh:
        data = list(csv.DictReader(fh))
    assert len(data) == 9 and data[0]["status"] == "ok"


def test_registry():
    assert set(zoo.REGISTRY) >= {"mult", "comp", "rank-one", "evaluation", "hardy-diagonal", "equicontinuity"}
    for name, entry in zoo.REGISTRY.items():
        assert entry.name == name
        assert isinstance(entry.demo(), dict)
    with pytest.raises(KeyError):
        zoo.get("nope")
