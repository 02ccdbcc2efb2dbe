import math

import numpy as np
import pytest

import conjcalc as cc


def absolute():
    return cc.PolyhedralFn([cc.AffineFn([1.0], 0.0), cc.AffineFn([-1.0], 0.0)])


def test_eval_and_conjugate_of_abs():
    f = absolute()
    assert f([-2.0]) == 2.0
    star, method = cc.conjugate(f)
    assert method == "exact-polyhedral"
    assert star([0.5]) == 0.0
    assert math.isinf(star([1.5]))


def test_grid_kernels_agree():
    x = np.linspace(-2.0, 2.0, 257)
    f = 0.5 * x * x
    u = np.linspace(-3.0, 3.0, 129)
    naive = cc.legendre_naive(x, f, u)
    fast = cc.legendre_llt(x, f, u)
    assert naive.shape == (129,)
    assert np.max(np.abs(naive - fast)) <= 1e-12
    # brute force in numpy
    brute = np.max(u[:, None] * x[None, :] - f[None, :], axis=1)
    assert np.max(np.abs(brute - naive)) == 0.0


def test_operator_algebra():
    T = cc.PreservingOp(np.array([[2.0]]), [1.0], [3.0], 2.0, 5.0)
    inv = cc.invert(T)
    assert inv.tau == pytest.approx(0.5)
    assert inv.beta == pytest.approx(-1.75)
    ident = cc.compose(T, inv)
    assert cc.parameter_distance(ident, cc.PreservingOp.identity(1)) <= 1e-12
    g = T(cc.PolyhedralFn([cc.AffineFn([1.0], 0.0)]))
    assert g([1.0]) == pytest.approx(14.0)
    S = cc.to_reversing(T)
    assert S.y[0] == pytest.approx(-0.5)
    assert S.rho == pytest.approx(-3.5)
    ok, failed = cc.classify_involution(cc.PreservingOp(np.array([[-1.0]]), [1.0], [2.0], 1.0, -1.0))
    assert ok and failed == []


def test_reversing_and_biconjugate():
    F = cc.ReversingOp.conjugation(1)
    g = F(absolute())
    assert g([0.25]) == 0.0
    bb = cc.biconjugate(absolute())
    assert bb([-3.0]) == 3.0
    ident = cc.compose_reversing(F, F)
    assert cc.parameter_distance(ident, cc.PreservingOp.identity(1)) <= 1e-12


def test_leq_witness():
    half = cc.PolyhedralFn([cc.AffineFn([0.5], 0.0), cc.AffineFn([-0.5], 0.0)])
    pos = cc.PolyhedralFn([cc.AffineFn([1.0], 0.0), cc.AffineFn([0.0], 0.0)])
    holds, witness = cc.leq(half, pos)
    assert not holds
    x, lhs, rhs = witness
    assert x[0] < 0 and lhs > rhs


def test_counterexample_and_suites():
    report = cc.counterexample_flip()
    assert report["passed"]
    assert report["metrics"]["witness_x"] == -1.0
    reports = cc.run_suite("fenchel-moreau", trials=10, seed=3)
    assert all(r["passed"] for r in reports)


def test_errors_are_typed():
    with pytest.raises(cc.InvalidOperator):
        cc.PreservingOp(np.array([[1.0]]), [0.0], [0.0], 0.0, 0.0)
    with pytest.raises(cc.ImproperFunction):
        cc.GridFn([cc.GridAxis(0.0, 1.0, 2)], [math.inf, math.inf])
    with pytest.raises(cc.Error):
        cc.document_functions('{"version": 7, "dimension": 1}')


def test_document_functions():
    fns = cc.document_functions(
        '{"version":1,"dimension":1,"functions":{"p":{"kind":"point_indicator","anchor":[2]}}}'
    )
    assert isinstance(fns["p"], cc.PointIndicatorFn)
    assert fns["p"].anchor[0] == 2.0
