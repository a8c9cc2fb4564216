"""End-to-end smoke checks for the python binding."""

import math

import pytest

import expsum


def test_model_evaluate():
    m = expsum.Model([expsum.Term(1.0, 1.0), expsum.Term(1.0, -1.0)])
    assert m(0.0) == pytest.approx(2.0)
    assert m(1.0) == pytest.approx(math.e + 1.0 / math.e, rel=1e-15)
    assert m.n_terms == 2
    assert m.constant is None


def test_model_json_round_trip():
    m = expsum.Model([expsum.Term(1.0 / 3.0, -0.7)], 2.5)
    back = expsum.Model.from_json(m.to_json())
    assert back.constant == 2.5
    assert back.terms[0].coeff == 1.0 / 3.0
    with pytest.raises(expsum.FormatError):
        expsum.Model.from_json("not json")


def test_generate_deterministic():
    spec = expsum.GeneratorSpec()
    spec.n_terms = 3
    spec.seed = 42
    a = expsum.generate(spec).model
    b = expsum.generate(spec).model
    assert [t.rate for t in a.terms] == [t.rate for t in b.terms]
    assert [t.coeff for t in a.terms] == [t.coeff for t in b.terms]


def test_recover_round_trip():
    truth = expsum.Model([expsum.Term(1.0, 1.0), expsum.Term(1.0, -1.0)])
    problem = expsum.RecoveryProblem()
    problem.n_terms = 2
    problem.records = expsum.exact_records(truth, [0.3, 0.9, 1.6, 2.5], 2)
    result = expsum.recover(problem)
    assert result.mode_used == expsum.RecoveryMode.strict
    rates = [t.rate for t in result.model.terms]
    coeffs = [t.coeff for t in result.model.terms]
    assert rates == pytest.approx([-1.0, 1.0], abs=1e-9)
    assert coeffs == pytest.approx([1.0, 1.0], abs=1e-9)
    assert result.x_vector == pytest.approx([0.0, 1.0, 2.0, 0.0], abs=1e-9)
    assert result.warnings == []


def test_quadrature_pipeline():
    truth = expsum.Model([expsum.Term(2.0, -0.8)])
    n = 2001
    grid = [3.0 * i / (n - 1) for i in range(n)]
    signal = expsum.DenseSignal(grid, [truth(t) for t in grid])
    t = grid[1200]
    table = expsum.moments_from_signal(signal, t, 3)
    for k in range(1, 4):
        want = expsum.iterated_integral_exact(truth, k, t)
        assert expsum.integrals_from_moments(table, k) == pytest.approx(want, abs=1e-7)
        assert expsum.iterated_quadrature_oracle(signal, k, t) == pytest.approx(want, abs=1e-7)


def test_ingest_and_recover():
    truth = expsum.Model([expsum.Term(1.2, 0.9), expsum.Term(0.8, -1.3)])
    n = 1501
    grid = [3.0 * i / (n - 1) for i in range(n)]
    signal = expsum.DenseSignal(grid, [truth(t) for t in grid])
    times = [grid[i] for i in (300, 600, 1000, 1400)]
    problem = expsum.RecoveryProblem()
    problem.n_terms = 2
    problem.records = expsum.ingest_records(signal, times, 2)
    result = expsum.recover(problem)
    got = sorted((t.rate, t.coeff) for t in result.model.terms)
    assert got[0][0] == pytest.approx(-1.3, abs=1e-5)
    assert got[1][0] == pytest.approx(0.9, abs=1e-5)


def test_poly_roots():
    p = expsum.MonicPolynomial([-1.0, 0.0])
    roots = expsum.poly_roots(p)
    assert roots[0] == pytest.approx(-1 + 0j)
    assert roots[1] == pytest.approx(1 + 0j)


def test_error_types():
    truth = expsum.Model([expsum.Term(1.0, 1.0), expsum.Term(1.0, -1.0)])
    problem = expsum.RecoveryProblem()
    problem.n_terms = 2
    problem.records = expsum.exact_records(truth, [0.3, 0.9, 1.6], 2)
    with pytest.raises(expsum.InsufficientRecordsError):
        expsum.recover(problem)

    indefinite = expsum.Model([expsum.Term(-3.0, -1.0), expsum.Term(1.0, 1.0)])
    shifted = expsum.RecoveryProblem()
    shifted.n_terms = 2
    shifted.mode = expsum.RecoveryMode.shifted
    shifted.shift_value = 0.1
    shifted.records = expsum.exact_records(indefinite, [0.3, 0.8, 1.4, 2.1, 2.9], 2)
    with pytest.raises(expsum.ShiftTooSmallError):
        expsum.recover(shifted)


def test_verify_overdetermined():
    truth = expsum.Model([expsum.Term(2.0, -0.8)])
    problem = expsum.RecoveryProblem()
    problem.n_terms = 2
    problem.records = expsum.exact_records(truth, [0.3, 1.1, 1.9, 2.7], 2)
    report = expsum.verify_overdetermined(problem, 1)
    assert report.ok
    assert report.n_significant == 1
    assert report.max_relative_deviation <= 1e-6


def test_selftest_quick():
    results = expsum.selftest(quick=True)
    assert len(results) == 8
    failures = [(r.id, r.name, r.detail) for r in results if not r.ok]
    assert failures == []
