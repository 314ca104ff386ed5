import json

import numpy as np
import pytest

from lplr.errors import InvalidRank, NotCompressing
from lplr.factor import assemble, l2_low_rank, lp_low_rank
from lplr.report import (
    EvalReport,
    compression_rate,
    evaluate,
    report_from_json,
    report_to_json,
    reports_equal_modulo_time,
)


class TestCompressionRate:
    def test_break_even(self):
        assert compression_rate(100, 100, 50) == pytest.approx(0.0)

    def test_embedding_dims(self):
        # 30522 x 768 at k = 384 removes about 48.74% of the parameters
        assert compression_rate(30522, 768, 384) == pytest.approx(0.48742, abs=5e-6)

    def test_fifteen_percent_regime(self):
        assert compression_rate(30522, 768, 637) == pytest.approx(0.1497, abs=5e-4)

    def test_not_compressing(self):
        with pytest.raises(NotCompressing):
            compression_rate(100, 100, 51)

    def test_rank_range(self):
        with pytest.raises(InvalidRank):
            compression_rate(100, 100, 100)


class TestEvaluate:
    def test_zero_error_when_exact(self):
        a = np.vstack([np.diag([3.0, 2.0, 1.0, 0.5]), np.ones((4, 4))])
        approx = l2_low_rank(a, 2)
        rep = evaluate(assemble(approx), approx, 2.0)
        assert rep.error_pp == pytest.approx(0.0, abs=1e-12)

    def test_closed_form_diag_case(self):
        a = np.diag([3.0, 2.0, 1.0])
        approx = lp_low_rank(a, 2, 1.0)
        rep = evaluate(a, approx, 1.0)
        assert rep.error_pp == pytest.approx(1.0, rel=0.05)
        assert rep.bound_upper == pytest.approx(3.0**1.5, rel=0.1)
        assert rep.error_pp <= rep.bound_upper * 1.1

    def test_bound_respected_across_seeds(self):
        for seed in range(10):
            rng = np.random.default_rng(seed)
            a = rng.normal(size=(30, 4))
            p = rng.choice([1.0, 1.5, 2.0])
            approx = lp_low_rank(a, 2, p)
            rep = evaluate(a, approx, p)
            assert rep.error_pp <= rep.bound_upper * 1.1**p

    def test_transposed_input_reports_oriented_dims(self):
        a = np.random.default_rng(1).normal(size=(4, 30))
        approx = lp_low_rank(a, 2, 1.0)
        rep = evaluate(a, approx, 1.0)
        assert (rep.n, rep.d) == (30, 4)

    def test_report_roundtrip(self):
        a = np.random.default_rng(2).normal(size=(20, 4))
        approx = lp_low_rank(a, 2, 1.5)
        rep = evaluate(a, approx, 1.5, wall_time_ms=12.5, seed=7)
        back = report_from_json(report_to_json(rep))
        assert back == rep

    def test_json_key_order_is_stable(self):
        a = np.random.default_rng(3).normal(size=(15, 4))
        rep = evaluate(a, l2_low_rank(a, 2), 2.0)
        keys = list(json.loads(report_to_json(rep)).keys())
        assert keys == [
            "n", "d", "k", "p", "method", "error_pp", "error_l2_baseline",
            "bound_lower", "bound_upper", "bound_upper_stated",
            "sandwich_lo", "sandwich_hi", "compression_rate",
            "iterations", "wall_time_ms", "seed",
        ]

    def test_equality_modulo_wall_time(self):
        a = np.random.default_rng(4).normal(size=(15, 4))
        approx = l2_low_rank(a, 2)
        r1 = evaluate(a, approx, 2.0, wall_time_ms=1.0)
        r2 = evaluate(a, approx, 2.0, wall_time_ms=99.0)
        assert r1 != r2 and reports_equal_modulo_time(r1, r2)


def test_evaluate_rejects_shape_mismatch():
    from lplr.errors import ShapeMismatch

    a = np.random.default_rng(6).normal(size=(12, 3))
    approx = l2_low_rank(a, 2)
    with pytest.raises(ShapeMismatch):
        evaluate(np.ones((5, 3)), approx, 2.0)


def test_report_from_json_rejects_unknown_fields():
    a = np.random.default_rng(5).normal(size=(12, 3))
    rep = evaluate(a, l2_low_rank(a, 2), 2.0)
    data = json.loads(report_to_json(rep))
    data["bogus"] = 1
    from lplr.errors import ShapeMismatch

    with pytest.raises(ShapeMismatch):
        report_from_json(json.dumps(data))
