import math

import numpy as np
import pytest

from oversparse import rms_error, snr_db
from oversparse.errors import DimensionError
from oversparse.metrics import (evaluate, format_float, implied_reference_rms, snr_from_rms,
                                trace_summary)


def test_rms_error_examples():
    assert rms_error(np.zeros((2, 2)), np.ones((2, 2))) == 1.0
    assert rms_error([[0, 0]], [[3, 4]]) == pytest.approx(math.sqrt(12.5))


def test_snr_is_signal_rms_over_error_rms():
    ref = np.full((4, 4), 2.0)
    assert snr_db(ref, ref + 0.2) == pytest.approx(20.0)
    assert snr_db(ref, ref) == math.inf
    assert snr_db(ref, ref * 1.1) == pytest.approx(20.0)


def test_snr_round_trips_through_implied_rms():
    assert snr_from_rms(implied_reference_rms(0.0239, 19.55), 0.0239) == pytest.approx(19.55)


def test_shape_and_scale_errors():
    with pytest.raises(DimensionError):
        rms_error(np.zeros((2, 2)), np.zeros((2, 3)))
    with pytest.raises(ValueError):
        snr_db(np.zeros(2), np.ones(2), "8bit", "unit")
    assert snr_db(np.ones(2), np.zeros(2), "8bit", "8bit") == 0.0


def test_evaluate_report():
    r = evaluate(np.ones((2, 2)), np.full((2, 2), 0.9), scale="8bit")
    assert r.rmse == pytest.approx(0.1) and r.scale == "8bit"


def test_trace_summary():
    s = trace_summary([0.5, 0.1, 0.009, 0.004, 0.0009], 1e-3)
    assert s.knee == 3 and s.monotone_after_knee and s.final_change == 0.0009
    assert trace_summary([0.5, 0.4], 1e-3).knee is None
    assert not trace_summary([0.5, 0.005, 0.006], 1e-3).monotone_after_knee
    with pytest.raises(ValueError):
        trace_summary([], 1e-3)


def test_format_float():
    assert format_float(0.1) == "0.1"
    assert format_float(1e-20) == "1e-20"
    assert format_float(math.inf) == "inf" and format_float(-math.inf) == "-inf"
    assert format_float(np.float64(2.5)) == "2.5"
    assert float(format_float(1 / 3)) == 1 / 3
