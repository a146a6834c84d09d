"""Accuracy contract of the hand-rolled normal CDF/quantile (1e-9 absolute)."""

import numpy as np
import pytest
from scipy.special import ndtr, ndtri

from batchbandit.gaussian import norm_cdf, norm_pdf, norm_ppf


def test_cdf_accuracy_against_oracle():
    x = np.linspace(-12.0, 12.0, 120001)
    assert np.max(np.abs(norm_cdf(x) - ndtr(x))) < 1e-9


def test_cdf_branch_boundaries():
    for x in (-5.65685, -4.0, -0.46875, 0.0, 0.46875, 4.0, 5.65685):
        assert abs(norm_cdf(x) - ndtr(x)) < 1e-12


def test_ppf_accuracy_against_oracle():
    p = np.linspace(1e-10, 1 - 1e-10, 100001)
    assert np.max(np.abs(norm_ppf(p) - ndtri(p))) < 1e-9


def test_ppf_known_quantiles():
    assert norm_ppf(0.5) == 0.0
    assert norm_ppf(0.975) == pytest.approx(1.959963984540054, abs=1e-9)
    assert norm_ppf(0.995) == pytest.approx(2.5758293035489004, abs=1e-9)


def test_round_trip():
    p = np.linspace(0.001, 0.999, 999)
    assert np.max(np.abs(norm_cdf(norm_ppf(p)) - p)) < 1e-12


def test_ppf_domain():
    with pytest.raises(ValueError):
        norm_ppf(0.0)
    with pytest.raises(ValueError):
        norm_ppf(1.0)


def test_scalar_and_array_forms():
    assert isinstance(norm_cdf(0.3), float)
    assert norm_cdf(np.array([0.3])).shape == (1,)
    assert isinstance(norm_pdf(0.0), float)
    assert norm_pdf(0.0) == pytest.approx(1.0 / np.sqrt(2 * np.pi))
