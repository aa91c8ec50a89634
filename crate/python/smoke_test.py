"""Smoke test for the Python extension.

Build and install it first, for example
    maturin build --release -m crates/python/Cargo.toml -o dist && pip install dist/wrmt-*.whl
then run `python python/smoke_test.py` (or `pytest python/`).
"""

import math

import numpy as np
import pytest

import wrmt


def test_density_integrates_to_dimension():
    xs, rho = wrmt.density_curve(4, 0, 0.3, 0.4, -10.0, 10.0, 801)
    assert len(xs) == 801
    assert abs(np.trapezoid(rho, xs) - 8.0) < 1e-4


def test_correlators_are_consistent():
    assert wrmt.rho_k([0.2], 3, 1, 0.3, 0.5) == pytest.approx(wrmt.rho1(0.2, 3, 1, 0.3, 0.5), rel=1e-10)
    assert wrmt.rho_k([0.2, -0.7], 3, 1, 0.3, 0.5) == pytest.approx(wrmt.rho2(0.2, -0.7, 3, 1, 0.3, 0.5), rel=1e-10)


def test_partition_forms_agree():
    angular, gaussian = wrmt.partition_nf1(1.3, 0.2, z_hat=0.5, nu=1)
    assert angular == pytest.approx(gaussian, rel=1e-10)


def test_sampling_matches_moments():
    spectra = np.array(wrmt.sample_spectra(2, 1, 0.4, 0.6, 20000, seed=3))
    assert spectra.shape == (20000, 5)
    trace = spectra.sum(axis=1)
    assert abs(trace.mean() + 0.6) < 3.0 * trace.std(ddof=1) / math.sqrt(len(trace))
    assert np.all(np.diff(spectra, axis=1) >= 0.0)


def test_histogram_against_density():
    centres, density, errors = wrmt.histogram(2, 0, 0.3, 0.4, 50000, -5.0, 5.0, 20, seed=1)
    half = 0.5 * (centres[1] - centres[0])

    def rho(x):
        return wrmt.rho1(x, 2, 0, 0.3, 0.4)

    # Simpson bin averages
    exact = np.array([(rho(c - half) + 4.0 * rho(c) + rho(c + half)) / 6.0 for c in centres])
    z = (np.array(density) - exact) / np.array(errors)
    assert np.mean(np.abs(z) < 3.0) >= 0.95


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        wrmt.rho1(0.0, 4, 0, 1.5, 0.0)
    with pytest.raises(ArithmeticError):
        wrmt.partition_nf1(0.0, 20.0)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
