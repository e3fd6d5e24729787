import numpy as np
import pytest

from adiaspin.errors import DegenerateFieldError, InvalidInputError
from adiaspin.exact import IntegratorConfig
from adiaspin.fields import Constant, Rotating, RosenZener
from adiaspin.oscillator import TRACE_HEADER, build_trace, second_difference, trace_rows

TIGHT = IntegratorConfig(1e-12, 1e-12)


def test_second_difference_exact_on_quartic():
    t = np.linspace(0, 1, 11)
    d2 = second_difference(t**4 - t**2, t[1] - t[0])
    assert np.all(np.isnan(d2[:2])) and np.all(np.isnan(d2[-2:]))
    assert np.allclose(d2[2:-2], 12 * t[2:-2] ** 2 - 2, atol=1e-10)


def test_constant_field():
    tr = build_trace(Constant((1, 0, 1)), 0.0, 4.0, 256, TIGHT)
    assert np.allclose(tr.Omega_sq, 2.0)
    assert tr.normalized_residual() < 1e-6


def test_residual_order():
    m = RosenZener(1.5, 1, 1)
    res = [build_trace(m, -5, 5, n, TIGHT).max_residual() for n in (64, 128, 256, 512)]
    slopes = np.diff(np.log(res)) / np.log(2)
    assert np.all(np.abs(slopes + 4) < 0.3)


def test_fine_grid_residual():
    tr = build_trace(RosenZener(1.5, 1, 1), -5, 5, 4096, TIGHT)
    assert tr.normalized_residual() < 1e-4
    assert np.max(np.abs(tr.Omega_sq.imag)) > 0.1


def test_rotating_frequency():
    tr = build_trace(Rotating(0.5, 1.2, 3.0), 0.0, 3.0, 128)
    assert np.allclose(tr.Omega_sq, 1.2**2 + 1.0, atol=1e-12)


def test_rows():
    tr = build_trace(Rotating(1, 1, 2), 0.0, 1.0, 64)
    rows = trace_rows(tr)
    assert rows.shape == (64, len(TRACE_HEADER))


def test_validation():
    with pytest.raises(InvalidInputError):
        build_trace(Rotating(1, 1, 2), 0, 1, 10)
    with pytest.raises(InvalidInputError):
        build_trace(Rotating(1, 1, 2), 1, 0, 100)
    with pytest.raises(DegenerateFieldError):
        build_trace(Constant((0, 0, 1)), 0, 1, 100)
