import numpy as np
import pytest

from lanfa import ScalarFunction, parse_function
from lanfa.errors import DomainError, ValidationError


def test_real_values():
    assert ScalarFunction.sqrt()(4.0) == 2.0
    assert ScalarFunction.log()(1.0) == 0.0
    assert ScalarFunction.inv_power(2)(0.5) == 4.0
    assert ScalarFunction.step(1.0)(np.array([0.5, 1.0, 2.0])).tolist() == [0, 1, 1]
    assert ScalarFunction.abs_shift(1.0)(np.array([0.0, 3.0])).tolist() == [1, 2]
    assert ScalarFunction.step_over_x(1.0)(np.array([0.5, 2.0])).tolist() == [0, 0.5]
    assert ScalarFunction.polynomial([1, 0, 2])(3.0) == 19.0


@pytest.mark.parametrize("f, x", [(ScalarFunction.sqrt(), -1.0),
                                  (ScalarFunction.log(), 0.0),
                                  (ScalarFunction.inv(), 0.0)])
def test_domain_errors(f, x):
    with pytest.raises(DomainError):
        f(np.array([1.0, x]))


def test_complex_continuations_agree_on_real_axis():
    x = np.linspace(0.5, 4, 9)
    for f in (ScalarFunction.sqrt(), ScalarFunction.log(), ScalarFunction.inv_power(2),
              ScalarFunction.exp(-1.0), ScalarFunction.polynomial([1, -2, 0.5])):
        assert np.allclose(f.complex_eval(x + 0j), f(x), rtol=1e-14)


def test_principal_branches():
    z = -1 + 1e-300j
    assert ScalarFunction.sqrt().complex_eval(z) == pytest.approx(1j)
    assert ScalarFunction.log().complex_eval(z).imag == pytest.approx(np.pi)


def test_piecewise_continuations():
    f = ScalarFunction.abs_shift(2.0)
    assert f.complex_eval(3 + 1j) == 1 + 1j
    assert f.complex_eval(1 + 1j) == 1 - 1j
    g = ScalarFunction.step_over_x(2.0)
    assert g.complex_eval(3 + 0j) == pytest.approx(1 / 3)
    assert g.complex_eval(1 + 5j) == 0


def test_singular_in_disk():
    s = ScalarFunction.sqrt()
    assert s.singular_in_disk(1.0, 1.5)
    assert not s.singular_in_disk(2.0, 1.0)
    assert not ScalarFunction.step_over_x(2.0).singular_in_disk(0.0, 1.0, piece="left")


def test_parse_function():
    assert parse_function("sqrt").name == "sqrt"
    assert parse_function("xq", q=3).params == (3,) or parse_function("xq", q=3).params[0] == 3
    assert parse_function("step", a=2.0).breakpoint == 2.0
    assert parse_function("poly", coeffs=[1, 2]).degree == 1
    assert parse_function("one")(5.0) == 1.0
    with pytest.raises(ValidationError):
        parse_function("step")
    with pytest.raises(ValidationError):
        parse_function("gamma")
    with pytest.raises(ValidationError):
        ScalarFunction.step_over_x(0.0)
