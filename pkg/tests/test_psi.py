import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import simple_functions
from oracles import brute_functional, log_lp_grid, random_atoms
from gls.measure import SimpleFunction, write_function
from gls.norms import GLSpace, gls_norm
from gls.psi import (
    Constant,
    EndpointSingular,
    Extremal,
    Natural,
    PowerRoot,
    PsiSpec,
    Tabulated,
    btheta_matched_psi,
    btheta_norm,
    natural_psi,
    parse_psi,
    parse_psi_kind,
    psi_eval,
)


@pytest.mark.parametrize("m,p", [(2, 4.0), (3, 8.0), (0.5, 1.5)])
def test_power_root(m, p):
    assert psi_eval(PsiSpec(1, math.inf, PowerRoot(m)), p) == pytest.approx(p ** (1 / m), rel=1e-15)


def test_endpoint_singular_value():
    spec = PsiSpec(1.0, 3.0, EndpointSingular(1.0, 0.5))
    assert psi_eval(spec, 2.0) == pytest.approx(1.0, rel=1e-15)
    assert psi_eval(spec, 1.5) == pytest.approx(0.5**-1 * 1.5**-0.5, rel=1e-14)


def test_constant_and_extremal():
    assert psi_eval(PsiSpec(1, 2, Constant(2.5)), 1.5) == 2.5
    spec = PsiSpec(1, 4, Extremal(3.0))
    assert psi_eval(spec, 3.0) == 1.0
    assert psi_eval(spec, 2.0) == math.inf


@pytest.mark.parametrize("p", [1.0, 2.0, 0.5, 5.0])
def test_eval_outside_open_interval_errors(p):
    with pytest.raises(ValueError):
        psi_eval(PsiSpec(1, 2, Constant(1)), p)


@pytest.mark.parametrize("make", [
    lambda: PsiSpec(2, 1, Constant(1)),
    lambda: PsiSpec(0.5, 2, Constant(1)),
    lambda: PsiSpec(1, math.nan, Constant(1)),
    lambda: PsiSpec(1, math.inf, EndpointSingular(1, 1)),
    lambda: PsiSpec(1, 2, Extremal(3)),
    lambda: PsiSpec(1, 2, Constant(0)),
    lambda: PsiSpec(1, 2, PowerRoot(-1)),
    lambda: PsiSpec(1, 2, EndpointSingular(-1, 0)),
    lambda: PsiSpec(1, 3, Tabulated([1.0, 2.0], [1.0, 1.0])),
    lambda: Tabulated([1.0, 1.0], [1.0, 2.0]),
    lambda: Tabulated([1.0, 2.0], [1.0, -2.0]),
    lambda: Natural(SimpleFunction.from_pairs([(1.0, 0.0)])),
])
def test_invalid_specs_rejected(make):
    with pytest.raises(ValueError):
        make()


@pytest.mark.parametrize("kind", [PowerRoot(2), EndpointSingular(1, 0.5), Constant(3),
                                  Tabulated([1.0, 1.5, 2.5], [1.0, 4.0, 2.0])])
def test_finite_positive_on_probe_grid(kind):
    spec = PsiSpec(1.2, 2.5, kind)
    vals = [psi_eval(spec, p) for p in np.linspace(1.2, 2.5, 1002)[1:-1]]
    assert all(math.isfinite(v) and v > 0 for v in vals)


def test_endpoint_divergence():
    spec = PsiSpec(1.0, 2.0, EndpointSingular(1.0, 0.5))
    left = [psi_eval(spec, 1.0 + 10.0**-k) for k in range(1, 12)]
    right = [psi_eval(spec, 2.0 - 10.0**-k) for k in range(1, 12)]
    assert all(b > a for a, b in zip(left, left[1:]))
    assert all(b > a for a, b in zip(right, right[1:]))
    assert left[-1] > 1e10 and right[-1] > 1e5


def test_log_psi_endpoint_is_infinite_limit():
    spec = PsiSpec(1.0, 2.0, EndpointSingular(1.0, 0.5))
    assert np.all(spec.log_psi(np.array([1.0, 2.0])) == np.inf)


def test_tabulated_interpolates_log_and_extrapolates_flat():
    spec = PsiSpec(1.0, math.inf, Tabulated([1.0, 3.0], [1.0, 4.0]))
    assert psi_eval(spec, 2.0) == pytest.approx(2.0, rel=1e-14)
    assert psi_eval(spec, 50.0) == pytest.approx(4.0, rel=1e-14)
    assert spec.log_tail() == pytest.approx(math.log(4.0))


@pytest.mark.parametrize("text,kind", [
    ("power_root:m=2", PowerRoot(2.0)),
    ("endpoint:beta1=1,beta2=0.5", EndpointSingular(1.0, 0.5)),
    ("const:c=1", Constant(1.0)),
    ("extremal:r=3", Extremal(3.0)),
])
def test_grammar(text, kind):
    assert parse_psi_kind(text) == kind


def test_grammar_spec_string_round_trips():
    for text in ["power_root:m=2", "endpoint:beta1=1,beta2=0.5", "const:c=1", "extremal:r=3"]:
        kind = parse_psi_kind(text)
        assert parse_psi_kind(kind.spec_string()) == kind


def test_grammar_files(tmp_path):
    f = SimpleFunction.from_pairs([(0.5, 2.0), (0.5, -1.0)])
    fpath = tmp_path / "f.txt"
    write_function(f, fpath)
    nat = parse_psi(f"natural:file={fpath}", 1.0, 4.0)
    assert isinstance(nat.kind, Natural)
    tpath = tmp_path / "psi.txt"
    tpath.write_text("# p psi\n1 1\n2 2\n4 3\n")
    tab = parse_psi(f"table:file={tpath}", 1.0, 4.0)
    assert psi_eval(tab, 2.0) == pytest.approx(2.0)


@pytest.mark.parametrize("text", ["", "bogus:x=1", "power_root", "power_root:m", "const:c=1,d=2",
                                  "natural:", "table:file=/does/not/exist", "extremal:r=abc"])
def test_grammar_errors(text):
    with pytest.raises((ValueError, OSError)):
        parse_psi(text, 1.0, 4.0)


@given(simple_functions(nonzero=True), st.floats(1.0, 5.0), st.floats(0.1, 5.0))
def test_natural_function_has_unit_norm(f, a, width):
    space = GLSpace(natural_psi(f, a, a + width))
    assert gls_norm(f, space).value == pytest.approx(1.0, abs=1e-9)


def test_natural_function_unbounded_interval():
    f = SimpleFunction.from_pairs([(0.3, 4.0), (0.7, -1.0)])
    space = GLSpace(natural_psi(f, 1.0, math.inf))
    assert gls_norm(f, space).value == pytest.approx(1.0, abs=1e-9)


def test_btheta_zero_function_and_validation():
    zero = SimpleFunction.from_pairs([(1.0, 0.0)])
    assert btheta_norm(zero, 2.0, 1.0).value == 0.0
    f = SimpleFunction.from_pairs([(1.0, 1.0)])
    for b, theta in [(1.0, 1.0), (math.inf, 1.0), (2.0, -1.0)]:
        with pytest.raises(ValueError):
            btheta_norm(f, b, theta)


def test_btheta_constant_function_closed_form():
    # ||1||_q = 1, so the sup of e^(theta/(b-e)) over (0, b-1] is at e = b-1
    f = SimpleFunction.from_pairs([(1.0, 1.0)])
    b, theta = 3.0, 0.5
    assert btheta_norm(f, b, theta).value == pytest.approx((b - 1) ** theta, rel=1e-12)


def test_btheta_matches_dense_grid():
    rng = np.random.default_rng(3)
    for _ in range(10):
        w, v = random_atoms(rng)
        f = SimpleFunction.from_pairs(zip(w, v))
        eps = np.linspace(1e-9, 1.0, 200_001)
        lr = log_lp_grid(w, v, 2.0 - eps) + np.log(eps) / (2.0 - eps)
        assert btheta_norm(f, 2.0, 1.0).value == pytest.approx(math.exp(lr.max()), rel=1e-6)


def test_btheta_ratio_to_matched_psi_is_bounded():
    # measured, not asserted against any constant: the ratio stays in a positive range
    rng = np.random.default_rng(11)
    spec = btheta_matched_psi(2.0, 1.0)
    ratios = []
    for _ in range(40):
        w, v = random_atoms(rng)
        f = SimpleFunction.from_pairs(zip(w, v))
        ratios.append(btheta_norm(f, 2.0, 1.0).value / brute_functional("norm", w, v, spec, 20_001))
    ratios = np.array(ratios)
    assert np.all(np.isfinite(ratios)) and ratios.min() > 0
    print(f"btheta / matched gls ratio range: [{ratios.min():.6g}, {ratios.max():.6g}]")
