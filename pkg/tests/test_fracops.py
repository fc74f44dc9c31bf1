"""Fractional operator stack: pointwise principal-value evaluation,
spectral symbols, seminorms, and the discrete-to-continuum gap.

The pointwise evaluator integrates in real space, so the oracle here
works on the Fourier side: for a gaussian f with transform
amp*w*sqrt(2*pi)*exp(-w^2 xi^2 / 2) the operator acts as the
multiplier -r*|xi|^gamma, giving

    Af(u) = -(r*amp*w*sqrt(2*pi)/pi) *
            int_0^inf xi^gamma exp(-w^2 xi^2/2) cos(xi (u - c)) dxi.

The two routes share no code beyond the multiplier ratio r.
"""

import numpy as np
import pytest
from scipy.integrate import quad

from fpmex.fracops import (
    CosineMode,
    GaussianBump,
    HermiteBump,
    TestFunction,
    cheb_time_nodes,
    fractional_laplacian,
    multiplier_ratio,
    operator_gap,
    remainder_bounds,
    sobolev_seminorm,
    spectral_seminorm,
    torus_symbol,
)


def fourier_oracle(u, gamma, center=0.0, width=0.3, amp=1.0):
    r = multiplier_ratio(gamma)
    val, _ = quad(
        lambda xi: xi**gamma * np.exp(-width * width * xi * xi / 2.0) * np.cos(xi * (u - center)),
        0.0,
        np.inf,
        limit=400,
    )
    return -(r * amp * width * np.sqrt(2.0 * np.pi) / np.pi) * val


def test_multiplier_ratio_closed_form():
    # at exponent 1 the ratio collapses to 3/pi
    assert multiplier_ratio(1.0) == pytest.approx(3.0 / np.pi, abs=1e-14)


# values of fourier_oracle frozen to guard both routes at once
_FROZEN = {
    (0.5, 0.0): -1.44032363704453,
    (0.5, 0.25): -0.8244291095403858,
    (0.5, 0.7): 0.22875986019160102,
    (1.0, 0.0): -2.539745437369637,
    (1.0, 0.25): -1.1328136282786625,
    (1.0, 0.7): 0.6961231877078622,
    (1.5, 0.0): -6.520019362855438,
    (1.5, 0.25): -2.1340045259997726,
    (1.5, 0.7): 2.023793890455191,
}


@pytest.mark.parametrize("gamma", [0.5, 1.0, 1.5])
@pytest.mark.parametrize("u", [0.0, 0.25, 0.7])
def test_gaussian_pointwise_against_fourier_oracle(gamma, u):
    f = GaussianBump(0.0, 0.3, 1.0)
    got = fractional_laplacian(f, u, gamma)
    live = fourier_oracle(u, gamma)
    assert live == pytest.approx(_FROZEN[(gamma, u)], abs=1e-9)
    assert got == pytest.approx(live, abs=1e-9)


@pytest.mark.parametrize("gamma", [0.4, 1.0, 1.6])
def test_cosine_is_an_eigenfunction(gamma):
    mode = CosineMode(3, 2.0, 1.0)
    omega = mode.angular_freq
    r = multiplier_ratio(gamma)
    for u in (0.1, 0.9, 1.37):
        got = fractional_laplacian(mode, u, gamma)
        want = -r * omega**gamma * np.cos(omega * (u))
        assert got == pytest.approx(want, abs=1e-9)


def test_hermite_even_odd_structure():
    # odd-order envelope is odd about its center, so the operator value
    # at the center vanishes by symmetry
    f = HermiteBump(1, 0.0, 0.25, 1.0)
    assert fractional_laplacian(f, 0.0, 1.2) == pytest.approx(0.0, abs=1e-9)


def test_torus_symbol_layout():
    sym = torus_symbol(1.0, 2.0, 8)
    assert sym.shape == (5,)
    assert sym[0] == 0.0
    assert np.all(sym[1:] < 0)
    k = np.arange(1, 5)
    want = -multiplier_ratio(1.0) * (2.0 * np.pi * k / 2.0) ** 1.0
    assert np.allclose(sym[1:], want, rtol=1e-13)


def test_torus_symbol_plain_variant_allows_heat():
    sym = torus_symbol(2.0, 2.0, 8, jump_normalized=False)
    k = np.arange(5)
    assert np.allclose(sym, -((2.0 * np.pi * k / 2.0) ** 2), rtol=1e-13)
    with pytest.raises(ValueError):
        torus_symbol(2.0, 2.0, 8)  # normalized variant needs exponent < 2


def test_time_polynomial_assembly():
    g = TestFunction.gaussian(1.0, 0.2, 1.0)
    u = np.linspace(0, 2, 33, endpoint=False)
    assert np.allclose(g.value(0.7, u), g.parts[0].value(u))
    two_part = TestFunction([g.parts[0], GaussianBump(1.0, 0.2, 0.5)])
    assert np.allclose(
        two_part.value(0.3, u), g.parts[0].value(u) * (1.0 + 0.3 * 0.5)
    )
    assert np.allclose(two_part.time_derivative(0.3, u), 0.5 * g.parts[0].value(u))


def test_cheb_nodes_cover_the_horizon():
    nodes = cheb_time_nodes(1.0, 17)
    assert nodes.shape == (17,)
    assert nodes[0] == 0.0 and nodes[-1] == 1.0
    assert np.all(np.diff(nodes) > 0)


# -- seminorms ---------------------------------------------------------------


@pytest.mark.parametrize("gamma", [0.5, 1.0, 1.5])
def test_sobolev_seminorm_matches_spectral(gamma):
    n = 512
    u = np.arange(n) * (2.0 / n)
    f = np.exp(np.sin(np.pi * u)) - 1.0
    direct = sobolev_seminorm(f, gamma, 2.0)
    spectral = spectral_seminorm(f, gamma, 2.0)
    assert direct == pytest.approx(spectral, rel=2e-3)


def test_sobolev_seminorm_of_constant_vanishes():
    f = np.full(256, 0.37)
    assert sobolev_seminorm(f, 1.0, 2.0) == pytest.approx(0.0, abs=1e-12)
    assert spectral_seminorm(f, 1.0, 2.0) == pytest.approx(0.0, abs=1e-12)


def test_spectral_seminorm_single_mode_closed_form():
    # for f = cos(omega u) the double integral collapses to
    # torus_length * omega^gamma * pi / (Gamma(1+gamma) sin(pi gamma / 2))
    from scipy.special import gamma as gammafn

    n = 256
    u = np.arange(n) * (2.0 / n)
    for k, gamma in ((2, 1.0), (3, 0.6), (1, 1.4)):
        f = np.cos(2.0 * np.pi * k * u / 2.0)
        omega = 2.0 * np.pi * k / 2.0
        want = (
            2.0
            * omega**gamma
            * np.pi
            / (gammafn(1.0 + gamma) * np.sin(np.pi * gamma / 2.0))
        )
        assert spectral_seminorm(f, gamma, 2.0) == pytest.approx(want, rel=1e-12)


# -- discrete operator gap ---------------------------------------------------


def test_gap_shrinks_with_resolution():
    g = TestFunction.gaussian(1.0, 0.15, 1.0)
    gaps = [operator_gap(g, n, 1.0) for n in (128, 256, 512)]
    assert gaps[0] > gaps[1] > gaps[2]


def test_remainder_bounds_positive_and_ordered():
    g = TestFunction.gaussian(1.0, 0.15, 1.0)
    y1a, y2a = remainder_bounds(g, 256, 1.0, m=2)
    y1b, y2b = remainder_bounds(g, 512, 1.0, m=2)
    assert y1a > y1b > 0
    assert y2a > y2b > 0
