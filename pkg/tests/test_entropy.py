import math

import numpy as np
import pytest

from freelab import measure as M
from freelab.entropy import (NEG_INFINITY, SEMICIRCLE_CHI, ChiMethod, FlowQuadratureConfig, _spline_energy_kernel,
                             chi_log_energy, chi_via_fisher_flow, conjugate_relation_residual, conjugate_variable,
                             fisher_from_conjugate, fisher_from_density)
from freelab.errors import AtomicUnsupported, InvalidMeasure
from freelab.free_conv import semicircular_smooth

# Log-energies from nested adaptive quadrature of int int log|s - t| f(s) f(t):
#   semicircle (radius 2)          -0.2500000000
#   uniform on [-sqrt3, sqrt3]     -0.2575466751   (= log(2 sqrt 3) - 3/2)
#   arcsine on [-sqrt2, sqrt2]     -0.3465735903   (= -log(2) / 2)
CONST = 0.75 + 0.5 * math.log(2 * math.pi)
CHI_SEMICIRCLE = -0.25 + CONST                 # 1.418939
CHI_UNIFORM = -0.2575466751 + CONST            # 1.411392
CHI_ARCSINE_UNIT = -0.3465735903 + CONST       # 1.322365


def test_semicircle_entropy(semicircle):
    chi = chi_log_energy(semicircle)
    assert chi.method is ChiMethod.LOG_ENERGY
    assert chi.value == pytest.approx(CHI_SEMICIRCLE, abs=1e-3)
    assert chi.value == pytest.approx(SEMICIRCLE_CHI, abs=1e-6)
    assert chi.estimated_error < 1e-4


def test_uniform_entropy(uniform):
    assert chi_log_energy(uniform).value == pytest.approx(CHI_UNIFORM, abs=1e-3)
    assert chi_log_energy(uniform).value == pytest.approx(1.41139, abs=1e-3)


def test_arcsine_entropy(arcsine_unit):
    value = chi_log_energy(arcsine_unit).value
    assert value == pytest.approx(CHI_ARCSINE_UNIT, abs=2e-3)
    assert value == pytest.approx(1.32241, abs=2e-3)


def test_atomic_entropy_is_sentinel(bernoulli):
    chi = chi_log_energy(bernoulli)
    assert chi.value == NEG_INFINITY and not chi.is_finite
    assert chi.value < -1e300


@pytest.mark.parametrize("c", [0.5, -1.3, 2.0])
def test_entropy_scaling_law(uniform, c):
    assert chi_log_energy(M.dilate(uniform, c)).value == pytest.approx(
        chi_log_energy(uniform).value + math.log(abs(c)), abs=1e-3)


def test_translation_invariance(uniform, smoothed_bernoulli):
    for mu in (uniform, smoothed_bernoulli):
        moved = M.translate(mu, 0.37)
        assert abs(chi_log_energy(moved).value - chi_log_energy(mu).value) < 1e-6
        assert abs(fisher_from_density(moved) - fisher_from_density(mu)) < 1e-6


def test_energy_kernel_branches_agree():
    k = _spline_energy_kernel(40)
    lags = np.abs(np.arange(-40, 41))
    # fourth difference of R(u) = u^4 log|u| / 24 - 25 u^4 / 288, evaluated in extended precision
    import mpmath as mp
    mp.mp.dps = 40

    def r(u):
        u = mp.mpf(abs(u))
        return 0 if u == 0 else u ** 4 * mp.log(u) / 24 - 25 * u ** 4 / 288

    for m in (0, 1, 2, 15, 16, 17, 40):
        exact = r(m + 2) - 4 * r(m + 1) + 6 * r(m) - 4 * r(m - 1) + r(m - 2)
        assert float(exact) == pytest.approx(k[lags == m][0], abs=1e-9)


def test_fisher_anchors(semicircle, uniform, bernoulli):
    assert fisher_from_density(semicircle) == pytest.approx(1.0, abs=1e-3)
    assert fisher_from_density(M.semicircle(2.0)) == pytest.approx(0.5, abs=1e-3)
    assert fisher_from_density(uniform) == pytest.approx(math.pi ** 2 / 9, abs=1e-3)
    assert fisher_from_density(bernoulli) == math.inf


@pytest.mark.parametrize("name", ["semicircle", "uniform", "gaussian"])
def test_two_fisher_routes_agree(name):
    mu = M.named(name)
    assert fisher_from_conjugate(mu) == pytest.approx(fisher_from_density(mu), rel=1e-3)


def test_two_fisher_routes_agree_on_smoothed_law(smoothed_bernoulli):
    mu = smoothed_bernoulli
    assert fisher_from_conjugate(mu) == pytest.approx(fisher_from_density(mu), rel=1e-3)


def test_conjugate_variable_of_semicircle(semicircle):
    j = conjugate_variable(semicircle)
    assert j(1.0) == pytest.approx(1.0, abs=2e-3)
    assert abs(j(0.0)) < 1e-9
    assert abs(np.dot(semicircle.point_masses, j.values)) < 1e-3


@pytest.mark.parametrize("var", [0.5, 2.0])
def test_conjugate_variable_scales(var):
    mu = M.semicircle(var)
    j = conjugate_variable(mu)
    inner = np.abs(j.x) < 0.9 * 2 * math.sqrt(var)
    assert np.max(np.abs(j.values[inner] - j.x[inner] / var)) < 2e-3


def test_conjugate_variable_requires_density(bernoulli):
    with pytest.raises(AtomicUnsupported):
        conjugate_variable(bernoulli)
    with pytest.raises(AtomicUnsupported):
        conjugate_relation_residual(bernoulli, [0, 1])


def test_conjugate_relation_examples(semicircle, uniform):
    assert conjugate_relation_residual(semicircle, [0, 0, 1]) < 1e-6
    assert conjugate_relation_residual(semicircle, [0, 0, 0, 1]) < 1e-3
    assert conjugate_relation_residual(uniform, [0, 0, 0, 0, 0, 1]) < 1e-3
    with pytest.raises(ValueError):
        conjugate_relation_residual(uniform, np.ones(10))


def test_cramer_rao(semicircle, uniform, smoothed_bernoulli, bernoulli_pair):
    assert fisher_from_density(semicircle) * semicircle.variance == pytest.approx(1.0, abs=2e-3)
    for mu in (uniform, smoothed_bernoulli, bernoulli_pair, M.gaussian()):
        assert fisher_from_density(mu) * mu.variance >= 1 - 1e-3
        assert fisher_from_density(mu) * mu.variance > 1 + 2e-3


def test_maximality(uniform, smoothed_bernoulli, bernoulli_pair):
    for mu in (uniform, smoothed_bernoulli, bernoulli_pair, M.gaussian()):
        bound = SEMICIRCLE_CHI + 0.5 * math.log(mu.variance)
        assert chi_log_energy(mu).value <= bound + 1e-3


def test_flow_config_validation():
    with pytest.raises(ValueError):
        FlowQuadratureConfig(t_cut=5)
    with pytest.raises(ValueError):
        FlowQuadratureConfig(n_t=10)


def test_flow_on_semicircle(flows):
    chi = flows["semicircle"]
    assert chi.method is ChiMethod.FISHER_FLOW
    assert chi.value == pytest.approx(SEMICIRCLE_CHI, abs=1e-4)
    assert np.max(np.abs(chi.details["integrand"])) <= 1e-4


def test_flow_agrees_with_log_energy(flows, uniform, smoothed_bernoulli):
    assert flows["uniform"].value == pytest.approx(chi_log_energy(uniform).value, abs=5e-3)
    assert flows["smoothed_bernoulli"].value == pytest.approx(chi_log_energy(smoothed_bernoulli).value, abs=5e-3)
    assert flows["uniform"].value == pytest.approx(CHI_UNIFORM, abs=5e-3)


def test_flow_on_bernoulli_is_finite_and_below_semicircle(bernoulli):
    cfg = FlowQuadratureConfig()
    chi = chi_via_fisher_flow(bernoulli, cfg)
    assert math.isfinite(chi.value)
    assert chi.value <= SEMICIRCLE_CHI
    # an atomic start yields the entropy of the law smoothed for time t_min
    smoothed = chi_log_energy(semicircular_smooth(bernoulli, cfg.t_min)).value
    assert chi.value == pytest.approx(smoothed, abs=5e-3)


def test_flow_variance_precondition():
    with pytest.raises(InvalidMeasure):
        chi_via_fisher_flow(M.semicircle(10.0))


def test_entropy_derivative_along_smoothing(uniform):
    t, dt = 1.0, 0.02
    up = chi_log_energy(semicircular_smooth(uniform, t + dt)).value
    down = chi_log_energy(semicircular_smooth(uniform, t - dt)).value
    phi = fisher_from_density(semicircular_smooth(uniform, t))
    assert (up - down) / (2 * dt) == pytest.approx(0.5 * phi, rel=2e-2)
