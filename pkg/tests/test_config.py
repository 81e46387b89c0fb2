"""Config validation and the derived-constant algebra."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multipolar_hardy import (
    BadExponentM,
    DimensionTooSmall,
    DuplicatePoles,
    GammaOutOfRange,
    NonpositiveBeta,
    PoleConfig,
    SinglePole,
    WeightSpec,
    derive_params,
    enclosing_radius,
    far_field_decay_exponent,
    min_pole_gap,
    resolution_guard,
    suggest_k_mu,
    validate_config,
)


class TestValidation:
    def test_dimension_floor(self):
        with pytest.raises(DimensionTooSmall):
            validate_config(PoleConfig(dim=2, poles=np.zeros((1, 2))))

    def test_duplicate_poles(self):
        poles = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 1e-14]])
        with pytest.raises(DuplicatePoles):
            validate_config(PoleConfig(dim=3, poles=poles))

    @pytest.mark.parametrize("gamma", [1.0, 1.5, 3.0])
    def test_gamma_cap(self, two_poles_n3, gamma):
        with pytest.raises(GammaOutOfRange):
            validate_config(two_poles_n3, WeightSpec.polyexp(gamma=gamma))

    @pytest.mark.parametrize("kwargs", [{"m": 2.5}, {"delta": -0.1}])
    def test_exponential_factor_caps(self, two_poles_n3, kwargs):
        w = WeightSpec.polyexp(gamma=0.5, **{"delta": 0.3, **kwargs})
        with pytest.raises(BadExponentM):
            validate_config(two_poles_n3, w)

    def test_valid_configs_pass(self, two_poles_n3, three_poles_n4):
        validate_config(two_poles_n3, WeightSpec.unit())
        validate_config(two_poles_n3, WeightSpec.polyexp(gamma=0.5, delta=0.2))
        validate_config(three_poles_n4, WeightSpec.polyexp(gamma=1.2))


class TestDerivedParams:
    """The constants are pure algebra in (N, n, K_mu)."""

    @pytest.mark.parametrize(
        "dim, n, k_mu, beta, c_n_mu, c_nn_mu",
        [
            (3, 2, 0.0, 0.5, 0.25, 0.125),  # unit weight: classic quarter
            (4, 2, 0.0, 1.0, 1.0, 0.5),
            (3, 2, -0.6, 0.2, 0.04, 0.02),
            (5, 3, 1.0, 4.0 / 3.0, 16.0 / 9.0, 4.0 / 3.0),
        ],
    )
    def test_closed_forms(self, dim, n, k_mu, beta, c_n_mu, c_nn_mu):
        cfg = PoleConfig(
            dim=dim, poles=np.vstack([np.eye(dim)[:n] * (i + 1) for i in range(1)])
        )
        cfg = PoleConfig(dim=dim, poles=2.0 * np.eye(dim)[:n])
        p = derive_params(cfg, k_mu)
        assert p.beta == pytest.approx(beta, rel=1e-15)
        assert p.c_n_mu == pytest.approx(c_n_mu, rel=1e-15)
        assert p.c_nn_mu == pytest.approx(c_nn_mu, rel=1e-15)

    @settings(max_examples=200, deadline=None)
    @given(
        dim=st.integers(min_value=3, max_value=8),
        n=st.integers(min_value=1, max_value=4),
        k_mu=st.floats(min_value=-0.9, max_value=3.0),
    )
    def test_algebraic_relations(self, dim, n, k_mu):
        """beta = shift/n, c = beta^2, companion = shift^2/(4n)."""
        corners = np.array([[0, 0], [3, 0], [0, 3], [3, 3]], dtype=float)[:n]
        poles = np.zeros((n, dim))
        poles[:, :2] = corners
        cfg = PoleConfig(dim=dim, poles=poles)
        shift = dim + k_mu - 2.0
        p = derive_params(cfg, k_mu)
        assert p.beta == pytest.approx(shift / n, rel=1e-14)
        assert p.c_n_mu == pytest.approx(p.beta**2, rel=1e-14)
        assert p.c_nn_mu == pytest.approx(shift**2 / (4 * n), rel=1e-14)
        # the companion constant never exceeds n/4 times the optimal one
        assert p.c_nn_mu == pytest.approx(p.c_n_mu * n / 4.0, rel=1e-12)

    def test_nonpositive_beta_rejected(self, two_poles_n3):
        with pytest.raises(NonpositiveBeta):
            derive_params(two_poles_n3, -1.0)  # shift = 3 - 1 - 2 = 0


class TestGeometryHelpers:
    def test_min_pole_gap(self, two_poles_n3):
        assert min_pole_gap(two_poles_n3) == pytest.approx(1.0)

    def test_min_pole_gap_single_pole(self):
        cfg = PoleConfig(dim=3, poles=np.zeros((1, 3)))
        with pytest.raises(SinglePole):
            min_pole_gap(cfg)

    def test_enclosing_radius_contains_pole_balls(self, three_poles_n4):
        r0 = min_pole_gap(three_poles_n4)
        radius = enclosing_radius(three_poles_n4, r0)
        farthest = np.max(np.linalg.norm(three_poles_n4.poles, axis=1))
        assert radius >= farthest + r0 - 1e-12

    def test_resolution_guard_scales(self):
        small = PoleConfig(dim=3, poles=np.array([[0.0, 0, 0], [1e-3, 0, 0]]))
        large = PoleConfig(dim=3, poles=np.array([[0.0, 0, 0], [1e3, 0, 0]]))
        assert resolution_guard(small) < resolution_guard(large)


class TestWeightBookkeeping:
    def test_far_field_decay(self, two_poles_n3):
        assert far_field_decay_exponent(two_poles_n3, WeightSpec.unit()) == 0.0
        assert far_field_decay_exponent(
            two_poles_n3, WeightSpec.polyexp(gamma=0.5)
        ) == pytest.approx(1.0)
        assert far_field_decay_exponent(
            two_poles_n3, WeightSpec.polyexp(gamma=0.5, delta=0.1)
        ) == math.inf

    def test_suggest_k_mu_exact_cases(self, two_poles_n3):
        assert suggest_k_mu(two_poles_n3, WeightSpec.unit()) == 0.0
        single = PoleConfig(dim=4, poles=np.zeros((1, 4)))
        assert suggest_k_mu(single, WeightSpec.polyexp(gamma=0.7)) == pytest.approx(
            -0.7
        )

    def test_suggest_k_mu_multipole_in_valid_region(self, two_poles_n3):
        """The multi-pole seed must keep K_mu < -gamma (strict side of H2)."""
        w = WeightSpec.polyexp(gamma=0.5)
        assert suggest_k_mu(two_poles_n3, w) < -w.gamma
