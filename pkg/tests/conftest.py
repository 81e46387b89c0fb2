"""Shared fixtures: canonical pole geometries and lean quadrature specs."""

import numpy as np
import pytest

from multipolar_hardy import PoleConfig, QuadratureSpec, WeightSpec


@pytest.fixture
def two_poles_n3() -> PoleConfig:
    """The canonical N = 3 instance: poles at the origin and 2 e1."""
    return PoleConfig(dim=3, poles=np.array([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0]]))


@pytest.fixture
def three_poles_n4() -> PoleConfig:
    """An asymmetric N = 4 instance with three poles."""
    poles = np.array(
        [
            [0.0, 0.0, 0.0, 0.0],
            [1.8, 0.3, 0.0, 0.0],
            [-0.4, 1.5, 0.7, 0.0],
        ]
    )
    return PoleConfig(dim=4, poles=poles)


@pytest.fixture
def unit_weight() -> WeightSpec:
    return WeightSpec.unit()


@pytest.fixture
def power_weight() -> WeightSpec:
    """Pure-power product weight with gamma = 1/2."""
    return WeightSpec.polyexp(gamma=0.5)


@pytest.fixture
def lean_spec() -> QuadratureSpec:
    """Cheap discretization for invariant and smoke checks."""
    return QuadratureSpec(
        pole_radius=0.9,
        far_radius=6.0,
        radial_levels=20,
        mc_samples=60_000,
        seed=1234,
    )


@pytest.fixture
def borderline_spec() -> QuadratureSpec:
    """Deep radial grading for borderline (truncated) integrands."""
    return QuadratureSpec(
        pole_radius=0.9,
        far_radius=6.0,
        radial_levels=36,
        mc_samples=100_000,
        seed=1234,
    )
