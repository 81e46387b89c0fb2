"""Test functions and energy functionals for the multipolar Hardy identity.

This module supplies the concrete test functions the identity is probed
with (smooth bumps, radial cutoffs, and the near-optimal singular family)
and computes the five energy integrals

    dirichlet = integral |grad phi|^2 dmu      v_mass = integral V phi^2 dmu
    w_mass    = integral W phi^2 dmu           l2_mass = integral phi^2 dmu
    remainder = integral |grad(phi/f)|^2 f^2 dmu

on shared quadrature nodes, together with the residual of the exact
integral identity

    dirichlet = remainder + c * v_mass - w_mass

that holds at the optimal exponent beta = (N + K_mu - 2)/n, and its
general-beta extension.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .config import HardyParams, PoleConfig, WeightSpec, validate_config
from .errors import ConfigError, EpsilonInadmissible, ZeroVMass
from .fields import (
    _as_batch,
    hardy_factor,
    potential_v,
    potential_w,
    weight_value,
)
from .quadrature import (
    Integrand,
    IntegralResult,
    QuadratureSpec,
    integrate_many,
    integrate_radial_annulus,
)

__all__ = [
    "GaussianBump",
    "CutoffTheta",
    "OptimalityPhi",
    "TestFunction",
    "EnergyReport",
    "energy_report",
    "identity_residual",
    "hardy_ratio",
    "beta_identity_check",
    "max_admissible_eps",
]


@dataclass(frozen=True, eq=False)
class GaussianBump:
    """Smooth strictly positive bump ``exp(-|x - center|^2 / (2 width^2))``.

    Parameters
    ----------
    center : array_like, shape (N,)
        Centre of the bump.
    width : float
        Length scale; must be positive.
    """

    center: np.ndarray
    width: float

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float)
        if center.ndim != 1:
            raise ConfigError(f"center must be a vector, got shape {center.shape}")
        if not self.width > 0:
            raise ConfigError(f"width must be positive, got {self.width}")
        center.flags.writeable = False
        object.__setattr__(self, "center", center)

    #: the bump never vanishes; integrals over its tail are handled by the
    #: quadrature module's unbounded-domain estimator.
    support_radius = None
    #: phi is bounded near the poles.
    pole_singularity = 0.0

    def value(self, x):
        pts, squeeze = _as_batch(x, self.center.shape[0])
        d = pts - self.center
        out = np.exp(-0.5 * np.einsum("ij,ij->i", d, d) / self.width**2)
        return out[0] if squeeze else out

    def gradient(self, x):
        pts, squeeze = _as_batch(x, self.center.shape[0])
        d = pts - self.center
        vals = np.exp(-0.5 * np.einsum("ij,ij->i", d, d) / self.width**2)
        out = -(d / self.width**2) * vals[:, None]
        return out[0] if squeeze else out


@dataclass(frozen=True)
class CutoffTheta:
    """Radial cutoff equal to 1 inside ``|x| <= R/eps``, 0 outside ``2R/eps``.

    On the transition annulus the profile is
    ``cos^2((pi/2) (eps |x| / R - 1))``, which is C^1 with gradient bounded
    by ``pi eps / (2 R)`` everywhere.

    Parameters
    ----------
    R : float
        Reference radius; the cutoff is identically 1 on the ball of
        radius ``R/eps``.
    eps : float
        Cutoff parameter in (0, 1]; smaller values push the transition
        annulus outward.
    """

    R: float
    eps: float

    def __post_init__(self):
        if not self.R > 0:
            raise ConfigError(f"R must be positive, got {self.R}")
        if not 0 < self.eps <= 1:
            raise EpsilonInadmissible(f"eps must lie in (0, 1], got {self.eps}")

    @property
    def support_radius(self) -> float:
        return 2.0 * self.R / self.eps

    pole_singularity = 0.0

    def _u(self, r):
        """Phase (pi/2)(eps r / R - 1), clipped to the transition annulus."""
        return 0.5 * math.pi * (self.eps * r / self.R - 1.0)

    def value(self, x):
        pts, squeeze = _as_batch(x, np.shape(x)[-1])
        r = np.linalg.norm(pts, axis=1)
        out = np.ones_like(r)
        out[r >= 2.0 * self.R / self.eps] = 0.0
        mid = (r > self.R / self.eps) & (r < 2.0 * self.R / self.eps)
        out[mid] = np.cos(self._u(r[mid])) ** 2
        return out[0] if squeeze else out

    def gradient(self, x):
        pts, squeeze = _as_batch(x, np.shape(x)[-1])
        r = np.linalg.norm(pts, axis=1)
        out = np.zeros_like(pts)
        mid = (r > self.R / self.eps) & (r < 2.0 * self.R / self.eps)
        if np.any(mid):
            slope = -0.5 * math.pi * self.eps / self.R
            dr = slope * np.sin(2.0 * self._u(r[mid]))
            out[mid] = (dr / r[mid])[:, None] * pts[mid]
        return out[0] if squeeze else out


@dataclass(frozen=True, eq=False)
class OptimalityPhi:
    """Near-optimal test function ``theta_eps * f`` for the sharpness limit.

    ``f`` is the product ``prod_i |x - a_i|^(-beta)``; the cutoff keeps the
    function compactly supported while leaving it untouched near the poles,
    so it is singular there exactly like ``f``.  As ``eps`` decreases the
    Hardy ratio of this function descends to the optimal constant.

    Parameters
    ----------
    cfg : PoleConfig
        Pole configuration the singular factor is built from.
    R : float
        Cutoff reference radius.
    eps : float
        Cutoff parameter; must satisfy ``eps <= min(1, R / (2 max_i |a_i|))``
        so that every pole lies well inside the region where the cutoff is
        identically 1.
    beta : float
        Singularity exponent of ``f``; must be positive.
    """

    cfg: PoleConfig
    R: float
    eps: float
    beta: float

    def __post_init__(self):
        if not self.beta > 0:
            raise ConfigError(f"beta must be positive, got {self.beta}")
        limit = max_admissible_eps(self.cfg, self.R)
        if not 0 < self.eps <= limit:
            raise EpsilonInadmissible(
                f"eps = {self.eps} outside (0, {limit:.6g}]; the cutoff "
                f"annulus must stay clear of the poles"
            )
        object.__setattr__(self, "_theta", CutoffTheta(self.R, self.eps))

    @property
    def support_radius(self) -> float:
        return 2.0 * self.R / self.eps

    @property
    def pole_singularity(self) -> float:
        return self.beta

    def value(self, x):
        f, _ = hardy_factor(x, self.cfg, self.beta)
        return self._theta.value(x) * f

    def gradient(self, x):
        pts, squeeze = _as_batch(x, self.cfg.dim)
        f, grad_ratio = hardy_factor(pts, self.cfg, self.beta)
        th = self._theta.value(pts)
        out = f[:, None] * (th[:, None] * grad_ratio + self._theta.gradient(pts))
        return out[0] if squeeze else out


#: Union of the supported test-function kinds.  All expose ``value``,
#: ``gradient``, ``support_radius`` and ``pole_singularity``.
TestFunction = GaussianBump | CutoffTheta | OptimalityPhi


def max_admissible_eps(cfg: PoleConfig, R: float) -> float:
    """Largest cutoff parameter keeping all poles inside the flat region.

    Returns ``min(1, R / (2 max_i |a_i|))``; for a single pole at the
    origin the geometric constraint is vacuous and the bound is 1.
    """
    if not R > 0:
        raise ConfigError(f"R must be positive, got {R}")
    biggest = float(np.max(np.linalg.norm(cfg.poles, axis=1)))
    if biggest == 0.0:
        return 1.0
    return min(1.0, R / (2.0 * biggest))


@dataclass(frozen=True)
class EnergyReport:
    """The five energy integrals of one test function, with error estimates.

    Attributes
    ----------
    dirichlet : IntegralResult
        ``integral |grad phi|^2 dmu``.
    v_mass : IntegralResult
        ``integral V phi^2 dmu``; zero when there is a single pole.
    w_mass : IntegralResult
        ``integral W phi^2 dmu``.
    l2_mass : IntegralResult
        ``integral phi^2 dmu``.
    remainder : IntegralResult
        ``integral |grad(phi/f)|^2 f^2 dmu``, the nonnegative defect that
        closes the integral identity.
    """

    dirichlet: IntegralResult
    v_mass: IntegralResult
    w_mass: IntegralResult
    l2_mass: IntegralResult
    remainder: IntegralResult


def _mass_integrands(phi, cfg, w, p, beta):
    """Dirichlet, V-, W-, and L2-mass integrands with pole exponents.

    The returned exponents are per-pole upper bounds on the integrand
    singularity: phi^2 contributes ``2 sigma`` (sigma = phi's singularity
    exponent), the gradient adds 2 when phi is singular, the potentials add
    2, and the weight adds gamma at every pole.
    """
    gamma = 0.0 if w.is_unit else w.gamma
    sigma = phi.pole_singularity
    n = cfg.n_poles
    w_params = dataclasses.replace(p, beta=beta)

    def mu(x):
        return weight_value(x, cfg, w)

    def phi2_mu(x):
        v = phi.value(x)
        return v * v * mu(x)

    def dirichlet(x):
        g = phi.gradient(x)
        return np.einsum("ij,ij->i", g, g) * mu(x)

    def v_mass(x):
        return potential_v(x, cfg) * phi2_mu(x)

    def w_mass(x):
        return potential_w(x, cfg, w, w_params) * phi2_mu(x)

    grad_exp = 2.0 * sigma + gamma + (2.0 if sigma > 0 else 0.0)
    funcs = [dirichlet, v_mass, w_mass, phi2_mu]
    exps = [
        [grad_exp] * n,
        [2.0 * sigma + 2.0 + gamma] * n,
        [2.0 * sigma + 2.0 + gamma] * n,
        [2.0 * sigma + gamma] * n,
    ]
    names = ["dirichlet", "v_mass", "w_mass", "l2_mass"]
    return funcs, exps, names, phi2_mu, mu


def energy_report(
    phi: TestFunction,
    cfg: PoleConfig,
    w: WeightSpec,
    p: HardyParams,
    spec: QuadratureSpec,
    *,
    allow_truncation: bool = False,
) -> EnergyReport:
    """Compute all five energy integrals of `phi` on shared nodes.

    The four mass integrals are evaluated by `integrate_many` over one
    common node set, so differences between them carry correlated rather
    than independent quadrature noise.  For `OptimalityPhi` the remainder
    integrand reduces analytically to ``|grad theta_eps|^2 f^2 mu``
    (because phi/f is the cutoff itself), which is supported on the cutoff
    annulus only and is integrated there by a deterministic product rule.

    Parameters
    ----------
    phi : TestFunction
        Test function to report on.
    cfg, w, p : PoleConfig, WeightSpec, HardyParams
        Pole geometry, weight, and derived constants (``p.beta`` is the
        exponent of the comparison factor ``f``).
    spec : QuadratureSpec
        Quadrature discretization.
    allow_truncation : bool, optional
        Permit borderline non-integrable singularities; the affected
        integrals are then reported over the truncated domain with their
        ``truncated`` flag set.

    Raises
    ------
    NonIntegrableSingularity
        If any integrand fails the local integrability check.
    """
    validate_config(cfg, w)
    funcs, exps, names, phi2_mu, mu = _mass_integrands(phi, cfg, w, p, p.beta)

    reduced = isinstance(phi, OptimalityPhi) and phi.beta == p.beta
    if not reduced:
        gamma = exps[1][0] - 2.0 * phi.pole_singularity - 2.0

        def general_remainder(x):
            g = phi.gradient(x)
            v = phi.value(x)
            _, grad_ratio = hardy_factor(x, cfg, p.beta)
            d = g - v[:, None] * grad_ratio
            return np.einsum("ij,ij->i", d, d) * mu(x)

        funcs.append(general_remainder)
        exps.append([2.0 * phi.pole_singularity + 2.0 + gamma] * cfg.n_poles)
        names.append("remainder")

    integrands = [
        Integrand(
            func=f,
            pole_exponents=e,
            support_radius=phi.support_radius,
            allow_truncation=allow_truncation,
            name=nm,
        )
        for f, e, nm in zip(funcs, exps, names)
    ]
    results = integrate_many(integrands, cfg, spec)

    if reduced:
        theta = phi._theta

        def annulus_remainder(x):
            g = theta.gradient(x)
            f, _ = hardy_factor(x, cfg, phi.beta)
            return np.einsum("ij,ij->i", g, g) * f * f * weight_value(x, cfg, w)

        rem = integrate_radial_annulus(
            annulus_remainder,
            cfg.dim,
            phi.R / phi.eps,
            2.0 * phi.R / phi.eps,
            radial_order=spec.radial_order,
        )
    else:
        rem = results[4]

    return EnergyReport(
        dirichlet=results[0],
        v_mass=results[1],
        w_mass=results[2],
        l2_mass=results[3],
        remainder=rem,
    )


def identity_residual(report: EnergyReport, p: HardyParams) -> float:
    """Normalized residual of the exact integral identity.

    At the optimal exponent the identity reads

        dirichlet = remainder + c * v_mass - w_mass,

    with ``c = p.c_n_mu``; the residual is the left-minus-right difference
    divided by ``max(dirichlet, 1)``.  It vanishes up to quadrature error
    for every admissible test function.
    """
    num = math.fsum(
        [
            report.dirichlet.value,
            -report.remainder.value,
            -p.c_n_mu * report.v_mass.value,
            report.w_mass.value,
        ]
    )
    return num / max(report.dirichlet.value, 1.0)


def hardy_ratio(report: EnergyReport) -> float:
    """Ratio ``(dirichlet + w_mass) / v_mass`` bounded below by ``c_n_mu``.

    Raises
    ------
    ZeroVMass
        If the V-mass is zero or indistinguishable from zero at three
        standard errors (in particular for single-pole configurations,
        where V vanishes identically).
    """
    v = report.v_mass
    if v.value <= 3.0 * v.stderr:
        raise ZeroVMass(
            f"v_mass = {v.value:.3e} +- {v.stderr:.3e} is not positive; "
            f"the Hardy ratio is undefined"
        )
    return (report.dirichlet.value + report.w_mass.value) / v.value


def beta_identity_check(
    phi: TestFunction,
    beta: float,
    cfg: PoleConfig,
    w: WeightSpec,
    p: HardyParams,
    spec: QuadratureSpec,
    *,
    allow_truncation: bool = False,
) -> float:
    """Residual of the general-exponent integral identity at `beta`.

    For any ``beta > 0`` the identity

        dirichlet = remainder_beta
                    + [beta (N + K_mu - 2) - n beta^2] * inv_sq_mass
                    + beta^2 * v_mass - w_mass(beta)

    holds, where ``remainder_beta`` uses the comparison factor with
    exponent `beta`, ``inv_sq_mass = integral sum_i |x-a_i|^-2 phi^2 dmu``
    and ``w_mass(beta)`` is the W-mass built with the same `beta`.  Returns
    the normalized left-minus-right residual; at
    ``beta = (N + K_mu - 2)/n`` the bracket vanishes and this reduces to
    `identity_residual`.

    Raises
    ------
    NonpositiveBeta
        If ``beta <= 0``.
    NonIntegrableSingularity
        If any integrand fails the local integrability check.
    """
    from .errors import NonpositiveBeta

    if not beta > 0:
        raise NonpositiveBeta(f"beta must be positive, got {beta}")
    validate_config(cfg, w)
    funcs, exps, names, phi2_mu, mu = _mass_integrands(phi, cfg, w, p, beta)
    gamma = exps[1][0] - 2.0 * phi.pole_singularity - 2.0

    def inv_sq_mass(x):
        pts, _ = _as_batch(x, cfg.dim)
        diffs = pts[:, None, :] - cfg.poles[None, :, :]
        inv = 1.0 / np.einsum("ipj,ipj->ip", diffs, diffs)
        return inv.sum(axis=1) * phi2_mu(pts)

    def remainder_beta(x):
        g = phi.gradient(x)
        v = phi.value(x)
        _, grad_ratio = hardy_factor(x, cfg, beta)
        d = g - v[:, None] * grad_ratio
        return np.einsum("ij,ij->i", d, d) * mu(x)

    funcs += [inv_sq_mass, remainder_beta]
    sig = phi.pole_singularity
    exps += [
        [2.0 * sig + 2.0 + gamma] * cfg.n_poles,
        [2.0 * sig + 2.0 + gamma] * cfg.n_poles,
    ]
    names += ["inv_sq_mass", "remainder"]

    integrands = [
        Integrand(
            func=f,
            pole_exponents=e,
            support_radius=phi.support_radius,
            allow_truncation=allow_truncation,
            name=nm,
        )
        for f, e, nm in zip(funcs, exps, names)
    ]
    dir_r, v_r, w_r, _, inv_r, rem_r = integrate_many(integrands, cfg, spec)

    coeff = beta * (cfg.dim + p.k_mu - 2.0) - cfg.n_poles * beta**2
    num = math.fsum(
        [
            dir_r.value,
            -rem_r.value,
            -coeff * inv_r.value,
            -(beta**2) * v_r.value,
            w_r.value,
        ]
    )
    return num / max(dir_r.value, 1.0)
