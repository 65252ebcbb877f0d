"""Physical quantities built from a solved coefficient set.

``e(x)`` is the electric field inside the plasma and ``h(0, mu)`` the
distribution function at the wall.  Every boundary condition is checked
on the reconstructed values rather than on the coefficient formulas.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import coefficients as coef
from . import dispersion as disp
from .coefficients import CoefficientSet
from .dispersion import PlasmaParameters
from .errors import ResonanceError, ValidationError
from .numerics import QuadratureSpec, integrate

FIELD_SPEC = QuadratureSpec(rel_tol=1e-10, abs_tol=1e-14, endpoint_mode="log_refined")
BOUNDARY_SPEC = QuadratureSpec(rel_tol=1e-10, abs_tol=1e-13, endpoint_mode="log_refined")
MU_GUARD = 1e-6
_BATCH = 48
_GL16 = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class FieldProfile:
    x_grid: np.ndarray
    e_values: np.ndarray
    e_infty: complex


@dataclass(frozen=True)
class BoundaryDistribution:
    mu_grid: np.ndarray
    h_values: np.ndarray
    weights: np.ndarray | None = None  # quadrature weights on mu_grid, if it is a rule


@dataclass(frozen=True)
class FluxReport:
    p_i: complex
    p_r: complex
    p_s: complex
    a_s_wall: complex
    alpha_measured: complex
    eq32_defect: complex  # P_i - P_r + A1/36, expected to vanish


@dataclass(frozen=True)
class ResidualReport:
    field_bc: float
    nonflow: float
    spec_accom: float
    accom_integral: float
    alpha_error: float
    system_residuals: tuple

    def failures(self, tol: float = 1e-6, alpha_tol: float = 1e-4) -> list:
        bad = [k for k in ("field_bc", "nonflow", "spec_accom", "accom_integral") if not getattr(self, k) <= tol]
        if not self.alpha_error <= alpha_tol:
            bad.append("alpha_error")
        bad += [f"system[{i}]" for i, r in enumerate(self.system_residuals) if not r <= tol]
        return bad

    def as_dict(self) -> dict:
        d = asdict(self)
        d["system_residuals"] = list(self.system_residuals)
        return d


# ---------------------------------------------------------------- field

def default_x_grid(n: int = 400, x_max: float = 40.0) -> np.ndarray:
    return np.concatenate([[0.0], np.geomspace(1e-4, x_max, n - 1)])


def field_profile(cs: CoefficientSet, x_grid=None, qspec: QuadratureSpec = FIELD_SPEC) -> FieldProfile:
    """``e(x) = E_inf + E0 exp(-z0 x/eta0) + int_0^1 exp(-z0 x/eta) E(eta) deta``."""
    x = default_x_grid() if x_grid is None else np.asarray(x_grid, dtype=float).ravel()
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValidationError("x_grid", "depths must be finite and >= 0")
    p = cs.params
    eta0 = cs.classification.eta0

    def integrand(eta):
        decay = np.exp(-p.z0 * x[:, None] / eta[None, :])
        return decay * cs.cont_density(eta)[None, :]

    cont = np.atleast_1d(integrate(integrand, 0.0, 1.0, qspec)) if x.size else np.zeros(0, complex)
    e = cs.e_infty + cont
    if eta0 is not None and cs.e_debye != 0:
        e = e + cs.e_debye * np.exp(-p.z0 * x / eta0)
    return FieldProfile(x, e, cs.e_infty)


def continuum_abs_integral(cs: CoefficientSet) -> float:
    """``int_0^1 |E(eta)| deta``, the constant in the continuum decay bound."""
    return float(integrate(lambda t: np.abs(cs.cont_density(t)), 0.0, 1.0, FIELD_SPEC).real)


def decay_bound(cs: CoefficientSet, x) -> np.ndarray:
    """Upper bound on ``|e(x) - E_inf|``.

    ``|exp(-z0 x/eta)| = exp(-x/eta) <= exp(-x)`` on the continuum since
    ``Re z0 = 1``; the Debye term decays at rate ``Re(z0/eta0)``.
    """
    x = np.asarray(x, dtype=float)
    bound = continuum_abs_integral(cs) * np.exp(-x)
    eta0 = cs.classification.eta0
    if eta0 is not None:
        rate = (cs.params.z0 / eta0).real
        if rate <= 0:
            raise ValueError("Debye term does not decay")
        bound = bound + abs(cs.e_debye) * np.exp(-rate * x)
    return bound


# ---------------------------------------------------------------- wall distribution

def _graded_edges(lo, hi, clusters, levels=14, ratio=0.35):
    """Panel edges on [lo, hi], geometrically graded towards each cluster point."""
    edges = [lo, hi, *np.linspace(lo, hi, 9)]
    for c in clusters:
        if lo <= c <= hi:
            edges.append(c)
            for k in range(1, levels + 1):
                step = (hi - lo) * ratio**k
                edges.extend([c - step, c + step])
    e = np.unique(np.clip(np.asarray(edges, dtype=float), lo, hi))
    return e[np.concatenate([[True], np.diff(e) > 1e-15])]


def default_mu_rule(cs: CoefficientSet | None = None):
    """Composite Gauss rule on ``[MU_GUARD, 1 - MU_GUARD]`` with graded panels.

    Panels are graded towards both ends and, in D+, towards ``Re eta0``
    when the Debye pole sits close to the real axis.  The slivers next to
    0 and 1 are folded into the outermost weights.  Returns positive
    nodes and weights; the negative half is the mirror image.
    """
    clusters = [MU_GUARD, 1.0 - MU_GUARD]
    if cs is not None and cs.classification.eta0 is not None:
        eta0 = cs.classification.eta0
        if 0.0 < eta0.real < 1.0 and abs(eta0.imag) < 0.1:
            clusters.append(eta0.real)
    edges = _graded_edges(MU_GUARD, 1.0 - MU_GUARD, clusters)
    x, w = _GL16
    a, b = edges[:-1, None], edges[1:, None]
    nodes = (0.5 * (a + b) + 0.5 * (b - a) * x).ravel()
    weights = (0.5 * (b - a) * w).ravel()
    weights[0] += MU_GUARD
    weights[-1] += MU_GUARD
    return nodes, weights


def _h_positive(mu, cs, qspec):
    """h(0, mu) for mu in (0, 1): principal value plus the delta term."""
    p = cs.params
    e_mu = cs.cont_density(mu)
    f_mu = (mu * mu - p.eta1_sq) * e_mu

    top = np.nextafter(1.0, 0.0)

    def integrand(t):
        # eta = mu t on [0, mu] and mu + (1 - mu) t on [mu, 1]; the offset
        # eta - mu is formed exactly so that rounding never yields 0/0
        m = mu[:, None]
        total = 0j
        for d, jac in ((-m * (1.0 - t[None, :]), m), ((1.0 - m) * t[None, :], 1.0 - m)):
            eta = np.minimum(m + d, top)
            f = (m * eta - p.eta1_sq) * cs.cont_density(eta.ravel()).reshape(eta.shape)
            safe = np.where(d == 0.0, 1.0, d)
            total = total + np.where(d == 0.0, 0.0, jac * (f - f_mu[:, None]) / safe)
        return total

    regular = np.atleast_1d(integrate(integrand, 0.0, 1.0, qspec))
    pv = regular + f_mu * np.log((1.0 - mu) / mu)
    delta = 2.0 * p.c * disp._lam_cut(mu, p) / mu * e_mu
    return pv - delta


def _h_negative(mu, cs, qspec):
    p = cs.params

    def integrand(eta):
        kern = (mu[:, None] * eta[None, :] - p.eta1_sq) / (eta[None, :] - mu[:, None])
        return kern * cs.cont_density(eta)[None, :]

    return np.atleast_1d(integrate(integrand, 0.0, 1.0, qspec))


def wall_distribution(mu, cs: CoefficientSet, qspec: QuadratureSpec = BOUNDARY_SPEC) -> np.ndarray:
    """``h(0, mu)`` at arbitrary ``mu`` in ``(-1, 1)`` away from 0 and +-1."""
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    if np.any((np.abs(mu) < MU_GUARD * 0.999) | (np.abs(mu) > 1.0 - MU_GUARD * 0.999)):
        raise ValidationError("mu_grid", f"values must keep {MU_GUARD:g} away from 0 and +-1")
    p = cs.params
    h = cs.e_infty * mu.astype(complex)
    eta0 = cs.classification.eta0
    if eta0 is not None:
        if np.min(np.abs(eta0 - mu)) < 1e-12:
            raise ResonanceError("mu coincides with the Debye pole")
        h = h + cs.e_debye * (eta0 * mu - p.eta1_sq) / (eta0 - mu)
    # batches bound the memory of the shared adaptive mesh
    for idx in np.array_split(np.arange(mu.size), max(1, -(-mu.size // _BATCH))):
        sub = mu[idx]
        pos = sub > 0
        part = np.zeros(sub.size, dtype=complex)
        if np.any(pos):
            part[pos] = _h_positive(sub[pos], cs, qspec)
        if np.any(~pos):
            part[~pos] = _h_negative(sub[~pos], cs, qspec)
        h[idx] += part
    return h / p.z0


def boundary_distribution(cs: CoefficientSet, mu_grid=None, qspec: QuadratureSpec = BOUNDARY_SPEC) -> BoundaryDistribution:
    """Wall distribution on a grid.

    Without ``mu_grid`` a symmetric composite Gauss rule is used and its
    weights are kept, so the flux integrals can reuse the same samples.
    """
    if mu_grid is None:
        nodes, weights = default_mu_rule(cs)
        mu = np.concatenate([-nodes[::-1], nodes])
        w = np.concatenate([weights[::-1], weights])
    else:
        mu = np.sort(np.asarray(mu_grid, dtype=float).ravel())
        w = None
    return BoundaryDistribution(mu, wall_distribution(mu, cs, qspec), w)


def _halves(bd: BoundaryDistribution):
    if bd.weights is None:
        raise ValidationError("mu_grid", "flux integrals need the default quadrature grid")
    neg = bd.mu_grid < 0
    return neg, ~neg


def nonflow_integral(bd: BoundaryDistribution) -> complex:
    return complex(np.sum(bd.weights * bd.mu_grid * bd.h_values))


def measure_accommodation(bd: BoundaryDistribution, cs: CoefficientSet) -> FluxReport:
    """Momentum fluxes at the wall and the accommodation coefficient they imply."""
    neg, pos = _halves(bd)
    mu, h, w = bd.mu_grid, bd.h_values, bd.weights
    p_i = complex(np.sum(w[neg] * mu[neg] ** 2 * h[neg]))
    p_r = complex(np.sum(w[pos] * mu[pos] ** 2 * h[pos]))
    a_s = 2.0 * complex(np.sum(w[pos] * mu[pos] * h[pos]))
    p_s = a_s / 3.0
    den = p_i - p_s
    if abs(den) < 1e-14 * max(np.max(np.abs(h)), 1e-300):
        raise ResonanceError("P_i - P_s vanishes; accommodation undefined")
    return FluxReport(p_i, p_r, p_s, a_s, (p_i - p_r) / den, p_i - p_r + cs.a1 / 36.0)


def specular_residual(bd: BoundaryDistribution, cs: CoefficientSet) -> float:
    """Sup over the positive nodes of ``|h(mu) - h(-mu) - A1 (mu - 2/3)|`` (needs a mirrored grid)."""
    neg, pos = _halves(bd)
    mu = bd.mu_grid[pos]
    h_pos, h_neg = bd.h_values[pos], bd.h_values[neg][::-1]
    return float(np.max(np.abs(h_pos - h_neg - cs.a1 * (mu - 2.0 / 3.0))))


# ---------------------------------------------------------------- discrete modes

def discrete_mode_fields(p: PlasmaParameters, eta0: complex | None, which: str, x, mu):
    """``(h, e)`` of the Drude or the Debye mode at depth ``x`` and direction ``mu``."""
    x = np.asarray(x, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if which == "drude":
        return mu / p.z0 + 0j * x, np.ones(np.broadcast(x, mu).shape, dtype=complex)
    if which == "debye":
        if eta0 is None:
            raise ValidationError("which", "the Debye mode exists only in D+")
        e = np.exp(-p.z0 * x / eta0)
        return e * (eta0 * mu - p.eta1_sq) / (p.z0 * (eta0 - mu)), e + 0j * mu
    raise ValidationError("which", f"unknown mode {which!r}")


# ---------------------------------------------------------------- full check

def verify_all(p: PlasmaParameters, cs: CoefficientSet | None = None) -> ResidualReport:
    """Solve and report every boundary-condition residual; never raises on bad residuals."""
    if cs is None:
        cs = coef.solve_all(p, check=False)
    e0 = field_profile(cs, [0.0]).e_values[0]
    field_bc = abs(e0 - p.e0) / (abs(p.e0) or 1.0)
    bd = boundary_distribution(cs)
    scale = float(np.max(np.abs(bd.h_values))) or 1.0
    nonflow = abs(nonflow_integral(bd)) / scale
    spec_acc = specular_residual(bd, cs) / scale
    _, pos = _halves(bd)
    mu, h, w = bd.mu_grid[pos], bd.h_values[pos], bd.weights[pos]
    acc = p.alpha_p * np.sum(w * (mu * mu - 2.0 * mu / 3.0) * h) + (1.0 - p.alpha_p) * cs.a1 / 36.0
    accom = abs(acc) / scale
    if p.e0 == 0:
        alpha_err = 0.0
    else:
        alpha_err = abs(measure_accommodation(bd, cs).alpha_measured - p.alpha_p)
    res = cs.residuals.as_tuple() if cs.residuals else (math.nan,) * 3
    return ResidualReport(float(field_bc), float(nonflow), float(spec_acc), float(accom), float(alpha_err), res)
