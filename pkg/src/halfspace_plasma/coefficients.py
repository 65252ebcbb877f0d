"""Expansion coefficients of the boundary-value problem.

The solution is a Drude part ``E_inf``, a Debye part ``E0`` (D+ only)
and a continuous density ``E(eta)`` on ``(0, 1)``.  All of them follow in
closed form from ``z0*A1``, which is fixed by the accommodation condition.
``solve_all`` assembles everything and checks it against the defining
linear system:

* pole elimination at ``z = eta0``:
  ``z0A1 ((2/3)T(eta0) - lambda_inf eta0) = E0 lambda'(eta0)(eta1^2 - eta0^2) - 2 E_inf lambda_inf eta0``
* field condition: ``E_inf + E0 + int_0^1 E = e0``
* accommodation condition, multiplied through by ``alpha_p``:
  ``alpha_p (E_inf/36 + E0 m(eta0) + int_0^1 m E) + (1 - alpha_p) z0A1 / 36 = 0``
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import dispersion as disp
from . import spectrum as spec_mod
from .dispersion import ENDPOINT_GUARD, PlasmaParameters
from .errors import ConvergenceError, CutError, EndpointError, NearLError, ResidualError, ResonanceError
from .numerics import QuadratureSpec, integrate
from .spectrum import SpectrumClassification

RESIDUAL_LIMIT = 1e-6
_RESONANCE = 1e-12
LOG_SPEC = QuadratureSpec(rel_tol=1e-11, abs_tol=1e-14, endpoint_mode="log_refined")


# ---------------------------------------------------------------- m functions

_MK = np.arange(2, 42)
_M_SERIES = -1.0 / (_MK + 2) + 2.0 / (3.0 * (_MK + 1))


def _m_off(z, p):
    z = complex(z)
    if abs(z) >= 4.0:
        w = 1.0 / z
        bracket = sum(c * w**k for c, k in zip(_M_SERIES[::-1], _MK[::-1]))
    else:
        bracket = (-1.0 / 6.0 + z) + (z * z - 2.0 * z / 3.0) * np.log(1.0 - 1.0 / z)
    return (p.eta1_sq - z * z) * bracket


def m_discrete(p: PlasmaParameters, eta0: complex, sign: int = 1) -> complex:
    """``m(+-eta0) = int_0^1 (mu^2 - 2mu/3)(mu z - eta1^2)/(z - mu) dmu`` at ``z = +-eta0``."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    z = sign * complex(eta0)
    if z.imag == 0 and 0.0 <= z.real <= 1.0:
        raise CutError(f"m is evaluated off [0, 1] only, got {z}")
    return complex(_m_off(z, p))


def _m_cont(eta, p):
    eta = np.asarray(eta, dtype=float)
    a = np.abs(eta)
    f = np.log1p(1.0 / a)
    base = (eta * eta - p.eta1_sq) * (1.0 / 6.0 - eta - (eta * eta - 2.0 * eta / 3.0) * f)
    return base + np.where(eta > 0, 2.0 * (eta * eta - p.c) * (eta - 2.0 / 3.0), 0.0)


def m_continuum(eta, p: PlasmaParameters):
    """``m(eta)`` for real ``eta`` in ``(-1, 1)`` without 0.

    For ``eta > 0`` the integral is a principal value plus the delta term
    of the continuous eigenfunction.
    """
    arr = np.asarray(eta, dtype=float)
    if np.any((np.abs(arr) < ENDPOINT_GUARD) | (np.abs(arr) > 1.0 - ENDPOINT_GUARD)):
        raise EndpointError("m(eta) needs 0 < |eta| < 1")
    out = _m_cont(arr, p)
    return out[()] if arr.ndim == 0 else out


# ---------------------------------------------------------------- residue factors

def lambda_prime_fd(z: complex, p: PlasmaParameters, rel_step: float = 1e-2) -> complex:
    """Five-point finite-difference derivative of ``lambda`` (cross-check only).

    The step is a fraction of the distance to the nearest singular set
    (the cut and its endpoints), capped by ``|z|``.
    """
    z = complex(z)
    gap = min(abs(z - min(max(z.real, -1.0), 1.0)), abs(z - 1.0), abs(z + 1.0))
    h = rel_step * min(max(abs(z), 1e-3), gap)
    pts = z + h * np.array([-2.0, -1.0, 1.0, 2.0])
    v = disp._lam_offcut(pts, p)
    return complex((v[0] - 8.0 * v[1] + 8.0 * v[2] - v[3]) / (12.0 * h))


def ab_factors(eta0: complex, p: PlasmaParameters):
    """``a = eta0 / (lambda'(eta0)(eta0^2 - eta1^2))`` and ``b = T(eta0)/(...)``."""
    eta0 = complex(eta0)
    dl = complex(disp.lambda_prime(eta0, p))
    if abs(dl) < _RESONANCE * abs(disp.lambda_infinity(p)):
        raise ResonanceError(f"lambda'(eta0) = {dl}: zero is not simple")
    fd = lambda_prime_fd(eta0, p)
    if abs(fd - dl) > 1e-6 * abs(dl):
        raise ConvergenceError(f"derivative cross-check failed: {dl} vs {fd}")
    den = dl * (eta0 * eta0 - p.eta1_sq)
    return eta0 / den, complex(disp.t_func(eta0, p)) / den


def _lambda_1(p):
    l1 = disp.lambda_eta1(p)
    if abs(l1) < _RESONANCE:
        raise ResonanceError("lambda(eta1) vanishes (gamma = -1)")
    return l1


def j_integrals(p: PlasmaParameters, eta0: complex | None = None):
    """Residue forms of ``J1`` and ``J2``; the ``eta0`` terms appear only in D+."""
    l1 = _lambda_1(p)
    j1 = -1.0 / disp.lambda_infinity(p) + 1.0 / l1
    j2 = 1.0 / (2.0 * l1 * p.c)
    if eta0 is not None:
        a, b = ab_factors(eta0, p)
        j1 += 2.0 * a
        j2 += 2.0 * b
    return j1, j2


def _pm_product(eta, p):
    lp, lm = disp._lam_pm(eta, p)
    return lp * lm


def p_integrals(p: PlasmaParameters, qspec: QuadratureSpec = LOG_SPEC):
    """``P1 = (1/c) int eta^2 m / (lambda+ lambda-)`` and ``P2`` with ``eta T2 m``."""

    def integrand(eta):
        eta = np.asarray(eta, dtype=float)
        w = _m_cont(eta, p) / _pm_product(eta, p)
        return np.stack([eta * eta * w, eta * disp._t2(eta, p) * w])

    vals = integrate(integrand, 0.0, 1.0, qspec)
    return complex(vals[0] / p.c), complex(vals[1] / p.c)


# ---------------------------------------------------------------- coefficients

@dataclass(frozen=True)
class Auxiliaries:
    lambda_inf: complex
    lambda_1: complex
    eta0: complex | None
    m_eta0: complex
    a: complex
    b: complex
    p1: complex
    p2: complex


def auxiliaries(p: PlasmaParameters, s: SpectrumClassification, qspec: QuadratureSpec = LOG_SPEC) -> Auxiliaries:
    if s.region not in (spec_mod.D_PLUS, spec_mod.D_MINUS):
        raise NearLError(f"no coefficient formulas in region {s.region}")
    p1, p2 = p_integrals(p, qspec)
    if s.eta0 is not None:
        a, b = ab_factors(s.eta0, p)
        m0 = m_discrete(p, s.eta0, 1)
    else:
        a = b = m0 = 0j
    return Auxiliaries(disp.lambda_infinity(p), _lambda_1(p), s.eta0, m0, a, b, p1, p2)


def e_infty_coeff(p: PlasmaParameters) -> complex:
    """Drude amplitude ``E_inf = e0 lambda(eta1) / lambda_inf``."""
    return p.e0 * disp.lambda_eta1(p) / disp.lambda_infinity(p)


def a1_constant(p: PlasmaParameters, s: SpectrumClassification, aux: Auxiliaries) -> complex:
    """``z0*A1`` from the accommodation condition; zero for specular walls."""
    if p.alpha_p == 0.0:
        return 0j
    li = aux.lambda_inf
    num = 2.0 * aux.a * aux.m_eta0 - 1.0 / (36.0 * li) - aux.p1
    den = (li * aux.a - 2.0 * aux.b / 3.0) * aux.m_eta0 + aux.p2 / 3.0 - li * aux.p1 / 2.0
    den += (1.0 - p.alpha_p) / (36.0 * p.alpha_p)
    if abs(den) < _RESONANCE:
        raise ResonanceError(f"accommodation denominator vanishes ({den})")
    return p.e0 * aux.lambda_1 * num / den


def e_debye_coeff(p: PlasmaParameters, eta0: complex | None, z0a1: complex, e_infty: complex | None = None) -> complex:
    """Debye amplitude ``E0 = -2 e0 lambda_1 a - z0A1 ((2/3) b - lambda_inf a)``; zero in D-."""
    if eta0 is None:
        return 0j
    a, b = ab_factors(eta0, p)
    li = disp.lambda_infinity(p)
    return -2.0 * p.e0 * disp.lambda_eta1(p) * a - z0a1 * (2.0 * b / 3.0 - li * a)


def e_debye_pole_form(p: PlasmaParameters, eta0: complex, z0a1: complex, e_infty: complex) -> complex:
    """Same amplitude solved directly from pole elimination at ``eta0``."""
    li = disp.lambda_infinity(p)
    num = (2.0 * e_infty - z0a1) * li * eta0 + 2.0 * z0a1 * complex(disp.t_func(eta0, p)) / 3.0
    return num / (complex(disp.lambda_prime(eta0, p)) * (p.eta1_sq - eta0 * eta0))


def _e_reduced(eta, p, c1, z0a1):
    eta = np.asarray(eta, dtype=float)
    return (c1 * eta * eta + 2.0 * z0a1 * eta * disp._t2(eta, p) / 3.0) / (2.0 * p.c * _pm_product(eta, p))


def _e_jump(eta, p, c1, z0a1):
    eta = np.asarray(eta, dtype=float)
    lp, lm = disp._lam_pm(eta, p)
    t, jt = disp._t_cut(eta, p), disp._t_jump(eta, p)
    body = 2.0 * z0a1 / 3.0 * ((t + jt) / lp - (t - jt) / lm) + c1 * eta * (1.0 / lp - 1.0 / lm)
    return body / (2j * np.pi * (eta * eta - p.eta1_sq))


def e_continuum(eta, p: PlasmaParameters, z0a1: complex, e_infty: complex, form: str = "reduced"):
    """Continuous-spectrum density ``E(eta)`` on ``(0, 1)``.

    ``form="jump"`` evaluates the Sokhotski jump of the Riemann solution
    directly; ``form="reduced"`` uses the real-axis simplification.
    """
    arr = np.asarray(eta, dtype=float)
    if np.any((arr < ENDPOINT_GUARD) | (arr > 1.0 - ENDPOINT_GUARD)):
        raise EndpointError("E(eta) needs eta inside (0, 1)")
    c1 = (2.0 * e_infty - z0a1) * disp.lambda_infinity(p)
    if form == "reduced":
        out = _e_reduced(arr, p, c1, z0a1)
    elif form == "jump":
        out = _e_jump(arr, p, c1, z0a1)
    else:
        raise ValueError(f"unknown form {form!r}")
    return out[()] if arr.ndim == 0 else out


@dataclass(frozen=True)
class ContinuumDensity:
    """``E(eta)`` as a callable plus a Gauss-Legendre table on ``(0, 1)``."""

    p: PlasmaParameters
    c1: complex
    z0a1: complex
    nodes: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    def __call__(self, eta):
        return _e_reduced(eta, self.p, self.c1, self.z0a1)


def _density_table(p, c1, z0a1, n=64):
    x, _ = np.polynomial.legendre.leggauss(n)
    nodes = 0.5 * (x + 1.0)
    return ContinuumDensity(p, c1, z0a1, nodes, _e_reduced(nodes, p, c1, z0a1))


@dataclass(frozen=True)
class SystemResiduals:
    pole: float
    field: float
    accommodation: float

    def as_tuple(self):
        return (self.pole, self.field, self.accommodation)

    @property
    def worst(self) -> float:
        return max(self.as_tuple())


@dataclass(frozen=True)
class CoefficientSet:
    params: PlasmaParameters
    classification: SpectrumClassification
    e_infty: complex
    e_debye: complex
    z0a1: complex
    a1: complex
    a0: complex
    c1: complex
    cont_density: ContinuumDensity = field(repr=False)
    aux: Auxiliaries = field(repr=False)
    residuals: SystemResiduals | None = None


def system_residuals(cs: CoefficientSet, qspec: QuadratureSpec = LOG_SPEC) -> SystemResiduals:
    """Residuals of the defining system, each scaled by the largest amplitude.

    Both integrals over ``E`` are computed by direct quadrature, so these
    checks are independent of the residue algebra behind the closed forms.
    """
    p, aux = cs.params, cs.aux
    scale = max(abs(p.e0), abs(cs.e_infty), abs(cs.e_debye), abs(cs.z0a1)) or 1.0
    li = aux.lambda_inf
    if aux.eta0 is not None:
        eta0 = aux.eta0
        lhs = cs.z0a1 * (2.0 * complex(disp.t_func(eta0, p)) / 3.0 - li * eta0)
        rhs = cs.e_debye * complex(disp.lambda_prime(eta0, p)) * (p.eta1_sq - eta0 * eta0)
        rhs -= 2.0 * cs.e_infty * li * eta0
        pole = abs(lhs - rhs) / (scale * max(1.0, abs(eta0)))
    else:
        pole = 0.0

    def integrand(eta):
        e = cs.cont_density(eta)
        return np.stack([e, _m_cont(eta, p) * e])

    int_e, int_me = integrate(integrand, 0.0, 1.0, qspec)
    field_res = abs(cs.e_infty + cs.e_debye + int_e - p.e0) / scale
    acc = p.alpha_p * (cs.e_infty / 36.0 + cs.e_debye * aux.m_eta0 + int_me)
    acc += (1.0 - p.alpha_p) * cs.z0a1 / 36.0
    return SystemResiduals(float(pole), float(field_res), float(abs(acc) / scale))


def solve_all(
    p: PlasmaParameters,
    s: SpectrumClassification | None = None,
    qspec: QuadratureSpec = LOG_SPEC,
    *,
    check: bool = True,
) -> CoefficientSet:
    """Classify, compute every coefficient and verify the defining system.

    Raises :class:`ResidualError` when ``check`` is set and a residual
    exceeds ``RESIDUAL_LIMIT``.
    """
    if s is None:
        s = spec_mod.classify(p)
    aux = auxiliaries(p, s, qspec)
    e_inf = e_infty_coeff(p)
    z0a1 = a1_constant(p, s, aux)
    e_deb = e_debye_coeff(p, s.eta0, z0a1, e_inf)
    c1 = (2.0 * e_inf - z0a1) * aux.lambda_inf
    a1 = z0a1 / p.z0
    cs = CoefficientSet(
        p, s, e_inf, e_deb, z0a1, a1, -2.0 * a1 / 3.0, c1, _density_table(p, c1, z0a1), aux
    )
    res = system_residuals(cs, qspec)
    cs = CoefficientSet(**{**cs.__dict__, "residuals": res})
    if check and res.worst > RESIDUAL_LIMIT:
        raise ResidualError(f"coefficient system not closed (worst residual {res.worst:.3g})", res)
    return cs
