"""Dispersion function of the half-space problem and its auxiliaries.

Conventions
-----------
* ``lambda_c`` (Case function) has its cut on ``[-1, 1]``; ``t0`` has its
  cut on ``[0, 1]``.  Every logarithm is the principal branch, with the
  argument arranged so that the branch cut coincides with the physical
  cut.
* A real argument strictly inside the cut is evaluated in principal-value
  form (the mean of the two boundary values).
* For ``|z| >= 4`` the Laurent series is summed directly; the closed forms
  lose digits to cancellation there.

Public functions accept scalars or numpy arrays.  They refuse to evaluate
within ``ENDPOINT_GUARD`` of a logarithmic endpoint.  The ``_``-prefixed
kernels skip that check and are used inside quadratures.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import CutError, EndpointError, ValidationError

ENDPOINT_GUARD = 1e-8
_SERIES_RADIUS = 4.0
_SERIES_TERMS = 40


@dataclass(frozen=True)
class PlasmaParameters:
    """Dimensionless inputs of the problem plus derived constants.

    ``gamma = omega/omega_p - 1`` and ``eps = nu/omega_p``.  ``alpha_p`` is
    the normal momentum accommodation coefficient and ``e0`` the field
    amplitude at the wall.
    """

    gamma: float
    eps: float
    alpha_p: float = 1.0
    e0: complex = 1.0 + 0.0j
    z0: complex = field(init=False, repr=False)
    eta1_sq: complex = field(init=False, repr=False)
    c: complex = field(init=False, repr=False)

    def __post_init__(self):
        for name in ("gamma", "eps", "alpha_p"):
            value = getattr(self, name)
            if isinstance(value, complex) or not math.isfinite(float(value)):
                raise ValidationError(name, f"must be a finite real number, got {value!r}")
            object.__setattr__(self, name, float(value))
        e0 = complex(self.e0)
        if not (math.isfinite(e0.real) and math.isfinite(e0.imag)):
            raise ValidationError("e0", "must be finite")
        object.__setattr__(self, "e0", e0)
        if self.eps <= 0:
            raise ValidationError("eps", f"must be > 0, got {self.eps}")
        if self.gamma < -1:
            raise ValidationError("gamma", f"must be >= -1, got {self.gamma}")
        if not 0 <= self.alpha_p <= 1:
            raise ValidationError("alpha_p", f"must lie in [0, 1], got {self.alpha_p}")
        one_g = 1.0 + self.gamma
        z0 = complex(1.0, -one_g / self.eps)
        eta1_sq = complex(self.eps**2 / 3.0, -self.eps * one_g / 3.0)
        object.__setattr__(self, "z0", z0)
        object.__setattr__(self, "eta1_sq", eta1_sq)
        object.__setattr__(self, "c", eta1_sq * z0)

    @property
    def eta1(self) -> complex:
        """Square root of ``eta1_sq`` with positive real part."""
        r = complex(np.sqrt(self.eta1_sq))
        return r if r.real >= 0 else -r

    def replace(self, **changes) -> "PlasmaParameters":
        return replace(self, **changes)


@dataclass(frozen=True)
class DispersionSample:
    z: complex
    value: complex
    lambda_plus: complex | None = None
    lambda_minus: complex | None = None


def _as_array(z, dtype=complex):
    arr = np.asarray(z, dtype=dtype)
    return arr, arr.ndim == 0


def _out(arr, scalar):
    return arr[()] if scalar else arr


def _check_endpoints(z, points=(-1.0, 1.0)):
    for pt in points:
        if np.any(np.abs(z - pt) < ENDPOINT_GUARD):
            raise EndpointError(f"evaluation within {ENDPOINT_GUARD:g} of the endpoint {pt:g}")


def _on_segment(z, lo, hi):
    return (np.imag(z) == 0) & (np.real(z) >= lo) & (np.real(z) <= hi)


# ---------------------------------------------------------------- kernels

def _horner(coeffs, w):
    acc = np.zeros_like(w)
    for a in coeffs[::-1]:
        acc = acc * w + a
    return acc


_K = np.arange(1, _SERIES_TERMS + 1)
# lambda_c(z) = -sum_k z^{-2k}/(2k+1)
_LC_SERIES = np.concatenate([[0.0], -1.0 / (2 * _K + 1)])


def _case_lambda_offcut(z):
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    big = np.abs(z) >= _SERIES_RADIUS
    zs = z[~big]
    out[~big] = 1.0 + 0.5 * zs * np.log((zs - 1.0) / (zs + 1.0))
    out[big] = _horner(_LC_SERIES, 1.0 / z[big] ** 2)
    return out


def _case_lambda_cut(mu):
    mu = np.asarray(mu, dtype=float)
    return 1.0 + 0.5 * mu * (np.log1p(-mu) - np.log1p(mu))


def _lam_series_coeffs(p):
    # lambda(z) = lambda_inf + (1/z0) sum_k a_k z^{-2k}
    a = 1.0 / ((2 * _K + 3) * p.eta1_sq) - 1.0 / (2 * _K + 1)
    return a


def _lam_offcut(z, p):
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    big = np.abs(z) >= _SERIES_RADIUS
    zs = z[~big]
    lc = _case_lambda_offcut(zs)
    out[~big] = 1.0 - 1.0 / p.z0 + (1.0 - zs * zs / p.eta1_sq) * lc / p.z0
    if np.any(big):
        w = 1.0 / z[big] ** 2
        coeffs = np.concatenate([[0.0], _lam_series_coeffs(p)])
        out[big] = lambda_infinity(p) + _horner(coeffs, w) / p.z0
    return out


def _lam_cut(mu, p):
    mu = np.asarray(mu, dtype=float)
    return 1.0 - 1.0 / p.z0 + (1.0 - mu * mu / p.eta1_sq) * _case_lambda_cut(mu) / p.z0


def _jump(mu, p):
    """Half the jump of lambda across the cut: i*pi*mu*(eta1^2 - mu^2)/(2c)."""
    mu = np.asarray(mu, dtype=float)
    return 1j * np.pi * mu * (p.eta1_sq - mu * mu) / (2.0 * p.c)


def _lam_pm(mu, p):
    base = _lam_cut(mu, p)
    j = _jump(mu, p)
    return base + j, base - j


def _lam_prime_offcut(z, p):
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    big = np.abs(z) >= _SERIES_RADIUS
    zs = z[~big]
    lc = _case_lambda_offcut(zs)
    dlc = 0.5 * np.log((zs - 1.0) / (zs + 1.0)) + zs / (zs * zs - 1.0)
    out[~big] = (-2.0 * zs / p.eta1_sq * lc + (1.0 - zs * zs / p.eta1_sq) * dlc) / p.z0
    if np.any(big):
        zb = z[big]
        w = 1.0 / zb**2
        a = _lam_series_coeffs(p)
        coeffs = np.concatenate([[0.0], -2.0 * _K * a])
        out[big] = _horner(coeffs, w) / zb / p.z0
    return out


_T0_K = np.arange(_SERIES_TERMS)


def _t0(z, p):
    """(1/2c) int_0^1 (eta^2 - eta1^2)/(eta - z) d eta, cut on [0, 1]."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    big = np.abs(z) >= _SERIES_RADIUS
    zs = z[~big]
    out[~big] = (0.5 + zs + (zs * zs - p.eta1_sq) * np.log(1.0 - 1.0 / zs)) / (2.0 * p.c)
    if np.any(big):
        w = 1.0 / z[big]
        coeffs = np.concatenate([[0.0], -(1.0 / (_T0_K + 3) - p.eta1_sq / (_T0_K + 1))])
        out[big] = _horner(coeffs, w) / (2.0 * p.c)
    return out


def _t_cut(eta, p):
    eta = np.asarray(eta, dtype=float)
    return eta / (2.0 * p.c) * (1.0 + (eta * eta - p.eta1_sq) * np.log(1.0 / (eta * eta) - 1.0))


def _t_offcut(z, p):
    z = np.asarray(z, dtype=complex)
    return z * (_t0(z, p) + _t0(-z, p))


def _t_jump(eta, p):
    """Half the jump of T across the cut: i*pi*eta*(eta^2 - eta1^2)*sign(eta)/(2c)."""
    eta = np.asarray(eta, dtype=float)
    return 1j * np.pi * eta * (eta * eta - p.eta1_sq) * np.sign(eta) / (2.0 * p.c)


def _t2(eta, p):
    """lambda(eta) + T(eta) = 1 + 2 eta T0(-eta) on (0, 1), explicit."""
    eta = np.asarray(eta, dtype=float)
    bracket = eta - 2.0 * eta * eta + 2.0 * eta * (eta * eta - p.eta1_sq) * np.log1p(1.0 / eta)
    return 1.0 + bracket / (2.0 * p.c)


# ---------------------------------------------------------------- public API

def case_lambda(z):
    """Case dispersion function ``1 + (z/2) int_{-1}^{1} dt/(t - z)``.

    Principal-value form for real ``z`` inside ``(-1, 1)``.
    """
    arr, scalar = _as_array(z)
    _check_endpoints(arr)
    on_cut = _on_segment(arr, -1.0, 1.0)
    out = np.empty_like(arr)
    out[on_cut] = _case_lambda_cut(arr[on_cut].real)
    out[~on_cut] = _case_lambda_offcut(arr[~on_cut])
    return _out(out, scalar)


def lambda_infinity(p: PlasmaParameters) -> complex:
    return 1.0 - 1.0 / p.z0 + 1.0 / (3.0 * p.c)


def lambda_eta1(p: PlasmaParameters) -> complex:
    """``lambda(eta1)``; the ``lambda_c`` factor is multiplied by zero there."""
    return 1.0 - 1.0 / p.z0


def lam(z, p: PlasmaParameters):
    """Dispersion function ``lambda(z)`` of the problem.

    Off the cut this is the analytic function; for real ``z`` in
    ``(-1, 1)`` the principal-value value ``(lambda+ + lambda-)/2``.
    """
    arr, scalar = _as_array(z)
    _check_endpoints(arr)
    on_cut = _on_segment(arr, -1.0, 1.0)
    out = np.empty_like(arr)
    out[on_cut] = _lam_cut(arr[on_cut].real, p)
    out[~on_cut] = _lam_offcut(arr[~on_cut], p)
    return _out(out, scalar)


def lambda_boundary(mu, p: PlasmaParameters):
    """Boundary values ``(lambda+, lambda-)`` from above and below the cut."""
    arr, scalar = _as_array(mu, dtype=float)
    if np.any(np.abs(arr) >= 1.0):
        raise EndpointError("boundary values exist only for |mu| < 1")
    _check_endpoints(arr)
    plus, minus = _lam_pm(arr, p)
    return _out(plus, scalar), _out(minus, scalar)


def lambda_prime(z, p: PlasmaParameters):
    """Analytic derivative of ``lambda`` off the cut."""
    arr, scalar = _as_array(z)
    _check_endpoints(arr)
    if np.any(_on_segment(arr, -1.0, 1.0)):
        raise CutError("lambda_prime is defined off the cut [-1, 1] only")
    return _out(_lam_prime_offcut(arr, p), scalar)


def laurent_head(p: PlasmaParameters):
    """First three Laurent coefficients ``(lambda_inf, lambda_2, lambda_4)``.

    Computed from ``z0``/``eta1^2`` and, independently, from ``(gamma, eps)``;
    the two must agree.
    """
    z0, e1 = p.z0, p.eta1_sq
    head = (
        1.0 - 1.0 / z0 + 1.0 / (3.0 * z0 * e1),
        -(1.0 / z0) * (1.0 / 3.0 - 1.0 / (5.0 * e1)),
        -(1.0 / z0) * (1.0 / 5.0 - 1.0 / (7.0 * e1)),
    )
    g, e = p.gamma, p.eps
    d = (1.0 + g + 1j * e) ** 2
    ie = 1j * e * (1.0 + g + 1j * e)
    alt = (
        (2.0 * g + 1j * e + g * (g + 1j * e)) / d,
        -(9.0 + 5.0 * ie) / (15.0 * d),
        -(15.0 + 7.0 * ie) / (35.0 * d),
    )
    for x, y in zip(head, alt):
        if abs(x - y) > 1e-12 * max(abs(x), abs(y), 1e-300):
            raise RuntimeError(f"Laurent coefficient forms disagree: {x} vs {y}")
    return head


def t0(z, p: PlasmaParameters):
    """``T0(z) = (1/2c) int_0^1 (eta^2 - eta1^2)/(eta - z) d eta`` off ``[0, 1]``."""
    arr, scalar = _as_array(z)
    _check_endpoints(arr, (0.0, 1.0))
    if np.any(_on_segment(arr, 0.0, 1.0)):
        raise CutError("t0 is analytic off [0, 1] only")
    return _out(_t0(arr, p), scalar)


def t_func(z, p: PlasmaParameters):
    """Auxiliary function ``T(z) = (1/2c) int mu (mu^2 - eta1^2) sign(mu)/(mu - z) d mu``.

    Principal-value closed form for real ``z`` inside the cut.
    """
    arr, scalar = _as_array(z)
    on_cut = _on_segment(arr, -1.0, 1.0)
    _check_endpoints(arr)
    if np.any(on_cut & (np.abs(arr) < ENDPOINT_GUARD)):
        raise EndpointError("T on the cut is undefined at 0")
    out = np.empty_like(arr)
    out[on_cut] = _t_cut(arr[on_cut].real, p)
    out[~on_cut] = _t_offcut(arr[~on_cut], p)
    return _out(out, scalar)


def lambda_plus_t(eta, p: PlasmaParameters):
    """``lambda(eta) + T(eta)`` on ``(0, 1)``, equal to ``T2(eta) = 1 + 2 eta T0(-eta)``."""
    arr, scalar = _as_array(eta, dtype=float)
    if np.any((arr < ENDPOINT_GUARD) | (arr > 1.0 - ENDPOINT_GUARD)):
        raise EndpointError("lambda_plus_t requires eta inside (0, 1)")
    return _out(_t2(arr, p), scalar)


def dispersion_sample(z, p: PlasmaParameters) -> DispersionSample:
    z = complex(z)
    value = complex(lam(z, p))
    if z.imag == 0 and abs(z.real) < 1:
        plus, minus = lambda_boundary(z.real, p)
        return DispersionSample(z, value, complex(plus), complex(minus))
    return DispersionSample(z, value)
