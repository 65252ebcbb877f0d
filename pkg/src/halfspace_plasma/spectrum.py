"""Discrete spectrum: index of G, mode counting, the curve L and the zero eta0.

``G(mu) = lambda+(mu) / lambda-(mu)`` on ``[0, 1]``.  Its index ``kappa``
counts the turns of the closed curve ``G([0, 1])`` about the origin, and
the number of zeros of ``lambda`` in the cut plane is ``2 kappa``.  The
zeros come in a pair ``+-eta0``; we return the one with positive real
part.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import dispersion as disp
from .dispersion import PlasmaParameters
from .errors import ContourError, ConvergenceError, NearLError, ResonanceError, ValidationError
from .numerics import QuadratureSpec, complex_newton, integrate, trace_argument

log = logging.getLogger(__name__)

NEAR_L_G = 1e-6
NEAR_L_LAMBDA = 1e-8
ZERO_TOL = 1e-10
D_PLUS, D_MINUS, NEAR_L, ANOMALOUS = "D_plus", "D_minus", "near_L", "anomalous"

# mu* where lambda_c changes sign on (0, 1); the curve L lives on (mu*, 1)
_MU_EDGE = 1.0 - 1e-12


@dataclass(frozen=True)
class GDecomposition:
    mu: float
    g: float
    g1: float
    g2: float
    s: float

    @property
    def G(self) -> complex:
        return complex(self.g1, self.g2) / self.g


@dataclass(frozen=True)
class SpectrumClassification:
    kappa: int | None
    n_zeros: int | None
    eta0: complex | None
    region: str

    @property
    def has_debye(self) -> bool:
        return self.eta0 is not None


@dataclass(frozen=True)
class LCurvePoint:
    mu: float
    gamma: float
    eps: float


@dataclass(frozen=True)
class LCurve:
    points: list
    skipped: list = field(default_factory=list)


# ---------------------------------------------------------------- G and its parts

def _pq(mu, p):
    mu = np.asarray(mu, dtype=float)
    lc = disp._case_lambda_cut(mu)
    s = 0.5 * np.pi * mu
    og, e = 1.0 + p.gamma, p.eps
    r = e * e - 3.0 * mu * mu
    base_p = og * og - lc * r
    base_q = e * og * (1.0 + lc)
    return base_p + e * og * s, base_p - e * og * s, base_q + s * r, base_q - s * r, s


def _g_parts(mu, p):
    pp, pm, qp, qm, s = _pq(mu, p)
    return pp * pp + qp * qp, pp * pm + qp * qm, pp * qm - pm * qp, s


def g_decompose(mu: float, p: PlasmaParameters) -> GDecomposition:
    """Real and imaginary parts of ``G(mu) = (g1 + i g2) / g``."""
    mu = float(mu)
    if not 0.0 < mu < 1.0:
        raise ValidationError("mu", f"must lie in (0, 1), got {mu}")
    g, g1, g2, s = (float(v) for v in _g_parts(mu, p))
    # |lambda-| = sqrt(g) / |3c|
    if math.sqrt(g) / abs(3.0 * p.c) < NEAR_L_LAMBDA * abs(disp.lambda_infinity(p)):
        raise ResonanceError(f"lambda- vanishes at mu={mu}")
    return GDecomposition(mu, g, g1, g2, s)


def _g_ratio(mu, p):
    """G on [0, 1] with the exact endpoint values G(0) = G(1) = 1."""
    mu = np.asarray(mu, dtype=float)
    out = np.ones(mu.shape, dtype=complex)
    inner = (mu > 0.0) & (mu < 1.0)
    lp, lm = disp._lam_pm(mu[inner], p)
    out[inner] = lp / lm
    return out


def _g_nodes():
    head = np.linspace(0.0, 0.98, 99)
    tail = 1.0 - np.geomspace(0.02, 1e-14, 60)
    return np.concatenate([head, tail, [1.0]])


def _trace_g(p, threshold=NEAR_L_G):
    try:
        trace = trace_argument(lambda t: _g_ratio(t, p), _g_nodes())
    except ContourError as exc:
        raise NearLError(f"G path unresolved for gamma={p.gamma}, eps={p.eps}: {exc}") from exc
    inner = trace.values[1:-1]
    lp, lm = disp._lam_pm(trace.t[1:-1], p)
    floor = NEAR_L_LAMBDA * abs(disp.lambda_infinity(p))
    if np.min(np.abs(inner)) < threshold or min(np.min(np.abs(lp)), np.min(np.abs(lm))) < floor:
        raise NearLError(f"(gamma, eps) = ({p.gamma}, {p.eps}) lies in the band around L")
    return trace


def winding_index(p: PlasmaParameters, threshold: float = NEAR_L_G) -> int:
    """Index ``kappa`` of ``G`` on ``[0, 1]`` by continuous argument tracking."""
    trace = _trace_g(p, threshold)
    turns = trace.turns
    n = round(turns)
    if abs(turns - n) > 1e-6:
        raise ContourError(f"non-integer index {turns}")
    return int(n)


# ---------------------------------------------------------------- contour count

def _contour_radius(p, radius):
    li, l2, _ = disp.laurent_head(p)
    return max(float(radius), 2.0 * math.sqrt(abs(l2 / li)), 2.0)


def _circle_turns(fn, center, r):
    t = np.linspace(0.0, 1.0, 129)
    trace = trace_argument(lambda s: fn(center + r * np.exp(2j * np.pi * s)), t)
    return trace.turns


def _stadium_turns(p, d):
    """Turns of lambda along a counter-clockwise stadium at distance d around [-1, 1]."""

    def path(t):
        t = np.asarray(t, dtype=float)
        z = np.empty(t.shape, dtype=complex)
        seg = np.floor(np.clip(t, 0.0, 3.999999999999)).astype(int)
        u = t - seg
        x = np.cos(np.pi * u)  # 1 -> -1, graded at the ends
        z[seg == 0] = x[seg == 0] + 1j * d
        a = 0.5 * np.pi + np.pi * u
        z[seg == 1] = -1.0 + d * np.exp(1j * a[seg == 1])
        z[seg == 2] = -x[seg == 2] - 1j * d
        z[seg == 3] = 1.0 + d * np.exp(1j * (a[seg == 3] + np.pi))
        z[t >= 4.0] = 1.0 + 1j * d
        return disp._lam_offcut(z, p)

    t = np.concatenate([np.linspace(k, k + 1, 401)[:-1] for k in range(4)] + [[4.0]])
    return trace_argument(path, t).turns


def contour_zero_count(p: PlasmaParameters, radius: float = 10.0, cut_offset: float = 1e-9) -> int:
    """Zeros of ``lambda`` in the cut plane by the argument principle.

    The contour is the circle ``|z| = radius`` (enlarged if the Laurent
    head suggests zeros further out) minus a thin stadium around the cut.
    """
    if radius <= 1.0:
        raise ValidationError("radius", "must exceed 1")
    r = _contour_radius(p, radius)
    fn = lambda z: disp._lam_offcut(z, p)  # noqa: E731
    min_mod = NEAR_L_LAMBDA * abs(disp.lambda_infinity(p))
    raw = _circle_turns(fn, 0.0, r) - _stadium_turns(p, cut_offset)
    ring = fn(r * np.exp(2j * np.pi * np.linspace(0, 1, 257)))
    if np.min(np.abs(ring)) < min_mod:
        raise ContourError("contour passes too close to a zero")
    n = round(raw)
    if abs(raw - n) >= 0.01:
        raise ContourError(f"non-integer zero count {raw:.6f}")
    return int(n)


def small_circle_count(p: PlasmaParameters, center: complex, radius: float | None = None) -> int:
    """Zeros of ``lambda`` inside a small circle that stays clear of the cut."""
    center = complex(center)
    if radius is None:
        x = min(max(center.real, -1.0), 1.0)
        gap = abs(center - x)
        radius = min(0.5 * gap, 0.25 * abs(center), 0.05)
    if radius <= 0:
        raise ContourError("centre lies on the cut")
    return round(_circle_turns(lambda z: disp._lam_offcut(z, p), center, radius))


# ---------------------------------------------------------------- curve L

def _mu_star():
    lo, hi = 0.5, 0.99
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if disp._case_lambda_cut(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


MU_STAR = _mu_star()


def default_l_grid(n: int = 400) -> np.ndarray:
    """Ascending grid on (mu*, 1), geometric towards both ends.

    Near ``mu*`` the curve runs off to infinity and near 1 the parameter
    ``eps`` goes to zero logarithmically, so the points are clustered there.
    """
    n_lo = n // 2
    lo = MU_STAR + np.geomspace(1e-3, 0.95 - MU_STAR, n_lo)
    hi = 1.0 - np.geomspace(0.05, 1e-12, n - n_lo)
    return np.concatenate([lo, hi])


def _l_radicands(mu):
    lc = disp._case_lambda_cut(mu)
    s = 0.5 * np.pi * mu
    den = lc * (s * s + (1.0 + lc) ** 2)
    l2 = -3.0 * mu * mu * s * s / den
    l1 = -3.0 * mu * mu * (s * s + lc * (1.0 + lc)) ** 2 / den
    return l1, l2


def l_curve(mu_grid=None) -> LCurve:
    """Trace ``L``: ``gamma = -1 + sqrt(L1)``, ``eps = sqrt(L2)``.

    Grid values outside (0, 1) or with a negative radicand are skipped and
    listed in ``skipped``.
    """
    grid = default_l_grid() if mu_grid is None else np.asarray(mu_grid, dtype=float).ravel()
    points, skipped = [], []
    for mu in grid:
        mu = float(mu)
        if not 0.0 < mu < 1.0:
            skipped.append(mu)
            continue
        l1, l2 = _l_radicands(mu)
        if not (l1 >= 0 and l2 > 0 and math.isfinite(l1) and math.isfinite(l2)):
            skipped.append(mu)
            continue
        points.append(LCurvePoint(mu, -1.0 + math.sqrt(l1), math.sqrt(l2)))
    return LCurve(points, skipped)


# ---------------------------------------------------------------- eta0

def _laurent_seed(p):
    li, l2, _ = disp.laurent_head(p)
    z = complex(np.sqrt(-l2 / li))
    return z if z.real >= 0 else -z


def _moment_seed(p, kappa=1):
    """eta0^2 from the second moment of the zeros (argument principle).

    ``eta0^2 = -lambda_2/lambda_inf + kappa - (1/(pi i)) int_0^1 mu ln G dmu``
    with the branch of ``ln G`` that vanishes at ``mu = 0``.
    """
    trace = _trace_g(p)
    li, l2, _ = disp.laurent_head(p)

    def integrand(mu):
        v = _g_ratio(mu, p)
        return mu * (np.log(np.abs(v)) + 1j * trace.arg_at(mu, v))

    spec = QuadratureSpec(rel_tol=1e-12, abs_tol=1e-14, endpoint_mode="log_refined")
    moment = integrate(integrand, 0.0, 1.0, spec)
    sq = -l2 / li + kappa - moment / (1j * np.pi)
    return sq


def _polish(p, seed):
    li = abs(disp.lambda_infinity(p))
    f = lambda z: disp._lam_offcut(np.asarray(z, dtype=complex), p)[()]  # noqa: E731
    fp = lambda z: disp._lam_prime_offcut(np.asarray(z, dtype=complex), p)[()]  # noqa: E731
    try:
        z = complex_newton(f, fp, seed, tol=1e-13 * li, max_iter=60)
    except ConvergenceError as exc:
        if exc.estimate is None or exc.error is None or exc.error > ZERO_TOL * li:
            raise
        z = exc.estimate
    z = complex(z)
    if z.real < 0:
        z = -z
    if z.imag == 0 and abs(z.real) <= 1.0:
        raise ConvergenceError("Newton landed on the cut", estimate=z)
    if abs(f(z)) > ZERO_TOL * li:
        raise ConvergenceError("zero not attained", estimate=z, error=abs(f(z)))
    return z


def find_eta0(p: PlasmaParameters, method: str = "auto", *, kappa: int | None = None) -> complex:
    """Zero ``eta0`` of ``lambda`` with ``Re eta0 > 0`` (region D+ only).

    ``method`` is ``"laurent"`` (Newton from the root of the two-term
    Laurent truncation), ``"moment"`` (Newton from the moment formula) or
    ``"auto"`` (Laurent first, moment on failure).  The result is
    confirmed by a small-circle zero count of 1.
    """
    if method not in ("auto", "laurent", "moment"):
        raise ValidationError("method", f"unknown method {method!r}")
    if kappa is None:
        kappa = winding_index(p)
    if kappa != 1:
        raise ValidationError("gamma/eps", f"parameters are not in D+ (kappa = {kappa})")

    def confirmed(z):
        if small_circle_count(p, z) != 1:
            raise ConvergenceError("small-circle count around the zero is not 1", estimate=z)
        return z

    if method in ("auto", "laurent"):
        try:
            return confirmed(_polish(p, _laurent_seed(p)))
        except (ConvergenceError, ContourError) as exc:
            if method == "laurent":
                raise
            log.debug("Laurent seed failed (%s); using the moment seed", exc)
    sq = _moment_seed(p, kappa)
    z = complex(np.sqrt(sq))
    return confirmed(_polish(p, z if z.real >= 0 else -z))


def classify(p: PlasmaParameters) -> SpectrumClassification:
    """Region of ``(gamma, eps)``: D+ (one Debye pair), D- (none) or near L."""
    try:
        kappa = winding_index(p)
    except NearLError:
        return SpectrumClassification(None, None, None, NEAR_L)
    if kappa == 0:
        return SpectrumClassification(0, 0, None, D_MINUS)
    if kappa == 1:
        return SpectrumClassification(1, 2, find_eta0(p, kappa=1), D_PLUS)
    log.warning("index %d outside {0, 1} at gamma=%g eps=%g", kappa, p.gamma, p.eps)
    return SpectrumClassification(kappa, 2 * kappa, None, ANOMALOUS)
