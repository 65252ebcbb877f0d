"""Shared numerical kernels: adaptive and principal-value quadrature,
damped complex Newton iteration and argument (winding) tracking.

All kernels are deterministic: refinement order depends only on the
inputs, and final sums are accumulated with :func:`math.fsum`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple

import numpy as np

from .errors import ConvergenceError, EndpointError, QuadratureError, ContourError

ENDPOINT_MODES = ("plain", "log_refined", "pv_subtraction")

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(15)
# geometric pre-splitting depth used by ``log_refined``
_LOG_LEVELS = 44


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_depth: int = 30
    endpoint_mode: str = "plain"

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("rel_tol and abs_tol must be positive")
        if int(self.max_depth) < 1:
            raise ValueError("max_depth must be >= 1")
        if self.endpoint_mode not in ENDPOINT_MODES:
            raise ValueError(f"unknown endpoint_mode {self.endpoint_mode!r}")

    def with_mode(self, mode):
        return replace(self, endpoint_mode=mode)


DEFAULT_SPEC = QuadratureSpec()


def csum(values) -> complex:
    """Compensated sum of a sequence of complex numbers."""
    values = np.asarray(values, dtype=complex).ravel()
    return complex(math.fsum(values.real), math.fsum(values.imag))


def _csum_rows(arr):
    # arr: (m, K) complex -> (m,) compensated row sums
    return np.array([csum(row) for row in arr], dtype=complex)


def _gauss_panels(f, a, b):
    """15-point Gauss-Legendre estimate on each panel [a_k, b_k].

    Returns an (m, K) complex array for an m-component integrand.
    """
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    t = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    vals = np.asarray(f(t.ravel()), dtype=complex)
    if vals.ndim == 1:
        vals = vals[None, :]
    vals = vals.reshape(vals.shape[0], a.size, _GL_NODES.size)
    if not np.all(np.isfinite(vals)):
        raise QuadratureError("integrand returned non-finite values")
    return (vals @ _GL_WEIGHTS) * half[None, :]


def _initial_edges(a, b, mode):
    if mode != "log_refined":
        return np.array([a, b], dtype=float)
    k = np.arange(1, _LOG_LEVELS + 1)
    left = a + (b - a) * 0.5 ** k
    right = b - (b - a) * 0.5 ** k
    edges = np.unique(np.concatenate([[a, b, 0.5 * (a + b)], left, right]))
    # drop panels that collapsed to zero width in floating point
    keep = np.concatenate([[True], np.diff(edges) > 0])
    return edges[keep]


def integrate(f: Callable, a: float, b: float, spec: QuadratureSpec | None = None, *, pole=None):
    """Adaptive bisection quadrature of ``f`` over ``[a, b]``.

    ``f`` must be vectorised: given a 1-d array of abscissae it returns
    either a 1-d array (scalar integrand) or an ``(m, n)`` array
    (``m`` integrands sharing the same abscissae).  The error control is
    global: panels are bisected, largest normalised error first, until
    the summed error estimate meets ``max(abs_tol, rel_tol*|I|)`` for
    every component.

    Returns a complex scalar, or an ``(m,)`` complex array for vector
    integrands.
    """
    spec = spec or DEFAULT_SPEC
    if spec.endpoint_mode == "pv_subtraction":
        if pole is None:
            raise ValueError("pv_subtraction requires a pole")
        return pv_integrate(f, pole, a, b, spec)
    a = float(a)
    b = float(b)
    if a == b:
        probe = np.asarray(f(np.array([a])), dtype=complex)
        return 0j if probe.ndim == 1 else np.zeros(probe.shape[0], dtype=complex)
    if not a < b:
        raise ValueError("integrate requires a < b")

    scalar = np.asarray(f(np.array([0.5 * (a + b)]))).ndim == 1
    edges = _initial_edges(a, b, spec.endpoint_mode)
    pa, pb = edges[:-1], edges[1:]
    pm = 0.5 * (pa + pb)
    left = _gauss_panels(f, pa, pm)
    right = _gauss_panels(f, pm, pb)
    coarse = _gauss_panels(f, pa, pb)
    depth = np.zeros(pa.size, dtype=int)

    while True:
        fine = left + right
        err = np.abs(coarse - fine)  # (m, K)
        total = _csum_rows(fine)
        tol = np.maximum(spec.abs_tol, spec.rel_tol * np.abs(total))
        total_err = err.sum(axis=1)
        if np.all(total_err <= tol):
            break
        norm = np.max(err / tol[:, None], axis=0)
        n_panels = pa.size
        refine = (norm > 0.5 / n_panels) & (depth < spec.max_depth)
        if not np.any(refine):
            raise QuadratureError(
                f"quadrature depth {spec.max_depth} exceeded",
                estimate=total[0] if scalar else total,
                error=float(total_err.max()),
            )
        # split selected panels; their halves become new panels
        ra, rb = pa[refine], pb[refine]
        rm = pm[refine]
        na = np.concatenate([ra, rm])
        nb = np.concatenate([rm, rb])
        ncoarse = np.concatenate([left[:, refine], right[:, refine]], axis=1)
        nm = 0.5 * (na + nb)
        nleft = _gauss_panels(f, na, nm)
        nright = _gauss_panels(f, nm, nb)
        ndepth = np.concatenate([depth[refine], depth[refine]]) + 1

        keep = ~refine
        pa = np.concatenate([pa[keep], na])
        pb = np.concatenate([pb[keep], nb])
        pm = 0.5 * (pa + pb)
        coarse = np.concatenate([coarse[:, keep], ncoarse], axis=1)
        left = np.concatenate([left[:, keep], nleft], axis=1)
        right = np.concatenate([right[:, keep], nright], axis=1)
        depth = np.concatenate([depth[keep], ndepth])
        order = np.argsort(pa, kind="stable")
        pa, pb, pm = pa[order], pb[order], pm[order]
        coarse, left, right = coarse[:, order], left[:, order], right[:, order]
        depth = depth[order]

    return complex(total[0]) if scalar else total


def pv_integrate(f: Callable, pole: float, a: float, b: float, spec: QuadratureSpec | None = None):
    """Cauchy principal value of ``int_a^b f(t)/(t - pole) dt``.

    Singularity subtraction: the regular part ``(f(t) - f(pole))/(t - pole)``
    is integrated adaptively on each side of the pole and the subtracted
    term is added back in closed form, ``f(pole) * ln((b - pole)/(pole - a))``.
    """
    spec = spec or DEFAULT_SPEC
    pole = float(pole)
    a, b = float(a), float(b)
    if not a < pole < b:
        raise EndpointError(f"pole {pole} must lie strictly inside ({a}, {b})")
    f_pole = np.asarray(f(np.array([pole])), dtype=complex)
    scalar = f_pole.ndim == 1
    f_pole = f_pole.reshape(-1, 1) if not scalar else f_pole.reshape(1)

    def regular(t):
        vals = np.asarray(f(t), dtype=complex)
        d = t - pole
        # a node may round onto the pole; the bounded quotient there has no weight
        d = np.where(d == 0.0, np.inf, d)
        if scalar:
            return (vals - f_pole[0]) / d
        return (vals - f_pole) / d[None, :]

    inner = spec.with_mode("log_refined")
    part = integrate(regular, a, pole, inner) + integrate(regular, pole, b, inner)
    log_term = math.log((b - pole) / (pole - a))
    if scalar:
        return complex(part + f_pole[0] * log_term)
    return part + f_pole[:, 0] * log_term


class NewtonInfo(NamedTuple):
    root: complex
    iterations: int
    residual: float


def complex_newton(f, fprime, seed, tol=1e-12, max_iter=50, full_output=False):
    """Damped Newton iteration for an analytic ``f`` in the complex plane.

    Steps that increase ``|f|`` are halved (up to 30 times).  Converged
    when ``|f(z)| <= tol``.
    """
    z = complex(seed)
    fz = complex(f(z))
    if abs(fz) <= tol:
        return NewtonInfo(z, 0, abs(fz)) if full_output else z
    for it in range(1, max_iter + 1):
        d = complex(fprime(z))
        if d == 0 or not np.isfinite(d):
            raise ConvergenceError(f"derivative underflow at z={z}", estimate=z)
        step = -fz / d
        for _ in range(30):
            trial = z + step
            ft = complex(f(trial))
            if np.isfinite(ft) and abs(ft) < abs(fz):
                break
            step *= 0.5
        else:
            raise ConvergenceError(f"Newton line search stalled at z={z}", estimate=z, error=abs(fz))
        z, fz = trial, ft
        if abs(fz) <= tol:
            return NewtonInfo(z, it, abs(fz)) if full_output else z
        if abs(step) <= 4 * np.finfo(float).eps * max(abs(z), 1.0):
            break
    raise ConvergenceError(
        f"Newton did not reach |f| <= {tol:g} (|f| = {abs(fz):.3g})", estimate=z, error=abs(fz)
    )


class RefinementNeeded(Exception):
    """Raised by :func:`winding_number` when consecutive samples are too far apart in argument."""

    def __init__(self, indices):
        super().__init__(f"refine between samples {list(indices)[:8]}")
        self.indices = np.asarray(indices, dtype=int)


JUMP_LIMIT = 0.5 * math.pi


def _arg_steps(values):
    return np.angle(values[1:] / values[:-1])


def winding_number(path_values, closed=True) -> int:
    """Net number of turns of a sampled path around the origin.

    The path is closed back to its first value when ``closed`` is true.
    Raises :class:`RefinementNeeded` if any consecutive argument jump is
    at least pi/2, since the sampling may then have skipped a turn.
    """
    v = np.asarray(path_values, dtype=complex).ravel()
    if closed and v[-1] != v[0]:
        v = np.append(v, v[0])
    if np.any(~np.isfinite(v)) or np.any(v == 0):
        raise ContourError("path passes through zero (or a non-finite value)")
    steps = _arg_steps(v)
    bad = np.nonzero(np.abs(steps) >= JUMP_LIMIT)[0]
    if bad.size:
        raise RefinementNeeded(bad)
    turns = math.fsum(steps) / (2 * math.pi)
    n = round(turns)
    if closed and abs(turns - n) > 0.01:
        raise ContourError(f"non-integer winding {turns:.6f}")
    return int(n)


@dataclass(frozen=True)
class PathTrace:
    t: np.ndarray
    values: np.ndarray
    arg: np.ndarray  # continuous (unwrapped) argument, arg[0] = Arg(values[0])

    @property
    def turns(self) -> float:
        return (self.arg[-1] - self.arg[0]) / (2 * math.pi)

    def arg_at(self, t, values):
        """Continuous argument at new parameters ``t`` with function ``values``."""
        idx = np.clip(np.searchsorted(self.t, t) - 1, 0, self.t.size - 1)
        base = self.arg[idx]
        return base + np.angle(values / self.values[idx])


def trace_argument(fn, t_nodes, *, max_depth=60, max_points=400_000, min_modulus=0.0):
    """Sample ``fn`` along a parameter interval until the argument is resolved.

    ``fn`` maps a 1-d array of parameters to complex values.  Midpoints
    are inserted between consecutive samples whose argument differs by
    pi/2 or more, repeatedly, until none remain.  Raises
    :class:`ContourError` if ``|fn|`` drops below ``min_modulus`` or the
    refinement budget is exhausted.
    """
    t = np.asarray(t_nodes, dtype=float)
    v = np.asarray(fn(t), dtype=complex)
    for _ in range(max_depth):
        if np.any(~np.isfinite(v)) or np.any(np.abs(v) <= min_modulus):
            raise ContourError("path passes too close to the origin")
        steps = _arg_steps(v)
        bad = np.nonzero(np.abs(steps) >= JUMP_LIMIT)[0]
        if bad.size == 0:
            arg = np.angle(v[0]) + np.concatenate([[0.0], np.cumsum(steps)])
            return PathTrace(t, v, arg)
        mids = 0.5 * (t[bad] + t[bad + 1])
        if np.any((mids <= t[bad]) | (mids >= t[bad + 1])) or t.size + mids.size > max_points:
            raise ContourError("argument refinement budget exhausted")
        vm = np.asarray(fn(mids), dtype=complex)
        t = np.insert(t, bad + 1, mids)
        v = np.insert(v, bad + 1, vm)
    raise ContourError("argument refinement depth exceeded")
