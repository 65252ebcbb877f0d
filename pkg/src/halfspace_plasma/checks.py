"""Self-check battery behind ``halfspace-plasma verify``.

Three families: exact identities of the dispersion functions, closed
forms against the package's own quadrature, and end-to-end closure of the
boundary conditions.  Module attributes such as ``dispersion.t0`` are
looked up at call time, so a patched function is what gets checked.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import coefficients as coef
from . import dispersion as disp
from . import reconstruction as rec
from . import spectrum as sp
from .dispersion import PlasmaParameters
from .numerics import QuadratureSpec, integrate, pv_integrate

BATTERY = (
    PlasmaParameters(0.0, 0.1, 0.5, 1.0),
    PlasmaParameters(3.0, 1.0, 0.5, 1.0),
    PlasmaParameters(1.0, 1.0, 1.0, 1.0 + 0.5j),
)
_QS = QuadratureSpec(rel_tol=1e-12, abs_tol=1e-14, endpoint_mode="log_refined")


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.tol)


def _rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


def _sample_points(n=40, seed=7):
    rng = np.random.default_rng(seed)
    z = rng.uniform(-3, 3, n) + 1j * rng.uniform(-3, 3, n)
    return z[np.abs(z.imag) > 1e-3]


def identity_checks(p: PlasmaParameters) -> list:
    z = _sample_points()
    lam = disp.lam(z, p)
    t0p, t0m = disp.t0(z, p), disp.t0(-z, p)
    t_closed = z / (2 * p.c) * (1 + (z * z - p.eta1_sq) * np.log(1 - 1 / (z * z)))
    mu = np.linspace(-0.95, 0.95, 39)
    mu = mu[mu != 0]
    lp, lm = disp.lambda_boundary(mu, p)
    off = 1e-12
    eta = np.linspace(0.05, 0.95, 19)
    li, _, _ = disp.laurent_head(p)
    return [
        Check("evenness", _rel(disp.lam(-z, p), lam), 1e-10),
        Check("sokhotski_plus", _rel(disp.lam(mu + 1j * off, p), lp), 1e-8),
        Check("sokhotski_minus", _rel(disp.lam(mu - 1j * off, p), lm), 1e-8),
        Check("lambda_via_t0", _rel(1 - z * t0p + z * t0m, lam), 1e-10),
        Check("t_via_t0", _rel(z * (t0p + t0m), t_closed), 1e-10),
        Check("lambda_plus_t", _rel(disp.lam(eta, p) + disp.t_func(eta, p), 1 + 2 * eta * disp._t0(-eta, p)), 1e-10),
        Check("lambda_inf_split", _rel(disp.lambda_eta1(p) + 1 / (3 * p.c), li), 1e-12),
    ]


def oracle_checks(p: PlasmaParameters) -> list:
    out = []
    mu = 0.37
    pv = pv_integrate(lambda t: np.ones_like(t), mu, -1.0, 1.0)
    out.append(Check("case_lambda_pv", _rel(disp.case_lambda(mu), 1 + mu / 2 * pv), 1e-9))
    z = 0.4 + 0.7j
    t0q = integrate(lambda e: (e * e - p.eta1_sq) / (e - z), 0.0, 1.0, _QS) / (2 * p.c)
    out.append(Check("t0_quadrature", _rel(disp.t0(z, p), t0q), 1e-9))
    s = sp.classify(p)
    if s.eta0 is not None:
        z0 = s.eta0
        mq = integrate(lambda m: (m * m - 2 * m / 3) * (m * z0 - p.eta1_sq) / (z0 - m), 0.0, 1.0, _QS)
        out.append(Check("m_eta0_quadrature", _rel(coef.m_discrete(p, z0), mq), 1e-9))
    j1, _ = coef.j_integrals(p, s.eta0)

    def jump(eta):
        lp, lm = disp._lam_pm(eta, p)
        return (1 / lp - 1 / lm) * eta / (eta * eta - p.eta1_sq) / (2j * np.pi)

    jq = integrate(jump, -1.0, 0.0, _QS) + integrate(jump, 0.0, 1.0, _QS)
    out.append(Check("j1_quadrature", _rel(j1, jq), 1e-7))
    return out


def closure_checks(p: PlasmaParameters) -> list:
    cs = coef.solve_all(p, check=False)
    r = rec.verify_all(p, cs)
    tag = f"[{p.gamma:g},{p.eps:g}]"
    out = [Check(f"{k}{tag}", getattr(r, k), 1e-6) for k in ("field_bc", "nonflow", "spec_accom", "accom_integral")]
    out.append(Check(f"alpha_error{tag}", r.alpha_error, 1e-4))
    out += [Check(f"system_{n}{tag}", v, 1e-6) for n, v in zip(("pole", "field", "accom"), r.system_residuals)]
    return out


def run_battery(battery=BATTERY) -> list:
    checks = []
    for p in battery:
        tag = f"[{p.gamma:g},{p.eps:g}]"
        for c in identity_checks(p) + oracle_checks(p):
            checks.append(Check(c.name + tag, c.value, c.tol))
        checks += closure_checks(p)
    return checks
