"""Acceptance gate: one test per criterion, at the stated tolerances.

The terminal summary prints one PASS/FAIL line per criterion.
"""
import subprocess
import sys
import time

import numpy as np
import pytest

from halfspace_plasma import coefficients as coef
from halfspace_plasma import dispersion as disp
from halfspace_plasma import reconstruction as rec
from halfspace_plasma import spectrum as sp
from halfspace_plasma.dispersion import PlasmaParameters

from . import oracles as orc

D_PLUS = [(0.0, 0.1), (1.0, 1.0), (-0.5, 0.5)]
D_MINUS = [(3.0, 1.0), (2.5, 2.5)]
ALPHAS = [0.1, 0.5, 1.0]
BATTERY = [(g, e, a) for g, e in D_PLUS + D_MINUS for a in ALPHAS]


def rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b) / np.abs(b)))


@pytest.fixture(scope="module")
def battery():
    return {k: coef.solve_all(PlasmaParameters(*k), check=False) for k in BATTERY}


def test_criterion_01_dispersion_identities():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    z = rng.uniform(-3, 3, 100) + 1j * rng.uniform(-3, 3, 100)
    mu = rng.uniform(-0.999, 0.999, 100)
    eta = rng.uniform(0.001, 0.999, 100)
    worst = 0.0
    for g in np.linspace(-0.99, 3.0, 10):
        for e in np.linspace(0.05, 3.0, 10):
            p = PlasmaParameters(g, e)
            lam = disp.lam(z, p)
            t0p, t0m = disp.t0(z, p), disp.t0(-z, p)
            lp, lm = disp.lambda_boundary(mu, p)
            jump = 1j * np.pi * mu * (p.eta1_sq - mu * mu) / p.c
            t_closed = z / (2 * p.c) * (1 + (z * z - p.eta1_sq) * np.log(1 - 1 / (z * z)))
            li, _, _ = disp.laurent_head(p)
            errs = [
                rel(disp.lam(-z, p), lam),
                rel(disp.lam(mu + 1e-14j, p), lp),
                rel(disp.lam(mu - 1e-14j, p), lm),
                rel(lp - lm, jump),
                rel(1 - z * t0p + z * t0m, lam),
                rel(z * t0p + z * t0m, t_closed),
                rel(disp.t_func(z, p), t_closed),
                rel(disp.lam(eta, p) + disp.t_func(eta, p), 1 + 2 * eta * disp.t0(-eta, p)),
                rel(disp.lambda_eta1(p) + 1 / (3 * p.c), li),
            ]
            worst = max(worst, *errs)
    assert worst <= 1e-10, worst
    assert time.perf_counter() - start < 5.0


def _twenty_points():
    pts = [(g, e) for g in np.linspace(-0.9, 3.0, 5) for e in np.linspace(0.1, 3.0, 4)]
    return [PlasmaParameters(g, e) for g, e in pts]


def test_criterion_02_closed_forms_vs_quadrature():
    start = time.perf_counter()
    params = _twenty_points()
    regions = [sp.classify(p) for p in params]
    assert {s.region for s in regions} == {sp.D_PLUS, sp.D_MINUS}
    worst = 0.0
    for i, (p, s) in enumerate(zip(params, regions)):
        errs = [
            rel(disp.case_lambda(0.37), orc.case_lambda(0.37)),
            rel(disp.lam(0.61, p), orc.lam(0.61, p)),
            rel(disp.t_func(-0.42, p), orc.t_func(-0.42, p)),
            rel(disp.t0(0.4 + 0.7j, p), orc.t0(0.4 + 0.7j, p)),
            rel(coef.m_continuum(0.55, p), orc.m_continuum(0.55, p)),
            rel(coef.m_continuum(-0.55, p), orc.m_continuum(-0.55, p)),
        ]
        if s.eta0 is not None:
            errs += [rel(coef.m_discrete(p, s.eta0, k), orc.m_discrete(k * s.eta0, p)) for k in (1, -1)]
        j = coef.j_integrals(p, s.eta0)
        if i % 7 == 0:
            # fully independent: boundary values from scipy principal values
            def lam_pm(x):
                pv, jmp = orc.lam(x, p), 1j * np.pi * x * (p.eta1_sq - x * x) / (2 * p.c)
                return pv + jmp, pv - jmp

            def t_pm(x):
                pv = orc.t_func(x, p)
                jmp = 1j * np.pi * x * (x * x - p.eta1_sq) * np.sign(x) / (2 * p.c)
                return pv + jmp, pv - jmp

            ref = orc.j_integrals(p, lam_pm, t_pm)
        else:
            # scipy quadrature of the jump integrals; the boundary-value kernels are checked above
            def t_pm(x):
                t, jmp = disp._t_cut(x, p), disp._t_jump(x, p)
                return t + jmp, t - jmp

            ref = orc.j_integrals(p, lambda x: disp._lam_pm(x, p), t_pm)
        errs += [rel(j[0], ref[0]), rel(j[1], ref[1])]
        worst = max(worst, *errs)
    assert worst <= 1e-7, worst
    assert time.perf_counter() - start < 30.0


def test_criterion_03_spectrum_dichotomy():
    start = time.perf_counter()
    counts = {}
    for g in np.linspace(-0.99, 3.0, 20):
        for e in np.linspace(0.05, 3.0, 20):
            p = PlasmaParameters(g, e)
            try:
                k = sp.winding_index(p)
            except sp.NearLError:
                continue
            n = sp.contour_zero_count(p)
            assert n == 2 * k and n % 2 == 0 and k in (0, 1), (g, e, k, n)
            counts[k] = counts.get(k, 0) + 1
    assert counts.get(0, 0) > 0 and counts.get(1, 0) > 0
    assert time.perf_counter() - start < 60.0


def test_criterion_04_l_curve():
    start = time.perf_counter()
    curve = sp.l_curve()
    assert len(curve.points) == 400
    for pt in curve.points:
        p = PlasmaParameters(pt.gamma, pt.eps)
        _, g1, g2, _ = sp._g_parts(pt.mu, p)
        scale = abs(3 * p.c) ** 2  # g1, g2 are built on |3c lambda|^2
        assert abs(g1) <= 1e-8 * scale and abs(g2) <= 1e-8 * scale
    for i in np.linspace(0, 399, 10).astype(int):
        pt = curve.points[i]
        d = 1e-3 * (1 + pt.gamma)
        assert sp.winding_index(PlasmaParameters(pt.gamma - d, pt.eps)) == 1
        assert sp.winding_index(PlasmaParameters(pt.gamma + d, pt.eps)) == 0
    assert time.perf_counter() - start < 30.0


def test_criterion_05_zero_quality():
    pts = D_PLUS + [(0.0, 1.0), (1.5, 2.0), (-0.9, 0.05), (0.3, 3.0), (-0.99, 3.0), (3.0, 0.2), (2.5, 0.5)]
    for g, e in pts:
        p = PlasmaParameters(g, e)
        s = sp.classify(p)
        assert s.region == sp.D_PLUS
        li = abs(disp.lambda_infinity(p))
        for z in (s.eta0, -s.eta0):
            assert abs(disp.lam(z, p)) <= 1e-10 * li
            assert sp.small_circle_count(p, z) == 1


def test_criterion_06_coefficient_system(battery):
    assert len(battery) >= 12
    regions = {cs.classification.region for cs in battery.values()}
    assert regions == {sp.D_PLUS, sp.D_MINUS}
    for key, cs in battery.items():
        assert cs.residuals.worst <= 1e-6, (key, cs.residuals)


def test_criterion_07_boundary_conditions(battery):
    for key, cs in battery.items():
        r = rec.verify_all(cs.params, cs)
        assert r.field_bc <= 1e-6, key
        assert r.nonflow <= 1e-6, key
        assert r.spec_accom <= 1e-6, key
        assert r.alpha_error <= 1e-4, key


def test_criterion_08_specular_limit():
    alphas = (1e-1, 1e-2, 1e-3)
    for g, e in D_PLUS + D_MINUS:
        p0 = PlasmaParameters(g, e, 0.0)
        seq = [coef.solve_all(PlasmaParameters(g, e, a)) for a in alphas]
        z = [abs(cs.z0a1) for cs in seq]
        assert abs(z[0] / z[1] - 10) <= 0.5 and abs(z[1] / z[2] - 10) <= 0.5
        e_inf_lim = p0.e0 * disp.lambda_eta1(p0) / disp.lambda_infinity(p0)
        eta0 = seq[0].classification.eta0
        e0_lim = 0j if eta0 is None else -2 * p0.e0 * disp.lambda_eta1(p0) * coef.ab_factors(eta0, p0)[0]
        for cs in seq:
            assert abs(cs.e_infty - e_inf_lim) <= 1e-6
        # E0 approaches its limit linearly in alpha; the extrapolated limit and alpha = 0 itself must match
        gaps = [abs(cs.e_debye - e0_lim) for cs in seq]
        if eta0 is not None:
            assert abs(gaps[0] / gaps[1] - 10) <= 0.5 and abs(gaps[1] / gaps[2] - 10) <= 0.5
        extrapolated = (10 * seq[2].e_debye - seq[1].e_debye) / 9
        assert abs(extrapolated - e0_lim) <= 1e-6
        at_zero = coef.solve_all(p0)
        assert abs(at_zero.e_debye - e0_lim) <= 1e-6 and abs(at_zero.e_infty - e_inf_lim) <= 1e-6


def test_criterion_09_mode_pdes():
    x = np.linspace(0.0, 3.0, 20)
    mu = np.linspace(-0.95, 0.95, 20)
    for g, e in D_PLUS:
        p = PlasmaParameters(g, e)
        xx, mm = np.meshgrid(x, mu, indexing="ij")
        h, ef = rec.discrete_mode_fields(p, None, "drude", xx, mm)
        drude_moment = orc.cquad(lambda m: rec.discrete_mode_fields(p, None, "drude", 0.0, m)[0], -1, 1)
        assert np.max(np.abs(p.z0 * h - mm * ef - 0.5 * drude_moment)) <= 1e-12
        eta0 = sp.find_eta0(p)
        for xi in x:
            h, ef = rec.discrete_mode_fields(p, eta0, "debye", xi, mu)
            moment = orc.cquad(lambda m: rec.discrete_mode_fields(p, eta0, "debye", xi, m)[0], -1, 1)
            # the mode is exp(-z0 x/eta0) times a profile in mu, so d/dx is exact
            dh, de = -p.z0 / eta0 * h, -p.z0 / eta0 * ef[0]
            scale = max(np.max(np.abs(h)), abs(ef[0]))
            assert np.max(np.abs(mu * dh + p.z0 * h - mu * ef - 0.5 * moment)) <= 1e-9 * scale
            assert abs(de - 3 / (2 * p.eps**2) * moment) <= 1e-9 * max(abs(de), scale)


def test_criterion_10_performance():
    cmd = [sys.executable, "-m", "halfspace_plasma.cli"]
    start = time.perf_counter()
    done = subprocess.run(cmd + ["solve", "--gamma", "1", "--eps", "1", "--alpha-p", "0.5"], capture_output=True)
    solve_time = time.perf_counter() - start
    assert done.returncode == 0 and solve_time < 2.0, solve_time
    start = time.perf_counter()
    done = subprocess.run(cmd + ["mode-map", "--gamma-range=-0.99:3:50", "--eps-range", "0.05:3:50", "--threads", "4"],
                          capture_output=True, text=True)
    map_time = time.perf_counter() - start
    assert done.returncode == 0 and len(done.stdout.splitlines()) == 2501
    assert map_time < 120.0, map_time
