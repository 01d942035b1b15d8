"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line that is echoed in the pytest terminal
summary (see conftest.py). Running this file directly prints the same lines.
"""

import math
import time

import numpy as np
import pytest

from localbounds import classical as C
from localbounds import gibbs as G
from localbounds import oracle as O
from localbounds import quantum as Q
from localbounds.corefun import g_fun, h2
from localbounds.reports import by_id

from conftest import ACCEPTANCE_LINES


def record(num, title, ok, detail=""):
    line = f"criterion {num} [{'PASS' if ok else 'FAIL'}] {title}" + (f": {detail}" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


# ---------------------------------------------------------------- 1

def test_criterion_1_equality_fixtures():
    t0 = time.perf_counter()
    spectrum = G.EnergySpectrum.from_levels([0, 1, 2, 3, 4])
    rho = Q.DensityOperator.from_spectrum([0, 0, 0, 1, 0])
    bound = Q.energy_lower_bound(rho, spectrum, 0.3)
    res = O.minimize_functional_ball(O.BallSpec(rho, 0.3), "energy", spectrum=spectrum)
    ok_a = abs(bound.value - 2.1) <= 1e-9 and abs(res.min_value - 2.1) <= 1e-9 \
        and abs(res.min_value - bound.value) <= 1e-9

    p = C.as_prob([0, 0, 0, 1, 0])
    bound_c = C.affine_functional_lower_bound(p, spectrum, 0.3)
    res_c = O.minimize_functional_ball(O.BallSpec(p, 0.3), "energy", spectrum=spectrum)
    ok_b = abs(bound_c.value - 2.1) <= 1e-9 and abs(res_c.min_value - bound_c.value) <= 1e-9

    hd = Q.DensityOperator.from_spectrum([0.9, 0.05, 0.05])
    b1 = by_id(Q.entropy_lower_bounds(hd, 0.1))["B-lb-1"]
    ent = O.minimize_functional_ball(O.BallSpec(hd, 0.1), "entropy")
    ok_c = abs(b1.raw_value) <= 1e-9 and ent.min_value <= 1e-6
    elapsed = time.perf_counter() - t0
    ok = ok_a and ok_b and ok_c and elapsed < 1.0
    record(1, "equality fixtures", ok,
           f"pure-level bound={bound.value:.12g} oracle={res.min_value:.12g}; point-mass bound={bound_c.value:.12g} "
           f"oracle={res_c.min_value:.12g}; B-lb-1={b1.raw_value:.3g} min S={ent.min_value:.3g}; "
           f"{elapsed:.3f}s")
    assert ok


# ---------------------------------------------------------------- 2

def test_criterion_2_gibbs_consistency():
    t0 = time.perf_counter()
    osc = G.EnergySpectrum.oscillator(400)
    worst = 0.0
    for E in (0.5, 1.0, 2.0, 5.0):
        f_val, tail = G.F_lambda(osc, E, with_error=True)
        worst = max(worst, abs(f_val - g_fun(E)), tail)
    beta = G.solve_beta(G.EnergySpectrum.from_levels([0, 1]), 0.25).beta
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-8 and abs(beta - math.log(3)) <= 1e-10 and elapsed < 1.0
    record(2, "Gibbs consistency", ok,
           f"max |F-g| or tail={worst:.2e}; beta(0.25)-ln3={beta - math.log(3):.2e}; {elapsed:.3f}s")
    assert ok


# ---------------------------------------------------------------- 3

def test_criterion_3_oscillator_example():
    large = [G.oscillator_example_forms(1.0, e).E_eps for e in (0.5, 0.6, 0.8, 1.0)]
    ok_large = all(abs(v - 1.0) <= 1e-12 for v in large)
    grid = np.linspace(0.001, 1.0, 200)
    curve = [G.oscillator_example_forms(1.0, e).E_eps for e in grid]
    ok_mono = all(b >= a - 1e-15 for a, b in zip(curve, curve[1:]))
    small = [G.oscillator_example_forms(1.0, e).E_eps for e in (1e-1, 1e-2, 1e-3)]
    ok_zero = small[0] > small[1] > small[2] and small[2] < 0.1

    forms = G.oscillator_example_forms(1.0, 0.1)
    lam, _ = G.oscillator_eigenvalues(1.0)
    trunc = lam[:12] / lam[:12].sum()
    res = O.minimize_functional_ball(O.BallSpec(Q.DensityOperator.from_spectrum(trunc), 0.1), "entropy")
    full = O.minimize_entropy_ball(C.as_prob(lam / lam.sum()), 0.1)
    ok_sound = all(b <= m + 1e-9 for b in (forms.bound_value, forms.coarse_bound_value)
                   for m in (res.min_value, full.min_value))
    ok = ok_large and ok_mono and ok_zero and ok_sound
    record(3, "oscillator example", ok,
           f"E_eps(eps>=0.5)={large}; E_eps(1e-1,1e-2,1e-3)={[round(v, 6) for v in small]}; "
           f"bounds=({forms.bound_value:.6f}, {forms.coarse_bound_value:.6f}) "
           f"oracle dim-12={res.min_value:.6f} untruncated={full.min_value:.6f}")
    assert ok


# ---------------------------------------------------------------- 4

def _centers_classical(rng, n_max=16):
    n = int(rng.integers(2, n_max + 1))
    return rng.dirichlet(np.full(n, rng.choice([0.3, 1.0, 3.0])))


def _correlated(rng, r, c):
    """Joint array concentrated near a diagonal, so that X1 and X2 are dependent."""
    base = np.zeros((r, c))
    base[np.arange(max(r, c)) % r, np.arange(max(r, c)) % c] = 1.0
    noise = rng.dirichlet(np.ones(r * c)).reshape(r, c)
    t = float(rng.uniform(0.0, 0.5))
    return (1 - t) * base / base.sum() + t * noise


def _soundness_cases(rng):
    """Yield ``(family, reports, BallSpec factory, Functional)`` for one random center per family."""
    eps = float(10 ** rng.uniform(-3, -0.5))
    # classical entropy and energy
    p = _centers_classical(rng)
    sp = G.EnergySpectrum.from_levels(np.arange(p.size, dtype=float))
    yield ("classical entropy", C.entropy_lower_bounds(p, eps, spectrum=sp),
           {"L": O.BallSpec(C.as_prob(p), eps)}, O.functional_for("entropy", "classical"))
    yield ("classical energy", [C.affine_functional_lower_bound(p, sp, eps)],
           {"L": O.BallSpec(C.as_prob(p), eps)}, O.functional_for("energy", "classical", spectrum=sp))
    # 2-variate
    r, c = int(rng.integers(2, 5)), int(rng.integers(2, 5))
    m = _correlated(rng, r, c)
    spr = G.EnergySpectrum.from_levels(np.arange(r, dtype=float))
    e1 = float(np.dot(np.arange(r), m.sum(axis=1)))
    ball2 = {"L": O.BallSpec(C.as_prob(m), eps)}
    yield ("equivocation", C.equivocation_lower_bounds(m, eps, energy=(spr, e1)), ball2,
           O.functional_for("equivocation"))
    yield ("mutual information", C.mi_lower_bounds(m, eps, energy=(spr, e1, 1)), ball2,
           O.functional_for("mi"))
    # KL with a support-restricted ball
    q = _centers_classical(rng)
    p = rng.dirichlet(np.full(q.size, 0.3))
    d = q.size - 1 if (q.size > 2 and np.sort(p)[0] <= eps) else q.size
    d = max(d, 2)
    balls = {"L": O.BallSpec(C.as_prob(p), eps), "L^d": O.BallSpec(C.as_prob(p), eps, "rank", d=d)}
    yield ("KL divergence", C.kl_lower_bounds(p, q, eps, d=d), balls, O.functional_for("kl", q=q))
    # quantum entropy and energy
    n = int(rng.integers(2, 6))
    rho = Q.random_state(n, rng, rank=int(rng.integers(1, n + 1)))
    spq = G.EnergySpectrum.from_levels(np.arange(n, dtype=float))
    yield ("quantum entropy", Q.entropy_lower_bounds(rho, eps, spectrum=spq),
           {"L": O.BallSpec(rho, eps)}, O.functional_for("entropy", "quantum"))
    yield ("quantum energy", [Q.energy_lower_bound(rho, spq, eps)],
           {"L": O.BallSpec(rho, eps)}, O.functional_for("energy", "quantum", spectrum=spq))
    # relative entropy in all four balls
    rho = Q.random_state(n, rng)
    omega = Q.random_state(n, rng)
    e_rho = Q.energy(rho, spq) * 1.2
    d = n - 1 if (n > 2 and rho.eigvals[-1] <= eps) else n
    d = max(d, 2)
    balls = {"L": O.BallSpec(rho, eps), "L^d": O.BallSpec(rho, eps, "rank", d=d),
             "L^com": O.BallSpec(rho, eps, "commuting"),
             "L^energy": O.BallSpec(rho, eps, "energy", spectrum=spq, E=e_rho)}
    yield ("relative entropy",
           Q.relative_entropy_lower_bounds(rho, omega, eps, d=d, energy=(spq, e_rho)), balls,
           O.functional_for("relative_entropy", "quantum", omega=omega))
    # conditional entropy of q-c states
    k, dim = int(rng.integers(2, 4)), int(rng.integers(2, 5))
    ens = Q.QCEnsemble(rng.dirichlet(np.ones(k)), [Q.random_state(dim, rng) for _ in range(k)])
    spa = G.EnergySpectrum.from_levels(np.arange(dim, dtype=float))
    ea = float(np.dot(np.arange(dim), ens.average_state().diagonal_in()))
    yield ("q-c conditional entropy", Q.qce_lower_bounds(ens, eps, energy=(spa, ea)),
           {"L^qc": O.BallSpec(ens, eps)}, O.functional_for("qce", "ensemble"))


def test_criterion_4_soundness_suite():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    failures, checked, families = [], 0, {}
    for center in range(20):
        for family, reports, balls, f in _soundness_cases(rng):
            cache = {}
            for r in reports:
                if r.target not in cache:
                    pts = O.sample_ball(balls[r.target], 200, seed=1000 * center + len(cache))
                    cache[r.target] = min(f(x) for x in pts)
                checked += 1
                families.setdefault(family, set()).add(r.bound_id)
                if cache[r.target] < r.value - 1e-9:
                    failures.append((family, r.bound_id, center, cache[r.target], r.value))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 300
    n_ids = sum(len(v) for v in families.values())
    record(4, "soundness suite", ok,
           f"{checked} bound evaluations over {n_ids} bound ids, 20 centers x 200 samples each, "
           f"{len(failures)} violations, {elapsed:.1f}s" + (f"; first: {failures[0]}" if failures else ""))
    assert ok


# ---------------------------------------------------------------- 5

def _faithful_cases(rng):
    eps = 1e-6
    p = _centers_classical(rng)
    sp = G.EnergySpectrum.from_levels(np.arange(p.size, dtype=float))
    yield C.entropy_lower_bounds(p, eps, spectrum=sp), C.shannon_entropy_ext(p)
    yield [C.affine_functional_lower_bound(p, sp, eps)], float(np.dot(np.arange(p.size), p))
    m = rng.dirichlet(np.ones(9)).reshape(3, 3)
    spr = G.EnergySpectrum.from_levels([0.0, 1.0, 2.0])
    e1 = float(np.dot([0, 1, 2], m.sum(axis=1)))
    yield C.equivocation_lower_bounds(m, eps, energy=(spr, e1)), C.equivocation(m)
    yield C.mi_lower_bounds(m, eps, energy=(spr, e1, 1)), C.mutual_information(m)
    q = rng.dirichlet(np.ones(p.size))
    yield C.kl_lower_bounds(p, q, eps, d=max(2, p.size)), C.kl_divergence(p, q)
    n = int(rng.integers(2, 6))
    rho = Q.random_state(n, rng)
    spq = G.EnergySpectrum.from_levels(np.arange(n, dtype=float))
    yield Q.entropy_lower_bounds(rho, eps, spectrum=spq), Q.von_neumann_entropy_ext(rho)
    yield [Q.energy_lower_bound(rho, spq, eps)], Q.energy(rho, spq)
    omega = Q.random_state(n, rng)
    yield (Q.relative_entropy_lower_bounds(rho, omega, eps, d=n, energy=(spq, Q.energy(rho, spq))),
           Q.relative_entropy(rho, omega))
    ens = Q.QCEnsemble([0.4, 0.6], [Q.random_state(3, rng), Q.random_state(3, rng)])
    spa = G.EnergySpectrum.from_levels([0.0, 1.0, 2.0])
    ea = float(np.dot([0, 1, 2], ens.average_state().diagonal_in()))
    yield Q.qce_lower_bounds(ens, eps, energy=(spa, ea)), Q.qce(ens)


def test_criterion_5_faithfulness():
    rng = np.random.default_rng(77)
    worst, worst_id, count, skipped = 0.0, "", 0, set()
    for _ in range(10):
        for reports, f_center in _faithful_cases(rng):
            for r in reports:
                if not r.faithful:
                    skipped.add(r.bound_id)
                    continue
                count += 1
                gap = abs(r.raw_value - f_center)
                if gap > worst:
                    worst, worst_id = gap, r.bound_id
    ok = worst <= 1e-3
    record(5, "faithfulness at eps=1e-6", ok,
           f"{count} bounds, worst gap {worst:.2e} ({worst_id}); not flagged faithful: {sorted(skipped)}")
    assert ok


# ---------------------------------------------------------------- 6

def test_criterion_6_orderings():
    rng = np.random.default_rng(6)
    worst = {}

    def note(name, diff):
        worst[name] = min(worst.get(name, math.inf), diff)

    for _ in range(50):
        eps = float(rng.uniform(0.005, 0.5))
        n = int(rng.integers(2, 7))
        rho = Q.random_state(n, rng, rank=int(rng.integers(1, n + 1)))
        b = by_id(Q.entropy_lower_bounds(rho, eps))
        note("entropy", b["B-lb-3++"].raw_value - b["B-lb-3+"].raw_value)
        k = int(rng.integers(2, 5))
        ens = Q.QCEnsemble(rng.dirichlet(np.ones(k)), [Q.random_state(n, rng) for _ in range(k)])
        b = by_id(Q.qce_lower_bounds(ens, eps))
        note("qc entropy", b["CE-LB-3++"].raw_value - b["CE-LB-3+"].raw_value)
        m = rng.dirichlet(np.full(12, rng.choice([0.3, 1.0]))).reshape(3, 4)
        b = by_id(C.equivocation_lower_bounds(m, eps))
        note("equivocation", b["CE-LB+c"].raw_value - b["CE-LB++c"].raw_value)
        b = by_id(C.mi_lower_bounds(m, eps))
        note("mutual information", b["I-LB+"].raw_value - b["I-LB++"].raw_value)
    ok = all(v >= -1e-10 for v in worst.values())
    record(6, "sharpness orderings", ok,
           ", ".join(f"{k} min diff {v:.3g}" for k, v in worst.items()))
    assert ok


# ---------------------------------------------------------------- 7

def test_criterion_7_structural_identities():
    rng = np.random.default_rng(7)
    errs = {}
    clip_err = 0.0
    for _ in range(100):
        p = rng.dirichlet(np.ones(int(rng.integers(2, 10))))
        eps = float(rng.uniform(0.001, 1.0))
        cp = C.clip(p, eps)
        clip_err = max(clip_err, float(np.max(np.abs(cp.low.entries + cp.high.entries - p))))
        rho = Q.random_state(int(rng.integers(2, 6)), rng)
        oc = Q.operator_clip(rho, eps)
        clip_err = max(clip_err, float(np.max(np.abs(oc.low.matrix + oc.high.matrix - rho.matrix))))
    errs["clip"] = clip_err

    mirsky = -math.inf
    for _ in range(500):
        n = int(rng.integers(2, 7))
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        b = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        lhs, rhs = Q.mirsky_gap(a + a.conj().T, b + b.conj().T)
        mirsky = max(mirsky, lhs - rhs)
    errs["Mirsky"] = max(mirsky, 0.0)

    sandwich = -math.inf
    for _ in range(200):
        n = int(rng.integers(2, 6))
        s1, s2 = rng.dirichlet([1, 1, 1])[:2]
        x = Q.DensityOperator(s1 * Q.random_state(n, rng).matrix)
        y = Q.DensityOperator(s2 * Q.random_state(n, rng).matrix)
        sx, sy = Q.von_neumann_entropy_ext(x), Q.von_neumann_entropy_ext(y)
        sxy = Q.von_neumann_entropy_ext(x + y)
        hb = float(-s1 * math.log(s1) - s2 * math.log(s2) + (s1 + s2) * math.log(s1 + s2))
        sandwich = max(sandwich, sx + sy - sxy, sxy - (sx + sy + hb))
    errs["sandwich"] = max(sandwich, 0.0)

    wl = -math.inf
    for _ in range(200):
        x, y = np.sort(rng.uniform(0.01, 5.0, 2))
        z = float(rng.uniform(0.0, 10.0))
        wl = max(wl, x * g_fun(z / x) - y * g_fun(z / y))
    errs["W-L"] = max(wl, 0.0)

    errs["D_f"] = max(abs((1 + e) * h2(e / (1 + e)) - g_fun(e)) for e in np.linspace(0.001, 1.0, 50))
    ok = all(v <= 1e-10 for v in errs.values())
    record(7, "structural identities", ok, ", ".join(f"{k} {v:.2e}" for k, v in errs.items()))
    assert ok


# ---------------------------------------------------------------- 8

def test_criterion_8_heavy_tail_growth():
    p, c = C.heavy_tail_distribution(10 ** 6)
    vals = [C.entropy_lower_bound(p, e).raw_value for e in (1e-2, 1e-3, 1e-4)]
    eps = 1e-4
    threshold = (1 / c) * math.log(-math.log(c * eps) / (3 * math.log(5))) - 1 / (c * math.e) - 1
    ok = all(v > 0 for v in vals) and vals[0] < vals[1] < vals[2] and vals[2] > threshold
    record(8, "heavy-tail growth", ok,
           f"bounds {[round(v, 6) for v in vals]}, threshold at 1e-4 = {threshold:.6f}, c = {c:.6f}")
    assert ok


# ---------------------------------------------------------------- 9

def _diag(v):
    return Q.DensityOperator.from_spectrum(v)


def test_criterion_9_classical_quantum_reduction():
    rng = np.random.default_rng(9)
    worst, where = 0.0, ""

    def cmp(qr, cr, tag):
        nonlocal worst, where
        diff = abs(qr - cr)
        if diff > worst:
            worst, where = diff, tag

    for _ in range(50):
        n = int(rng.integers(2, 7))
        eps = float(rng.uniform(0.01, 0.5))
        p = rng.dirichlet(np.ones(n))
        sp = G.EnergySpectrum.from_levels(np.arange(n, dtype=float))
        qb = by_id(Q.entropy_lower_bounds(_diag(p), eps, spectrum=sp))
        cb = by_id(C.entropy_lower_bounds(p, eps, spectrum=sp))
        for qid in qb:
            cmp(qb[qid].raw_value, cb[qid + "c"].raw_value, qid)
        cmp(Q.energy_lower_bound(_diag(p), sp, eps).raw_value,
            C.affine_functional_lower_bound(p, sp, eps).raw_value, "H-LB+")

        q = rng.dirichlet(np.ones(n))
        d = n if n >= 2 else 2
        qb = by_id(Q.relative_entropy_lower_bounds(_diag(p), _diag(q), eps, d=d))
        cb = by_id(C.kl_lower_bounds(p, q, eps, d=d))
        cmp(qb["RE-LB+D"].raw_value, cb["KLD-LB+"].raw_value, "RE-LB+D")
        cmp(qb["RE-LB+C"].raw_value, cb["KLD-LB+"].raw_value, "RE-LB+C")
        if "RE-LB+A" in qb or "KLD-LB+d" in cb:
            cmp(qb["RE-LB+A"].raw_value, cb["KLD-LB+d"].raw_value, "RE-LB+A")

        k = int(rng.integers(2, 4))
        w = rng.dirichlet(np.ones(k))
        diags = [rng.dirichlet(np.ones(n)) for _ in range(k)]
        ens = Q.QCEnsemble(w, [_diag(v) for v in diags])
        joint = np.column_stack([wk * v for wk, v in zip(w, diags)])
        ea = float(np.dot(np.arange(n), joint.sum(axis=1)))
        qb = by_id(Q.qce_lower_bounds(ens, eps, energy=(sp, ea)))
        cb = by_id(C.equivocation_lower_bounds(joint, eps, energy=(sp, ea)))
        cmp(qb["CE-LB-3+"].raw_value, cb["CE-LB++c"].raw_value, "CE-LB-3+")
        cmp(qb["CE-LB-3++"].raw_value, cb["CE-LB+c"].raw_value, "CE-LB-3++")
        cmp(qb["CE-LB-1"].raw_value, cb["CE-LB-c-1"].raw_value, "CE-LB-1")
        cmp(qb["CE-LB-2"].aux["coarse_value"], cb["CE-LB-c-2"].raw_value, "CE-LB-2 (coarse form)")
    ok = worst <= 1e-10
    record(9, "classical/quantum reduction", ok, f"max difference {worst:.2e} ({where}) over 50 cases")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
