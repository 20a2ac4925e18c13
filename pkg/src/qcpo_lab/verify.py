"""Self-check suites: analytic boundaries, closed-form vs spectral oracles,
marginal identities and k-positivity values.

Each suite returns a list of result dicts ``{"criterion", "passed", "measured",
"threshold", ...}``; a suite passes when every entry does.
"""

import numpy as np

from . import channels, classify, families, linalg, qcpo, rand

BOUNDARY_BAND = 1e-7


def _result(name, passed, measured, threshold, **extra):
    out = {"criterion": name, "passed": bool(passed), "measured": measured, "threshold": threshold}
    out.update(extra)
    return out


def _dims(n, default):
    return [n] if n is not None else list(default)


def boundaries(n=None, seed=0):
    out = []
    for m in _dims(n, (2, 3, 4)):
        lo, hi = families.bisect_lambda_interval(m)
        elo, ehi = families.lambda_range(m)
        err = max(abs(lo - elo), abs(hi - ehi))
        out.append(_result(f"lambda_interval_n{m}", err <= 1e-8, err, 1e-8, interval=[lo, hi], expected=[elo, ehi]))
    for m in [d for d in _dims(n, (3, 4)) if d >= 3]:
        worst_unital = 0.0
        for g2 in (0.25, 1.0, 4.0):
            pi = families.make_pi_gamma(m, g2)
            worst_unital = max(worst_unital, float(np.max(np.abs(linalg.partial_trace(pi, "B") - np.eye(m)))))
        out.append(_result(f"pi_gamma_unital_n{m}", worst_unital <= 1e-13, worst_unital, 1e-13))
        pi = families.make_pi_gamma(m, 1.0)
        lo = min(np.linalg.eigvalsh(pi)[0], np.linalg.eigvalsh(linalg.partial_transpose(pi, "B"))[0])
        out.append(_result(f"pi_gamma_psd_ppt_n{m}", lo >= -1e-10, float(lo), -1e-10))
    return out


def _random_params(n, rng):
    c = rng.uniform(-3, 3, (n, n))
    if rng.random() < 0.5:
        # Nonnegative off-diagonal half: keeps entries in [-3, 3] while sampling the CP region.
        off = ~np.eye(n, dtype=bool)
        c[off] = np.abs(c[off])
    return classify.DiagFamilyParams(c, rng.uniform(-3, 3))


def oracles(n=None, seed=0, samples=1000):
    """Closed-form checkers against Choi spectra for random diagonal-family parameters.

    Samples whose oracle eigenvalue lies within ``BOUNDARY_BAND`` of zero are
    counted as indeterminate, not as disagreements.
    """
    out = []
    rng = np.random.default_rng(seed)
    for m in _dims(n, (2, 3, 4)):
        dis1 = dis2 = form_dis = band1 = band2 = 0
        for _ in range(samples):
            p = _random_params(m, rng)
            phi = families.make_diag_family(p)
            e1 = np.linalg.eigvalsh(phi.choi)[0]
            e2 = np.linalg.eigvalsh(linalg.partial_transpose(phi.choi, "B"))[0]
            if abs(e1) < BOUNDARY_BAND:
                band1 += 1
            elif classify.thm1_cp_closed_form(p) != (e1 >= 0):
                dis1 += 1
            ineq = classify.thm2_ccp_inequalities(p)
            if ineq != classify.thm2_ccp_blocks(p):
                form_dis += 1
            if abs(e2) < BOUNDARY_BAND:
                band2 += 1
            elif ineq != (e2 >= 0):
                dis2 += 1
        out.append(_result(f"thm1_oracle_n{m}", dis1 == 0, dis1, 0, samples=samples, boundary=band1))
        out.append(_result(f"thm2_oracle_n{m}", dis2 == 0, dis2, 0, samples=samples, boundary=band2))
        out.append(_result(f"thm2_forms_agree_n{m}", form_dis == 0, form_dis, 0, samples=samples))
    return out


def marginals(n=None, seed=0, instances=100):
    out = []
    rng = np.random.default_rng(seed)
    ns = _dims(n, (2, 3, 4))
    worst_a = worst_b = 0.0
    for t in range(instances):
        m = ns[t % len(ns)]
        rho = rand.random_density(m, seed=rng)
        phi = rand.random_unital_cp(m, seed=rng)
        omega = qcpo.compound_from_qcpo(qcpo.qcpo_of_channel(phi), rho)
        ma, mb = qcpo.marginals(omega)
        worst_a = max(worst_a, float(np.linalg.norm(ma - rho)))
        worst_b = max(worst_b, float(np.linalg.norm(mb - qcpo.expected_b_marginal(phi, rho))))
    out.append(_result("compound_marginal_A", worst_a <= 1e-10, worst_a, 1e-10, instances=instances))
    out.append(_result("compound_marginal_B", worst_b <= 1e-10, worst_b, 1e-10, instances=instances))

    cases = []
    for t in range(instances):
        m = ns[t % len(ns)]
        cases.append((rand.random_density(m, seed=rng), rand.random_cptp(m, seed=rng)))
    for m in ns:
        cases.append((np.eye(m) / m, rand.random_cptp(m, seed=rng)))
        if m >= 3:
            w = np.zeros(m)
            w[:2] = 0.5 * (1 - 0.2)
            w[2:] = 0.2 / (m - 2)
            u = np.linalg.qr(rand.random_ginibre(m, seed=rng))[0]
            cases.append(((u * w) @ u.conj().T, rand.random_cptp(m, seed=rng)))
    worst_i = worst_ii = 0.0
    worst_pt = np.inf
    for rho, phi_star in cases:
        omega = qcpo.ohya_compound(rho, phi_star)
        ma, mb = qcpo.marginals(omega)
        worst_i = max(worst_i, float(np.linalg.norm(ma - rho)))
        worst_ii = max(worst_ii, float(np.linalg.norm(mb - channels.apply(phi_star, rho))))
        worst_pt = min(worst_pt, float(np.linalg.eigvalsh(linalg.partial_transpose(omega.operator, "B"))[0]))
    out.append(_result("ohya_condition_i", worst_i <= 1e-10, worst_i, 1e-10, instances=len(cases)))
    out.append(_result("ohya_condition_ii", worst_ii <= 1e-10, worst_ii, 1e-10, instances=len(cases)))
    out.append(_result("ohya_ppt", worst_pt >= -1e-9, worst_pt, -1e-9, instances=len(cases)))
    return out


def kpos(n=None, seed=0, restarts=200):
    out = []
    ns = _dims(n, (2, 3, 4))
    for m in ns:
        for k in range(1, m):
            phi = families.make_phi_k(m, k)
            dev = float(np.max(np.abs(channels.transpose_compose(phi).choi - families.reduction_map(m, k).choi)))
            lo = float(np.linalg.eigvalsh(phi.choi)[0])
            out.append(_result(f"reduction_bridge_n{m}_k{k}", dev <= 1e-12 and lo >= -1e-9, dev, 1e-12, choi_min_eig=lo))
    for m in ns:
        for k in range(1, m):
            choi = families.reduction_map(m, k).choi
            for r in range(1, m + 1):
                res = classify.schmidt_rank_k_falsifier(choi, r, restarts, seed)
                err = abs(res.min_value - (k - r))
                out.append(_result(f"falsifier_n{m}_k{k}_r{r}", err <= 1e-6, err, 1e-6, value=res.min_value, expected=k - r))
    for m in [d for d in ns if d in (2, 3)]:
        for k in range(1, m):
            omega = families.make_npt_compound(m, k, np.eye(m) / m)
            pt = linalg.partial_transpose(omega.operator, "B")
            v = classify.ppt_status(omega.operator)
            direct = float(np.real(np.vdot(v.witness, pt @ v.witness)))
            ok = v.min_eigenvalue <= -1e-3 and abs(direct - v.min_eigenvalue) <= 1e-10
            out.append(_result(f"npt_compound_n{m}_k{k}", ok, v.min_eigenvalue, -1e-3, witness_value=direct))
    if n is None or n == 4:
        nn, c, ratio = 4, 2.5, 1.4
        coff = ratio * (nn - c)
        closed = classify.kpos_window_closed_form(nn, 2, c, ratio)
        choi = families.make_cor5_companion(nn, c, coff).choi
        r2 = classify.schmidt_rank_k_falsifier(choi, 2, restarts, seed)
        r3 = classify.schmidt_rank_k_falsifier(choi, 3, restarts, seed)
        ok = closed and r3.min_value < -1e-4 and r2.min_value >= -linalg.PSD_TOL
        out.append(_result("cor5_window_n4", ok, {"rank2_min": r2.min_value, "rank3_min": r3.min_value}, {"rank3_below": -1e-4, "rank2_at_least": -linalg.PSD_TOL}, closed_form=closed))
    return out


SUITES = {"boundaries": boundaries, "oracles": oracles, "marginals": marginals, "kpos": kpos}


def run(suite: str, n=None, seed=0):
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {sorted(SUITES)}")
    results = SUITES[suite](n=n, seed=seed)
    return {"suite": suite, "seed": seed, "n": n, "passed": all(r["passed"] for r in results), "results": results}
