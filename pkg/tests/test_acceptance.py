"""Acceptance criteria 1-10, one test each.

Every test prints a single ``ACCEPTANCE <n> PASS|FAIL`` line (outside
pytest's capture) before asserting, so the verdicts show up in the log.
"""
import math
import time

import numpy as np
import pytest

from tailcontagion import BernoulliMixture, GaussianCopulaPareto, MarshallOlkinPareto
from tailcontagion.data import analyze_pair, joint_negative_pairs, returns, synthetic_price_pair
from tailcontagion.diagnostics import angular_histogram
from tailcontagion.estimators import (
    empirical_mes,
    empirical_mme,
    evt_mes,
    evt_mes_dependent,
    evt_mme,
    evt_mme_dependent,
)
from tailcontagion.experiments import ExperimentPlan, canned_plans, run_experiment
from tailcontagion.models import make_rng
from tailcontagion.oracles import (
    check_assumption_b,
    exact_mes,
    exact_mme,
    numeric_mes,
    numeric_mme,
    scaling_factor,
)
from tailcontagion.tail_index import hill, min_transform

BERN = BernoulliMixture(2.0, 2.5, 4.0, 0.5)


@pytest.fixture
def verdict(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {number} {'PASS' if ok else 'FAIL'}: {detail}")
        return ok
    return emit


def test_criterion_1_bernoulli_oracle(verdict):
    start = time.perf_counter()
    gaps = {}
    for p in (0.01, 0.001):
        gaps[("MME", p)] = abs(exact_mme(BERN, p) - numeric_mme(BERN, p, "montecarlo", 10**7, seed=11).value) / exact_mme(BERN, p)
        gaps[("MES", p)] = abs(exact_mes(BERN, p) - numeric_mes(BERN, p, "montecarlo", 10**7, seed=12).value) / exact_mes(BERN, p)
    elapsed = time.perf_counter() - start
    ok = max(gaps.values()) < 0.02 and elapsed < 60
    verdict(1, ok, f"max relative gap {max(gaps.values()):.2e} (< 2e-2), {elapsed:.1f}s")
    assert ok


def test_criterion_2_limit_constants(verdict):
    start = time.perf_counter()
    p = 1e-6
    f = scaling_factor(BERN, p)
    mme, mes = exact_mme(BERN, p) * f, exact_mes(BERN, p) * f
    a0 = BERN.alpha0
    g1, g2 = abs(mme / (1 / (a0 - 1)) - 1), abs(mes / (a0 / (a0 - 1)) - 1)
    elapsed = time.perf_counter() - start
    ok = g1 < 0.05 and g2 < 0.05 and elapsed < 1
    verdict(2, ok, f"scaled MME {mme:.4f} vs 2/3 ({g1:.1%}), scaled MES {mes:.4f} vs 5/3 ({g2:.1%}), {elapsed:.2f}s")
    assert ok


def test_criterion_3_mo_closed_form(verdict):
    start = time.perf_counter()
    spec = MarshallOlkinPareto(2.0, 0.8, 0.7)
    gaps = [abs(numeric_mme(spec, p).value / p**-0.2 - 1) for p in (0.01, 0.001)]
    elapsed = time.perf_counter() - start
    ok = max(gaps) < 1e-4 and elapsed < 10
    verdict(3, ok, f"max relative gap {max(gaps):.2e} (< 1e-4), {elapsed:.2f}s")
    assert ok


def test_criterion_4_empirical_consistency(verdict):
    start = time.perf_counter()
    plan = ExperimentPlan(spec=BERN, n=10**4, k=10**3, p_list=(0.1,), reps=200, base_seed=4,
                          methods=("empirical",), measures=("MME", "MES"))
    summary = run_experiment(plan)
    medians = {c.measure: c.quantiles["median"] for c in summary.cells}
    elapsed = time.perf_counter() - start
    ok = all(0.85 <= m <= 1.15 for m in medians.values()) and len(medians) == 2 and elapsed < 120
    verdict(4, ok, f"median ratios MME {medians['MME']:.3f}, MES {medians['MES']:.3f} (in [0.85, 1.15]), {elapsed:.1f}s")
    assert ok


def test_criterion_5_evt_extrapolation(verdict, capsys):
    start = time.perf_counter()
    failures = []
    lines = []
    for plan in canned_plans(reps=500, base_seed=2024):
        summary = run_experiment(plan)
        for measure in plan.measures:
            cells = [summary.cell("evt_ai", measure, p) for p in plan.p_list]
            med = [c.quantiles["median"] for c in cells]
            iqr_hits = sum(c.iqr_contains(1.0) for c in cells)
            bad = [p for p, m in zip(plan.p_list, med) if not 0.6 <= m <= 1.5]
            status = "ok" if not bad and iqr_hits >= 3 else "FAIL"
            lines.append(f"  {plan.name:8s} {measure}: medians {', '.join(f'{m:.3f}' for m in med)}; "
                         f"IQR contains 1 at {iqr_hits}/4; {status}")
            if status != "ok":
                failures.append(f"{plan.name}/{measure}")
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 600
    with capsys.disabled():
        print("\n" + "\n".join(lines), end="")
    verdict(5, ok, f"{7 - len({f.split('/')[0] for f in failures})}/7 plans within bands"
                   f"{'; failing: ' + ', '.join(failures) if failures else ''}, {elapsed:.1f}s")
    assert ok


def test_criterion_6_hill_recovery(verdict):
    start = time.perf_counter()
    n, k, reps = 10**4, 500, 200
    shares = {}
    for alpha in (1.5, 2.0, 2.5, 3.0):
        est = np.array([hill(make_rng(600 + r).random(n) ** (-1 / alpha), k).index for r in range(reps)])
        shares[alpha] = float(np.mean(np.abs(est - alpha) <= 3 * alpha / math.sqrt(k)))
    elapsed = time.perf_counter() - start
    ok = min(shares.values()) >= 0.9 and elapsed < 60
    verdict(6, ok, "coverage " + ", ".join(f"a={a}: {s:.1%}" for a, s in shares.items()) + f" (>= 90%), {elapsed:.1f}s")
    assert ok


def test_criterion_7_hidden_index(verdict):
    start = time.perf_counter()
    spec = GaussianCopulaPareto(2.0, 0.9)
    est = [hill(min_transform(spec.sample(10**4, 7, stream=r)), 500).index for r in range(200)]
    med = float(np.median(est))
    elapsed = time.perf_counter() - start
    ok = abs(med - 2.105) <= 0.35 and elapsed < 60
    verdict(7, ok, f"median {med:.3f} vs 2.105 +- 0.35, {elapsed:.1f}s")
    assert ok


def test_criterion_8_invariants(verdict):
    start = time.perf_counter()
    checks = {}
    x = make_rng(80).random(5000) ** -0.5
    checks["hill scale"] = all(hill(c * x, 300).index == pytest.approx(hill(x, 300).index, rel=1e-12)
                               for c in (0.001, 2.0, 7.5))
    s = GaussianCopulaPareto(2.0, 0.5).sample(2000, 81)
    k, p = 200, 1e-4
    funcs = [lambda t: evt_mme(t, k, k, k, p), lambda t: evt_mes(t, k, k, k, p),
             lambda t: evt_mme_dependent(t, k, k, p), lambda t: evt_mes_dependent(t, k, k, p),
             lambda t: empirical_mme(t, k), lambda t: empirical_mes(t, k)]
    checks["scale equivariance"] = all(f(s.scaled(3.0)).value == pytest.approx(3.0 * f(s).value, rel=1e-12)
                                       for f in funcs)
    checks["mes >= mme"] = all(empirical_mes(s, kk).value >= empirical_mme(s, kk).value for kk in range(1, 2000, 37)) \
        and funcs[1](s).value >= funcs[0](s).value and funcs[3](s).value >= funcs[2](s).value
    pk = k / s.n
    checks["anchor identity"] = (evt_mme(s, k, k, k, pk).value == empirical_mme(s, k).value
                                 and evt_mes(s, k, k, k, pk).value == empirical_mes(s, k).value
                                 and evt_mme_dependent(s, k, k, pk).value == empirical_mme(s, k).value
                                 and evt_mes_dependent(s, k, k, pk).value == empirical_mes(s, k).value)
    homog = True
    for spec in (GaussianCopulaPareto(2, 0.9), MarshallOlkinPareto(2, 0.8, 0.7), MarshallOlkinPareto(2.5, 0.8, 0.8), BERN):
        a0 = spec.indices().alpha0
        for xx, yy, c in ((0.5, 2.0, 3.0), (4.0, 1.0, 0.2), (1.0, 1.0, 10.0)):
            homog &= float(spec.nu0(c * xx, c * yy)) == pytest.approx(c**-a0 * float(spec.nu0(xx, yy)), rel=1e-12)
    checks["nu0 homogeneity"] = homog
    h = angular_histogram(s, 0.1, 20)
    checks["histogram mass"] = abs(sum(h.masses) - 1) <= 1e-12
    checks["swap reflection"] = angular_histogram(s.swapped(), 0.1, 20).masses == h.masses[::-1]
    checks["sampler determinism"] = all(sp.sample(1000, 5) == sp.sample(1000, 5) for sp in
                                        (GaussianCopulaPareto(2, 0.5), MarshallOlkinPareto(2, 0.8, 0.7), BERN))
    plan = ExperimentPlan(spec=MarshallOlkinPareto(2, 0.8, 0.7), n=500, k=50, reps=20, p_list=(0.01, 0.001))
    checks["experiment determinism"] = run_experiment(plan).to_json() == run_experiment(plan, workers=2).to_json()
    elapsed = time.perf_counter() - start
    ok = all(checks.values()) and elapsed < 30
    failed = [name for name, v in checks.items() if not v]
    verdict(8, ok, f"{sum(checks.values())}/{len(checks)} invariants hold"
                   f"{' (failing: ' + ', '.join(failed) + ')' if failed else ''}, {elapsed:.1f}s")
    assert ok


def test_criterion_9_assumption_b(verdict):
    start = time.perf_counter()
    b1 = check_assumption_b(BERN).b1_decays()
    b2 = check_assumption_b(GaussianCopulaPareto(2.0, 0.0)).b2_decays()
    elapsed = time.perf_counter() - start
    ok = b1 and not b2 and elapsed < 60
    verdict(9, ok, f"Bernoulli (B1) decays: {b1}; independent (B2) decays: {b2}, {elapsed:.1f}s")
    assert ok


def test_criterion_10_data_pipeline(verdict):
    start = time.perf_counter()
    pa, pb = synthetic_price_pair()
    sample = joint_negative_pairs(returns(pa), returns(pb))
    report = analyze_pair(sample)
    anchor = report.curve[0]
    ok_anchor = (anchor["p"] == report.k / report.n and anchor["mme_ai"] == report.empirical["mme"]
                 and anchor["mes_ai"] == report.empirical["mes"])
    elapsed = time.perf_counter() - start
    ok = len(pa) - 1 == 2517 and sample.n == 687 and ok_anchor and elapsed < 10
    verdict(10, ok, f"{sample.n} joint-loss pairs from {len(pa) - 1} returns; anchor identity {ok_anchor}; "
                    f"alpha1 {report.alpha1:.2f}, beta {report.beta:.2f}, alpha0 {report.alpha0:.2f}, {elapsed:.1f}s")
    assert ok
