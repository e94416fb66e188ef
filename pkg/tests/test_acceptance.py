"""Acceptance criteria at desk scale (n_sim = 1000, B = 500).

Each test prints one ``[PASS]`` / ``[FAIL]`` line; the lines are repeated in
the pytest terminal summary.  Run alone with::

    python3 -m pytest tests/test_acceptance.py -v
"""

import json
import math
import sys

import numpy as np
import pytest

from acceptance_report import report
from qcontrast.cli_io import main, make_family
from qcontrast.contrasts import HypothesisFamily, dunnett
from qcontrast.covest import Estimator, group_block
from qcontrast.critvals import CorrelationModel, max_gaussian_quantile
from qcontrast.inference import Method, permutation_law
from qcontrast.oracles import discrete_quantile, enumerate_permutation_law, kolmogorov_distance
from qcontrast.quantiles import GroupedSample
from qcontrast.simlab import SIGMA_PRESETS, SIZE_PRESETS, Scenario, run_cells
from qcontrast.statdist import RngStream, StudyDistribution, normal_quantile

SEED = 2024
N_SIM, B = 1000, 500
NORMAL = StudyDistribution.of("normal")

# reference FWER (%) for N(0,1), balanced, homoscedastic
REFERENCE_FWER = {
    ("two-sided", "bootstrap"): {
        Method.ASYMPTOTIC_MCTP: 3.40, Method.BOOTSTRAP_MCTP: 4.36,
        Method.ASYMPTOTIC_BONFERRONI: 3.12, Method.PERMUTATION_BONFERRONI: 3.62,
    },
    ("noninferiority", "kernel"): {
        Method.ASYMPTOTIC_MCTP: 4.04, Method.BOOTSTRAP_MCTP: 3.98,
        Method.ASYMPTOTIC_BONFERRONI: 3.44, Method.PERMUTATION_BONFERRONI: 3.36,
    },
}
# reference global power (%) of the Bonferroni permutation test, same cell,
# two-sided, bootstrap estimator
REFERENCE_PERM_POWER = {1.5: 76.50, 1.0: 39.30}


def dunnett_cells(direction, cov, shift=0.0, data_id=0):
    fam = make_family("dunnett", 4, direction=direction)
    return [Scenario(NORMAL, SIGMA_PRESETS["hom"], SIZE_PRESETS["bal"], (0.0, 0.0, 0.0, shift),
                     fam, method, cov, alpha=0.05, B=B, n_sim=N_SIM, seed=SEED, data_id=data_id)
            for method in Method]


@pytest.fixture(scope="module")
def null_cells():
    out = {}
    for i, (direction, cov) in enumerate(REFERENCE_FWER):
        out[direction, cov] = {r.scenario.method: r
                               for r in run_cells(dunnett_cells(direction, cov, data_id=i))}
    return out


@pytest.fixture(scope="module")
def power_cells():
    out = {}
    for i, delta in enumerate((0.5, 1.0, 1.5)):
        cells = dunnett_cells("two-sided", "bootstrap", shift=delta, data_id=10 + i)
        out[delta] = {r.scenario.method: r for r in run_cells(cells)}
    return out


def test_criterion_1_fwer_table(null_cells):
    ok = True
    parts = []
    for key, ref in REFERENCE_FWER.items():
        for method, want in ref.items():
            got = 100 * null_cells[key][method].fwer
            hit = abs(got - want) <= 2.0
            ok &= hit
            parts.append(f"{key[0]}/{key[1]}/{method.value} {got:.2f} vs {want:.2f}"
                         f"{'' if hit else ' (off)'}")
    assert report(1, ok, "FWER within 2pp of reference: " + "; ".join(parts))


def test_criterion_2_bonferroni_bound(null_cells):
    bound = 100 * (0.05 + 3 * math.sqrt(0.05 * 0.95 / N_SIM))
    vals = {f"{k[0]}/{k[1]}/{m.value}": 100 * cells[m].fwer
            for k, cells in null_cells.items()
            for m in (Method.ASYMPTOTIC_BONFERRONI, Method.PERMUTATION_BONFERRONI)}
    ok = all(v <= bound for v in vals.values())
    assert report(2, ok, f"Bonferroni FWER <= {bound:.2f}%: "
                  + ", ".join(f"{k} {v:.2f}" for k, v in vals.items()))


def test_criterion_3_permutation_exactness():
    fam = HypothesisFamily(dunnett(2), 0.0, "two-sided", (0.5,))
    cells = [Scenario(NORMAL, (1.0, 1.0), (8, 8), (0.0, 0.0), fam,
                      Method.PERMUTATION_BONFERRONI, kind, B=B, n_sim=2000, seed=SEED,
                      data_id=20)
             for kind in Estimator]
    rates = {r.scenario.cov_kind.value: 100 * r.global_rate for r in run_cells(cells)}
    ok = all(3.5 <= v <= 6.5 for v in rates.values())
    assert report(3, ok, "global permutation FWER in [3.5, 6.5]%: "
                  + ", ".join(f"{k} {v:.2f}" for k, v in rates.items()))


def test_criterion_4_power(power_cells):
    ordering = {m.value: (100 * power_cells[0.5][m].global_rate,
                          100 * power_cells[1.5][m].global_rate) for m in Method}
    ok = all(hi > lo for lo, hi in ordering.values())
    parts = [f"{m} {lo:.2f} -> {hi:.2f}" for m, (lo, hi) in ordering.items()]
    for delta, want in REFERENCE_PERM_POWER.items():
        got = 100 * power_cells[delta][Method.PERMUTATION_BONFERRONI].global_rate
        hit = abs(got - want) <= 4.0
        ok &= hit
        parts.append(f"perm power at delta={delta} {got:.2f} vs {want:.2f}"
                     f"{'' if hit else ' (off)'}")
    assert report(4, ok, "power(1.5) > power(0.5) for every method; " + "; ".join(parts))


def _enumeration_case(data, k, kind, beta_list=(0.5, 0.9, 0.95, 0.975), draws=50_000):
    fam = HypothesisFamily(dunnett(k), 0.0, "two-sided", (0.5,))
    exact = np.abs(enumerate_permutation_law(data, fam, kind).statistics)
    mc = np.abs(permutation_law(data, fam, kind, draws, RngStream(SEED, (k, data.n))))
    worst_ks = 0.0
    ok = True
    for l in range(exact.shape[1]):
        worst_ks = max(worst_ks, kolmogorov_distance(mc[:, l], exact[:, l]))
        for beta in beta_list:
            slack = 4 * math.sqrt(beta * (1 - beta) / draws) + 1 / exact.shape[0]
            q = round(discrete_quantile(mc[:, l], beta), 9)
            lo = round(discrete_quantile(exact[:, l], max(beta - slack, 1e-9)), 9)
            hi = round(discrete_quantile(exact[:, l], min(beta + slack, 1.0)), 9)
            ok &= lo <= q <= hi
    return ok and worst_ks < 0.02, worst_ks


def test_criterion_5_enumeration_oracle():
    gen = RngStream(SEED, (5,)).generator()
    two = GroupedSample([gen.standard_normal(5), gen.standard_normal(5)])
    three = GroupedSample([gen.standard_normal(3), gen.standard_normal(4), gen.standard_normal(3)])
    ok = True
    parts = []
    for name, data, k in (("5+5", two, 2), ("3+4+3", three, 3)):
        for kind in Estimator:
            hit, ks = _enumeration_case(data, k, kind)
            ok &= hit
            parts.append(f"{name}/{kind.value} KS {ks:.4f}{'' if hit else ' (off)'}")
    assert report(5, ok, "enumerated vs sampled permutation quantiles: " + ", ".join(parts))


def test_criterion_6_estimator_consistency():
    x = RngStream(SEED, (6,)).generator().standard_normal(10_000)
    vals = {kind.value: group_block(x, (0.5,), kind)[0][0, 0] for kind in Estimator}
    ok = all(abs(v - math.pi / 2) <= 0.1 * math.pi / 2 for v in vals.values())
    assert report(6, ok, "median variance within 10% of pi/2: "
                  + ", ".join(f"{k} {v:.4f}" for k, v in vals.items()))


def test_criterion_7_closed_form_mctp():
    # 10^6 draws put the Monte Carlo SE near 0.002, well inside the 0.01
    # tolerance; at the 100k default the SE is about 0.007
    draws = 1_000_000
    one = CorrelationModel(np.eye(1))
    checks = {
        "r=1 one-sided 95%": (max_gaussian_quantile(one, 0.95, False, draws,
                                                    RngStream(SEED, (71,))),
                              normal_quantile(0.95)),
        "r=1 two-sided 95%": (max_gaussian_quantile(one, 0.95, True, draws,
                                                    RngStream(SEED, (72,))),
                              normal_quantile(0.975)),
        "2x2 identity two-sided 95%": (
            max_gaussian_quantile(CorrelationModel(np.eye(2)), 0.95, True, draws,
                                  RngStream(SEED, (73,))), 2.2365),
    }
    ok = all(abs(got - want) < 0.01 for got, want in checks.values())
    default = max_gaussian_quantile(one, 0.95, False, rng=RngStream(SEED, (71,)))
    assert report(7, ok, ", ".join(f"{k} {g:.4f} vs {w:.4f}" for k, (g, w) in checks.items())
                  + f" ({draws} draws; default 100k draws gives {default:.4f} for r=1 one-sided)")


def test_criterion_8_determinism(tmp_path):
    config = {"seed": SEED, "n_sim": 30, "B": 100, "mc_samples": 10_000,
              "grid": {"distribution": ["normal", "chisq3"], "sample_sizes": ["unb"],
                       "sigmas": ["hom", "neg"], "shift": [0.0, 1.0], "cov": ["kernel"],
                       "method": ["perm-bonferroni", "asymp-mctp", "boot-mctp"]}}
    path = tmp_path / "grid.json"
    path.write_text(json.dumps(config))
    outputs = {}
    for threads in (1, 2, 4):
        for fmt in ("jsonl", "csv"):
            out = tmp_path / f"out{threads}.{fmt}"
            assert main(["simulate", "--config", str(path), "--threads", str(threads),
                         "--format", fmt, "--output", str(out)]) == 0
            outputs[threads, fmt] = out.read_bytes()
    ok = all(outputs[t, f] == outputs[1, f] for t in (2, 4) for f in ("jsonl", "csv"))
    assert report(8, ok, "simulate output byte-identical for threads 1, 2, 4 "
                  f"({len(outputs[1, 'jsonl'])} bytes jsonl, 24 cells)")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
