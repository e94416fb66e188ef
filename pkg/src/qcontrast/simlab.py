"""Monte Carlo engine for type I error and power of the testing procedures.

Data follow the location-scale model ``X = sigma_i * (eta - median(eta)) + mu_i``.
Random streams are keyed by ``(seed, data_id, replicate, purpose)``, so a
cell's result does not depend on the number of workers, on the order cells
are run in, or on which other methods are evaluated alongside it.  Cells that
share ``seed``, ``data_id`` and the data-generating settings see the same
generated data sets.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .contrasts import Direction, HypothesisFamily
from .covest import Estimator, KernelConfig
from .exceptions import DomainError, NumericalError, ResamplingError
from .inference import Method, run_procedure, test_statistics
from .quantiles import GroupedSample
from . import covest
from .statdist import RngStream, StudyDistribution, distribution_quantile, sample

__all__ = [
    "SIGMA_PRESETS",
    "SIZE_PRESETS",
    "Scenario",
    "ScenarioResult",
    "generate",
    "truth_oracle",
    "run_cell",
    "run_cells",
]

log = logging.getLogger(__name__)

SIGMA_PRESETS = {
    "hom": (1.0, 1.0, 1.0, 1.0),
    "pos": (1.0, 1.25, 1.5, 1.75),
    "neg": (1.75, 1.5, 1.25, 1.0),
}
SIZE_PRESETS = {"bal": (15, 15, 15, 15), "unb": (10, 10, 20, 20)}

_METHOD_CODES = {m: i + 1 for i, m in enumerate(Method)}
_SUPPORTED_GRIDS = {(0.5,), (0.25, 0.5, 0.75)}


@dataclass(frozen=True)
class Scenario:
    distribution: StudyDistribution
    sigmas: tuple
    sample_sizes: tuple
    mus: tuple
    family: HypothesisFamily
    method: Method
    cov_kind: Estimator
    alpha: float = 0.05
    B: int = 500
    n_sim: int = 1000
    seed: int = 0
    mc_samples: int = 100_000
    data_id: int = 0
    kernel: KernelConfig = field(default_factory=KernelConfig)

    def __post_init__(self):
        if not (len(self.sigmas) == len(self.sample_sizes) == len(self.mus)):
            raise DomainError("sigmas, sample_sizes and mus must have one entry per group")
        if any(s <= 0 for s in self.sigmas):
            raise DomainError("all sigmas must be positive")
        if any(int(n) != n or n < 2 for n in self.sample_sizes):
            raise DomainError("all sample sizes must be integers >= 2")
        if self.family.matrix.k != len(self.sigmas):
            raise DomainError("family k does not match the number of groups")
        if self.n_sim < 1:
            raise DomainError("n_sim must be >= 1")
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "cov_kind", Estimator(self.cov_kind))

    def data_key(self):
        return (self.seed, self.data_id, self.distribution.kind, tuple(self.sigmas),
                tuple(self.sample_sizes), tuple(self.mus))


@dataclass(frozen=True)
class ScenarioResult:
    """Rejection counts and rates for one cell.

    ``global_rate`` is the share of replicates rejecting the global null: the
    FWER when every local null is true, the global power otherwise.
    ``fwer`` counts replicates rejecting at least one true local null.
    """

    scenario: Scenario
    n_effective: int
    n_failed: int
    global_count: int
    fwer_count: int
    local_counts: tuple
    local_null_true: tuple
    wall_time: float

    @property
    def global_null_true(self) -> bool:
        return all(self.local_null_true)

    @property
    def global_rate(self) -> float:
        return self.global_count / self.n_effective

    @property
    def fwer(self) -> float:
        return self.fwer_count / self.n_effective

    @property
    def local_rates(self) -> tuple:
        return tuple(c / self.n_effective for c in self.local_counts)

    @property
    def fwer_or_power_global(self) -> float:
        return self.global_rate


def generate(scenario: Scenario, replicate: int) -> GroupedSample:
    gen = RngStream(scenario.seed, (scenario.data_id, replicate, 0)).generator()
    dist = scenario.distribution
    groups = []
    for s, n, mu in zip(scenario.sigmas, scenario.sample_sizes, scenario.mus):
        groups.append(s * (sample(dist, gen, int(n)) - dist.median) + mu)
    return GroupedSample(groups)


def population_quantiles(scenario: Scenario) -> np.ndarray:
    probs = scenario.family.grid.probs
    if tuple(probs) not in _SUPPORTED_GRIDS:
        raise DomainError(f"truth oracle supports grids {sorted(_SUPPORTED_GRIDS)}, got {probs}")
    dist = scenario.distribution
    base = np.array([distribution_quantile(dist.kind, p) for p in probs]) - dist.median
    return np.concatenate([s * base + mu for s, mu in zip(scenario.sigmas, scenario.mus)])


def truth_oracle(scenario: Scenario) -> tuple:
    """Whether each local null hypothesis holds for the population."""
    fam = scenario.family
    theta = fam.H @ population_quantiles(scenario)
    tol = 1e-9 * max(1.0, float(np.max(np.abs(theta), initial=0.0)))
    if fam.direction is Direction.TWO_SIDED:
        truth = np.abs(theta - fam.margins) <= tol
    elif fam.direction is Direction.NONINFERIORITY:
        truth = theta - fam.margins <= tol
    else:
        truth = np.abs(theta) >= fam.margins - tol
    return tuple(bool(t) for t in truth)


# ---------------------------------------------------------------------------
# execution
# ---------------------------------------------------------------------------

def _evaluate(scenarios, rep_start, rep_stop):
    """Run replicates ``[rep_start, rep_stop)`` for cells sharing one data key."""
    n_rep = rep_stop - rep_start
    out = []
    for sc in scenarios:
        out.append({
            "failed": np.zeros(n_rep, dtype=bool),
            "local": np.zeros((n_rep, sc.family.r), dtype=bool),
            "glob": np.zeros(n_rep, dtype=bool),
            "time": 0.0,
        })
    for j, rep in enumerate(range(rep_start, rep_stop)):
        data = generate(scenarios[0], rep)
        cov_cache = {}
        for sc, res in zip(scenarios, out):
            t0 = time.perf_counter()
            try:
                stats = None
                if sc.family.direction is not Direction.EQUIVALENCE:
                    key = (sc.cov_kind, sc.family.grid.probs, sc.alpha, sc.kernel)
                    if key not in cov_cache:
                        try:
                            cov_cache[key] = covest.estimate(data, sc.family.grid, sc.cov_kind,
                                                             alpha=sc.alpha, kernel=sc.kernel)
                        except NumericalError as exc:
                            cov_cache[key] = exc
                    cov = cov_cache[key]
                    if isinstance(cov, Exception):
                        raise cov
                    stats = test_statistics(data, sc.family, cov)
                rng = RngStream(sc.seed, (sc.data_id, rep, _METHOD_CODES[sc.method]))
                ds = run_procedure(data, sc.family, sc.method, sc.cov_kind, sc.alpha, B=sc.B,
                                   rng=rng, mc_samples=sc.mc_samples, kernel=sc.kernel,
                                   stats=stats)
                res["local"][j] = ds.local_reject
                res["glob"][j] = ds.global_reject
            except NumericalError as exc:
                log.debug("replicate %d failed: %s", rep, exc)
                res["failed"][j] = True
            res["time"] += time.perf_counter() - t0
    return out


def _chunks(n_sim, parallelism):
    n_chunks = max(1, min(n_sim, 4 * parallelism))
    edges = np.linspace(0, n_sim, n_chunks + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges, edges[1:]) if b > a]


def run_cells(scenarios, parallelism: int = 1) -> list:
    """Evaluate several cells; cells with equal data settings share generated data."""
    scenarios = list(scenarios)
    groups: dict = {}
    for idx, sc in enumerate(scenarios):
        groups.setdefault((sc.data_key(), sc.n_sim), []).append(idx)

    jobs = []
    for (_, n_sim), members in groups.items():
        cells = [scenarios[i] for i in members]
        for a, b in _chunks(n_sim, parallelism):
            jobs.append((members, cells, a, b))

    if parallelism > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            partials = list(pool.map(_evaluate, [j[1] for j in jobs], [j[2] for j in jobs],
                                     [j[3] for j in jobs]))
    else:
        partials = [_evaluate(cells, a, b) for _, cells, a, b in jobs]

    merged: dict = {}
    for (members, _, _, _), part in zip(jobs, partials):
        for i, res in zip(members, part):
            merged.setdefault(i, []).append(res)

    results = []
    for i, sc in enumerate(scenarios):
        parts = merged[i]
        failed = np.concatenate([p["failed"] for p in parts])
        local = np.vstack([p["local"] for p in parts])[~failed]
        glob = np.concatenate([p["glob"] for p in parts])[~failed]
        n_failed = int(failed.sum())
        if n_failed > 0.05 * sc.n_sim:
            raise ResamplingError(f"{n_failed} of {sc.n_sim} simulation replicates failed")
        truth = truth_oracle(sc)
        true_mask = np.array(truth)
        fwer_count = int(np.any(local[:, true_mask], axis=1).sum()) if true_mask.any() else 0
        results.append(ScenarioResult(
            scenario=sc,
            n_effective=int(glob.size),
            n_failed=n_failed,
            global_count=int(glob.sum()),
            fwer_count=fwer_count,
            local_counts=tuple(int(c) for c in local.sum(axis=0)),
            local_null_true=truth,
            wall_time=float(sum(p["time"] for p in parts)),
        ))
    return results


def run_cell(scenario: Scenario, parallelism: int = 1) -> ScenarioResult:
    return run_cells([scenario], parallelism)[0]
