"""CSV ingestion, configuration, result serialization and the command line.

Commands::

    qcontrast analyze   --input F --group-col G --value-col V [options]
    qcontrast simulate  --config F [--paper-scale] [--threads T]
    qcontrast matrices  --family tukey --k 4 [--effect median-iqr]
    qcontrast selftest

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import logging
import math
import sys
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .contrasts import (MEDIAN_IQR_GRID, Direction, Family, HypothesisFamily,
                        build, custom, kron_with_effect)
from .covest import Estimator, KernelConfig
from .exceptions import DataError, DomainError, QContrastError
from .inference import DecisionSet, Method, run_procedure
from .oracles import selftest
from .quantiles import GroupedSample
from .simlab import SIGMA_PRESETS, SIZE_PRESETS, Scenario, ScenarioResult, run_cells
from .statdist import Distribution, RngStream, StudyDistribution

__all__ = [
    "MISSING_TOKENS",
    "read_grouped_csv",
    "make_family",
    "AnalysisConfig",
    "ResultRecord",
    "analyze",
    "SimulationConfig",
    "load_simulation_config",
    "simulate",
    "SIMULATION_COLUMNS",
    "format_simulation",
    "parse_delimited",
    "main",
]

log = logging.getLogger("qcontrast")

MISSING_TOKENS = frozenset({"", "na", "nan", "null"})
FULL_SCALE = {"n_sim": 5000, "B": 2000}


def _fmt(x) -> str:
    """Full-precision text for a float (17 significant digits)."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


# ---------------------------------------------------------------------------
# data input
# ---------------------------------------------------------------------------

def read_grouped_csv(path, group_column: str, value_column: str) -> GroupedSample:
    """Read a long-format CSV into groups, ordered by first appearance of each label.

    Empty or ``NA`` values are skipped and counted in a warning; any other
    value that is not a finite number is an error naming the file line.
    """
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from exc
    with fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in (group_column, value_column):
            if col not in header:
                raise DataError(f"column {col!r} not found in {path} (columns: {header})")
        groups: dict = {}
        missing = 0
        for row in reader:
            line = reader.line_num
            label = (row[group_column] or "").strip()
            raw = (row[value_column] or "").strip()
            if raw.lower() in MISSING_TOKENS or label == "":
                missing += 1
                continue
            try:
                value = float(raw)
            except ValueError:
                raise DataError(f"{path}, line {line}: value {raw!r} is not numeric") from None
            if not math.isfinite(value):
                raise DataError(f"{path}, line {line}: value {raw!r} is not finite")
            groups.setdefault(label, []).append(value)
    if missing:
        warnings.warn(f"{path}: skipped {missing} row(s) with a missing group or value",
                      stacklevel=2)
    if not groups:
        raise DataError(f"{path} has no usable rows")
    return GroupedSample([np.array(v) for v in groups.values()], list(groups))


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------

def parse_rows(text: str) -> np.ndarray:
    """``"-1,1,0;-1,0,1"`` -> 2 x 3 array."""
    try:
        return np.array([[float(v) for v in row.split(",")] for row in text.split(";")])
    except ValueError as exc:
        raise DomainError(f"cannot parse contrast rows {text!r}: {exc}") from None


def make_family(family, k: int, *, effect: str = "median", quantiles=None,
                direction="two-sided", margin=0.0, reverse: bool = False,
                rows=None, labels=None, group_labels=None) -> HypothesisFamily:
    """Hypothesis family from command-line or config style settings.

    A named family on a grid of several probabilities (with ``effect=median``)
    compares groups at every probability, i.e. ``base ⊗ I_m``.
    """
    family = Family(family)
    direction = Direction(direction)
    if family is Family.CUSTOM:
        if rows is None:
            raise DomainError("a custom family needs contrast rows")
        grid = tuple(quantiles) if quantiles else (0.5,)
        matrix = custom(rows, k, labels)
    elif effect == "median-iqr":
        if quantiles and tuple(quantiles) != MEDIAN_IQR_GRID:
            raise DomainError(f"effect median-iqr uses the grid {MEDIAN_IQR_GRID}")
        matrix, g = build(family, k, effect)
        grid = g.probs
    elif effect == "median":
        matrix, g = build(family, k)
        grid = tuple(quantiles) if quantiles else g.probs
        if len(grid) > 1:
            matrix = kron_with_effect(matrix, np.eye(len(grid)), [f"p={p:g}" for p in grid])
    else:
        raise DomainError(f"unknown effect {effect!r}")
    if group_labels is not None:
        matrix = matrix.relabel(group_labels)
    fam = HypothesisFamily(matrix, margin, direction, grid)
    if reverse:
        fam = HypothesisFamily(matrix.negate(), fam.margins, direction, grid).reversed()
    return fam


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AnalysisConfig:
    input_path: str
    group_column: str
    value_column: str
    family: str = "dunnett"
    reference: str | None = None
    direction: str = "two-sided"
    reverse: bool = False
    margin: object = 0.0
    quantiles: tuple | None = None
    effect: str = "median"
    contrasts: str | None = None
    method: str = "perm-bonferroni"
    cov: str = "kernel"
    alpha: float = 0.05
    B: int = 2000
    mc_samples: int = 100_000
    seed: int = 0
    bandwidth: object = "silverman"
    output: str = "table"


@dataclass(frozen=True)
class ResultRecord:
    labels: tuple
    estimates: tuple
    statistics: tuple
    critical_values: tuple
    adjusted_p: tuple
    reject: tuple
    global_reject: bool
    method: str
    estimator: str
    direction: str
    alpha: float
    seed: int
    B: int | None
    B_effective: int | None
    groups: tuple = field(default=())
    sizes: tuple = field(default=())

    @classmethod
    def from_decision(cls, ds: DecisionSet, seed: int, data: GroupedSample) -> "ResultRecord":
        return cls(
            labels=tuple(ds.labels),
            estimates=tuple(float(v) for v in ds.statistics.estimates),
            statistics=tuple(float(v) for v in ds.statistics.values),
            critical_values=tuple(float(v) for v in ds.critical_values),
            adjusted_p=tuple(float(v) for v in ds.adjusted_p),
            reject=tuple(bool(v) for v in ds.local_reject),
            global_reject=bool(ds.global_reject),
            method=ds.method.value,
            estimator=ds.estimator.value,
            direction=ds.direction.value,
            alpha=float(ds.alpha),
            seed=int(seed),
            B=ds.B,
            B_effective=ds.B_effective,
            groups=tuple(str(g) for g in data.labels),
            sizes=tuple(data.sizes),
        )

    def footer(self) -> dict:
        return {"global_reject": self.global_reject, "method": self.method,
                "estimator": self.estimator, "direction": self.direction,
                "alpha": self.alpha, "seed": self.seed, "B": self.B,
                "B_effective": self.B_effective}

    def to_delimited(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["contrast", "estimate", "statistic", "critical_value", "adjusted_p",
                    "reject"])
        for row in zip(self.labels, self.estimates, self.statistics, self.critical_values,
                       self.adjusted_p, self.reject):
            w.writerow([row[0], *map(_fmt, row[1:5]), int(row[5])])
        for key, val in self.footer().items():
            buf.write(f"# {key}={_fmt(val) if isinstance(val, float) else val}\n")
        return buf.getvalue()

    def to_json(self) -> str:
        rows = [
            {"contrast": l, "estimate": e, "statistic": t, "critical_value": c,
             "adjusted_p": p, "reject": r}
            for l, e, t, c, p, r in zip(self.labels, self.estimates, self.statistics,
                                        self.critical_values, self.adjusted_p, self.reject)
        ]
        doc = {"contrasts": rows, **self.footer(),
               "groups": dict(zip(self.groups, self.sizes))}
        return json.dumps(doc, sort_keys=True, allow_nan=True) + "\n"

    def to_table(self) -> str:
        width = max([len(l) for l in self.labels] + [8])
        lines = [f"{'contrast':<{width}}  {'estimate':>10}  {'statistic':>10}  "
                 f"{'critical':>9}  {'adj. p':>8}  reject"]
        for l, e, t, c, p, r in zip(self.labels, self.estimates, self.statistics,
                                    self.critical_values, self.adjusted_p, self.reject):
            lines.append(f"{l:<{width}}  {e:>10.4f}  {t:>10.4f}  {c:>9.4f}  {p:>8.4f}  "
                         f"{'yes' if r else 'no'}")
        lines.append("")
        lines.append(f"global null rejected: {'yes' if self.global_reject else 'no'}")
        resample = f", B={self.B} (effective {self.B_effective})" if self.B else ""
        lines.append(f"method {self.method}, estimator {self.estimator}, {self.direction}, "
                     f"alpha={self.alpha:g}, seed={self.seed}{resample}")
        return "\n".join(lines) + "\n"

    def render(self, output: str) -> str:
        if output == "table":
            return self.to_table()
        if output == "csv":
            return self.to_delimited()
        if output == "json":
            return self.to_json()
        raise DomainError(f"unknown output format {output!r}")


def analyze(config: AnalysisConfig) -> ResultRecord:
    data = read_grouped_csv(config.input_path, config.group_column, config.value_column)
    if config.reference is not None:
        data = data.reorder(config.reference)
    fam = make_family(
        config.family, data.k, effect=config.effect, quantiles=config.quantiles,
        direction=config.direction, margin=config.margin, reverse=config.reverse,
        rows=parse_rows(config.contrasts) if config.contrasts else None,
        group_labels=data.labels,
    )
    ds = run_procedure(data, fam, config.method, config.cov, config.alpha, B=config.B,
                       rng=RngStream(config.seed), mc_samples=config.mc_samples,
                       kernel=KernelConfig(config.bandwidth))
    return ResultRecord.from_decision(ds, config.seed, data)


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

GRID_KEYS = ("distribution", "sample_sizes", "sigmas", "shift", "family", "effect",
             "direction", "margin", "cov", "method", "alpha")
GRID_DEFAULTS = {
    "distribution": ["normal"], "sample_sizes": ["bal"], "sigmas": ["hom"], "shift": [0.0],
    "family": ["dunnett"], "effect": ["median"], "direction": ["two-sided"],
    "margin": [0.0], "cov": ["bootstrap"], "method": [m.value for m in Method],
    "alpha": [0.05],
}
TOP_KEYS = {"seed", "n_sim", "B", "mc_samples", "grid"}

SIMULATION_COLUMNS = (
    "cell", "distribution", "sample_sizes", "sigmas", "shift", "family", "effect",
    "direction", "margin", "cov", "method", "alpha", "n_sim", "B", "n_effective",
    "n_failed", "global_null", "global_rate", "fwer", "local_rates",
)
SIMULATION_HELP = f"""\
Configuration is a JSON object:

  {{"seed": 1, "n_sim": 1000, "B": 500, "mc_samples": 100000,
    "grid": {{"distribution": ["normal", "t3"], "sample_sizes": ["bal", [10, 10, 20, 20]],
             "sigmas": ["hom"], "shift": [0, 1.5], "family": ["dunnett"],
             "effect": ["median"], "direction": ["two-sided"], "margin": [0],
             "cov": ["bootstrap"], "method": ["perm-bonferroni", "boot-mctp"],
             "alpha": [0.05]}}}}

Every grid entry is a list (a scalar is read as a one-element list) and the
cells are the cross product in the key order {', '.join(GRID_KEYS)}.
Omitted keys take defaults.  An empty list gives an empty table.
Presets: sample_sizes bal={SIZE_PRESETS['bal']}, unb={SIZE_PRESETS['unb']};
sigmas hom/pos/neg.  The shift is added to the last group.  A family may be
{{"rows": [[...]], "labels": [...]}} for a custom matrix.

Delimited output columns: {', '.join(SIMULATION_COLUMNS)}.
Lists inside a cell are separated by ';'.  Floats carry 17 significant
digits.  Wall time is logged to stderr and never written to the output.
"""


@dataclass(frozen=True)
class SimulationConfig:
    seed: int
    n_sim: int
    B: int
    mc_samples: int
    cells: tuple          # (settings dict, Scenario) pairs


def _as_list(value):
    return value if isinstance(value, list) else [value]


def _resolve(name, value, presets):
    if isinstance(value, str):
        if value not in presets:
            raise DomainError(f"unknown {name} preset {value!r}; choose from {sorted(presets)}")
        return tuple(presets[value])
    if not isinstance(value, list) or not value:
        raise DomainError(f"{name} must be a preset name or a list of numbers")
    return tuple(value)


def _family_of(settings, k):
    fam = settings["family"]
    if isinstance(fam, dict):
        return make_family("custom", k, direction=settings["direction"],
                           margin=settings["margin"], rows=fam.get("rows"),
                           labels=fam.get("labels"), quantiles=fam.get("quantiles"))
    return make_family(fam, k, effect=settings["effect"], direction=settings["direction"],
                       margin=settings["margin"])


def load_simulation_config(path, *, full_scale: bool = False) -> SimulationConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise DomainError(f"cannot read config {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise DomainError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise DomainError("config must be a JSON object")
    unknown = set(raw) - TOP_KEYS
    if unknown:
        raise DomainError(f"unknown config keys {sorted(unknown)}")
    grid = raw.get("grid", {})
    unknown = set(grid) - set(GRID_KEYS)
    if unknown:
        raise DomainError(f"unknown grid keys {sorted(unknown)}")
    seed = int(raw.get("seed", 0))
    n_sim = int(raw.get("n_sim", 1000))
    B = int(raw.get("B", 500))
    mc = int(raw.get("mc_samples", 100_000))
    if full_scale:
        n_sim, B = FULL_SCALE["n_sim"], FULL_SCALE["B"]
    if seed < 0 or n_sim < 1 or B < 1:
        raise DomainError("seed must be >= 0, n_sim and B must be >= 1")

    lists = [_as_list(grid.get(key, GRID_DEFAULTS[key])) for key in GRID_KEYS]
    data_ids: dict = {}
    cells = []
    for combo in itertools.product(*lists):
        settings = dict(zip(GRID_KEYS, combo))
        try:
            dist = StudyDistribution.of(Distribution(settings["distribution"]))
            sizes = tuple(int(v) for v in _resolve("sample_sizes", settings["sample_sizes"],
                                                   SIZE_PRESETS))
            sigmas = tuple(float(v) for v in _resolve("sigmas", settings["sigmas"],
                                                      SIGMA_PRESETS))
            k = len(sizes)
            mus = (0.0,) * (k - 1) + (float(settings["shift"]),)
            fam = _family_of(settings, k)
        except (ValueError, TypeError) as exc:
            raise DomainError(f"invalid grid cell {settings}: {exc}") from None
        data_key = (dist.kind, sizes, sigmas, mus)
        data_id = data_ids.setdefault(data_key, len(data_ids))
        sc = Scenario(dist, sigmas, sizes, mus, fam, Method(settings["method"]),
                      Estimator(settings["cov"]), alpha=float(settings["alpha"]), B=B,
                      n_sim=n_sim, seed=seed, mc_samples=mc, data_id=data_id)
        cells.append((settings, sc))
    return SimulationConfig(seed, n_sim, B, mc, tuple(cells))


def simulate(config: SimulationConfig, threads: int = 1) -> list:
    t0 = time.perf_counter()
    results = run_cells([sc for _, sc in config.cells], parallelism=threads)
    log.info("simulated %d cell(s) in %.1f s", len(results), time.perf_counter() - t0)
    return results


def _cell_value(v):
    if isinstance(v, (list, tuple)):
        return ";".join(_cell_value(x) for x in v)
    if isinstance(v, dict):
        return json.dumps(v, sort_keys=True)
    if isinstance(v, float):
        return _fmt(v)
    return str(v)


def _simulation_record(idx, settings, res: ScenarioResult) -> dict:
    sc = res.scenario
    return {
        "cell": idx, "distribution": sc.distribution.kind.value,
        "sample_sizes": list(sc.sample_sizes), "sigmas": list(sc.sigmas),
        "shift": float(sc.mus[-1]),
        "family": settings["family"] if isinstance(settings["family"], str) else "custom",
        "effect": settings["effect"], "direction": sc.family.direction.value,
        "margin": float(settings["margin"]), "cov": sc.cov_kind.value,
        "method": sc.method.value, "alpha": float(sc.alpha), "n_sim": sc.n_sim, "B": sc.B,
        "n_effective": res.n_effective, "n_failed": res.n_failed,
        "global_null": res.global_null_true, "global_rate": res.global_rate,
        "fwer": res.fwer, "local_rates": list(res.local_rates),
    }


def format_simulation(config: SimulationConfig, results, fmt: str = "csv") -> str:
    records = [_simulation_record(i, s, r) for i, ((s, _), r) in
               enumerate(zip(config.cells, results))]
    if fmt == "jsonl":
        head = {"n_sim": config.n_sim, "B": config.B, "seed": config.seed,
                "mc_samples": config.mc_samples, "qcontrast": __version__}
        lines = [json.dumps({"header": head}, sort_keys=True)]
        lines += [json.dumps(r, sort_keys=True) for r in records]
        return "\n".join(lines) + "\n"
    if fmt != "csv":
        raise DomainError(f"unknown output format {fmt!r}")
    buf = io.StringIO()
    buf.write(f"# qcontrast {__version__} simulate n_sim={config.n_sim} B={config.B} "
              f"seed={config.seed} mc_samples={config.mc_samples}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SIMULATION_COLUMNS)
    for r in records:
        w.writerow([_cell_value(r[c]) for c in SIMULATION_COLUMNS])
    return buf.getvalue()


def parse_delimited(text: str):
    """Parse delimited output back into ``(rows, comments)``; numbers become floats."""
    comments = [l[1:].strip() for l in text.splitlines() if l.startswith("#")]
    body = [l for l in text.splitlines() if l and not l.startswith("#")]
    rows = []
    for row in csv.DictReader(body):
        out = {}
        for key, val in row.items():
            try:
                out[key] = float(val)
            except ValueError:
                out[key] = val
        rows.append(out)
    return rows, comments


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------

def _quantile_list(text):
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse quantiles {text!r}") from None


def _margin(text):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse margin {text!r}") from None
    return vals[0] if len(vals) == 1 else np.array(vals)


def _bandwidth(text):
    return text if text == "silverman" else float(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcontrast",
        description="Quantile-based multiple contrast tests.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="test a contrast family on grouped CSV data")
    a.add_argument("--input", required=True, help="long-format CSV file")
    a.add_argument("--group-col", required=True)
    a.add_argument("--value-col", required=True)
    a.add_argument("--family", default="dunnett", choices=[f.value for f in Family
                                                           if f is not Family.KRONECKER])
    a.add_argument("--contrasts", help="custom rows, e.g. '-1,1,0;-1,0,1'")
    a.add_argument("--reference", help="group label used as the Dunnett reference")
    a.add_argument("--direction", default="two-sided", choices=[d.value for d in Direction])
    a.add_argument("--reverse", action="store_true",
                   help="non-inferiority with H0: m_ref - m_l >= margin instead of "
                        "H0: m_l - m_ref <= margin")
    a.add_argument("--margin", type=_margin, default=0.0,
                   help="scalar or comma list, one per contrast")
    a.add_argument("--quantiles", type=_quantile_list, help="probabilities, e.g. 0.5")
    a.add_argument("--effect", default="median", choices=["median", "median-iqr"])
    a.add_argument("--method", default="perm-bonferroni", choices=[m.value for m in Method])
    a.add_argument("--cov", default="kernel", choices=[e.value for e in Estimator])
    a.add_argument("--alpha", type=float, default=0.05)
    a.add_argument("--B", type=int, default=2000, help="resampling replicates")
    a.add_argument("--mc-samples", type=int, default=100_000)
    a.add_argument("--bandwidth", type=_bandwidth, default="silverman")
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--format", default="table", choices=["table", "csv", "json"])

    s = sub.add_parser("simulate", help="Monte Carlo FWER and power study",
                       description=SIMULATION_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    s.add_argument("--config", required=True)
    s.add_argument("--paper-scale", action="store_true", help="n_sim=5000, B=2000")
    s.add_argument("--threads", type=int, default=1, help="worker processes")
    s.add_argument("--format", default="csv", choices=["csv", "jsonl"])
    s.add_argument("--output", help="write to this file instead of stdout")

    m = sub.add_parser("matrices", help="print a contrast matrix")
    m.add_argument("--family", required=True, choices=["dunnett", "tukey", "grand-mean"])
    m.add_argument("--k", type=int, required=True)
    m.add_argument("--effect", default="median", choices=["median", "median-iqr"])

    sub.add_parser("selftest", help="run the built-in oracle cross-checks")
    return parser


def _cmd_analyze(args, out):
    cfg = AnalysisConfig(
        input_path=args.input, group_column=args.group_col, value_column=args.value_col,
        family=args.family, reference=args.reference, direction=args.direction,
        reverse=args.reverse, margin=args.margin, quantiles=args.quantiles,
        effect=args.effect, contrasts=args.contrasts, method=args.method, cov=args.cov,
        alpha=args.alpha, B=args.B, mc_samples=args.mc_samples, seed=args.seed,
        bandwidth=args.bandwidth, output=args.format,
    )
    out.write(analyze(cfg).render(cfg.output))
    return 0


def _cmd_simulate(args, out):
    if args.threads < 1:
        raise DomainError("--threads must be >= 1")
    cfg = load_simulation_config(args.config, full_scale=args.paper_scale)
    text = format_simulation(cfg, simulate(cfg, args.threads), args.format)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        out.write(text)
    return 0


def _cmd_matrices(args, out):
    matrix, grid = build(args.family, args.k, args.effect)
    out.write(f"# family={matrix.family.value} k={matrix.k} "
              f"grid={','.join(f'{p:g}' for p in grid.probs)}\n")
    width = max(len(l) for l in matrix.labels)
    for label, row in zip(matrix.labels, matrix.rows + 0.0):
        out.write(f"{label:<{width}}  " + " ".join(f"{v:>7.4g}" for v in row) + "\n")
    return 0


def _cmd_selftest(args, out):
    results = selftest()
    for r in results:
        out.write(f"{'PASS' if r.ok else 'FAIL'}  {r.name}: {r.detail}\n")
    failed = sum(not r.ok for r in results)
    out.write(f"{len(results) - failed}/{len(results)} checks passed\n")
    return 0 if failed == 0 else 4


_COMMANDS = {"analyze": _cmd_analyze, "simulate": _cmd_simulate,
             "matrices": _cmd_matrices, "selftest": _cmd_selftest}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        return _COMMANDS[args.command](args, out)
    except QContrastError as exc:
        print(f"qcontrast: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
