"""Experiment orchestration: seeded replication sweeps, aggregation, reports.

Each sweep grid point gets an independent master seed derived from the
experiment seed and the grid index, and each replication is a pure function
of (grid seed, replication index).  Replications are embarrassingly parallel;
results are always assembled in replication order, so output files are
byte-identical regardless of worker count.

The per-replication path counter evaluates only the pair draws a k-hop path
can actually use (anchor rows plus the candidate intermediate pairs for
k <= 3), which keeps sweeps at desk scale fast; because edge draws are keyed
by the vertex pair, the lazy route agrees bit-for-bit with realizing the full
adjacency matrix.
"""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import poisson as poisson_dist

from .analytics import (
    QuadratureSpec,
    mean_khop_numeric,
    mean_khop_rayleigh,
    variance_terms_numeric,
    variance_threehop_rayleigh,
)
from .errors import ValidationError
from .model import HARD_DISK, RAYLEIGH, TABULATED, ConnectionSpec, ModelParams
from .moments import (
    ExistenceBracket,
    PathCountSamples,
    bonferroni_bound_order2,
    quadratic_existence_bound,
    truncated_zero_probability,
)
from .paths import classify_path_pairs, count_khop_paths
from .rng import derive_subseed, pair_uniforms
from .sampler import (
    connection_probabilities,
    realize_graph,
    region_for,
    sample_conditioned_ppp,
)

PAIR_CLASSES = ("sigma0", "sigma11", "sigma12", "sigma21", "sigma22")
DEFAULT_BRACKET_ORDERS = (3, 4, 5, 80)
PRESET_NAMES = ("fig-mean-var", "fig-distribution", "fig-existence")


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    """A complete, self-contained experiment definition.

    ``collect_pair_structures`` classifies every ordered pair of 3-hop paths
    per replication (skip it for dense sweeps where only the count matters).
    ``bracket_orders`` are the truncation orders of the existence brackets.
    """

    name: str
    params_grid: tuple[ModelParams, ...]
    replications: int
    seed: int
    outputs: str
    strict_numerics: bool = False
    collect_pair_structures: bool = True
    bracket_orders: tuple[int, ...] = DEFAULT_BRACKET_ORDERS
    emit_histograms: bool = False
    dump_raw_counts: bool = False
    attach_numeric: bool = False

    def __post_init__(self) -> None:
        problems = []
        if not self.name:
            problems.append("name: must be nonempty")
        if not self.params_grid:
            problems.append("params_grid: must contain at least one grid point")
        if not isinstance(self.replications, (int, np.integer)) or self.replications < 1:
            problems.append(f"replications: must be an integer >= 1, got {self.replications!r}")
        if any(m < 0 for m in self.bracket_orders):
            problems.append("bracket_orders: orders must be >= 0")
        if problems:
            raise ValidationError("invalid experiment config: " + "; ".join(problems))
        object.__setattr__(self, "params_grid", tuple(self.params_grid))
        object.__setattr__(self, "bracket_orders", tuple(int(m) for m in self.bracket_orders))


def connection_to_dict(spec: ConnectionSpec) -> dict:
    out = {"kind": spec.kind}
    if spec.kind == RAYLEIGH:
        out.update(beta=spec.beta, eta=spec.eta)
    elif spec.kind == HARD_DISK:
        out.update(r0=spec.r0)
    else:
        out.update(table=[list(knot) for knot in spec.table])
    return out


def connection_from_dict(d: dict) -> ConnectionSpec:
    kind = d.get("kind")
    if kind == RAYLEIGH:
        return ConnectionSpec.rayleigh(beta=d.get("beta", 1.0), eta=d.get("eta", 2.0))
    if kind == HARD_DISK:
        return ConnectionSpec.hard_disk(d["r0"])
    if kind == TABULATED:
        return ConnectionSpec.tabulated(d["table"])
    raise ValidationError(f"unknown connection kind {kind!r}")


def params_to_dict(params: ModelParams) -> dict:
    return {
        "rho": params.rho,
        "connection": connection_to_dict(params.connection),
        "anchor_distance": params.anchor_distance,
        "k": int(params.k),
        "margin": params.margin,
    }


def params_from_dict(d: dict) -> ModelParams:
    return ModelParams(
        rho=d["rho"],
        connection=connection_from_dict(d["connection"]),
        anchor_distance=d["anchor_distance"],
        k=int(d["k"]),
        margin=d.get("margin"),
    )


def config_to_dict(config: ExperimentConfig) -> dict:
    return {
        "name": config.name,
        "params_grid": [params_to_dict(p) for p in config.params_grid],
        "replications": int(config.replications),
        "seed": int(config.seed),
        "outputs": config.outputs,
        "strict_numerics": config.strict_numerics,
        "collect_pair_structures": config.collect_pair_structures,
        "bracket_orders": list(config.bracket_orders),
        "emit_histograms": config.emit_histograms,
        "dump_raw_counts": config.dump_raw_counts,
        "attach_numeric": config.attach_numeric,
    }


def config_from_dict(d: dict) -> ExperimentConfig:
    try:
        grid = tuple(params_from_dict(p) for p in d["params_grid"])
        return ExperimentConfig(
            name=d["name"],
            params_grid=grid,
            replications=int(d["replications"]),
            seed=int(d["seed"]),
            outputs=d["outputs"],
            strict_numerics=bool(d.get("strict_numerics", False)),
            collect_pair_structures=bool(d.get("collect_pair_structures", True)),
            bracket_orders=tuple(d.get("bracket_orders", DEFAULT_BRACKET_ORDERS)),
            emit_histograms=bool(d.get("emit_histograms", False)),
            dump_raw_counts=bool(d.get("dump_raw_counts", False)),
            attach_numeric=bool(d.get("attach_numeric", False)),
        )
    except KeyError as exc:
        raise ValidationError(f"config file missing required field: {exc}") from exc


def load_config(path: str) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return config_from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# replication engine
# ---------------------------------------------------------------------------


def _anchor_neighbor_mask(pts, spec, seed, replication, anchor, idx):
    dx = pts[2:, 0] - pts[anchor, 0]
    dy = pts[2:, 1] - pts[anchor, 1]
    probs = connection_probabilities(spec, dx * dx + dy * dy)
    u = pair_uniforms(seed, replication, anchor, idx)
    return u < probs


def _threehop_pairs_lazy(pts, spec, seed, replication) -> np.ndarray:
    """Intermediate pairs (z1, z2) of all 3-hop paths, without building the
    full adjacency matrix; bit-identical to the full realization."""
    n = len(pts)
    if n <= 3:
        return np.empty((0, 2), dtype=np.int64)
    idx = np.arange(2, n)
    a = idx[_anchor_neighbor_mask(pts, spec, seed, replication, 0, idx)]
    b = idx[_anchor_neighbor_mask(pts, spec, seed, replication, 1, idx)]
    if len(a) == 0 or len(b) == 0:
        return np.empty((0, 2), dtype=np.int64)
    aa = np.repeat(a, len(b))
    bb = np.tile(b, len(a))
    keep = aa != bb
    aa, bb = aa[keep], bb[keep]
    dx = pts[aa, 0] - pts[bb, 0]
    dy = pts[aa, 1] - pts[bb, 1]
    probs = connection_probabilities(spec, dx * dx + dy * dy)
    hit = pair_uniforms(seed, replication, aa, bb) < probs
    return np.column_stack([aa[hit], bb[hit]]).astype(np.int64)


def _edge_01(pts, spec, seed, replication) -> bool:
    dx = pts[0, 0] - pts[1, 0]
    dy = pts[0, 1] - pts[1, 1]
    p = connection_probabilities(spec, np.float64(dx * dx + dy * dy))
    return bool(pair_uniforms(seed, replication, 0, 1) < p)


def _replicate(params: ModelParams, seed: int, replication: int, collect_pairs: bool):
    """One replication: the path count and optionally the pair-class counts."""
    pts = sample_conditioned_ppp(params, seed, replication)
    spec = params.connection
    k = int(params.k)
    if k == 1:
        return int(_edge_01(pts, spec, seed, replication)), None
    if k == 2:
        n = len(pts)
        if n <= 2:
            return 0, None
        idx = np.arange(2, n)
        both = _anchor_neighbor_mask(pts, spec, seed, replication, 0, idx) & _anchor_neighbor_mask(
            pts, spec, seed, replication, 1, idx
        )
        return int(both.sum()), None
    if k == 3:
        pairs = _threehop_pairs_lazy(pts, spec, seed, replication)
        classes = None
        if collect_pairs:
            c = classify_path_pairs(pairs)
            classes = (c.sigma0, c.sigma11, c.sigma12, c.sigma21, c.sigma22)
        return len(pairs), classes
    g = realize_graph(pts, spec, seed, replication)
    return count_khop_paths(g, k).count, None


def _run_chunk(args):
    params, seed, lo, hi, collect_pairs = args
    counts = np.empty(hi - lo, dtype=np.int64)
    classes = np.zeros((hi - lo, 5), dtype=np.int64) if collect_pairs else None
    for t, rep in enumerate(range(lo, hi)):
        sigma, cls = _replicate(params, seed, rep, collect_pairs)
        counts[t] = sigma
        if collect_pairs:
            classes[t] = cls
    return counts, classes


def _chunk_ranges(total: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, total))
    size = total // parts
    extra = total % parts
    ranges, lo = [], 0
    for i in range(parts):
        hi = lo + size + (1 if i < extra else 0)
        ranges.append((lo, hi))
        lo = hi
    return ranges


def run_replications(
    params: ModelParams,
    seed: int,
    replications: int,
    collect_pairs: bool = False,
    threads: int = 1,
):
    """Run ``replications`` independent realizations of one grid point.

    Returns ``(counts, pair_classes)``: an int64 array of per-replication
    path counts and, when requested and k = 3, an (R, 5) array of ordered
    pair-class counts in :data:`PAIR_CLASSES` order (else None).  The result
    depends only on (params, seed, replications), never on ``threads``.
    """
    collect = collect_pairs and int(params.k) == 3
    if threads <= 1:
        return _run_chunk((params, seed, 0, replications, collect))
    ranges = _chunk_ranges(replications, threads * 4)
    jobs = [(params, seed, lo, hi, collect) for lo, hi in ranges]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(_run_chunk, jobs))
    counts = np.concatenate([r[0] for r in results])
    classes = np.concatenate([r[1] for r in results]) if collect else None
    return counts, classes


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MomentReport:
    """Aggregated statistics for one sweep grid point."""

    grid_index: int
    grid_seed: int
    params: ModelParams
    replications: int
    empirical_mean: float
    empirical_mean_se: float | None
    empirical_variance: float | None
    empirical_variance_se: float | None
    empirical_zero_frequency: float
    empirical_zero_frequency_se: float | None
    analytic_mean: float | None
    analytic_variance: float | None
    numeric_mean: float | None
    numeric_variance: float | None
    pair_means: dict | None
    existence_brackets: tuple[ExistenceBracket, ...]
    moment_source: str
    quadratic_bound: float
    bonferroni2_bound: float
    counts: np.ndarray
    pair_class_counts: np.ndarray | None


def _mean_se(x: np.ndarray) -> float | None:
    if len(x) < 2:
        return None
    return float(x.std(ddof=1) / math.sqrt(len(x)))


def _variance_se(x: np.ndarray) -> float | None:
    """Standard error of the unbiased sample variance, from the fourth
    central moment (valid for non-normal counts)."""
    r = len(x)
    if r < 2:
        return None
    d = x - x.mean()
    s2 = float(d @ d) / (r - 1)
    m4 = float(np.mean(d**4))
    var_s2 = (m4 - (r - 3) / (r - 1) * s2 * s2) / r
    return math.sqrt(max(var_s2, 0.0))


def _attach_references(params: ModelParams, config: ExperimentConfig):
    analytic_mean = analytic_variance = None
    spec = params.connection
    closed_form = spec.kind == RAYLEIGH and spec.eta == 2.0
    if closed_form:
        analytic_mean = mean_khop_rayleigh(params)
        if params.k == 3:
            analytic_variance = variance_threehop_rayleigh(params).variance
    numeric_mean = numeric_variance = None
    if config.attach_numeric or not closed_form:
        quad = QuadratureSpec.default_for(params)
        numeric_mean = mean_khop_numeric(params, quad, strict=config.strict_numerics)
        if params.k == 3:
            numeric_variance = variance_terms_numeric(params, quad, strict=config.strict_numerics).variance
    return analytic_mean, analytic_variance, numeric_mean, numeric_variance


def summarize_grid_point(
    grid_index: int,
    grid_seed: int,
    params: ModelParams,
    config: ExperimentConfig,
    counts: np.ndarray,
    pair_classes: np.ndarray | None,
) -> MomentReport:
    r = len(counts)
    mean = float(counts.mean())
    variance = float(counts.var(ddof=1)) if r >= 2 else None
    zero_freq = float(np.mean(counts == 0))
    zero_se = math.sqrt(zero_freq * (1.0 - zero_freq) / r) if r >= 2 else None

    analytic_mean, analytic_variance, numeric_mean, numeric_variance = _attach_references(
        params, config
    )

    pair_means = None
    if pair_classes is not None:
        pair_means = {}
        for col, name in enumerate(PAIR_CLASSES):
            vals = pair_classes[:, col].astype(float)
            pair_means[name] = {"mean": float(vals.mean()), "se": _mean_se(vals)}

    samples = PathCountSamples(k=int(params.k), counts=counts, params=params, seed=grid_seed)
    brackets = tuple(truncated_zero_probability(samples, m) for m in config.bracket_orders)

    if analytic_mean is not None and analytic_variance is not None:
        source, ref_mean, ref_var = "analytic", analytic_mean, analytic_variance
    elif numeric_mean is not None and numeric_variance is not None:
        source, ref_mean, ref_var = "numeric", numeric_mean, numeric_variance
    else:
        source, ref_mean, ref_var = "empirical", mean, (variance if variance is not None else 0.0)

    return MomentReport(
        grid_index=grid_index,
        grid_seed=grid_seed,
        params=params,
        replications=r,
        empirical_mean=mean,
        empirical_mean_se=_mean_se(counts.astype(float)),
        empirical_variance=variance,
        empirical_variance_se=_variance_se(counts.astype(float)),
        empirical_zero_frequency=zero_freq,
        empirical_zero_frequency_se=zero_se,
        analytic_mean=analytic_mean,
        analytic_variance=analytic_variance,
        numeric_mean=numeric_mean,
        numeric_variance=numeric_variance,
        pair_means=pair_means,
        existence_brackets=brackets,
        moment_source=source,
        quadratic_bound=quadratic_existence_bound(ref_mean, ref_var),
        bonferroni2_bound=bonferroni_bound_order2(ref_mean, ref_var),
        counts=counts,
        pair_class_counts=pair_classes,
    )


# ---------------------------------------------------------------------------
# report emission
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return repr(float(value))


_COLUMN_DOC = """\
# columns:
#   grid_index / grid_seed: sweep position and its derived master seed
#   k, rho, kind, beta, eta, r0, anchor_distance, margin: model parameters
#   empirical_mean, empirical_variance: sample mean / unbiased sample variance of the k-hop path count
#   empirical_*_se: standard errors (the variance se uses the fourth central moment)
#   empirical_zero_frequency: fraction of replications with zero paths
#   analytic_mean = (1/k) * (rho*pi/beta)**(k-1) * exp(-beta*r**2/k)          [rayleigh, eta=2]
#   analytic_variance = analytic_mean
#       + (pi**3*rho**3/beta**3) * (exp(-beta*r**2/2)/4 + exp(-3*beta*r**2/4)/6)
#       + (pi**2*rho**2/(8*beta**2)) * exp(-beta*r**2)                        [rayleigh, eta=2, k=3]
#   numeric_mean / numeric_variance: grid-convolution quadrature of the same integrals (any connection)
#   pair_sigma0/11/12/21/22: per-replication means (and se) of the ordered 3-hop path-pair classes:
#       sigma0 no shared intermediate; sigma11 one shared, same position; sigma12 one shared,
#       opposite positions; sigma21 self-pairs (= path count); sigma22 both intermediates shared
#   moment_source: which mean/variance pair feeds the two bounds below (analytic > numeric > empirical)
#   quadratic_bound = 1 - 2*mean + mean**2 + variance          (raw, unclamped)
#   bonferroni2_bound = 1.5*mean - variance/2 - mean**2/2      (raw, unclamped)
#   zero_partial_sum_m{M} = mean over replications of sum_{i=0..M} (-1)**i * C(count, i)
#   existence_estimate_m{M} = 1 - zero_partial_sum_m{M} (even M: from below; odd M: from above)
"""


def _csv_columns(config: ExperimentConfig) -> list[str]:
    cols = [
        "grid_index",
        "grid_seed",
        "k",
        "rho",
        "kind",
        "beta",
        "eta",
        "r0",
        "anchor_distance",
        "margin",
        "replications",
        "empirical_mean",
        "empirical_mean_se",
        "empirical_variance",
        "empirical_variance_se",
        "empirical_zero_frequency",
        "empirical_zero_frequency_se",
        "analytic_mean",
        "analytic_variance",
        "numeric_mean",
        "numeric_variance",
    ]
    for name in PAIR_CLASSES:
        cols += [f"pair_{name}_mean", f"pair_{name}_se"]
    cols += ["moment_source", "quadratic_bound", "bonferroni2_bound"]
    for m in config.bracket_orders:
        cols += [f"zero_partial_sum_m{m}", f"existence_estimate_m{m}"]
    return cols


def _report_row(report: MomentReport, config: ExperimentConfig) -> list[str]:
    p = report.params
    spec = p.connection
    is_ray = spec.kind == RAYLEIGH
    row = [
        _fmt(report.grid_index),
        _fmt(report.grid_seed),
        _fmt(int(p.k)),
        _fmt(p.rho),
        spec.kind,
        _fmt(spec.beta if is_ray else None),
        _fmt(spec.eta if is_ray else None),
        _fmt(spec.r0 if spec.kind == HARD_DISK else None),
        _fmt(p.anchor_distance),
        _fmt(p.margin),
        _fmt(report.replications),
        _fmt(report.empirical_mean),
        _fmt(report.empirical_mean_se),
        _fmt(report.empirical_variance),
        _fmt(report.empirical_variance_se),
        _fmt(report.empirical_zero_frequency),
        _fmt(report.empirical_zero_frequency_se),
        _fmt(report.analytic_mean),
        _fmt(report.analytic_variance),
        _fmt(report.numeric_mean),
        _fmt(report.numeric_variance),
    ]
    for name in PAIR_CLASSES:
        if report.pair_means is None:
            row += ["", ""]
        else:
            row += [_fmt(report.pair_means[name]["mean"]), _fmt(report.pair_means[name]["se"])]
    row += [report.moment_source, _fmt(report.quadratic_bound), _fmt(report.bonferroni2_bound)]
    for bracket in report.existence_brackets:
        row += [_fmt(bracket.partial_sum), _fmt(bracket.existence_estimate)]
    return row


def write_reports_csv(path: str, config: ExperimentConfig, reports: list[MomentReport]) -> None:
    lines = [f"# experiment: {config.name}", f"# master seed: {config.seed}", _COLUMN_DOC.rstrip()]
    lines.append(",".join(_csv_columns(config)))
    for report in reports:
        lines.append(",".join(_report_row(report, config)))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _report_json_dict(report: MomentReport, config: ExperimentConfig) -> dict:
    out = {
        "grid_index": report.grid_index,
        "grid_seed": report.grid_seed,
        "params": params_to_dict(report.params),
        "replications": report.replications,
        "empirical_mean": report.empirical_mean,
        "empirical_mean_se": report.empirical_mean_se,
        "empirical_variance": report.empirical_variance,
        "empirical_variance_se": report.empirical_variance_se,
        "empirical_zero_frequency": report.empirical_zero_frequency,
        "empirical_zero_frequency_se": report.empirical_zero_frequency_se,
        "analytic_mean": report.analytic_mean,
        "analytic_variance": report.analytic_variance,
        "numeric_mean": report.numeric_mean,
        "numeric_variance": report.numeric_variance,
        "pair_means": report.pair_means,
        "existence_brackets": [
            {
                "order": b.order,
                "partial_sum": b.partial_sum,
                "side": b.side,
                "existence_estimate": b.existence_estimate,
            }
            for b in report.existence_brackets
        ],
        "moment_source": report.moment_source,
        "quadratic_bound": report.quadratic_bound,
        "bonferroni2_bound": report.bonferroni2_bound,
    }
    if config.dump_raw_counts:
        out["counts"] = report.counts.tolist()
        if report.pair_class_counts is not None:
            out["pair_class_counts"] = report.pair_class_counts.tolist()
    return out


def write_reports_json(path: str, config: ExperimentConfig, reports: list[MomentReport]) -> None:
    payload = {
        "config": config_to_dict(config),
        "reports": [_report_json_dict(r, config) for r in reports],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_histogram_csv(path: str, config: ExperimentConfig, reports: list[MomentReport]) -> None:
    """Integer-valued histogram per grid point: (value, frequency) pairs plus
    the reference probability of a Poisson law with the analytic mean."""
    lines = [
        f"# experiment: {config.name} (path-count histogram)",
        "# poisson_probability: Poisson pmf with the analytic (else empirical) mean",
        "grid_index,value,frequency,empirical_probability,poisson_probability",
    ]
    for report in reports:
        counts = report.counts
        mu = report.analytic_mean if report.analytic_mean is not None else report.empirical_mean
        freq = np.bincount(counts)
        r = len(counts)
        for value, n in enumerate(freq):
            pois = float(poisson_dist.pmf(value, mu))
            lines.append(
                ",".join(
                    [
                        _fmt(report.grid_index),
                        _fmt(value),
                        _fmt(int(n)),
                        _fmt(n / r),
                        _fmt(pois),
                    ]
                )
            )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# experiment driver
# ---------------------------------------------------------------------------


def run_experiment(config: ExperimentConfig, threads: int = 1) -> list[MomentReport]:
    """Run every grid point, write ``<name>.csv`` / ``<name>.json`` (and the
    histogram CSV when enabled) into the output directory, and return the
    reports."""
    os.makedirs(config.outputs, exist_ok=True)
    reports = []
    for grid_index, params in enumerate(config.params_grid):
        grid_seed = derive_subseed(config.seed, grid_index)
        counts, pair_classes = run_replications(
            params,
            grid_seed,
            config.replications,
            collect_pairs=config.collect_pair_structures,
            threads=threads,
        )
        reports.append(
            summarize_grid_point(grid_index, grid_seed, params, config, counts, pair_classes)
        )
    base = os.path.join(config.outputs, config.name)
    write_reports_csv(base + ".csv", config, reports)
    write_reports_json(base + ".json", config, reports)
    if config.emit_histograms:
        write_histogram_csv(base + "_histogram.csv", config, reports)
    return reports


# ---------------------------------------------------------------------------
# margin validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MarginCheck:
    """Truncation-bias check for one grid point.

    The doubled-margin realization is sampled once per replication and the
    base-margin statistic is computed from its restriction to the base
    rectangle (a Poisson process restricted to a subregion is again a Poisson
    process, and edges are unchanged).  The shift is therefore a paired
    difference: exactly zero whenever no path uses an outer point.
    """

    grid_index: int
    grid_seed: int
    params: ModelParams
    replications: int
    base_mean: float
    doubled_mean: float
    shift: float
    shift_se: float | None
    flagged: bool


def _replicate_margin(params: ModelParams, seed: int, replication: int) -> tuple[int, int]:
    """(base-margin count, doubled-margin count) from one coupled draw."""
    doubled = ModelParams(
        rho=params.rho,
        connection=params.connection,
        anchor_distance=params.anchor_distance,
        k=params.k,
        margin=2.0 * params.margin,
    )
    pts = sample_conditioned_ppp(doubled, seed, replication)
    spec = params.connection
    base_region = region_for(params)
    inside = np.empty(len(pts), dtype=bool)
    inside[:2] = True
    inside[2:] = base_region.contains(pts[2:, 0], pts[2:, 1])
    k = int(params.k)
    if k == 1:
        e = int(_edge_01(pts, spec, seed, replication))
        return e, e
    if k == 2:
        n = len(pts)
        if n <= 2:
            return 0, 0
        idx = np.arange(2, n)
        both = _anchor_neighbor_mask(pts, spec, seed, replication, 0, idx) & _anchor_neighbor_mask(
            pts, spec, seed, replication, 1, idx
        )
        return int((both & inside[2:]).sum()), int(both.sum())
    if k == 3:
        pairs = _threehop_pairs_lazy(pts, spec, seed, replication)
        if len(pairs) == 0:
            return 0, 0
        small = int((inside[pairs[:, 0]] & inside[pairs[:, 1]]).sum())
        return small, len(pairs)
    g = realize_graph(pts, spec, seed, replication)
    big = count_khop_paths(g, k).count
    small = count_khop_paths(g, k, allowed=inside).count
    return small, big


def _margin_chunk(args):
    params, seed, lo, hi = args
    small = np.empty(hi - lo, dtype=np.int64)
    big = np.empty(hi - lo, dtype=np.int64)
    for t, rep in enumerate(range(lo, hi)):
        small[t], big[t] = _replicate_margin(params, seed, rep)
    return small, big


def validate_margin(
    config: ExperimentConfig, replications: int | None = None, threads: int = 1
) -> list[MarginCheck]:
    """Check that the default box margin introduces no visible truncation bias.

    Runs a subsample of replications with the margin doubled and compares the
    coupled base/doubled means; a grid point is flagged when the paired shift
    exceeds two standard errors.
    """
    if replications is None:
        replications = max(1000, config.replications // 10)
    checks = []
    for grid_index, params in enumerate(config.params_grid):
        grid_seed = derive_subseed(config.seed, grid_index)
        if threads <= 1:
            small, big = _margin_chunk((params, grid_seed, 0, replications))
        else:
            ranges = _chunk_ranges(replications, threads * 4)
            jobs = [(params, grid_seed, lo, hi) for lo, hi in ranges]
            with ProcessPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(_margin_chunk, jobs))
            small = np.concatenate([r[0] for r in results])
            big = np.concatenate([r[1] for r in results])
        delta = (big - small).astype(float)
        shift = float(delta.mean())
        shift_se = _mean_se(delta)
        if shift_se is None or shift_se == 0.0:
            flagged = shift != 0.0
        else:
            flagged = abs(shift) > 2.0 * shift_se
        checks.append(
            MarginCheck(
                grid_index=grid_index,
                grid_seed=grid_seed,
                params=params,
                replications=replications,
                base_mean=float(small.mean()),
                doubled_mean=float(big.mean()),
                shift=shift,
                shift_se=shift_se,
                flagged=bool(flagged),
            )
        )
    return checks


def write_margin_csv(path: str, config: ExperimentConfig, checks: list[MarginCheck]) -> None:
    lines = [
        f"# experiment: {config.name} (margin validation)",
        "# shift = doubled-margin mean - base-margin mean from coupled draws; flagged when |shift| > 2 se",
        "grid_index,grid_seed,k,rho,kind,anchor_distance,margin,replications,"
        "base_mean,doubled_mean,shift,shift_se,flagged",
    ]
    for c in checks:
        lines.append(
            ",".join(
                [
                    _fmt(c.grid_index),
                    _fmt(c.grid_seed),
                    _fmt(int(c.params.k)),
                    _fmt(c.params.rho),
                    c.params.connection.kind,
                    _fmt(c.params.anchor_distance),
                    _fmt(c.params.margin),
                    _fmt(c.replications),
                    _fmt(c.base_mean),
                    _fmt(c.doubled_mean),
                    _fmt(c.shift),
                    _fmt(c.shift_se),
                    _fmt(c.flagged),
                ]
            )
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_margin_json(path: str, config: ExperimentConfig, checks: list[MarginCheck]) -> None:
    payload = {
        "config": config_to_dict(config),
        "checks": [
            {
                "grid_index": c.grid_index,
                "grid_seed": c.grid_seed,
                "params": params_to_dict(c.params),
                "replications": c.replications,
                "base_mean": c.base_mean,
                "doubled_mean": c.doubled_mean,
                "shift": c.shift,
                "shift_se": c.shift_se,
                "flagged": c.flagged,
            }
            for c in checks
        ],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------


def preset_config(
    name: str,
    outputs: str,
    seed: int = 0,
    replications: int | None = None,
    anchor_distance: float | None = None,
) -> ExperimentConfig:
    """Built-in experiment definitions.

    fig-mean-var      mean/variance sweep over anchor distance at three
                      densities (rho = 0.5, 2, 5; beta = 1; k = 3).
    fig-distribution  path-count histograms at rho = 2 for beta = 0.7, 0.5,
                      0.3, against a Poisson reference with the same mean.
    fig-existence     existence probability and factorial-moment brackets
                      over a density sweep for k = 2, 3 and beta = 1, 1.5.
    """
    if name == "fig-mean-var":
        r_values = [i / 4 for i in range(0, 21)]
        grid = tuple(
            ModelParams(rho=rho, connection=ConnectionSpec.rayleigh(beta=1.0), anchor_distance=r, k=3)
            for rho in (0.5, 2.0, 5.0)
            for r in r_values
        )
        return ExperimentConfig(
            name=name,
            params_grid=grid,
            replications=replications or 10_000,
            seed=seed,
            outputs=outputs,
            collect_pair_structures=True,
        )
    if name == "fig-distribution":
        r = 1.0 if anchor_distance is None else anchor_distance
        grid = tuple(
            ModelParams(rho=2.0, connection=ConnectionSpec.rayleigh(beta=beta), anchor_distance=r, k=3)
            for beta in (0.7, 0.5, 0.3)
        )
        return ExperimentConfig(
            name=name,
            params_grid=grid,
            replications=replications or 100_000,
            seed=seed,
            outputs=outputs,
            collect_pair_structures=False,
            emit_histograms=True,
        )
    if name == "fig-existence":
        r = 1.0 if anchor_distance is None else anchor_distance
        rho_values = [i / 10 for i in range(1, 21)]
        grid = tuple(
            ModelParams(rho=rho, connection=ConnectionSpec.rayleigh(beta=beta), anchor_distance=r, k=k)
            for k in (2, 3)
            for beta in (1.0, 1.5)
            for rho in rho_values
        )
        return ExperimentConfig(
            name=name,
            params_grid=grid,
            replications=replications or 10_000,
            seed=seed,
            outputs=outputs,
            collect_pair_structures=False,
            bracket_orders=(3, 4, 5, 80),
        )
    raise ValidationError(f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}")
