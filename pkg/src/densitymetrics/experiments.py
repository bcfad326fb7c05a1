"""Named, assertion-bearing experiments that write CSV or JSON artifacts.

Each ``run_*`` function takes an :class:`ExperimentConfig`, writes one file
and returns an :class:`Outcome` whose ``exit_code`` follows the CLI
convention (0 ok, 1 assertion failure, 3 I/O error). Usage errors are raised
as :class:`UsageError` before anything is computed.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

import numpy as np

from .algebra import AlgebraShape, Trace, density_from_vector, sample_density
from .exceptions import ResampleRequired
from .functions import figure_data_csv, strict_fineness_table
from .quadrature import QuadratureSpec
from .metrics import Seminorm, bures_distance, mk_distance_lp
from .suites import (
    bures_commutative_agreement,
    bures_qubit_agreement,
    c2_closed_form_agreement,
    convergence_transfer_probe,
    default_seminorm,
    eigensolver_check,
    lp_bruteforce_agreement,
    metric_axiom_suites,
    random_probe_direction,
    sqrt_roundtrip_check,
    state_map_injectivity,
    trial_seed,
)

SCHEMA_VERSION = 1
EXIT_OK, EXIT_ASSERTION, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

# beyond this, 1 - 4^-k is no longer distinguishable from 1 in double precision
KMAX_LIMIT = 26
AXIOM_SHAPES = ((2,), (3,), (1, 1), (1, 1, 1))


class UsageError(ValueError):
    """Invalid configuration; maps to exit status 2."""


@dataclass
class ExperimentConfig:
    """Parameters shared by every experiment; unused ones are ignored.

    ``None`` means "use the experiment's own default".
    """

    experiment: str
    out: str | None = None
    format: str | None = None
    seed: int = 0
    trials: int | None = None
    nmin: int = 1
    nmax: int = 100
    kmax: int = 20
    tol: float | None = None
    probe_length: int = 30

    @classmethod
    def keys(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    @classmethod
    def from_mapping(cls, data: dict) -> "ExperimentConfig":
        unknown = set(data) - set(cls.keys())
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        if "experiment" not in data or data["experiment"] is None:
            raise UsageError("no experiment given")
        return cls(**data)

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise UsageError(
                f"unknown experiment {self.experiment!r}; choose from {sorted(EXPERIMENTS)}"
            )
        if self.format not in (None, "csv", "json"):
            raise UsageError(f"format must be csv or json, got {self.format!r}")
        if not 0 <= self.seed < 2**64:
            raise UsageError("seed must be an unsigned 64-bit integer")
        if self.trials is not None and self.trials < 1:
            raise UsageError("trials must be positive")
        if self.tol is not None and not (self.tol > 0 and math.isfinite(self.tol)):
            raise UsageError("tol must be a positive number")
        if self.experiment == "strict-fineness" and not 1 <= self.nmin <= self.nmax:
            raise UsageError(f"empty n-range {self.nmin}..{self.nmax}")
        if self.experiment == "c2-inequivalence" and not 1 <= self.kmax <= KMAX_LIMIT:
            raise UsageError(f"kmax must lie in 1..{KMAX_LIMIT}, got {self.kmax}")
        if self.experiment == "equivalence-suite" and self.probe_length < 2:
            raise UsageError("probe_length must be at least 2")

    def resolved_format(self, default: str) -> str:
        return self.format or default


@dataclass
class Outcome:
    exit_code: int
    path: Path | None
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.exit_code == EXIT_OK


def _provenance(config: ExperimentConfig) -> dict:
    return {"schema_version": SCHEMA_VERSION, "experiment": config.experiment, "config": asdict(config)}


def _csv_text(config: ExperimentConfig, header, rows, failures) -> str:
    buf = io.StringIO()
    buf.write(f"# schema_version={SCHEMA_VERSION}\n")
    buf.write(f"# config={json.dumps(asdict(config), sort_keys=True)}\n")
    buf.write(f"# status={'fail' if failures else 'pass'}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(row[h]) for h in header])
    return buf.getvalue()


def _fmt(value):
    return f"{value:.12g}" if isinstance(value, float) else value


def _json_text(config: ExperimentConfig, body: dict, failures) -> str:
    doc = {
        **_provenance(config),
        "generated_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "passed": not failures,
        "failures": list(failures),
        **body,
    }
    return json.dumps(doc, indent=2, sort_keys=False, default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _default_path(config: ExperimentConfig, fmt: str) -> Path:
    return Path(config.out) if config.out else Path(f"{config.experiment}.{fmt}")


def _write(config: ExperimentConfig, fmt: str, text: str, failures) -> Outcome:
    path = _default_path(config, fmt)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        return Outcome(EXIT_IO, path, [f"cannot write {path}: {exc}"])
    return Outcome(EXIT_ASSERTION if failures else EXIT_OK, path, list(failures))


def _emit(config: ExperimentConfig, default_fmt: str, header, rows, failures, extra=None) -> Outcome:
    fmt = config.resolved_format(default_fmt)
    if fmt == "csv":
        text = _csv_text(config, header, rows, failures)
    else:
        text = _json_text(config, {"rows": rows, **(extra or {})}, failures)
    return _write(config, fmt, text, failures)


# experiments


def run_strict_fineness(config: ExperimentConfig) -> Outcome:
    """Bures vs uniform distance from ``f_n`` to 1, with the closed-form residual."""
    config.validate()
    tol = config.tol if config.tol is not None else 1e-8
    table = strict_fineness_table(config.nmax, QuadratureSpec(), n_min=config.nmin, check=False)
    failures = table.failures(residual_tol=tol)
    rows = [
        {"n": r.n, "bures": r.bures, "uniform": r.uniform, "closed_form": r.closed_form,
         "residual": r.residual}
        for r in table.rows
    ]
    return _emit(config, "csv", ["n", "bures", "uniform", "closed_form", "residual"], rows, failures)


def c2_inequivalence_rows(kmax: int) -> list[dict]:
    """Bures and ``L^B`` distances between ``(1, 0)`` and ``(y_1, 1 - y_1)``, ``y_1 = 1 - 4^-k``."""
    tau = Trace.unit((1, 1))
    seminorm = Seminorm.difference()
    x = density_from_vector(tau, [1.0, 0.0])
    rows = []
    for k in range(1, kmax + 1):
        gap = 4.0**-k
        y = density_from_vector(tau, [1.0 - gap, gap])
        d_b = bures_distance(tau, x, y)
        d_l = mk_distance_lp(tau, seminorm, x, y)
        ratio = d_b / d_l
        model = 1.0 / math.sqrt(2.0 * gap)
        rows.append({
            "k": k, "y1": 1.0 - gap, "one_minus_y1": gap, "bures": d_b, "lipschitz": d_l,
            "ratio": ratio, "model": model, "relative_error": abs(ratio - model) / model,
        })
    return rows


def c2_inequivalence_failures(rows: list[dict], model_tol: float = 0.01) -> list[str]:
    failures = []
    for prev, row in zip(rows, rows[1:]):
        if not row["ratio"] > prev["ratio"]:
            failures.append(f"k={row['k']}: ratio {row['ratio']!r} not above k={prev['k']}")
    if rows:
        growth = rows[-1]["ratio"] / rows[0]["ratio"]
        bound = 2.0 ** (len(rows) - 1) * 0.9
        if growth < bound:
            failures.append(f"last/first ratio {growth:.6g} below {bound:.6g}")
    for row in rows:
        if row["one_minus_y1"] <= 1e-6 and row["relative_error"] > model_tol:
            failures.append(
                f"k={row['k']}: ratio {row['ratio']:.6g} off the model by {row['relative_error']:.3%}"
            )
    return failures


def run_c2_inequivalence(config: ExperimentConfig) -> Outcome:
    """The Bures / ``L^B`` ratio on ``C^2`` grows without bound like ``1 / sqrt(2 (1 - y_1))``."""
    config.validate()
    rows = c2_inequivalence_rows(config.kmax)
    failures = c2_inequivalence_failures(rows, config.tol if config.tol is not None else 0.01)
    header = ["k", "y1", "one_minus_y1", "bures", "lipschitz", "ratio", "model", "relative_error"]
    return _emit(config, "csv", header, rows, failures)


@dataclass(frozen=True)
class ProbeSetting:
    shape: tuple[int, ...]
    quantum: bool


EQUIVALENCE_SETTINGS = (
    ProbeSetting((1, 1), True),
    ProbeSetting((1, 1, 1), True),
    ProbeSetting((2,), False),
    ProbeSetting((3,), False),
)


def probe_family(setting: ProbeSetting, index: int, family: int, seed: int, K: int, attempts: int = 50):
    """One seeded probe family; resamples ``(x, h)`` until the family stays positive."""
    shape = AlgebraShape(setting.shape)
    tau = Trace.unit(shape)
    seminorm = default_seminorm(shape, seed) if setting.quantum else None
    for attempt in range(attempts):
        s = trial_seed(seed, index, family, attempt)
        x = sample_density(tau, s)
        try:
            h = random_probe_direction(tau, x, np.random.default_rng(s ^ 1))
            table = convergence_transfer_probe(tau, x, h, K, seminorm, schedule="geometric")
        except ResampleRequired:
            continue
        return s, table
    raise ResampleRequired(f"no admissible probe family after {attempts} attempts")


def run_equivalence_suite(config: ExperimentConfig) -> Outcome:
    """Co-vanishing of the metrics along ``x + h / k`` and the C*-to-Bures transfer."""
    config.validate()
    families = config.trials or 20
    cross = config.tol if config.tol is not None else 1e-6
    failures, rows, summary = [], [], []
    for index, setting in enumerate(EQUIVALENCE_SETTINGS):
        for family in range(families):
            s, table = probe_family(setting, index, family, config.seed, config.probe_length)
            label = f"shape={setting.shape} family={family} seed={s}"
            problems = table.covanishing_failures(cross=cross, final=1e-4)
            problems += [f"bures above 1e-4 at k={k} with cstar <= 1e-8" for k in table.transfer_violations()]
            failures += [f"{label}: {p}" for p in problems]
            summary.append({"shape": list(setting.shape), "family": family, "seed": s,
                            "passed": not problems})
            for r in table.rows():
                rows.append({"shape": "x".join(map(str, setting.shape)), "family": family,
                             "k": r["k"], "cstar": r["cstar"], "bures": r["bures"],
                             "quantum": r.get("quantum", "")})
    header = ["shape", "family", "k", "cstar", "bures", "quantum"]
    return _emit(config, "json", header, rows, failures, {"families": summary})


def property_reports(config: ExperimentConfig) -> dict:
    """Run every property and oracle suite; returns JSON-ready report dicts."""
    seed = config.seed
    trials = config.trials or 1000
    tol = config.tol
    axioms = []
    for shape in AXIOM_SHAPES:
        metrics = ("bures", "cstar", "quantum") if len(shape) == sum(shape) else ("bures", "cstar")
        reports = metric_axiom_suites(
            metrics, AlgebraShape(shape), trials=trials, seed=seed,
            triangle_slack=tol if tol is not None else 1e-9,
            symmetry_tol=tol if tol is not None else 1e-10,
            zero_tol=tol if tol is not None else 1e-10,
        )
        axioms += [r.to_dict() for r in reports.values()]

    def t(default):
        return tol if tol is not None else default

    oracle_trials = max(1, min(trials, 1000))
    oracles = [bures_commutative_agreement(n, oracle_trials, seed, t(1e-9)) for n in range(1, 7)]
    oracles.append(bures_qubit_agreement(oracle_trials, seed, t(1e-9)))
    oracles += [lp_bruteforce_agreement(n, max(1, min(trials, 200)), seed, t(1e-9)) for n in (3, 4)]
    oracles += list(c2_closed_form_agreement(oracle_trials, seed, t(1e-9)))
    oracles.append(eigensolver_check(oracle_trials, seed, 8, t(1e-10)))
    oracles.append(sqrt_roundtrip_check(trials=max(1, oracle_trials // 4), seed=seed, tolerance=t(1e-10)))
    oracles += [state_map_injectivity(s, oracle_trials, seed) for s in ((1, 1), (2,), (2, 1))]
    return {"axioms": axioms, "oracles": [o.to_dict() for o in oracles]}


def property_failures(reports: dict) -> list[str]:
    failures = []
    for r in reports["axioms"]:
        for v in r["violations"]:
            failures.append(
                f"{r['metric']} on {tuple(r['shape'])} trial {v['trial']} seeds {v['seeds']}: "
                + "; ".join(v["violations"])
            )
    for o in reports["oracles"]:
        if not o["passed"]:
            failures.append(
                f"{o['name']}: max gap {o['max_gap']:.3e} > {o['tolerance']:g} at seeds {o['worst_seeds']}"
            )
    return failures


def run_property_suites(config: ExperimentConfig) -> Outcome:
    """Metric axioms and oracle agreements aggregated into one JSON report."""
    config.validate()
    if config.resolved_format("json") != "json":
        raise UsageError("property-suites only writes JSON")
    reports = property_reports(config)
    failures = property_failures(reports)
    return _write(config, "json", _json_text(config, reports, failures), failures)


def run_figure_data(config: ExperimentConfig) -> Outcome:
    """Samples of ``f_1, f_2, f_3`` on a 1000-point grid (CSV only)."""
    config.validate()
    if config.resolved_format("csv") != "csv":
        raise UsageError("figure-data only writes CSV")
    text = f"# schema_version={SCHEMA_VERSION}\n" + figure_data_csv(1000)
    return _write(config, "csv", text, [])


EXPERIMENTS: dict[str, Callable[[ExperimentConfig], Outcome]] = {
    "strict-fineness": run_strict_fineness,
    "c2-inequivalence": run_c2_inequivalence,
    "equivalence-suite": run_equivalence_suite,
    "property-suites": run_property_suites,
    "figure-data": run_figure_data,
}


def run(config: ExperimentConfig) -> Outcome:
    config.validate()
    return EXPERIMENTS[config.experiment](config)


def strip_volatile(doc: dict) -> dict:
    """Copy of a JSON report without the fields that may differ between reruns."""
    return {k: v for k, v in doc.items() if k != "generated_at"}
