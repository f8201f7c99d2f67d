"""Run planning and execution across sites, aggregations, regions, metrics,
selectors, regimes, and models, with content-hash caching."""

from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

from ..cohort_io import (AGGREGATIONS, REGIONS, SITE_SCOPES, CohortIOError,
                         load_manifest, read_feature_matrix, write_feature_matrix)
from ..featsel import ALGORITHMS, REGIMES, SelectionConfig, write_trace
from ..modeling_eval import METRICS, ModelSpec
from ..modeling_eval.evaluate import EvalRow, cohort_labels, evaluate_configuration
from ..radiomics import DiscretizationConfig
from ..robustness import profile_features, read_robustness_report, write_robustness_report
from ..roi_ops import PerturbConfig
from ..synth import SynthConfig, generate_cohort
from . import extract
from .cache import StageCache, manifest_digest, stage_key

log = logging.getLogger(__name__)

REPORT_HEADER = [
    "response", "site_scope", "aggregation", "region", "model", "fsa", "regime",
    "train_auc", "train_gmean", "train_se", "train_sp",
    "test_auc", "test_gmean", "test_se", "test_sp",
    "change_auc", "change_gmean", "change_se", "change_sp",
    "nf", "avg_icc", "avg_icc_sd", "status", "note",
]


class ConfigError(ValueError):
    pass


class DataError(ValueError):
    pass


class DependencyError(DataError):
    """Upstream artifact missing; message names the producing subcommand."""


@dataclass(frozen=True)
class RunConfig:
    train_manifest: str = ""
    test_manifest: str = ""
    site_scopes: tuple[str, ...] = ("all",)
    aggregations: tuple[str, ...] = ("merged",)
    regions: tuple[str, ...] = ("full",)
    metrics: tuple[str, ...] = ("CRS",)
    algorithms: tuple[str, ...] = ("fscore",)
    regimes: tuple[str, ...] = ("predictive",)
    models: tuple[str, ...] = ("lda",)
    w: float = 0.5
    icc_threshold: float = 0.8
    pool_fraction: float = 0.8
    target_k: int | None = None
    n_replicates: int = 10
    max_displacement_mm: float = 2.0
    correlation_length_mm: float = 10.0
    dice_floor: float = 0.85
    bin_width: float = 4.0
    seed: int = 0
    jobs: int = 1
    allow_rim_noncrs: bool = False
    synth: dict = field(default_factory=dict)

    def __post_init__(self):
        for value, allowed, what in (
                (self.site_scopes, SITE_SCOPES, "site_scope"),
                (self.aggregations, AGGREGATIONS, "aggregation"),
                (self.regions, REGIONS, "region"),
                (self.metrics, METRICS, "metric"),
                (self.algorithms, ALGORITHMS, "algorithm"),
                (self.regimes, REGIMES, "regime"),
                (self.models, ("lr", "lda"), "model")):
            bad = [v for v in value if v not in allowed]
            if bad:
                raise ConfigError(f"unknown {what}: {bad}")
            if not value:
                raise ConfigError(f"empty {what} list")
        if "rim" in self.regions:
            if "largest" not in self.aggregations:
                raise ConfigError(
                    "rim region requires the 'largest' aggregation (rims are "
                    "built around the single largest lesion per scope)")
            if "CRS" not in self.metrics and not self.allow_rim_noncrs:
                raise ConfigError(
                    "rim features are gated to CRS prediction; pass "
                    "allow_rim_noncrs to override")

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("site_scopes", "aggregations", "regions", "metrics",
                    "algorithms", "regimes", "models"):
            if key in raw:
                raw[key] = tuple(raw[key])
        return cls(**raw)

    def groups(self) -> list[tuple[str, str, str]]:
        """(scope, aggregation, region) cells; rim pairs only with largest."""
        out = []
        for scope, agg, region in product(self.site_scopes, self.aggregations,
                                          self.regions):
            if region == "rim" and agg != "largest":
                continue
            out.append((scope, agg, region))
        return out

    def cells(self) -> list[tuple]:
        out = []
        for (scope, agg, region), metric, alg, regime, model in product(
                self.groups(), self.metrics, self.algorithms, self.regimes,
                self.models):
            if region == "rim" and metric != "CRS" and not self.allow_rim_noncrs:
                continue
            out.append((scope, agg, region, metric, alg, regime, model))
        return out

    def perturb_config(self) -> PerturbConfig:
        return PerturbConfig(
            n_replicates=self.n_replicates,
            max_displacement_mm=self.max_displacement_mm,
            correlation_length_mm=self.correlation_length_mm,
            seed=self.seed, dice_floor=self.dice_floor)

    def disc_config(self) -> DiscretizationConfig:
        return DiscretizationConfig(bin_width=self.bin_width)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_report(rows: list[dict], path) -> None:
    rows = sorted(rows, key=lambda r: tuple(str(r.get(c, "")) for c in REPORT_HEADER))
    with open(Path(path), "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REPORT_HEADER)
        for r in rows:
            writer.writerow([_fmt(r.get(c)) for c in REPORT_HEADER])


def row_to_dict(row: EvalRow, status: str = "ok", note: str = "") -> dict:
    return {
        "response": row.metric, "site_scope": row.site_scope,
        "aggregation": row.aggregation, "region": row.region,
        "model": row.model, "fsa": row.algorithm, "regime": row.regime,
        "train_auc": row.train_auc, "train_gmean": row.train_gmean,
        "train_se": row.train_se, "train_sp": row.train_sp,
        "test_auc": row.test_auc, "test_gmean": row.test_gmean,
        "test_se": row.test_se, "test_sp": row.test_sp,
        "change_auc": row.change_auc, "change_gmean": row.change_gmean,
        "change_se": row.change_se, "change_sp": row.change_sp,
        "nf": row.nf, "avg_icc": row.avg_icc_mean, "avg_icc_sd": row.avg_icc_sd,
        "status": status, "note": note,
    }


class Runner:
    """Stage execution with caching; subcommands run stages individually."""

    def __init__(self, config: RunConfig, out_dir):
        self.config = config
        self.out = Path(out_dir)
        self.cache = StageCache(self.out / "cache")
        self._train = None
        self._test = None
        self._digests: dict[str, str] = {}

    # -- inputs ------------------------------------------------------------

    def manifests(self):
        if self._train is None:
            if not self.config.train_manifest or not self.config.test_manifest:
                raise ConfigError("train_manifest and test_manifest are required")
            try:
                self._train = load_manifest(self.config.train_manifest)
                self._test = load_manifest(self.config.test_manifest)
            except (OSError, CohortIOError) as exc:
                raise DataError(str(exc)) from None
            self._digests["train"] = manifest_digest(self._train, self.config.train_manifest)
            self._digests["test"] = manifest_digest(self._test, self.config.test_manifest)
        return self._train, self._test

    # -- gen-synth ---------------------------------------------------------

    def gen_synth(self) -> list[Path]:
        if not self.config.synth:
            raise ConfigError("config has no 'synth' block")
        written = []
        for name, params in sorted(self.config.synth.items()):
            try:
                cfg = SynthConfig(**params)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad synth block {name!r}: {exc}") from None
            out = self.out / name
            generate_cohort(cfg, out)
            written.append(out / "manifest.csv")
            log.info("wrote synthetic cohort %s", out)
        return written

    # -- extract -----------------------------------------------------------

    def _extract_key(self, which: str, group, replicate: int | None) -> str:
        scope, agg, region = group
        cfg_obj = {"scope": scope, "agg": agg, "region": region,
                   "bin_width": self.config.bin_width, "replicate": replicate}
        if replicate is not None:
            pc = self.config.perturb_config()
            cfg_obj["perturb"] = [pc.n_replicates, pc.max_displacement_mm,
                                  pc.correlation_length_mm, pc.seed, pc.dice_floor]
        return stage_key("extract", [self._digests[which]], cfg_obj)

    def extract_group(self, which: str, group, replicate: int | None = None,
                      compute: bool = True):
        manifest = self.manifests()[0 if which == "train" else 1]
        key = self._extract_key(which, group, replicate)
        path = self.cache.path("extract", key, "features.csv")
        if path.exists():
            return read_feature_matrix(path)
        if not compute:
            raise DependencyError(
                f"extraction for {group} ({which}) missing; run the 'extract' subcommand")
        scope, agg, region = group
        patients = extract.eligible_patients(manifest, scope)
        if not patients:
            raise DataError(f"no {which} patient has a lesion in scope {scope!r}")
        disc = self.config.disc_config()
        if replicate is None:
            matrix = extract.extract_cohort(manifest, patients, scope, agg, region, disc)
        else:
            matrix = extract.extract_perturbed_replicate(
                manifest, patients, scope, agg, region, disc,
                self.config.perturb_config(), replicate)
        self.cache.path("extract", key, "features.csv", create=True)
        write_feature_matrix(matrix, path)
        return matrix

    def run_extract(self) -> None:
        self.manifests()
        for group in self.config.groups():
            self.extract_group("train", group)
            self.extract_group("test", group)
            for r in range(self.config.n_replicates):
                self.extract_group("train", group, replicate=r)

    # -- profile -----------------------------------------------------------

    def _profile_key(self, group) -> str:
        pc = self.config.perturb_config()
        cfg_obj = {"group": list(group), "bin_width": self.config.bin_width,
                   "perturb": [pc.n_replicates, pc.max_displacement_mm,
                               pc.correlation_length_mm, pc.seed, pc.dice_floor]}
        return stage_key("profile", [self._digests["train"]], cfg_obj)

    def profile_group(self, group, compute: bool = True,
                      compute_upstream: bool | None = None):
        self.manifests()
        if compute_upstream is None:
            compute_upstream = compute
        key = self._profile_key(group)
        path = self.cache.path("profile", key, "robustness.csv")
        if path.exists():
            return read_robustness_report(path)
        if not compute:
            raise DependencyError(
                f"robustness profile for {group} missing; run the 'profile' subcommand")
        orig = self.extract_group("train", group, compute=compute_upstream)
        reps = [self.extract_group("train", group, replicate=r, compute=compute_upstream)
                for r in range(self.config.n_replicates)]
        profile = profile_features(orig, reps)
        self.cache.path("profile", key, "robustness.csv", create=True)
        write_robustness_report(profile, path)
        return profile

    def run_profile(self, compute_upstream: bool = True) -> None:
        for group in self.config.groups():
            self.profile_group(group, compute=True, compute_upstream=compute_upstream)

    # -- labels ------------------------------------------------------------

    def labels_for(self, which: str, metric: str) -> dict[str, int]:
        manifest = self.manifests()[0 if which == "train" else 1]
        volumes = None
        if metric == "VolR":
            volumes = extract.total_lesion_volumes(manifest)
        labels = cohort_labels(manifest, metric, volumes)
        if not labels:
            raise DataError(f"no {which} patient carries a {metric} label")
        return labels

    # -- evaluate ----------------------------------------------------------

    def selection_config(self, algorithm: str, regime: str) -> SelectionConfig:
        return SelectionConfig(
            algorithm=algorithm, regime=regime, w=self.config.w,
            icc_threshold=self.config.icc_threshold,
            pool_fraction=self.config.pool_fraction,
            target_k=self.config.target_k, seed=self.config.seed)

    def _cell_key(self, stage: str, cell) -> str:
        self.manifests()
        cfg = self.config
        cfg_obj = {"cell": list(cell), "seed": cfg.seed, "w": cfg.w,
                   "icc_threshold": cfg.icc_threshold,
                   "pool_fraction": cfg.pool_fraction, "target_k": cfg.target_k,
                   "bin_width": cfg.bin_width, "n_replicates": cfg.n_replicates}
        return stage_key(stage, [self._digests["train"], self._digests["test"]], cfg_obj)

    def evaluate_cell(self, cell, compute_upstream: bool = True,
                      write_artifacts: bool = True) -> list[dict]:
        scope, agg, region, metric, algorithm, regime, model = cell
        row_path = self.cache.path("evaluate", self._cell_key("evaluate", cell), "rows.json")
        if row_path.exists():
            return json.loads(row_path.read_text())
        group = (scope, agg, region)
        train = self.extract_group("train", group, compute=compute_upstream)
        test = self.extract_group("test", group, compute=compute_upstream)
        profile = self.profile_group(group, compute=compute_upstream)
        ytr = self.labels_for("train", metric)
        yte = self.labels_for("test", metric)
        sel_cfg = self.selection_config(algorithm, regime)
        spec = ModelSpec(kind=model)
        sel_row, base_row, result, _ = evaluate_configuration(
            train, ytr, test, yte, profile, sel_cfg, spec, metric, scope, agg, region)
        rows = [row_to_dict(sel_row), row_to_dict(base_row)]
        if write_artifacts:
            key = self._cell_key("select", cell)
            sel_path = self.cache.path("select", key, "selection.json", create=True)
            sel_path.write_text(json.dumps({
                "cell": list(cell), "selected": result.selected, "nf": result.nf,
                "avg_icc": result.avg_icc, "details": {
                    k: v for k, v in result.details.items() if k != "coefficients"}},
                indent=2, sort_keys=True) + "\n")
            write_trace(result, self.cache.path("select", key, "trace.csv"))
            self.cache.path("evaluate", self._cell_key("evaluate", cell),
                            "rows.json", create=True)
            row_path.write_text(json.dumps(rows, sort_keys=True) + "\n")
        return rows

    def run(self, compute_upstream: bool = True) -> Path:
        """Full pipeline; per-cell errors are recorded and the run continues."""
        cells = self.config.cells()
        if not cells:
            raise ConfigError("configuration produces no runnable cells")
        rows: list[dict] = []
        seen_baselines = set()

        def one(cell):
            try:
                return cell, self.evaluate_cell(cell, compute_upstream=compute_upstream), None
            except DependencyError:
                raise
            except (ValueError, ArithmeticError) as exc:
                return cell, None, f"{type(exc).__name__}: {exc}"

        # groups/profiles first (shared, sequential); cells may run in parallel
        for group in self.config.groups():
            self.profile_group(group, compute=compute_upstream)
        if self.config.jobs > 1:
            with ThreadPoolExecutor(max_workers=self.config.jobs) as pool:
                results = list(pool.map(one, cells))
        else:
            results = [one(cell) for cell in cells]

        for cell, cell_rows, err in results:
            scope, agg, region, metric, algorithm, regime, model = cell
            if err is not None:
                log.warning("cell %s failed: %s", cell, err)
                rows.append({
                    "response": metric, "site_scope": scope, "aggregation": agg,
                    "region": region, "model": model, "fsa": algorithm,
                    "regime": regime, "nf": 0, "status": "error", "note": err})
                continue
            sel_row, base_row = cell_rows
            rows.append(sel_row)
            base_key = (metric, scope, agg, region, model)
            if base_key not in seen_baselines:
                seen_baselines.add(base_key)
                rows.append(base_row)
        report_path = self.out / "report.csv"
        self.out.mkdir(parents=True, exist_ok=True)
        write_report(rows, report_path)
        return report_path

    def run_report(self) -> Path:
        """Re-assemble report.csv from cached evaluations only."""
        return self.run(compute_upstream=False)
