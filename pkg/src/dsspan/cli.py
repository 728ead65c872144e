"""Command-line entry point: mine, select, evaluate, bench.

Every run reads one YAML config (optional), applies command-line overrides,
and writes a manifest next to its outputs that echoes the resolved config,
tags each value with where it came from, and records the package version.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass, field, fields, replace
from importlib import metadata
from typing import Any

import numpy as np
import yaml

from .embedding import build_features, embed, init_model, train
from .evaluation import EvalReport, ModelConfig, cross_validate
from .graph import DatasetFormatError, GraphDataset, load_tu_dataset, validate
from .miner import MinerConfig, complete_coverage, load_result, mine, result_to_dict, save_result
from .selector import SelectorConfig, save_selection, score_all, select

log = logging.getLogger("dsspan")

# Published MUTAG reference, printed next to our own numbers.
PUBLISHED_REFERENCE = {"MUTAG": {"mean_acc": 0.9967, "std": 0.0027, "avg_features": 20.02,
                             "mine_seconds": 201.24}}


class CliError(Exception):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


@dataclass
class DatasetSection:
    name: str = "MUTAG"
    path: str | None = None  # defaults to data/<name>
    degree_labels: bool = False


@dataclass
class ProtocolSection:
    repetitions: int = 10
    folds: int = 10
    seed: int = 0
    workers: int | None = None  # None = all available cores


@dataclass
class BenchSection:
    # both modes are run at this edge bound so the baseline terminates
    max_edges: int | None = 6
    repetitions: int = 1


@dataclass
class RunConfig:
    dataset: DatasetSection = field(default_factory=DatasetSection)
    miner: MinerConfig = field(default_factory=MinerConfig)
    selector: SelectorConfig = field(default_factory=SelectorConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    protocol: ProtocolSection = field(default_factory=ProtocolSection)
    bench: BenchSection = field(default_factory=BenchSection)
    output_dir: str = "out"

    def to_dict(self) -> dict:
        return {name: asdict(getattr(self, name)) for name in SECTIONS} | {"output_dir": self.output_dir}


SECTIONS = {
    "dataset": DatasetSection,
    "miner": MinerConfig,
    "selector": SelectorConfig,
    "model": ModelConfig,
    "protocol": ProtocolSection,
    "bench": BenchSection,
}

# Values fixed by the published protocol; everything else is ours.
PUBLISHED_VALUES = {
    "model.dim", "model.learning_rate", "model.epochs",
    "protocol.repetitions", "protocol.folds", "selector.tau",
}

FIELD_TYPES = {
    "name": str, "path": str, "degree_labels": bool,
    "delta": float, "min_cov": int, "gamma": float, "max_edges": int, "automorphism_cap": int,
    "budget_k": int, "tau": float,
    "dim": int, "learning_rate": float, "epochs": int,
    "repetitions": int, "folds": int, "seed": int, "workers": int,
}


def _coerce(path: str, value: Any) -> Any:
    kind = FIELD_TYPES.get(path.split(".")[-1], str)
    if value is None or (isinstance(value, str) and value.lower() in ("none", "null", "disabled")):
        return None
    try:
        if kind is bool:
            if isinstance(value, bool):
                return value
            if str(value).lower() in ("true", "1", "yes"):
                return True
            if str(value).lower() in ("false", "0", "no"):
                return False
            raise ValueError
        if kind is int:
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise ValueError
            return int(value)
        return kind(value)
    except (TypeError, ValueError):
        raise CliError("config", f"{path}: expected {kind.__name__}, got {value!r}") from None


def build_config(file_values: dict | None, overrides: dict[str, Any]) -> tuple[RunConfig, dict]:
    """Merge file values and overrides onto the defaults.

    Returns the config and a provenance map ``path -> paper|default|file|flag``.
    """
    file_values = dict(file_values or {})
    sections: dict[str, dict] = {}
    source: dict[str, str] = {}
    unknown = set(file_values) - set(SECTIONS) - {"output_dir"}
    if unknown:
        raise CliError("config", f"{sorted(unknown)[0]}: unknown section")
    for name, cls in SECTIONS.items():
        raw = file_values.get(name) or {}
        if not isinstance(raw, dict):
            raise CliError("config", f"{name}: expected a mapping")
        names = {f.name for f in fields(cls)}
        for key in raw:
            if key not in names:
                raise CliError("config", f"{name}.{key}: unknown field")
        values = {}
        for f in fields(cls):
            path = f"{name}.{f.name}"
            if path in overrides:
                values[f.name] = _coerce(path, overrides[path])
                source[path] = "flag"
            elif f.name in raw:
                values[f.name] = _coerce(path, raw[f.name])
                source[path] = "file"
            else:
                source[path] = "paper" if path in PUBLISHED_VALUES else "default"
        sections[name] = values
    for path in overrides:
        if path != "output_dir" and path not in source:
            raise CliError("config", f"{path}: unknown field")
    built = {}
    for name, cls in SECTIONS.items():
        try:
            built[name] = cls(**sections[name])
        except ValueError as exc:
            field_name = str(exc).split()[0]
            raise CliError("config", f"{name}.{field_name}: {exc}") from None
    output_dir = overrides.get("output_dir", file_values.get("output_dir", "out"))
    source["output_dir"] = "flag" if "output_dir" in overrides else (
        "file" if "output_dir" in file_values else "default")
    cfg = RunConfig(output_dir=str(output_dir), **built)
    p = cfg.protocol
    if p.repetitions < 1 or p.folds < 2:
        raise CliError("config", "protocol.folds: need repetitions >= 1 and folds >= 2")
    if p.workers is not None and p.workers < 1:
        raise CliError("config", "protocol.workers: must be >= 1")
    return cfg, source


def package_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def manifest(cfg: RunConfig, source: dict, command: str) -> dict:
    flat = {}
    for section, values in cfg.to_dict().items():
        if isinstance(values, dict):
            for key, value in values.items():
                path = f"{section}.{key}"
                flat[path] = {"value": value, "source": source.get(path, "default")}
        else:
            flat[section] = {"value": values, "source": source.get(section, "default")}
    return {"command": command, "version": package_version(), "seed": cfg.protocol.seed,
            "config": flat}


def dataset_path(cfg: RunConfig) -> str:
    return cfg.dataset.path or os.path.join("data", cfg.dataset.name)


def load_dataset(cfg: RunConfig) -> GraphDataset:
    path = dataset_path(cfg)
    try:
        ds = load_tu_dataset(path, cfg.dataset.name, degree_labels=cfg.dataset.degree_labels)
    except FileNotFoundError as exc:
        raise CliError("dataset", f"missing file {exc.filename or exc}") from None
    except DatasetFormatError as exc:
        raise CliError("dataset", str(exc)) from None
    problems = validate(ds)
    if problems:
        raise CliError("dataset", problems[0])
    return ds


def workers_for(cfg: RunConfig) -> int:
    return cfg.protocol.workers or os.cpu_count() or 1


def _ensure_dir(path: str) -> None:
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise CliError("config", f"output_dir: cannot create {path}: {exc.strerror}") from None


def _write_json(path: str, doc: Any) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


# -- commands ----------------------------------------------------------------

def cmd_print_config(cfg: RunConfig, source: dict, args) -> None:
    doc = manifest(cfg, source, "print-config")
    if args.format == "json":
        print(json.dumps(doc, indent=1, sort_keys=True))
        return
    for path, entry in doc["config"].items():
        print(f"{path} = {json.dumps(entry['value'])}  # {entry['source']}")


def cmd_validate_dataset(cfg: RunConfig, source: dict, args) -> None:
    ds = load_dataset(cfg)
    counts = np.bincount(np.asarray(ds.labels), minlength=ds.class_count)
    edgeless = sum(1 for g in ds.graphs if g.num_edges == 0)
    print(json.dumps({
        "dataset": ds.name,
        "graphs": ds.n,
        "classes": ds.class_count,
        "class_counts": counts.tolist(),
        "vertex_labels": len(ds.vertex_label_values),
        "edge_labels": len(ds.edge_label_values),
        "avg_vertices": float(np.mean([g.num_vertices for g in ds.graphs])),
        "avg_edges": float(np.mean([g.num_edges for g in ds.graphs])),
        "edgeless_graphs": edgeless,
    }, sort_keys=True))


def cmd_mine(cfg: RunConfig, source: dict, args) -> str:
    ds = load_dataset(cfg)
    _ensure_dir(cfg.output_dir)
    result = mine(ds, cfg.miner)
    if not args.no_fill:
        result = complete_coverage(ds, result, cfg.miner)
    out = args.out or os.path.join(cfg.output_dir, "mining.json")
    save_result(result, out, ds.name)
    _write_json(os.path.join(cfg.output_dir, "manifest.json"), manifest(cfg, source, "mine"))
    print(json.dumps({"mining": out, "candidates": len(result.candidates),
                      "fillers": sum(result.filler_flags),
                      "seconds": round(result.stats.wall_seconds, 3)}))
    return out


def cmd_select(cfg: RunConfig, source: dict, args) -> str:
    ds = load_dataset(cfg)
    _ensure_dir(cfg.output_dir)
    try:
        result = load_result(args.mining)
    except FileNotFoundError:
        raise CliError("input", f"missing mining file {args.mining}") from None
    except (KeyError, ValueError) as exc:
        raise CliError("input", f"{args.mining}: not a mining result ({exc})") from None
    if result.n_graphs != ds.n:
        raise CliError("input", f"{args.mining}: mined {result.n_graphs} graphs, dataset has {ds.n}")
    sel = select(score_all(result, list(ds.labels)), cfg.selector, ds.n)
    out = args.out or os.path.join(cfg.output_dir, "selection.json")
    save_selection(sel, out, ds.n)
    _write_json(os.path.join(cfg.output_dir, "manifest.json"), manifest(cfg, source, "select"))
    print(json.dumps({"selection": out, "selected": len(sel.selected),
                      "coverage_fraction": sel.coverage_fraction,
                      "constraint_met": sel.constraint_met}))
    return out


def _evaluate(ds: GraphDataset, cfg: RunConfig, miner_cfg: MinerConfig, repetitions: int,
              workers: int) -> EvalReport:
    return cross_validate(ds, miner_cfg, cfg.selector, cfg.model, repetitions=repetitions,
                          folds=cfg.protocol.folds, seed=cfg.protocol.seed, workers=workers)


def _fold_rows(report: EvalReport) -> list[list]:
    return [[f.repetition, f.fold, f.accuracy, f.n_features, f.n_candidates, f.n_fillers,
             f.zero_test_rows, f.coverage_fraction, int(f.constraint_met)] for f in report.folds]


def export_matrices(ds: GraphDataset, cfg: RunConfig, out_dir: str) -> None:
    """Fit the pipeline on the whole dataset and dump incidence rows and
    hidden-layer embeddings for external plotting."""
    mined = complete_coverage(ds, mine(ds, cfg.miner), cfg.miner)
    sel = select(score_all(mined, list(ds.labels)), cfg.selector, ds.n)
    codes = sel.codes()
    if not codes:
        raise CliError("runtime", "no features selected; nothing to export")
    X = build_features(ds.graphs, codes).rows
    rng = np.random.default_rng([cfg.protocol.seed, 0])
    m = cfg.model
    model = init_model(X.shape[1], ds.class_count, m.dim, m.learning_rate, m.epochs, rng)
    model, _ = train(model, X, list(ds.labels), rng)
    H = embed(model, X)
    _write_csv(os.path.join(out_dir, "features.csv"),
               ["graph", "label"] + [f"f{k}" for k in range(X.shape[1])],
               [[i, ds.labels[i], *X[i].tolist()] for i in range(ds.n)])
    _write_csv(os.path.join(out_dir, "embeddings.csv"),
               ["graph", "label"] + [f"e{k}" for k in range(H.shape[1])],
               [[i, ds.labels[i], *H[i].tolist()] for i in range(ds.n)])


def cmd_evaluate(cfg: RunConfig, source: dict, args) -> EvalReport:
    ds = load_dataset(cfg)
    out = cfg.output_dir
    _ensure_dir(out)
    fold_dir = os.path.join(out, "folds")
    _ensure_dir(fold_dir)
    t0 = time.perf_counter()
    report = _evaluate(ds, cfg, cfg.miner, cfg.protocol.repetitions, workers_for(cfg))
    wall = time.perf_counter() - t0

    # one file per job, then the merged views
    for f in report.folds:
        _write_json(os.path.join(fold_dir, f"rep{f.repetition:02d}_fold{f.fold:02d}.json"),
                    {k: v for k, v in asdict(f).items() if k != "timings"})
    _write_json(os.path.join(out, "report.json"), report.to_dict())
    timings = report.timing_dict() | {"wall_seconds": wall}
    _write_json(os.path.join(out, "timings.json"), timings)
    _write_csv(os.path.join(out, "folds.csv"),
               ["repetition", "fold", "accuracy", "n_features", "n_candidates", "n_fillers",
                "zero_test_rows", "coverage_fraction", "constraint_met"], _fold_rows(report))
    _write_csv(os.path.join(out, "summary.csv"),
               ["dataset", "mean_acc", "std", "avg_features", "avg_mine_seconds"],
               [[ds.name, report.mean, report.std, report.avg_features,
                 report.avg_timing("mine")]])
    _write_json(os.path.join(out, "manifest.json"), manifest(cfg, source, "evaluate"))
    if args.export:
        export_matrices(ds, cfg, out)

    line = {"dataset": ds.name, "mean_acc": round(report.mean, 4), "std": round(report.std, 4),
            "avg_features": round(report.avg_features, 2), "wall_seconds": round(wall, 1)}
    ref = PUBLISHED_REFERENCE.get(ds.name)
    if ref:
        line["published_mean_acc"] = ref["mean_acc"]
        line["published_std"] = ref["std"]
    print(json.dumps(line))
    return report


BENCH_HEADER = ["dataset", "mode", "avg_mine_seconds", "avg_feature_count", "mean_acc", "std"]


def cmd_bench(configs: list[tuple[RunConfig, dict]], args) -> list[list]:
    """Capped vs baseline mining for each config, same protocol and edge bound."""
    rows = []
    out_dir = configs[0][0].output_dir
    _ensure_dir(out_dir)
    for cfg, source in configs:
        ds = load_dataset(cfg)
        capped = replace(cfg.miner, max_edges=cfg.bench.max_edges)
        modes = [("capped", capped), ("baseline", replace(capped, gamma=None))]
        for mode, miner_cfg in modes:
            report = _evaluate(ds, cfg, miner_cfg, cfg.bench.repetitions, workers_for(cfg))
            rows.append([ds.name, mode, report.avg_timing("mine"), report.avg_features,
                         report.mean, report.std])
            log.info("bench %s %s: %.3fs mining, %.1f features", ds.name, mode,
                     report.avg_timing("mine"), report.avg_features)
    path = args.out or os.path.join(out_dir, "bench.csv")
    _write_csv(path, BENCH_HEADER, rows)
    _write_json(os.path.join(out_dir, "bench_manifest.json"),
                [manifest(cfg, source, "bench") for cfg, source in configs])
    print(json.dumps({"bench": path, "rows": len(rows)}))
    return rows


# -- argument handling ---------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", message)


# flag -> config path
SHORTCUTS = {
    "dataset": "dataset.name", "data_dir": "dataset.path", "degree_labels": "dataset.degree_labels",
    "delta": "miner.delta", "min_cov": "miner.min_cov", "gamma": "miner.gamma",
    "max_edges": "miner.max_edges", "tau": "selector.tau", "budget_k": "selector.budget_k",
    "dim": "model.dim", "epochs": "model.epochs", "learning_rate": "model.learning_rate",
    "repetitions": "protocol.repetitions", "folds": "protocol.folds", "seed": "protocol.seed",
    "workers": "protocol.workers", "out_dir": "output_dir",
}


def _add_common(p: argparse.ArgumentParser, multi_config: bool = False) -> None:
    if multi_config:
        p.add_argument("--config", action="append", default=[], help="YAML file, repeatable")
    else:
        p.add_argument("--config", help="YAML config file")
    p.add_argument("--set", action="append", default=[], metavar="PATH=VALUE",
                   help="override any config field, e.g. miner.delta=0.05")
    p.add_argument("--dataset", help="dataset name (files NAME_A.txt etc.)")
    p.add_argument("--data-dir", help="directory holding the dataset files")
    p.add_argument("--degree-labels", action="store_const", const=True, default=None,
                   help="label vertices by degree when node labels are missing")
    p.add_argument("--delta", type=float)
    p.add_argument("--min-cov", type=int)
    p.add_argument("--gamma", help="cap multiplier, or 'none' to disable the cap")
    p.add_argument("--max-edges", type=int)
    p.add_argument("--tau", type=float)
    p.add_argument("--budget-k", type=int)
    p.add_argument("--dim", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--repetitions", type=int)
    p.add_argument("--folds", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, help="worker processes (default: all cores)")
    p.add_argument("--out-dir", help="output directory")


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dsspan", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("print-config", help="show resolved config with value provenance")
    _add_common(p)
    p.add_argument("--format", choices=["text", "json"], default="text")

    p = sub.add_parser("validate-dataset", help="load and check a dataset")
    _add_common(p)

    p = sub.add_parser("mine", help="mine candidate patterns on the full dataset")
    _add_common(p)
    p.add_argument("--out", help="mining JSON path (default OUT_DIR/mining.json)")
    p.add_argument("--no-fill", action="store_true", help="skip coverage completion")

    p = sub.add_parser("select", help="score and select from a mining result")
    _add_common(p)
    p.add_argument("--mining", required=True, help="mining JSON from the mine command")
    p.add_argument("--out", help="selection JSON path (default OUT_DIR/selection.json)")

    p = sub.add_parser("evaluate", help="repeated stratified cross-validation")
    _add_common(p)
    p.add_argument("--export", action="store_true",
                   help="also write features.csv and embeddings.csv fitted on all graphs")

    p = sub.add_parser("bench", help="capped vs baseline mining summary")
    _add_common(p, multi_config=True)
    p.add_argument("--out", help="CSV path (default OUT_DIR/bench.csv)")
    return parser


def _read_yaml(path: str) -> dict:
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except FileNotFoundError:
        raise CliError("config", f"missing config file {path}") from None
    except yaml.YAMLError as exc:
        raise CliError("config", f"{path}: invalid YAML ({str(exc).splitlines()[0]})") from None
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise CliError("config", f"{path}: top level must be a mapping")
    return doc


def overrides_from_args(args) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for item in args.set:
        if "=" not in item:
            raise CliError("usage", f"--set expects PATH=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = yaml.safe_load(value) if value.strip() else None
    for attr, path in SHORTCUTS.items():
        value = getattr(args, attr, None)
        if value is not None:
            out[path] = value
    return out


def run(argv: list[str] | None = None) -> Any:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = overrides_from_args(args)
    if args.command == "bench":
        files = args.config or [None]
        configs = [build_config(_read_yaml(f) if f else {}, overrides) for f in files]
        return cmd_bench(configs, args)
    cfg, source = build_config(_read_yaml(args.config) if args.config else {}, overrides)
    handler = {
        "print-config": cmd_print_config,
        "validate-dataset": cmd_validate_dataset,
        "mine": cmd_mine,
        "select": cmd_select,
        "evaluate": cmd_evaluate,
    }[args.command]
    return handler(cfg, source, args)


def main(argv: list[str] | None = None) -> int:
    try:
        run(argv)
    except CliError as exc:
        print(f"error: {exc.kind}: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - keep the one-line contract
        print(f"error: runtime: {type(exc).__name__}: {exc}".replace("\n", " "), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
