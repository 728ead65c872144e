"""Repeated stratified cross-validation of the full mine/select/embed pipeline."""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from sklearn.model_selection import StratifiedKFold

from .dfscode import code_to_text
from .embedding import build_features, init_model, predict_all, train
from .graph import GraphDataset
from .miner import MinerConfig, complete_coverage, mine
from .selector import SelectorConfig, score_all, select

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModelConfig:
    dim: int = 64
    learning_rate: float = 1.0
    epochs: int = 5

    def __post_init__(self):
        if self.dim < 1 or self.epochs < 0 or self.learning_rate < 0:
            raise ValueError(f"invalid model config {self}")


@dataclass
class FoldResult:
    repetition: int
    fold: int
    accuracy: float
    n_features: int
    n_candidates: int
    n_fillers: int
    zero_test_rows: int
    coverage_fraction: float
    constraint_met: bool
    features: list[str]
    timings: dict = field(default_factory=dict)


@dataclass
class EvalReport:
    dataset: str
    folds: list[FoldResult]
    config: dict = field(default_factory=dict)
    # per-fold id sets from run_fold, only when requested; never serialized
    audits: list[dict] | None = None

    @property
    def accuracies(self) -> list[float]:
        return [f.accuracy for f in self.folds]

    @property
    def mean(self) -> float:
        return float(np.mean(self.accuracies))

    @property
    def std(self) -> float:
        return float(np.std(self.accuracies))

    @property
    def avg_features(self) -> float:
        return float(np.mean([f.n_features for f in self.folds]))

    def avg_timing(self, key: str) -> float:
        return float(np.mean([f.timings.get(key, 0.0) for f in self.folds]))

    def to_dict(self, timings: bool = False) -> dict:
        """JSON-ready dict. Timings are excluded by default so reports from
        identical runs are byte-identical."""
        folds = []
        for f in self.folds:
            d = asdict(f)
            if not timings:
                d.pop("timings")
            folds.append(d)
        reps = sorted({f.repetition for f in self.folds})
        return {
            "dataset": self.dataset,
            "config": self.config,
            "mean_accuracy": self.mean,
            "std_accuracy": self.std,
            "repetition_means": [
                float(np.mean([f.accuracy for f in self.folds if f.repetition == r])) for r in reps
            ],
            "avg_features": self.avg_features,
            "zero_test_rows": sum(f.zero_test_rows for f in self.folds),
            "folds": folds,
        }

    def timing_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "avg_mine_seconds": self.avg_timing("mine"),
            "avg_select_seconds": self.avg_timing("select"),
            "avg_embed_seconds": self.avg_timing("embed"),
            "folds": [{"repetition": f.repetition, "fold": f.fold, **f.timings} for f in self.folds],
        }


def fold_splits(labels, folds: int, seed: int, repetition: int) -> list[tuple[np.ndarray, np.ndarray]]:
    labels = np.asarray(labels)
    counts = np.bincount(labels)
    if (counts[counts > 0] < folds).any():
        raise ValueError(f"a class has fewer than {folds} members; cannot stratify")
    state = int(np.random.SeedSequence([seed, repetition]).generate_state(1)[0])
    skf = StratifiedKFold(n_splits=folds, shuffle=True, random_state=state)
    return list(skf.split(np.zeros(len(labels)), labels))


def run_fold(dataset: GraphDataset, train_idx, test_idx, miner_cfg: MinerConfig,
             selector_cfg: SelectorConfig, model_cfg: ModelConfig, seed: int,
             repetition: int = 0, fold: int = 0, audit: dict | None = None) -> FoldResult:
    """Mine, select and train on ``train_idx``; score on ``test_idx``.

    When ``audit`` is given it is filled with the dataset ids each stage saw.
    """
    train_idx = [int(i) for i in train_idx]
    test_idx = [int(i) for i in test_idx]
    train_view = dataset.subset(train_idx)
    test_view = dataset.subset(test_idx)
    train_labels = list(train_view.labels)

    t0 = time.perf_counter()
    mined = complete_coverage(train_view, mine(train_view, miner_cfg), miner_cfg)
    t1 = time.perf_counter()
    scored = score_all(mined, train_labels)
    sel = select(scored, selector_cfg, train_view.n)
    t2 = time.perf_counter()

    codes = sel.codes()
    if codes:
        X_train = build_features(train_view.graphs, codes).rows
        X_test_fm = build_features(test_view.graphs, codes)
        X_test = X_test_fm.rows
        zero_rows = X_test_fm.zero_rows
    else:
        X_train = np.zeros((train_view.n, 1))
        X_test = np.zeros((test_view.n, 1))
        zero_rows = test_view.n
    rng = np.random.default_rng([seed, repetition, fold])
    model = init_model(X_train.shape[1], dataset.class_count, model_cfg.dim,
                       model_cfg.learning_rate, model_cfg.epochs, rng)
    model, _ = train(model, X_train, train_labels, rng)
    pred = predict_all(model, X_test)
    acc = float(np.mean(pred == np.asarray(test_view.labels)))
    t3 = time.perf_counter()

    if audit is not None:
        src = train_view.source_ids
        audit["train_ids"] = set(train_idx)
        audit["test_ids"] = set(test_idx)
        audit["miner_ids"] = {src[g.graph_id] for g in train_view.graphs}
        audit["candidate_ids"] = {src[i] for c in mined.candidates for i in c.graphs}
        audit["selector_ids"] = {src[i] for i in range(len(train_labels))}
        audit["selected_ids"] = {src[i] for i in sel.covered}
        audit["training_rows"] = {src[i] for i in range(X_train.shape[0])}
        audit["selected_codes"] = [code_to_text(c) for c in codes]
        audit["predictions"] = pred.tolist()

    return FoldResult(
        repetition=repetition,
        fold=fold,
        accuracy=acc,
        n_features=len(codes),
        n_candidates=len(mined.candidates),
        n_fillers=sum(mined.filler_flags),
        zero_test_rows=zero_rows,
        coverage_fraction=sel.coverage_fraction,
        constraint_met=sel.constraint_met,
        features=[code_to_text(c) for c in codes],
        timings={"mine": t1 - t0, "select": t2 - t1, "embed": t3 - t2},
    )


def _job(args):
    *fold_args, want_audit = args
    audit = {} if want_audit else None
    result = run_fold(*fold_args, audit=audit)
    return result, audit


def cross_validate(dataset: GraphDataset, miner_cfg: MinerConfig | None = None,
                   selector_cfg: SelectorConfig | None = None, model_cfg: ModelConfig | None = None,
                   repetitions: int = 10, folds: int = 10, seed: int = 0,
                   workers: int = 1, audit: bool = False) -> EvalReport:
    miner_cfg = miner_cfg or MinerConfig()
    selector_cfg = selector_cfg or SelectorConfig()
    model_cfg = model_cfg or ModelConfig()
    jobs = []
    for r in range(repetitions):
        for f, (tr, te) in enumerate(fold_splits(dataset.labels, folds, seed, r)):
            jobs.append((dataset, tr, te, miner_cfg, selector_cfg, model_cfg, seed, r, f, audit))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_job, jobs))
    else:
        results = [_job(j) for j in jobs]
    results.sort(key=lambda pair: (pair[0].repetition, pair[0].fold))
    config = {
        "miner": asdict(miner_cfg),
        "selector": asdict(selector_cfg),
        "model": asdict(model_cfg),
        "repetitions": repetitions,
        "folds": folds,
        "seed": seed,
    }
    report = EvalReport(dataset.name, [fr for fr, _ in results], config,
                        [a for _, a in results] if audit else None)
    log.info("%s: mean accuracy %.4f (std %.4f), %.2f features",
             dataset.name, report.mean, report.std, report.avg_features)
    return report
