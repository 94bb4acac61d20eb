"""Experiment harness: repeated simulation runs and CSV benchmarks.

An experiment repeats (generate train/test, fit every classifier on the
identical train set, score on the identical test set) R times with
derived seeds and reports mean misclassification rates with standard
errors sd/sqrt(R). Real datasets come in as CSV; they are either split
repeatedly (stratified) or evaluated on a fixed train/test pair, in
which case the standard error is the binomial sqrt(e(1-e)/n_t).
"""

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import baselines
from .classifier import TrainConfig, fit_classifier, predict
from .errors import (AllZeroAccuracy, BadParameters, LabelMissing, ParseError)
from .seeds import derive_rng, derive_seed
from .simgen import Dataset, ExampleSpec, bayes_oracle, default_spec, gen_example

DESK_REPETITIONS = 25
DESK_TEST_PER_CLASS = 2000

CLASSIFIER_NAMES = ("md", "lmd", "lda", "qda", "knn", "bayes")


def _fit_predict(name: str, train: Dataset, test_rows, config: TrainConfig,
                 example_id=None, d: int | None = None) -> np.ndarray:
    if name in ("md", "lmd"):
        clf = fit_classifier(train, config)
        return predict(clf, test_rows)[0]
    if name == "lda":
        mode = config.scatter_mode if config.scatter_mode in ("moment", "mcd") else "moment"
        model = baselines.lda_fit(train, scatter_mode=mode,
                                  mcd_coverage=config.mcd_coverage, seed=config.seed)
        return baselines.lda_predict(model, test_rows)
    if name == "qda":
        mode = config.scatter_mode if config.scatter_mode in ("moment", "mcd", "diagonal") else "moment"
        model = baselines.qda_fit(train, scatter_mode=mode,
                                  mcd_coverage=config.mcd_coverage, seed=config.seed)
        return baselines.qda_predict(model, test_rows)
    if name == "knn":
        model = baselines.knn_fit(train, seed=config.seed)
        return baselines.knn_predict(model, test_rows)
    if name == "bayes":
        if example_id is None:
            raise BadParameters("the Bayes oracle exists only for simulated examples")
        return bayes_oracle(example_id, d).predict(test_rows)
    raise BadParameters(f"unknown classifier {name!r}; expected one of {CLASSIFIER_NAMES}")


def _classifier_config(name: str, base: TrainConfig, rep_seed: int) -> TrainConfig:
    feature = "lmd" if name == "lmd" else "md"
    return replace(base, feature=feature, seed=rep_seed)


@dataclass
class ExperimentResult:
    """Per-classifier misclassification rates over repetitions.

    ``per_rep_errors[name]`` holds one error per repetition (NaN where
    the classifier failed on that repetition; failures are recorded, not
    fatal)."""

    dataset: str
    d: int
    repetitions: int
    per_rep_errors: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def mean_error(self, name: str) -> float:
        errs = np.asarray(self.per_rep_errors[name])
        ok = errs[np.isfinite(errs)]
        return float(np.mean(ok)) if ok.size else math.nan

    def std_error(self, name: str) -> float:
        errs = np.asarray(self.per_rep_errors[name])
        ok = errs[np.isfinite(errs)]
        if ok.size <= 1:
            return 0.0
        return float(np.std(ok, ddof=1) / math.sqrt(ok.size))

    def classifiers(self):
        return list(self.per_rep_errors)

    def table_rows(self):
        for name in self.per_rep_errors:
            yield (self.dataset, self.d, name,
                   100.0 * self.mean_error(name), 100.0 * self.std_error(name))


def _one_repetition(spec: ExampleSpec, names, base_config: TrainConfig,
                    master_seed: int, rep: int):
    rep_seed = derive_seed(master_seed, "rep", rep)
    train, test = gen_example(spec, rep_seed)
    errors, failures = {}, {}
    for name in names:
        config = _classifier_config(name, base_config, rep_seed)
        try:
            pred = _fit_predict(name, train, test.rows, config,
                                example_id=spec.example_id, d=spec.d)
            errors[name] = float(np.mean(pred != test.labels))
        except Exception as exc:   # recorded as a missing cell
            errors[name] = math.nan
            failures[name] = f"rep {rep}: {exc}"
    return rep, errors, failures


def _worker(args):
    return _one_repetition(*args)


def run_experiment(spec: ExampleSpec, classifiers, repetitions: int,
                   master_seed: int, config: TrainConfig | None = None,
                   n_jobs: int | None = None) -> ExperimentResult:
    """Repeat the experiment ``repetitions`` times with derived seeds."""
    if repetitions < 1:
        raise BadParameters("repetitions must be >= 1")
    names = list(classifiers)
    for name in names:
        if name not in CLASSIFIER_NAMES:
            raise BadParameters(f"unknown classifier {name!r}")
    config = config or TrainConfig()
    if n_jobs is None:
        n_jobs = int(os.environ.get("MDGAM_THREADS", "1") or "1")

    tasks = [(spec, names, config, master_seed, r) for r in range(repetitions)]
    if n_jobs > 1 and repetitions > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            outcomes = list(pool.map(_worker, tasks))
    else:
        outcomes = [_one_repetition(*t) for t in tasks]
    outcomes.sort(key=lambda item: item[0])

    result = ExperimentResult(dataset=f"example-{spec.example_id}", d=spec.d,
                              repetitions=repetitions)
    for name in names:
        result.per_rep_errors[name] = [errs[name] for _, errs, _ in outcomes]
        notes = [f for _, _, fails in outcomes for f in ([fails[name]] if name in fails else [])]
        if notes:
            result.failures[name] = notes
    return result


def run_example_experiment(example_id, d: int | None, classifiers, repetitions: int,
                           master_seed: int, config: TrainConfig | None = None,
                           n_train_per_class: int = 100,
                           n_test_per_class: int = DESK_TEST_PER_CLASS,
                           n_jobs: int | None = None) -> ExperimentResult:
    """Desk-scale experiment on a built-in example."""
    spec = default_spec(example_id, d=d, n_train_per_class=n_train_per_class,
                        n_test_per_class=n_test_per_class)
    return run_experiment(spec, classifiers, repetitions, master_seed,
                          config=config, n_jobs=n_jobs)


# ---------------------------------------------------------------------------
# CSV datasets


def write_dataset_csv(dataset: Dataset, path) -> None:
    """Write a dataset as CSV with columns x1..xd, label."""
    d = dataset.dim
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{i + 1}" for i in range(d)] + ["label"])
        for row, lab in zip(dataset.rows, dataset.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(lab)])


def read_dataset_csv(path, label_column: str = "label",
                     drop_columns=()) -> tuple[Dataset, list]:
    """Read a CSV with a header row into a Dataset.

    The label column is categorical: distinct values are mapped to 1..J
    (numeric order when every value parses as a number, lexicographic
    otherwise). Returns (dataset, label_names) with ``label_names[j-1]``
    the original value of class j.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if label_column not in header:
            raise LabelMissing(f"{path}: no column named {label_column!r}")
        drop = set(drop_columns)
        unknown = drop - set(header)
        if unknown:
            raise ParseError(f"{path}: cannot drop unknown columns {sorted(unknown)}")
        label_idx = header.index(label_column)
        feat_idx = [i for i, h in enumerate(header)
                    if i != label_idx and h not in drop]
        if not feat_idx:
            raise ParseError(f"{path}: no feature columns left")

        rows, raw_labels = [], []
        for line_no, record in enumerate(reader, start=2):
            if not record or all(not c.strip() for c in record):
                continue
            if len(record) != len(header):
                raise ParseError(
                    f"{path}:{line_no}: expected {len(header)} fields, got {len(record)}")
            try:
                rows.append([float(record[i]) for i in feat_idx])
            except ValueError:
                bad = next(i for i in feat_idx
                           if not _is_float(record[i]))
                raise ParseError(
                    f"{path}:{line_no}: column {header[bad]!r} is not numeric: "
                    f"{record[bad]!r}") from None
            raw_labels.append(record[label_idx].strip())

    if not rows:
        raise ParseError(f"{path}: no data rows")
    uniques = sorted(set(raw_labels), key=_label_sort_key)
    if len(uniques) < 2:
        raise LabelMissing(f"{path}: need at least two classes, found {uniques}")
    mapping = {v: j + 1 for j, v in enumerate(uniques)}
    labels = np.array([mapping[v] for v in raw_labels], dtype=int)
    return Dataset(np.asarray(rows, dtype=float), labels,
                   meta={"source": str(path)}), uniques


def _is_float(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False


def _label_sort_key(value: str):
    try:
        return (0, float(value), "")
    except ValueError:
        return (1, 0.0, value)


def fixed_split_se(error: float, n_test: int) -> float:
    """Binomial standard error of a fixed-split misclassification rate."""
    return math.sqrt(error * (1.0 - error) / n_test)


def _stratified_split(labels: np.ndarray, fraction: float, rng):
    train_idx, test_idx = [], []
    for j in np.unique(labels):
        idx = np.flatnonzero(labels == j)
        idx = idx[rng.permutation(len(idx))]
        n_train = int(round(fraction * len(idx)))
        n_train = min(max(n_train, 1), len(idx) - 1)
        train_idx.append(idx[:n_train])
        test_idx.append(idx[n_train:])
    return np.concatenate(train_idx), np.concatenate(test_idx)


def run_benchmark(csv_path, label_column: str, split, classifiers, seed: int,
                  config: TrainConfig | None = None, test_csv_path=None,
                  drop_columns=()) -> ExperimentResult:
    """Benchmark classifiers on a CSV dataset.

    ``split`` is either the string "fixed" (requires ``test_csv_path``)
    or a tuple ("repeated", R, fraction) for R stratified random splits
    putting ``fraction`` of each class into the training part.
    """
    config = config or TrainConfig()
    names = list(classifiers)
    for name in names:
        if name == "bayes":
            raise BadParameters("the Bayes oracle is unavailable for CSV data")
        if name not in CLASSIFIER_NAMES:
            raise BadParameters(f"unknown classifier {name!r}")

    data, label_names = read_dataset_csv(csv_path, label_column, drop_columns)

    if split == "fixed":
        if test_csv_path is None:
            raise BadParameters("fixed split requires a test CSV")
        test, test_names = read_dataset_csv(test_csv_path, label_column, drop_columns)
        if test_names != label_names:
            raise LabelMissing(
                f"train/test label sets differ: {label_names} vs {test_names}")
        result = ExperimentResult(dataset=str(csv_path), d=data.dim, repetitions=1)
        for name in names:
            cfg = _classifier_config(name, config, seed)
            try:
                pred = _fit_predict(name, data, test.rows, cfg)
                result.per_rep_errors[name] = [float(np.mean(pred != test.labels))]
            except Exception as exc:
                result.per_rep_errors[name] = [math.nan]
                result.failures[name] = [str(exc)]
        result.meta.update({"split": "fixed", "n_test": test.n})
        return result

    kind, reps, fraction = split
    if kind != "repeated" or reps < 1 or not 0 < fraction < 1:
        raise BadParameters(f"bad split spec {split!r}")
    result = ExperimentResult(dataset=str(csv_path), d=data.dim, repetitions=reps)
    per_name = {name: [] for name in names}
    failures = {name: [] for name in names}
    for r in range(reps):
        rng = derive_rng(seed, "split", r)
        tr_idx, te_idx = _stratified_split(data.labels, fraction, rng)
        train = Dataset(data.rows[tr_idx], data.labels[tr_idx], meta={"rep": r})
        test_rows, test_labels = data.rows[te_idx], data.labels[te_idx]
        rep_seed = derive_seed(seed, "split-rep", r)
        for name in names:
            cfg = _classifier_config(name, config, rep_seed)
            try:
                pred = _fit_predict(name, train, test_rows, cfg)
                per_name[name].append(float(np.mean(pred != test_labels)))
            except Exception as exc:
                per_name[name].append(math.nan)
                failures[name].append(f"rep {r}: {exc}")
    result.per_rep_errors = per_name
    result.failures = {k: v for k, v in failures.items() if v}
    result.meta.update({"split": f"repeated({reps},{fraction})"})
    return result


def result_se(result: ExperimentResult, name: str) -> float:
    """Standard error honoring the fixed-split binomial formula."""
    meta = result.meta
    if meta.get("split") == "fixed":
        err = result.mean_error(name)
        return fixed_split_se(err, meta["n_test"])
    return result.std_error(name)


# ---------------------------------------------------------------------------
# reporting


def efficiency_scores(accuracies: dict) -> dict:
    """Per-dataset efficiency: accuracy over the best accuracy.

    ``accuracies`` maps dataset -> {classifier: accuracy in [0, 1]}.
    Returns the same nesting with efficiencies; the per-dataset best
    classifier(s) score exactly 1.
    """
    out = {}
    for dataset, table in accuracies.items():
        if not table:
            raise BadParameters(f"no classifiers for dataset {dataset!r}")
        best = max(table.values())
        if best <= 0:
            raise AllZeroAccuracy(f"all classifiers have zero accuracy on {dataset!r}")
        out[dataset] = {name: acc / best for name, acc in table.items()}
    return out


def efficiency_rows(accuracies: dict):
    """Long-form (dataset, classifier, efficiency) rows for plotting."""
    scores = efficiency_scores(accuracies)
    for dataset in scores:
        for name, e in scores[dataset].items():
            yield dataset, name, e


def write_result_csv(result: ExperimentResult, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dataset", "d", "classifier", "mean_error_pct", "se_pct"])
        for name in result.per_rep_errors:
            writer.writerow([result.dataset, result.d, name,
                             repr(100.0 * result.mean_error(name)),
                             repr(100.0 * result_se(result, name))])


def result_markdown(result: ExperimentResult) -> str:
    lines = ["| dataset | d | classifier | mean error % | se % |",
             "|---|---|---|---|---|"]
    for name in result.per_rep_errors:
        lines.append(f"| {result.dataset} | {result.d} | {name} "
                     f"| {100.0 * result.mean_error(name):.2f} "
                     f"| {100.0 * result_se(result, name):.2f} |")
    return "\n".join(lines)
