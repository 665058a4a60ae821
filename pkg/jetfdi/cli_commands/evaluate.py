# ========================================
# FileName: evaluate.py
# Brief: CLI commands scoring and comparing classifiers.
# =========================================

import json
import os

import rich

from ..utils.logging import setup_logger
from ..utils.manifest import write_manifest
from ..utils.parsing import parse_name_list, parse_overrides
from ..core.classifiers import ALGORITHMS, Hyperparams, load_model
from ..core.datasets import Dataset, relabel_for_component
from ..core.errors import ConfigurationError
from ..core.evaluation import (
    compare, evaluate_model, render_confusion, render_report
)
from ._constants import MODEL, REPORT

logger = setup_logger()


def _write_json(path, content):
    with open(path, 'w') as f:
        json.dump(content, f, indent=2, sort_keys=True)
        f.write("\n")


def _align_classes(model, dataset):
    """Relabel a multi-class dataset for a one-vs-rest model."""
    if dataset.class_names == model.class_names:
        return dataset
    if len(model.class_names) == 2 and \
            model.class_names[1] in dataset.class_names[1:]:
        logger.info(f"Relabelling the data for component "
                    f"{model.class_names[1]}")
        return relabel_for_component(dataset, model.class_names[1])
    raise ConfigurationError(
        f"model classes {model.class_names} do not match the data "
        f"classes {dataset.class_names}")


def command_evaluate(model_path, data, output):
    """Score a saved model on a raw dataset.

    Writes `confusion.csv` and `metrics.json` to the `output` directory.
    """
    model = load_model(model_path)
    dataset = _align_classes(model, Dataset.from_csv(data))
    cm, metrics = evaluate_model(model, dataset)

    os.makedirs(output, exist_ok=True)
    confusion_path = os.path.join(output, 'confusion.csv')
    metrics_path = os.path.join(output, 'metrics.json')
    cm.to_csv(confusion_path)
    _write_json(metrics_path, metrics)

    rich.print(f"{MODEL} {model.algorithm} on {len(dataset)} samples")
    rich.print(render_confusion(cm))
    rich.print(f"{REPORT} Accuracy {metrics['accuracy']:.2f} %, "
               f"macro F1 {metrics['f1']:.3f}")
    write_manifest(output, 'evaluate', inputs=[model_path, data],
                   outputs=[confusion_path, metrics_path])
    return metrics


def command_compare(train, test, output, algos="lda,svm,knn,tree",
                    cv=None, jobs=1, seed=0, hp_items=()):
    """Fit several classifiers on one split and tabulate their scores.

    Writes `comparison.csv` and `comparison.json` to `output`.
    """
    algorithms = parse_name_list(algos)
    unknown = [a for a in algorithms if a not in ALGORITHMS]
    if unknown or not algorithms:
        raise ConfigurationError(
            f"unknown algorithms {unknown}, expected among "
            f"{', '.join(ALGORITHMS)}")
    overrides = parse_overrides(hp_items)
    overrides['seed'] = seed
    hp = Hyperparams().with_overrides(overrides)

    train_set = Dataset.from_csv(train)
    test_set = Dataset.from_csv(test)
    report = compare(algorithms, train_set, test_set, hp, cv_folds=cv,
                     seed=seed, jobs=jobs)

    os.makedirs(output, exist_ok=True)
    csv_path = os.path.join(output, 'comparison.csv')
    json_path = os.path.join(output, 'comparison.json')
    report.to_csv(csv_path)
    _write_json(json_path, report.to_dict())

    rich.print(render_report(report))
    write_manifest(output, 'compare', inputs=[train, test],
                   outputs=[csv_path, json_path], seeds={'seed': seed},
                   parameters={'algorithms': algorithms, 'cv': cv,
                               'hyperparams': overrides})
    return report
