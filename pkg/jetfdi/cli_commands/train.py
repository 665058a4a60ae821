# ========================================
# FileName: train.py
# Brief: CLI command fitting one classifier.
# =========================================

import rich

from ..utils.logging import setup_logger
from ..utils.manifest import write_manifest
from ..utils.misc import ensure_parent
from ..utils.parsing import parse_name_list, parse_overrides
from ..core.classifiers import Hyperparams, fit, save_model
from ..core.datasets import (
    Dataset, normalize_apply, normalize_fit, relabel_for_component,
    select_features
)
from ._constants import DATASET, MODEL, PARAMETERS, TIME

logger = setup_logger()


def command_train(data, algorithm, output, component=None, features=None,
                  hp_items=(), seed=None):
    """Fit a classifier on a dataset CSV and save it.

    :param data: Raw training set.
    :type data: str

    :param algorithm: One of lda, svm, knn, tree.
    :type algorithm: str

    :param output: Model JSON path.
    :type output: str

    :param component: Fault class trained against all others, for a bank
        member.
    :type component: str

    :param features: Comma-separated features to keep.
    :type features: str

    :param hp_items: `name=value` hyperparameter overrides.
    :type hp_items: tuple

    :param seed: Overrides the `seed` hyperparameter.
    :type seed: int
    """
    dataset = Dataset.from_csv(data)
    rich.print(f"{DATASET} {len(dataset)} samples, classes "
               f"{', '.join(dataset.class_names)}")
    if features:
        dataset = select_features(dataset, parse_name_list(features))
    if component:
        dataset = relabel_for_component(dataset, component)
        rich.print(f"{DATASET} One-vs-rest on [bold]{component}[/bold]")

    overrides = parse_overrides(hp_items)
    if seed is not None:
        overrides['seed'] = seed
    hp = Hyperparams().with_overrides(overrides)
    if overrides:
        rich.print(f"{PARAMETERS} Overrides: {overrides}")

    stats = normalize_fit(dataset)
    model = fit(algorithm, normalize_apply(dataset, stats), hp)
    directory = ensure_parent(output)
    save_model(model, output)

    rich.print(f"{TIME} Trained {algorithm} in {model.training_time:.3f} s")
    rich.print(f"{MODEL} Model: {output}")
    write_manifest(directory, 'train', inputs=[data], outputs=[output],
                   seeds={'seed': hp.seed},
                   parameters={'algorithm': algorithm,
                               'component': component,
                               'features': list(dataset.feature_names),
                               'hyperparams': overrides})
    return model
