# ========================================
# FileName: dataset.py
# Brief: CLI command generating labelled fault datasets.
# =========================================

import json
import os

import rich
from rich.table import Table

from ..utils.logging import setup_logger
from ..utils.manifest import write_manifest
from ..utils.misc import artifact_tree, ensure_parent
from ..core.datasets import (
    clean, correlation_matrix, generate_dataset, get_scenario
)
from ._constants import DATASET, SEED

logger = setup_logger()


def _sibling(path, suffix):
    stem, extension = os.path.splitext(path)
    return f"{stem}_{suffix}{extension or '.csv'}"


def _class_table(dataset, title):
    table = Table(title=title)
    table.add_column("Class")
    table.add_column("Samples", justify="right")
    for name, count in zip(dataset.class_names, dataset.class_counts()):
        table.add_row(name, str(int(count)))
    return table


def command_gen_dataset(output, scenario, runs=None, test_runs=None,
                        duration=100.0, dt=0.1, noise=0.02, seed=0, jobs=1,
                        do_clean=False, corr=False):
    """Generate the training set of a scenario, and its test set.

    The test set goes to `<stem>_test.csv`, using the run ids following
    the training runs. `--clean` writes `<stem>_clean.json`, `--corr`
    the correlation matrix of the training set to `<stem>_corr.csv`.

    :return: Paths written.
    :rtype: list
    """
    preset = get_scenario(scenario)
    runs = preset.train_runs if runs is None else runs
    test_runs = preset.test_runs if test_runs is None else test_runs
    rich.print(f"{DATASET} Scenario [bold]{preset.name}[/bold]: "
               f"{', '.join(preset.class_names)}")
    rich.print(f"{SEED} Seed {seed}")

    directory = ensure_parent(output)
    splits = [('train', output, runs, 0)]
    if test_runs > 0:
        splits.append(('test', _sibling(output, 'test'), test_runs, runs))

    written, reports = [], {}
    for split, path, n_runs, offset in splits:
        dataset = generate_dataset(preset.name, n_runs, duration=duration,
                                   dt=dt, seed=seed, noise_level=noise,
                                   run_offset=offset, jobs=jobs)
        if do_clean:
            dataset, report = clean(dataset)
            reports[split] = report.to_dict()
        dataset.to_csv(path)
        written.append(path)
        rich.print(_class_table(dataset, f"{split} ({n_runs} runs)"))
        if corr and split == 'train':
            corr_path = _sibling(output, 'corr')
            correlation_matrix(dataset).to_csv(corr_path)
            written.append(corr_path)

    if do_clean:
        clean_path = os.path.splitext(output)[0] + "_clean.json"
        with open(clean_path, 'w') as f:
            json.dump(reports, f, indent=2)
            f.write("\n")
        written.append(clean_path)

    rich.print(artifact_tree(written, directory))
    write_manifest(directory, 'gen-dataset', outputs=written,
                   seeds={'seed': seed},
                   parameters={'scenario': preset.name, 'runs': runs,
                               'test_runs': test_runs,
                               'duration': duration, 'dt': dt,
                               'noise_level': noise, 'clean': do_clean})
    logger.info(f"Wrote {len(written)} file(s) to {directory}")
    return written
