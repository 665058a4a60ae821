# ========================================
# FileName: _common.py
# Brief: Common things used in several tests
# =========================================

import os

import numpy as np

from jetfdi.core.datasets import Dataset, HEALTHY
from jetfdi.core.engine import SIGNALS

# Long reproductions of the comparison tables run only when set.
SLOW = os.environ.get('JETFDI_SLOW') == '1'

# Fuel flows (kg/s) spanning the operating range of the default engine.
FUEL_RATES = (0.00222, 0.0030, 0.0036, 0.0042, 0.0048)


def make_dataset(features, labels, class_names=None, feature_names=None,
                 run_length=None) -> Dataset:
    """Dataset around a feature matrix, times and run ids filled in.

    :param features: (n, d) matrix.
    :param labels: n labels.
    :param class_names: Defaults to Healthy, Fault1, ...
    :param feature_names: Defaults to x0, x1, ...
    :param run_length: Samples per run, one run by default.
    """
    features = np.asarray(features, dtype=float)
    labels = np.asarray(labels, dtype=int)
    n, d = features.shape
    if class_names is None:
        class_names = (HEALTHY,) + tuple(
            f"Fault{i}" for i in range(1, int(labels.max()) + 1))
    if feature_names is None:
        feature_names = tuple(f"x{j}" for j in range(d))
    run_length = run_length or max(n, 1)
    index = np.arange(n)
    return Dataset(features=features, labels=labels,
                   t=(index % run_length) * 0.1,
                   run_id=index // run_length,
                   class_names=class_names, feature_names=feature_names)


def gaussian_blobs(centers, n_per_class, scale=1.0, seed=0) -> Dataset:
    """Isotropic Gaussian clusters, one class per center."""
    rng = np.random.default_rng(seed)
    centers = np.asarray(centers, dtype=float)
    features = np.vstack([c + scale * rng.standard_normal(
        (n_per_class, centers.shape[1])) for c in centers])
    labels = np.repeat(np.arange(len(centers)), n_per_class)
    return make_dataset(features, labels)


def signal_dataset(n, labels=None, seed=0) -> Dataset:
    """Plausible 12-signal samples around a mid-power operating point."""
    rng = np.random.default_rng(seed)
    nominal = np.array([10.0, 101.0, 300.0, 200.0, 390.0, 192.0, 900.0,
                        115.0, 780.0, 101.0, 770.0, 55000.0])
    features = nominal * (1 + 0.01 * rng.standard_normal((n, len(SIGNALS))))
    labels = np.zeros(n, dtype=int) if labels is None else labels
    return make_dataset(features, labels, feature_names=SIGNALS)


def write_lines(path, lines):
    with open(path, 'w') as f:
        f.write("\n".join(lines) + "\n")
    return path
