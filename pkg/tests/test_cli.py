# ========================================
# FileName: test_cli.py
# Brief: Test the CLI
# =========================================

import json
import os
import tempfile
import unittest

import numpy as np
from click.testing import CliRunner

from jetfdi import cli
from jetfdi.core.classifiers import save_model
from jetfdi.core.engine import Trajectory
from jetfdi.utils.manifest import MANIFEST_NAME
from jetfdi.utils.misc import sha256_file
from ._common import write_lines
from .test_core_monitor import csv_lines, threshold_model


# Test main commands of CLI
class CLIMainTest(unittest.TestCase):
    """Test the main commands and options of the cli"""

    def setUp(self):
        self.runner = CliRunner()

    def test_nocommand(self):
        """Test the parser without a command. Should exit with no error."""
        result = self.runner.invoke(cli.main)
        self.assertEqual(result.exit_code, 0)

    def test_version(self):
        """Test the version flag."""
        result = self.runner.invoke(cli.main, ["--version"])
        self.assertEqual(result.exit_code, 0)
        self.assertIn(", version", result.output)

    def test_help(self):
        """Test the help flag of the group and of every command."""
        result = self.runner.invoke(cli.main, ["--help"])
        self.assertEqual(result.exit_code, 0)
        for command in ("simulate", "gen-dataset", "train", "evaluate",
                        "compare", "monitor"):
            result = self.runner.invoke(cli.main, [command, "--help"])
            self.assertEqual(result.exit_code, 0, command)

    def test_usage_errors_exit_with_one(self):
        """Through `run`, bad invocations give exit code 1."""
        self.assertEqual(cli.run(["simulate"]), 1)
        self.assertEqual(cli.run(["gen-dataset", "--scenario", "FD009",
                                  "-o", "x.csv"]), 1)
        self.assertEqual(cli.run(["frobnicate"]), 1)
        self.assertEqual(cli.run(["--version"]), 0)


class CLISimulateTest(unittest.TestCase):
    """Test the simulate command."""

    def setUp(self):
        self.runner = CliRunner()
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def test_trajectory(self):
        output = os.path.join(self.tmp.name, "run.csv")
        result = self.runner.invoke(
            cli.main, ["simulate", "-o", output, "--duration", "1"])
        self.assertEqual(result.exit_code, 0, result.output)
        trajectory = Trajectory.from_csv(output)
        self.assertEqual(len(trajectory), 10)
        np.testing.assert_allclose(trajectory.column('mf'), 14.0)
        self.assertTrue(os.path.exists(
            os.path.join(self.tmp.name, MANIFEST_NAME)))

    def test_exclusive_inputs(self):
        profile = write_lines(os.path.join(self.tmp.name, "p.csv"),
                              ["t,command", "0,0.6", "10,0.8"])
        result = self.runner.invoke(
            cli.main, ["simulate", "-o", "x.csv", "--command", "0.7",
                       "--profile", profile])
        self.assertNotEqual(result.exit_code, 0)

    def test_domain_error(self):
        faults = write_lines(os.path.join(self.tmp.name, "faults.txt"),
                             ["SensorBias,T9,0.05,1,2"])
        result = self.runner.invoke(
            cli.main, ["simulate", "-o", os.path.join(self.tmp.name, "r.csv"),
                       "--faults", faults])
        self.assertEqual(result.exit_code, 1)


class CLIPipelineTest(unittest.TestCase):
    """gen-dataset, train, evaluate and compare on a small scenario."""

    @classmethod
    def setUpClass(cls):
        cls.tmp = tempfile.TemporaryDirectory()
        cls.train_csv = os.path.join(cls.tmp.name, "data", "fd001.csv")
        cls.test_csv = os.path.join(cls.tmp.name, "data", "fd001_test.csv")
        result = CliRunner().invoke(cli.main, [
            "gen-dataset", "--scenario", "FD001", "--runs", "3",
            "--test-runs", "3", "--duration", "5", "--jobs", "1",
            "--corr", "-o", cls.train_csv])
        assert result.exit_code == 0, result.output

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()

    def setUp(self):
        self.runner = CliRunner()

    def path(self, *names):
        return os.path.join(self.tmp.name, *names)

    def train(self, output, *extra):
        return self.runner.invoke(cli.main, [
            "train", "--data", self.train_csv, "--algo", "tree",
            "-o", output, *extra])

    def test_dataset_files(self):
        for name in ("fd001.csv", "fd001_test.csv", "fd001_corr.csv",
                     MANIFEST_NAME):
            self.assertTrue(os.path.exists(self.path("data", name)), name)
        with open(self.path("data", MANIFEST_NAME)) as f:
            manifest = json.load(f)
        entry = manifest['commands']['gen-dataset']
        self.assertEqual(entry['seeds'], {'seed': 0})
        self.assertEqual(len(entry['outputs']), 3)

    def test_train_is_deterministic(self):
        documents = []
        for name in ("a.json", "b.json"):
            result = self.train(self.path("models", name))
            self.assertEqual(result.exit_code, 0, result.output)
            with open(self.path("models", name)) as f:
                document = json.load(f)
            for key in ('training_time', 'checksum'):
                document.pop(key)
            documents.append(document)
        self.assertEqual(documents[0], documents[1])

    def test_train_rejects_bad_hyperparameter(self):
        result = self.train(self.path("models", "bad.json"),
                            "--hp", "depth=3")
        self.assertEqual(result.exit_code, 1)

    def test_evaluate(self):
        model = self.path("models", "tree.json")
        self.assertEqual(self.train(model).exit_code, 0)
        output = self.path("eval")
        result = self.runner.invoke(cli.main, [
            "evaluate", "--model", model, "--data", self.test_csv,
            "-o", output])
        self.assertEqual(result.exit_code, 0, result.output)
        with open(os.path.join(output, "metrics.json")) as f:
            metrics = json.load(f)
        self.assertEqual(metrics['algorithm'], 'tree')
        self.assertTrue(0 <= metrics['accuracy'] <= 100)
        self.assertTrue(os.path.exists(os.path.join(output,
                                                    "confusion.csv")))

    def test_compare(self):
        output = self.path("compare")
        result = self.runner.invoke(cli.main, [
            "compare", "--train", self.train_csv, "--test", self.test_csv,
            "--algos", "knn,tree", "--jobs", "1", "-o", output])
        self.assertEqual(result.exit_code, 0, result.output)
        with open(os.path.join(output, "comparison.json")) as f:
            report = json.load(f)
        self.assertEqual(sorted(r['classifier'] for r in report['rows']),
                         ['knn', 'tree'])

    def test_compare_unknown_algorithm(self):
        result = self.runner.invoke(cli.main, [
            "compare", "--train", self.train_csv, "--test", self.test_csv,
            "--algos", "lda,forest", "-o", self.path("compare_bad")])
        self.assertEqual(result.exit_code, 1)


class CLIDeterminismTest(unittest.TestCase):
    """The same seeds give byte-identical artifacts."""

    artifacts = ("data/fd001.csv", "data/fd001.csv.meta.json",
                 "data/fd001_test.csv", "data/fd001_test.csv.meta.json",
                 "data/" + MANIFEST_NAME, "eval/confusion.csv",
                 "eval/metrics.json")

    def pipeline(self, root):
        runner = CliRunner()
        data = os.path.join(root, "data", "fd001.csv")
        model = os.path.join(root, "models", "lda.json")
        for args in (
                ["gen-dataset", "--scenario", "FD001", "--runs", "3",
                 "--test-runs", "3", "--duration", "5", "--seed", "4",
                 "--jobs", "1", "-o", data],
                ["train", "--data", data, "--algo", "lda", "-o", model],
                ["evaluate", "--model", model, "--data",
                 os.path.join(root, "data", "fd001_test.csv"),
                 "-o", os.path.join(root, "eval")]):
            result = runner.invoke(cli.main, args)
            self.assertEqual(result.exit_code, 0, result.output)
        return {name: sha256_file(os.path.join(root, name))
                for name in self.artifacts}

    def test_pipeline_is_reproducible(self):
        with tempfile.TemporaryDirectory() as tmp:
            first = self.pipeline(os.path.join(tmp, "a"))
            second = self.pipeline(os.path.join(tmp, "b"))
        self.assertEqual(first, second)


class CLIMonitorTest(unittest.TestCase):
    """Exit codes of the monitor command."""

    def setUp(self):
        self.runner = CliRunner()
        self.tmp = tempfile.TemporaryDirectory()
        save_model(threshold_model(), os.path.join(self.tmp.name, "t2.json"))
        self.bank = write_lines(os.path.join(self.tmp.name, "bank.yaml"), [
            "debounce: 3",
            "components:",
            "  - name: T2",
            "    model: t2.json",
            "    features: [T2]",
        ])

    def tearDown(self):
        self.tmp.cleanup()

    def monitor(self, t2_values, *extra):
        stream = write_lines(os.path.join(self.tmp.name, "stream.csv"),
                             csv_lines(t2_values))
        output = os.path.join(self.tmp.name, "status.jsonl")
        result = self.runner.invoke(cli.main, [
            "monitor", "--bank", self.bank, "--input", stream,
            "--output", output, *extra])
        with open(output) as f:
            records = [json.loads(line) for line in f]
        return result, records

    def test_healthy_stream(self):
        result, records = self.monitor([390] * 10)
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertEqual(len(records), 11)
        self.assertEqual(records[-1]['summary']['episodes'], 0)

    def test_fault_detected(self):
        summary = os.path.join(self.tmp.name, "summary.json")
        result, records = self.monitor([390] * 5 + [410] * 5,
                                       "--summary", summary)
        self.assertEqual(result.exit_code, 2)
        self.assertEqual(len(records), 10)
        self.assertEqual(records[-1]['status'], 'red')
        with open(summary) as f:
            self.assertEqual(json.load(f)['episodes'], 1)

    def test_missing_model(self):
        os.remove(os.path.join(self.tmp.name, "t2.json"))
        result = self.runner.invoke(cli.main, [
            "monitor", "--bank", self.bank, "--input", self.bank])
        self.assertEqual(result.exit_code, 1)
