"""Console script for jetfdi."""
import sys
import rich_click as click
import rich
import art
from click.exceptions import Abort, ClickException

from . import __version__
from .cli_commands import dataset, evaluate, monitor, simulate, train
from .core.classifiers import ALGORITHMS
from .core.datasets import SCENARIOS
from .core.errors import JetFDIError
from .utils.logging import load_config, setup_logger
from .utils.misc import default_jobs

click.rich_click.USE_RICH_MARKUP = True
click.rich_click.SHOW_ARGUMENTS = True
click.rich_click.GROUP_ARGUMENTS_OPTIONS = True
click.rich_click.APPEND_METAVARS_HELP = True

ASCII_ART_use = art.text2art("jetfdi", font="tarty4")
message_version = ASCII_ART_use + \
        "\n\n%(prog)s, version %(version)s\n" + \
        "Fault detection and isolation for a laboratory turbojet.\n" + \
        "Author: %s\n" % rich.markup.escape("jetfdi developers")

LOG_LEVELS = ['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL']

logger = setup_logger()


def _config():
    try:
        return load_config()
    except Exception as e:
        logger.warning(f"Ignoring unreadable configuration file: {e}")
        return {}


def _fail(ctx, error):
    """Log a domain error and leave with exit code 1."""
    logger.error(str(error))
    ctx.exit(1)


@click.group(invoke_without_command=True)
@click.version_option(version=__version__, message=message_version,
                      prog_name="jetfdi")
@click.option('--log-level', type=click.Choice(LOG_LEVELS),
              default=None, help="Logging level, overrides jetfdi.yaml.")
@click.option('-v', '--verbose', is_flag=True,
              help="Shortcut for --log-level DEBUG.")
@click.pass_context
def main(ctx, log_level, verbose):
    """Fault detection and isolation toolkit for a laboratory turbojet."""
    if verbose:
        log_level = 'DEBUG'
    if log_level is not None:
        setup_logger(log_level)
    ctx.obj = _config()
    if ctx.invoked_subcommand is None:
        click.echo(ctx.get_help())
    return 0


@main.command(name="simulate")
@click.option('-o', '--output', type=click.Path(dir_okay=False),
              required=True, help="Trajectory CSV to write.")
@click.option('--command', 'command', type=click.FloatRange(0, 1),
              default=None, help="Constant fuel pulse command (default 0.7).")
@click.option('--profile', type=click.Path(exists=True, dir_okay=False),
              default=None, help="CSV command profile with columns t,command.")
@click.option('--duration', type=click.FloatRange(min=0), default=100.0,
              show_default=True, help="Simulated time in seconds.")
@click.option('--dt', type=click.FloatRange(0, 0.1, min_open=True),
              default=0.1, show_default=True, help="Time step in seconds.")
@click.option('--faults', type=click.Path(exists=True, dir_okay=False),
              default=None, help="Fault schedule file.")
@click.option('--params', type=click.Path(exists=True, dir_okay=False),
              default=None, help="Engine parameter file (key = value).")
@click.option('--seed', type=int, default=0, show_default=True,
              help="Measurement noise seed.")
@click.option('--initial-fuel', type=click.FloatRange(min=0), default=None,
              help="Start from the equilibrium at this fuel flow (L/hr).")
@click.pass_context
def simulate_main(ctx, output, command, profile, duration, dt, faults,
                  params, seed, initial_fuel):
    """Simulate the engine and write the 12 signals as CSV."""
    if command is not None and profile is not None:
        raise click.UsageError("--command and --profile are exclusive")
    try:
        simulate.command_simulate(output, duration, dt, command=command,
                                  profile=profile, faults=faults,
                                  params=params, seed=seed,
                                  initial_fuel=initial_fuel)
    except (JetFDIError, OSError) as e:
        _fail(ctx, e)
    ctx.exit(0)


@main.command(name="gen-dataset")
@click.option('--scenario', type=click.Choice(list(SCENARIOS)),
              required=True, help="Scenario preset.")
@click.option('--runs', type=click.IntRange(min=1), default=None,
              help="Training runs, the preset count by default.")
@click.option('--test-runs', type=click.IntRange(min=0), default=None,
              help="Test runs, the preset count by default, 0 to skip.")
@click.option('--duration', type=click.FloatRange(min=0, min_open=True),
              default=100.0, show_default=True, help="Run length in seconds.")
@click.option('--dt', type=click.FloatRange(0, 0.1, min_open=True),
              default=0.1, show_default=True, help="Sampling period.")
@click.option('--noise', type=click.FloatRange(min=0), default=None,
              help="Measurement noise level (default 0.02).")
@click.option('--seed', type=int, default=0, show_default=True,
              help="Dataset seed.")
@click.option('--jobs', type=click.IntRange(min=1), default=None,
              help="Parallel runs, all CPUs by default.")
@click.option('--clean', 'do_clean', is_flag=True,
              help="Drop non-finite rows and winsorize outliers.")
@click.option('--corr', is_flag=True,
              help="Also write the feature correlation matrix.")
@click.option('-o', '--output', type=click.Path(dir_okay=False),
              required=True, help="Training set CSV to write.")
@click.pass_context
def gen_dataset_main(ctx, scenario, runs, test_runs, duration, dt, noise,
                     seed, jobs, do_clean, corr, output):
    """Generate labelled training and test sets of a fault scenario."""
    config = ctx.obj or {}
    noise = config.get('noise_level', 0.02) if noise is None else noise
    jobs = default_jobs(config) if jobs is None else jobs
    try:
        dataset.command_gen_dataset(output, scenario, runs=runs,
                                    test_runs=test_runs, duration=duration,
                                    dt=dt, noise=noise, seed=seed,
                                    jobs=jobs, do_clean=do_clean, corr=corr)
    except (JetFDIError, OSError) as e:
        _fail(ctx, e)
    ctx.exit(0)


@main.command(name="train")
@click.option('--data', type=click.Path(exists=True, dir_okay=False),
              required=True, help="Training set CSV.")
@click.option('--algo', type=click.Choice(list(ALGORITHMS)),
              required=True, help="Classifier.")
@click.option('--component', default=None,
              help="Fault class to train one-vs-rest, for a bank member.")
@click.option('--features', default=None,
              help="Comma-separated features to use, all by default.")
@click.option('--hp', 'hp_items', multiple=True, metavar="NAME=VALUE",
              help="Hyperparameter override, repeatable.")
@click.option('--seed', type=int, default=None, help="Training seed.")
@click.option('-o', '--output', type=click.Path(dir_okay=False),
              required=True, help="Model JSON to write.")
@click.pass_context
def train_main(ctx, data, algo, component, features, hp_items, seed,
               output):
    """Fit a classifier on a dataset."""
    try:
        train.command_train(data, algo, output, component=component,
                            features=features, hp_items=hp_items, seed=seed)
    except (JetFDIError, OSError) as e:
        _fail(ctx, e)
    ctx.exit(0)


@main.command(name="evaluate")
@click.option('--model', 'model_path',
              type=click.Path(exists=True, dir_okay=False), required=True,
              help="Model JSON.")
@click.option('--data', type=click.Path(exists=True, dir_okay=False),
              required=True, help="Test set CSV.")
@click.option('-o', '--output', type=click.Path(file_okay=False),
              required=True, help="Directory for confusion.csv and "
              "metrics.json.")
@click.pass_context
def evaluate_main(ctx, model_path, data, output):
    """Score a trained model on a dataset."""
    try:
        evaluate.command_evaluate(model_path, data, output)
    except (JetFDIError, OSError) as e:
        _fail(ctx, e)
    ctx.exit(0)


@main.command(name="compare")
@click.option('--train', 'train_path',
              type=click.Path(exists=True, dir_okay=False), required=True,
              help="Training set CSV.")
@click.option('--test', 'test_path',
              type=click.Path(exists=True, dir_okay=False), required=True,
              help="Test set CSV.")
@click.option('--algos', default=",".join(ALGORITHMS), show_default=True,
              help="Comma-separated classifiers.")
@click.option('--cv', type=click.IntRange(min=2), default=None,
              help="Also run k-fold cross-validation on the training set.")
@click.option('--jobs', type=click.IntRange(min=1), default=None,
              help="Parallel fits, all CPUs by default.")
@click.option('--seed', type=int, default=0, show_default=True,
              help="Training and fold seed.")
@click.option('--hp', 'hp_items', multiple=True, metavar="NAME=VALUE",
              help="Hyperparameter override, repeatable.")
@click.option('-o', '--output', type=click.Path(file_okay=False),
              default="compare", show_default=True,
              help="Directory for the comparison report.")
@click.pass_context
def compare_main(ctx, train_path, test_path, algos, cv, jobs, seed,
                 hp_items, output):
    """Compare classifiers on a train/test split."""
    jobs = default_jobs(ctx.obj) if jobs is None else jobs
    try:
        evaluate.command_compare(train_path, test_path, output, algos=algos,
                                 cv=cv, jobs=jobs, seed=seed,
                                 hp_items=hp_items)
    except (JetFDIError, OSError) as e:
        _fail(ctx, e)
    ctx.exit(0)


@main.command(name="monitor")
@click.option('--bank', 'bank_path',
              type=click.Path(exists=True, dir_okay=False), required=True,
              help="Bank description (YAML).")
@click.option('--input', 'source', type=click.File('r'), default='-',
              show_default=True, help="Telemetry CSV or JSONL, - for stdin.")
@click.option('--output', 'sink', type=click.File('w'), default='-',
              show_default=True, help="JSONL status records, - for stdout.")
@click.option('--summary', 'summary_path',
              type=click.Path(dir_okay=False), default=None,
              help="JSON summary file, appended to the output otherwise.")
@click.option('--debounce', type=click.IntRange(min=1), default=None,
              help="Consecutive verdicts needed to change a status.")
@click.pass_context
def monitor_main(ctx, bank_path, source, sink, summary_path, debounce):
    """Run the classifier bank over telemetry. Exit code 2 on faults."""
    if debounce is None and (ctx.obj or {}).get('debounce'):
        debounce = int(ctx.obj['debounce'])
    try:
        code = monitor.command_monitor(bank_path, source, sink,
                                       summary_path=summary_path,
                                       debounce=debounce)
    except (JetFDIError, OSError) as e:
        _fail(ctx, e)
    ctx.exit(code)


def run(argv=None) -> int:
    """Run the CLI on an argument list and return the exit code."""
    try:
        code = main.main(args=argv, prog_name="jetfdi",
                         standalone_mode=False)
    except ClickException as e:
        e.show()
        return 1
    except Abort:
        return 1
    except JetFDIError as e:
        logger.error(str(e))
        return 1
    return code if isinstance(code, int) else 0


def entry_point():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    entry_point()
