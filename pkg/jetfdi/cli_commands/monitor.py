# ========================================
# FileName: monitor.py
# Brief: CLI command running the classifier bank over a telemetry stream.
# =========================================

import json
import os

from rich.console import Console
from rich.table import Table

from ..utils.logging import setup_logger
from ..utils.manifest import write_manifest
from ..core.monitor import build_bank, load_bank_config, monitor_stream
from ._constants import MONITOR, get_status_emoji

logger = setup_logger()


def _summary_table(summary):
    table = Table(title=f"{MONITOR} Health summary")
    table.add_column("Component")
    table.add_column("Status")
    table.add_column("Faulty verdicts", justify="right")
    table.add_column("Episodes", justify="right")
    for component, content in summary.components.items():
        table.add_row(component,
                      f"{get_status_emoji(content['status'])} "
                      f"{content['status']}",
                      str(content['faulty_verdicts']),
                      str(len(content['episodes'])))
    return table


def command_monitor(bank_path, source, sink, summary_path=None,
                    debounce=None):
    """Monitor a stream and return the exit code.

    :param bank_path: Bank YAML description.
    :type bank_path: str

    :param source: Readable text stream of telemetry.

    :param sink: Writable text stream for the status records.

    :param summary_path: File receiving the JSON summary. Without it the
        summary is the last line written to `sink`.
    :type summary_path: str

    :param debounce: Debounce overriding the bank entries.
    :type debounce: int

    :return: 0 when every component stayed green, 2 when a fault was
        detected.
    :rtype: int
    """
    bank = build_bank(load_bank_config(bank_path))
    summary = monitor_stream(source, bank, sink=sink,
                             debounce_override=debounce)
    content = summary.to_dict()
    if summary_path is not None:
        with open(summary_path, 'w') as f:
            json.dump(content, f, indent=2, sort_keys=True)
            f.write("\n")
        write_manifest(os.path.dirname(os.path.abspath(summary_path)),
                       'monitor', inputs=[bank_path],
                       outputs=[summary_path],
                       parameters={'debounce': debounce})
    else:
        sink.write(json.dumps({'summary': content}, sort_keys=True) + "\n")

    Console(stderr=True).print(_summary_table(summary))
    if summary.faults_detected:
        logger.warning(f"{summary.n_episodes} fault episode(s) detected")
    return summary.exit_code
