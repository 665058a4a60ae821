# ========================================
# FileName: _constants.py
# Brief: Constants used in the CLI
# =========================================

# --------------------------------------------------------
# General CLI Constants
# --------------------------------------------------------
ENGINE = ":airplane:"
FUEL = ":fuelpump:"
FAULT = ":warning:"
DATASET = ":floppy_disk:"
MODEL = ":brain:"
REPORT = ":bar_chart:"
MONITOR = ":magnifying_glass_tilted_left:"
SEED = ":seedling:"
PARAMETERS = ":notebook:"
FILE = ":file_folder:"
TIME = ":stopwatch:"

# --------------------------------------------------------
# Lamps
# --------------------------------------------------------
GREEN_LAMP = ":green_circle:"
RED_LAMP = ":red_circle:"


def get_status_emoji(status):
    """Lamp emoji of a component status."""
    if status == 'red':
        return RED_LAMP
    return GREEN_LAMP
