# ========================================
# FileName: parsing.py
# Brief: Parsing of the flat text and YAML inputs of jetfdi.
# =========================================

import yaml

from ..core.errors import ConfigurationError


def parse_scalar(text: str):
    """Convert a string to int, float or bool when possible.

    :param text: The raw value.
    :type text: str

    :return: The converted value, the stripped string otherwise.
    """
    value = text.strip()
    if value.lower() in ("true", "yes"):
        return True
    if value.lower() in ("false", "no"):
        return False
    if value.lower() in ("none", "null"):
        return None
    try:
        return int(value)
    except ValueError:
        pass
    try:
        return float(value)
    except ValueError:
        return value


def parse_key_value_lines(lines, allowed_keys=None) -> dict:
    """Parse `key = value` lines. Blank lines and `#` comments are ignored.

    :param lines: Iterable of text lines.
    :type lines: iterable

    :param allowed_keys: When given, any other key is rejected.
    :type allowed_keys: iterable

    :return: Mapping of key to converted value.
    :rtype: dict
    """
    allowed = None if allowed_keys is None else set(allowed_keys)
    content = {}
    for number, line in enumerate(lines, start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigurationError(
                f"line {number}: expected 'key = value', got '{line}'")
        key, value = (part.strip() for part in line.split('=', 1))
        if allowed is not None and key not in allowed:
            raise ConfigurationError(
                f"line {number}: unknown key '{key}'")
        content[key] = parse_scalar(value)
    return content


def parse_key_value_file(path: str, allowed_keys=None) -> dict:
    """Parse a flat `key = value` file.

    :param path: Path to the file.
    :type path: str

    :param allowed_keys: When given, any other key is rejected.
    :type allowed_keys: iterable

    :return: Mapping of key to converted value.
    :rtype: dict
    """
    with open(path, 'r') as f:
        return parse_key_value_lines(f, allowed_keys)


def parse_overrides(items) -> dict:
    """Parse repeated `name=value` command line overrides.

    :param items: Iterable of `name=value` strings.
    :type items: iterable

    :return: Mapping of name to converted value.
    :rtype: dict
    """
    return parse_key_value_lines(items)


def parse_name_list(text: str) -> list:
    """Split a comma separated list, dropping empty entries."""
    if text is None:
        return []
    return [item.strip() for item in text.split(',') if item.strip()]


def parse_yaml_file(path: str) -> dict:
    """Read a YAML mapping.

    :param path: Path to the YAML file.
    :type path: str

    :return: The parsed mapping.
    :rtype: dict
    """
    try:
        with open(path, 'r') as f:
            content = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigurationError(f"{path}: invalid YAML ({e})") from e
    if not isinstance(content, dict):
        raise ConfigurationError(f"{path}: expected a YAML mapping")
    return content
