import re

try:
    import tomllib as _toml
except ModuleNotFoundError:  # Python < 3.11
    import tomli as _toml

loads = _toml.loads
TOMLDecodeError = _toml.TOMLDecodeError


def error_line(exc: Exception) -> int | None:
    lineno = getattr(exc, "lineno", None)
    if lineno:
        return lineno
    m = re.search(r"line (\d+)", str(exc))
    return int(m.group(1)) if m else None
