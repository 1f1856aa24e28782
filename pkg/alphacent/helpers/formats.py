from numbers import Real
from typing import Any, Mapping, Optional

import pandas as pd

from .. import config


def fmt(value: Any, digits: int = None) -> str:
    """Formats reals to a fixed number of significant digits; leaves anything else alone."""

    if isinstance(value, bool) or not isinstance(value, Real):
        return str(value)
    return f"{float(value):.{digits or config.CSV_DIGITS}g}"


def counted(count: int, noun: str, plural_form: Optional[str] = None) -> str:
    """``counted(3, "round") == "3 rounds"``; irregular plurals go in ``plural_form``."""

    if count == 1:
        return f"{count} {noun}"
    return f"{count} {plural_form or noun + 's'}"


def render_table(frame: pd.DataFrame, digits: int = 6) -> str:
    """Fixed-width text rendering of ``frame`` with reals cut to ``digits`` significant digits."""

    return frame.to_string(index=False, float_format=lambda v: fmt(v, digits))


def key_values(data: Mapping[str, Any]) -> str:
    """Machine-readable ``key = value`` block, one entry per line."""

    lines = []
    for key, value in data.items():
        if hasattr(value, "tolist"):
            value = value.tolist()
        if isinstance(value, (list, tuple)):
            value = " ".join(fmt(v) for v in value)
        else:
            value = fmt(value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"
