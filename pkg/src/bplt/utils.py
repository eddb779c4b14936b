import json
import os
from collections.abc import Callable, Iterable, Sequence
from pathlib import Path
from typing import TextIO

import numpy as np
from pathos.multiprocessing import ProcessingPool

from .constants import FLOAT_DIGITS, THREADS_ENV
from .exceptions import ValidationError

__all__ = [
    "format_float",
    "format_row",
    "parse_sweep",
    "thread_count",
    "parallel_map",
    "write_csv",
    "ScalarTable",
]


def format_float(value: float | int | None) -> str:
    """Format a number with 17 significant digits (round-trip exact for doubles).

    Integers are written as integers and `None` as an empty field.
    """
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.{FLOAT_DIGITS}g}"


def format_row(values: Iterable) -> str:
    return ",".join(
        v if isinstance(v, str) else format_float(v) for v in values
    )


def parse_sweep(text: str) -> np.ndarray:
    """Parse a sweep specification.

    Args
    ----
    text : str
        `lo:hi:steps`, inclusive of both ends. `steps == 1` gives the single point `lo`.

    Returns
    -------
    grid : np.ndarray
        The evaluation points.
    """
    parts = text.split(":")
    if len(parts) != 3:
        raise ValidationError(f"sweep must look like lo:hi:steps, got {text!r}")
    try:
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as err:
        raise ValidationError(f"could not parse sweep {text!r}: {err}") from err
    if steps < 1:
        raise ValidationError(f"sweep needs at least one step, got {steps}")
    if steps == 1:
        return np.array([lo])
    if not hi > lo:
        raise ValidationError(f"empty sweep range {lo}:{hi}")
    return np.linspace(lo, hi, steps)


def thread_count() -> int:
    """Worker count from the environment, at least 1."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValidationError(f"{THREADS_ENV} must be an integer, got {raw!r}")


def parallel_map(func: Callable, items: Sequence, threads: int | None = None) -> list:
    """Map `func` over `items`, on a process pool when more than one worker is allowed.

    Results come back in input order either way.
    """
    threads = thread_count() if threads is None else threads
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ProcessingPool(nodes=min(threads, len(items))) as pool:
        results = pool.map(func, items)
        pool.close()
        pool.join()
        # pathos caches pools by size; a closed one must not be handed out again
        pool.clear()
    return results


def write_csv(
    header: Sequence[str],
    rows: Iterable[Sequence],
    out: Path | TextIO,
    comments: Sequence[str] = (),
) -> None:
    """Write comment lines (prefixed with `# `), a header row and data rows."""
    lines = [f"# {comment}" for comment in comments]
    lines.append(",".join(header))
    lines.extend(format_row(row) for row in rows)
    text = "\n".join(lines) + "\n"
    if isinstance(out, Path):
        with open(out, "wt") as f:
            f.write(text)
    else:
        out.write(text)


class ScalarTable(dict):
    """Ordered key/value summary printed as `key,value` lines or as JSON."""

    def __str__(self) -> str:
        lines = ["key,value"]
        lines.extend(f"{key},{format_row([value])}" for key, value in self.items())
        return "\n".join(lines)

    def as_json(self) -> str:
        return json.dumps(
            {k: _json_value(v) for k, v in self.items()},
            indent=4,
        )


def _json_value(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if np.isfinite(value) else str(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_json_value(v) for v in value]
    return value
