"""Deterministic CSV serialization shared by all export paths.

Numbers are written with 17 significant digits, '.' decimal separator,
and '\\n' line endings regardless of platform, so identical inputs
produce byte-identical files.
"""

from __future__ import annotations

import io


def format_number(x) -> str:
    if isinstance(x, bool):
        raise TypeError("bool is not a CSV number")
    if isinstance(x, int):
        return str(x)
    v = float(x)
    if v != v or v in (float("inf"), float("-inf")):
        raise ValueError(f"non-finite value in CSV output: {v}")
    s = f"{v:.17g}"
    # normalize negative zero so reruns are byte-identical
    return "0" if s == "-0" else s


def write_csv(path, header: list[str], rows) -> None:
    buf = io.StringIO()
    buf.write(",".join(header))
    buf.write("\n")
    for row in rows:
        buf.write(",".join(format_number(v) for v in row))
        buf.write("\n")
    with open(path, "w", encoding="ascii", newline="") as f:
        f.write(buf.getvalue())
