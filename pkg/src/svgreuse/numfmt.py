"""Canonical number formatting: shortest decimal, at most 4 places.

Used everywhere a number is written into SVG output or DSL source so
repeated runs are byte-identical.
"""

MAX_PLACES = 4


def format_number(value: float, places: int = MAX_PLACES) -> str:
    if value != value or value in (float("inf"), float("-inf")):
        raise ValueError(f"cannot format non-finite number {value!r}")
    text = f"{value:.{places}f}"
    text = text.rstrip("0").rstrip(".")
    if text in ("-0", ""):
        text = "0"
    return text
