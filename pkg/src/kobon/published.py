"""Published tables and tan-form line coefficients.

Tables ship as literal files in ``kobon/data``.  Tan-form arrangements are
given as ``(slopes, intercepts)`` for lines ``y = m * (x - c)``, in table
order (index 0 is line 1).
"""

from __future__ import annotations

from importlib import resources
from math import pi, tan

from .table import ArrangementTable, parse_table

TABLE_NAMES = (
    "fig1a", "fig1b", "fig1c",
    "fig4_1", "fig4_2", "fig4_3",
    "c23", "c24", "c27_1", "c27_2",
)


def load_table(name: str) -> ArrangementTable:
    if name not in TABLE_NAMES:
        raise KeyError(name)
    text = resources.files("kobon.data").joinpath(f"{name}.table").read_text()
    return parse_table(text)


def _t(k, n):
    return tan(k * pi / (n - 1))


def _eps(n):
    return 1.0 / (2 * n)


# name -> (n, slopes, intercept slots); a slot is ("tan", k) for tan(k*pi/(n-1)),
# ("eps", +1/-1) for +-1/(2n), or ("zero",) for the horizontal line through 0.
TAN_FORM = {
    "A1": (5,
           [0, -1.3763819, -19.9833325, 19.9833325, 1.3763819],
           [("zero",), ("tan", -1), ("eps", 1), ("eps", -1), ("tan", 1)]),
    "A2": (7,
           [0, -0.7974734, -2.0765214, -19.9833325, 19.9833325, 2.0765214, 0.7974734],
           [("zero",), ("tan", -1), ("tan", -2), ("eps", 1), ("eps", -1), ("tan", 2), ("tan", 1)]),
    "A3": (9,
           [0, -0.5773503, -1.1917536, -2.7474774, -19.9833325,
            19.9833325, 2.7474774, 1.1917536, 0.5773503],
           [("zero",), ("tan", -3), ("tan", -1), ("tan", -2), ("eps", 1),
            ("eps", -1), ("tan", 2), ("tan", 1), ("tan", 3)]),
    "A4": (11,
           [0, -0.2615465, -1.0298714, -2.0130975, -4.3446427, -25.5645486,
            2.7017707, 1.4888582, 1.0746682, 0.718313, 0.1670701],
           [("zero",), ("tan", -4), ("tan", 1), ("tan", -2), ("eps", -1), ("tan", -3),
            ("tan", -1), ("eps", 1), ("tan", 2), ("tan", 3), ("tan", 4)]),
    "A5": (13,
           [0, -0.2885669, -0.7122015, -0.8749263, -3.6695876, -6.0310043, -15.8845208,
            15.8845208, 6.0310043, 3.6695876, 0.8749263, 0.7122015, 0.2885669],
           [("zero",), ("tan", -5), ("tan", -1), ("tan", -3), ("tan", -2), ("tan", -4), ("eps", 1),
            ("eps", -1), ("tan", 4), ("tan", 2), ("tan", 3), ("tan", 1), ("tan", 5)]),
    "A6": (17,
           [0, -0.3166485, -0.4791101, -0.8204082, -1.0031728, -1.6804231, -2.3663988,
            -5.3495275, 26.7274944, 5.4191716, 2.378765, 1.5246315, 1.1361431,
            0.9298155, 0.4979408, 0.241266, 0.1047156],
           [("zero",), ("tan", 7), ("tan", -4), ("tan", 3), ("tan", -6), ("tan", 1), ("tan", -2),
            ("tan", 5), ("eps", -1), ("tan", 2), ("tan", -5), ("eps", 1), ("tan", -3),
            ("tan", 4), ("tan", -1), ("tan", 6), ("tan", -7)]),
}

# triangle counts printed with each tan-form arrangement
TAN_FORM_TRIANGLES = {"A1": 5, "A2": 11, "A3": 21, "A4": 32, "A5": 47, "A6": 85}


def slot_value(slot, n: int) -> float:
    if slot[0] == "zero":
        return 0.0
    if slot[0] == "eps":
        return slot[1] * _eps(n)
    if slot[0] == "tan":
        return _t(slot[1], n)
    raise ValueError(f"unknown slot {slot!r}")


def tan_form(name: str):
    """Return ``(slopes, intercepts)`` for a printed tan-form arrangement."""
    n, slopes, slots = TAN_FORM[name]
    return list(slopes), [slot_value(s, n) for s in slots]
