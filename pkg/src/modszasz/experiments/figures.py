"""Curve settings for the e^x and sin x comparison figures.

Each setting lists curve families as (sequence spec, n values). ``k = None``
means the truncation index is not stated and is taken from the run's
``fixed_k``; ``interval = None`` means it is not stated and defaults to [0, 2].
"""

import math

CLASSICAL = "classical"
HARMONIC = "psum:1"
ROOT = "psum:0.5"

DEFAULT_INTERVAL = (0.0, 2.0)


def _three_families(ns):
    return ((CLASSICAL, ns), (HARMONIC, ns), (ROOT, ns))


def _catalog():
    small = tuple(range(3, 16))
    mid = tuple(range(20, 31))
    settings = {}
    for tag, k, ns in (("F1", 50, small), ("F2", 100, small), ("F4", 100, mid)):
        for suffix, hi in zip("abc", (2.0, 4.0, 6.0)):
            settings[tag + suffix] = {
                "function": "exp",
                "interval": (0.0, hi),
                "k": k,
                "curves": _three_families(ns),
            }
    settings["F5b"] = {
        "function": "exp",
        "interval": None,
        "k": None,
        "curves": ((CLASSICAL, mid), (HARMONIC, tuple(range(120, 131))), (ROOT, tuple(range(120, 131)))),
    }
    settings["F5c"] = {
        "function": "exp",
        "interval": None,
        "k": None,
        "curves": ((CLASSICAL, (7, 8, 9)), (ROOT, tuple(range(78, 96)))),
    }
    wide = tuple(range(80, 101))
    for suffix, k in zip("ab", (100, 120)):
        settings["F6" + suffix] = {
            "function": "sin",
            "interval": (0.0, 2.0 * math.pi),
            "k": k,
            "curves": ((CLASSICAL, tuple(range(20, 26))), (ROOT, wide), (HARMONIC, wide)),
        }
    return settings


SETTINGS = _catalog()


def curve_count(name):
    return sum(len(ns) for _, ns in SETTINGS[name]["curves"])
