"""Named direction sets used across tests and the command line."""

from __future__ import annotations

import re

from .lattice import DirectionSet


def haar() -> DirectionSet:
    return DirectionSet([(1,)])


def bspline(n: int) -> DirectionSet:
    """n copies of 1: the univariate degree n-1 cardinal B-spline."""
    if n < 1:
        raise ValueError("need n >= 1")
    return DirectionSet([(1,)] * n)


def tensor(m1: int, m2: int) -> DirectionSet:
    """m1 copies of e1 and m2 copies of e2: a tensor-product spline."""
    if m1 < 1 or m2 < 1:
        raise ValueError("need positive multiplicities")
    return DirectionSet([(1, 0)] * m1 + [(0, 1)] * m2)


def courant() -> DirectionSet:
    """e1, e2, e1+e2: the piecewise-linear hat on the three-direction mesh."""
    return DirectionSet([(1, 0), (0, 1), (1, 1)])


def courant2() -> DirectionSet:
    """Each courant direction doubled: C^2, cubic pieces."""
    return DirectionSet([(1, 0), (1, 0), (0, 1), (0, 1), (1, 1), (1, 1)])


def zp() -> DirectionSet:
    """Four-direction set with a determinant-2 pair; not unimodular."""
    return DirectionSet([(1, 0), (0, 1), (1, 1), (1, -1)])


_PLAIN = {
    "haar": haar,
    "courant": courant,
    "courant2": courant2,
    "zp": zp,
}


def preset(name: str) -> DirectionSet:
    """Look up a preset by name, e.g. 'courant', 'bspline(3)', 'tensor(2,2)'."""
    key = name.strip().lower().replace(" ", "")
    if key in _PLAIN:
        return _PLAIN[key]()
    m = re.fullmatch(r"bspline\((\d+)\)", key)
    if m:
        return bspline(int(m.group(1)))
    m = re.fullmatch(r"tensor\((\d+),(\d+)\)", key)
    if m:
        return tensor(int(m.group(1)), int(m.group(2)))
    raise ValueError(f"unknown preset {name!r}")


PRESET_NAMES = ("haar", "bspline(n)", "tensor(m1,m2)", "courant", "courant2", "zp")
