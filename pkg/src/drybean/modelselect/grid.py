"""Hyperparameter grids and the plain-text grid file format.

A grid file lists one axis per line::

    # comment
    C = 0.1, 1, 10
    kernel = linear, rbf

Values that parse as int or float become numbers; anything else is a string.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from drybean.errors import FormatError, InputError


@dataclass(frozen=True)
class ParamGrid:
    axes: tuple[tuple[str, tuple], ...]

    def __post_init__(self):
        names = [name for name, _ in self.axes]
        if len(set(names)) != len(names):
            raise InputError("duplicate grid axis")
        for name, values in self.axes:
            if not values:
                raise InputError(f"grid axis {name!r} is empty")

    @classmethod
    def from_dict(cls, mapping: dict) -> ParamGrid:
        return cls(tuple((k, tuple(v)) for k, v in mapping.items()))

    def candidates(self) -> list[dict]:
        """Cartesian product in declaration order, last axis varying fastest."""
        names = [name for name, _ in self.axes]
        return [dict(zip(names, combo)) for combo in itertools.product(*(v for _, v in self.axes))]

    def __len__(self):
        n = 1
        for _, values in self.axes:
            n *= len(values)
        return n

    def to_text(self) -> str:
        return "".join(f"{name} = {', '.join(format_value(v) for v in values)}\n" for name, values in self.axes)


def format_value(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(v)
    return str(v)


def parse_value(text: str):
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def format_params(params: dict) -> str:
    return "; ".join(f"{k}={format_value(v)}" for k, v in params.items())


def parse_params(text: str) -> dict:
    out = {}
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        key, sep, value = part.partition("=")
        if not sep:
            raise ValueError(f"bad parameter entry {part!r}")
        out[key.strip()] = parse_value(value)
    return out


def parse_grid(text: str) -> ParamGrid:
    axes = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        name, sep, rest = line.partition("=")
        name = name.strip()
        if not sep or not name:
            raise FormatError(f"expected 'name = v1, v2, ...', got {line!r}", lineno)
        values = tuple(parse_value(v) for v in rest.split(",") if v.strip())
        if not values:
            raise FormatError(f"axis {name!r} has no values", lineno)
        axes.append((name, values))
    if not axes:
        raise FormatError("grid file defines no axes")
    try:
        return ParamGrid(tuple(axes))
    except InputError as exc:
        raise FormatError(str(exc)) from None


SVM_GRID = ParamGrid((
    ("n_components", (10,)),
    ("C", (0.1, 1, 10)),
    ("kernel", ("linear", "rbf")),
    ("gamma", ("scale", "auto")),
))

GBT_GRID = ParamGrid((
    ("n_estimators", (50, 100, 150)),
    ("learning_rate", (0.1, 0.3)),
    ("colsample_bytree", (0.3, 0.7, 1)),
    ("max_depth", (10,)),
))

DEFAULT_GRIDS = {"svm": SVM_GRID, "gbt": GBT_GRID}
