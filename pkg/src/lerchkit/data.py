"""Frequency tables, built-in datasets and their file formats.

CSV files carry a ``count,observed`` header followed by one row per count
class.  JSON files hold ``{"label", "classes": [{"count", "observed"}],
"grouping", "fold_tail", "truncation": {"a", "b"}}``; only ``classes`` is
required.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .distribution import Truncation
from .errors import DomainError, ParseError, UnknownDataset, ValidationError

__all__ = [
    "FrequencyTable",
    "GroupingSpec",
    "Dataset",
    "BUILTIN_NAMES",
    "builtin",
    "load_table",
    "load_dataset",
    "table_to_csv",
    "dataset_to_json",
    "write_dataset",
]


@dataclass(frozen=True)
class FrequencyTable:
    """Observed frequencies per count class.

    ``n_total`` defaults to the sum of the observed column.  Tables of relative
    abundances set it explicitly (to 1).
    """

    classes: tuple
    label: str = ""
    n_total: float | None = None

    def __post_init__(self):
        rows = tuple((c, o) for c, o in self.classes)
        if not rows:
            raise ValidationError("frequency table has no classes")
        prev = None
        for count, obs in rows:
            if isinstance(count, bool) or int(count) != count or count < 0:
                raise ValidationError(f"count class must be a nonnegative integer, got {count!r}")
            if not (math.isfinite(obs) and obs >= 0):
                raise ValidationError(f"observed frequency must be finite and >= 0, got {obs!r}")
            if prev is not None and count <= prev:
                kind = "duplicate" if count == prev else "out-of-order"
                raise ValidationError(f"count classes must be strictly increasing ({kind} class {count})")
            prev = count
        rows = tuple((int(c), float(o)) for c, o in rows)
        object.__setattr__(self, "classes", rows)
        total = math.fsum(o for _, o in rows) if self.n_total is None else float(self.n_total)
        if not total > 0:
            raise ValidationError("n_total must be positive")
        object.__setattr__(self, "n_total", total)

    @classmethod
    def from_columns(cls, counts, observed, label="", n_total=None):
        return cls(tuple(zip(counts, observed)), label=label, n_total=n_total)

    @property
    def counts(self):
        return np.array([c for c, _ in self.classes], dtype=np.int64)

    @property
    def observed(self):
        return np.array([o for _, o in self.classes], dtype=float)

    def sample_moment(self, r):
        """Raw sample moment ``sum O_x x**r / n``."""
        x = self.counts.astype(float)
        obs = self.observed
        return float(np.dot(obs, x**r) / obs.sum())

    def __len__(self):
        return len(self.classes)


@dataclass(frozen=True)
class GroupingSpec:
    """Ordered, disjoint class intervals for Pearson's statistic.

    With ``fold_tail`` the model mass above the last interval is added to the
    expected frequency of the last group.
    """

    groups: tuple
    fold_tail: bool = True

    def __post_init__(self):
        groups = tuple((int(lo), int(hi)) for lo, hi in self.groups)
        if not groups:
            raise ValidationError("grouping needs at least one group")
        for i, (lo, hi) in enumerate(groups):
            if hi < lo:
                raise ValidationError(f"group {i} has hi < lo: {(lo, hi)}")
            if i and lo != groups[i - 1][1] + 1:
                raise ValidationError("groups must be ordered, disjoint and contiguous")
        object.__setattr__(self, "groups", groups)

    @classmethod
    def singletons(cls, counts, fold_tail=True):
        counts = [int(c) for c in counts]
        groups = [(c, c) for c in counts]
        # gaps between listed classes are absorbed into the preceding group
        for i in range(len(groups) - 1):
            groups[i] = (groups[i][0], groups[i + 1][0] - 1)
        return cls(tuple(groups), fold_tail)

    def merged(self, i):
        """Copy with groups ``i`` and ``i+1`` joined."""
        if not 0 <= i < len(self.groups) - 1:
            raise DomainError(f"cannot merge group {i} with its successor")
        g = list(self.groups)
        g[i : i + 2] = [(g[i][0], g[i + 1][1])]
        return GroupingSpec(tuple(g), self.fold_tail)

    def covers(self, table):
        lo, hi = self.groups[0][0], self.groups[-1][1]
        return all(lo <= c <= hi for c, _ in table.classes)

    def __len__(self):
        return len(self.groups)


@dataclass(frozen=True)
class Dataset:
    """A frequency table together with the grouping and truncation used to fit it.

    ``chi2_size`` is the sample size used for Pearson's statistic when the
    observed column holds relative abundances.  ``published`` keeps the
    reference parameters, predicted columns and statistics that accompany the
    data in the literature.
    """

    name: str
    table: FrequencyTable
    grouping: GroupingSpec
    truncation: Truncation = Truncation()
    citation: str = ""
    chi2_size: float | None = None
    published: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.grouping.covers(self.table):
            raise ValidationError(f"grouping of {self.name!r} does not cover every table class")


# -- built-in data ---------------------------------------------------------------

def _sowbugs():
    obs = [28, 28, 14, 11, 8, 11, 2, 3, 3, 3, 3, 2, 0, 1, 2, 1, 0, 2]
    groups = [(x, x) for x in range(6)] + [(6, 7), (8, 9), (10, 11), (12, 17)]
    return Dataset(
        "sowbugs",
        FrequencyTable.from_columns(range(18), obs, label="Sowbugs per board"),
        GroupingSpec(tuple(groups)),
        citation="Cole (1946), sowbugs Trachelipus rathkei under boards",
        published={
            "lerch": {
                "params": (0.913315, 2.37621, 9.63785),
                "expected": (29.2839, 21.153, 15.6055, 11.7173, 8.93021, 6.89379, 5.38124,
                             4.24166, 3.37228, 2.70168, 2.1791, 1.76882, 1.44369, 1.18433,
                             0.976077, 0.807877, 0.671287, 0.559812),
                "x2": 7.69169, "p_value": 0.261572, "dof": 6,
            },
            "genpoisson": {
                "params": (1.5416, 0.5321),
                "expected": (26.1127, 23.6448, 18.095, 13.3871, 9.86865, 7.31252, 5.46003,
                             4.10969, 3.11713, 2.38107, 1.83053, 1.41548, 1.10029, 0.859339,
                             0.67404, 0.530761, 0.419425, 0.332522),
                "x2": 9.3089, "p_value": 0.231232, "dof": 7,
            },
        },
    )


def _death_notices():
    obs = [162, 267, 271, 185, 111, 61, 27, 8, 3, 1]
    groups = [(x, x) for x in range(7)] + [(7, 9)]
    return Dataset(
        "death_notices",
        FrequencyTable.from_columns(range(10), obs, label="Death notices per day"),
        GroupingSpec(tuple(groups)),
        citation="Hasselblad (1969), death notices of women aged 80+ in the London Times",
        published={
            "lerch": {
                "params": (0.189628, -7.10717, 2.81275),
                "expected": (161.906, 266.73, 264.789, 192.091, 112.56, 56.4979, 25.217,
                             10.2649, 3.87964, 1.37948),
                "x2": 1.23938, "p_value": 0.871573, "dof": 4,
            },
            "genpoisson_adjusted": {
                "params": (2.038, 0.03639, 0.02015),
                "expected": (162.004, 264.773, 268.751, 194.406, 112.384, 55.2168, 23.9531,
                             9.4128, 3.41263, 1.15712),
                "x2": 1.9379, "p_value": 0.7472, "dof": 4,
            },
        },
    )


def _bean_weevil():
    return Dataset(
        "bean_weevil",
        FrequencyTable.from_columns(range(4), [5, 68, 88, 32], label="Bean weevil eggs per bean"),
        GroupingSpec.singletons(range(4)),
        citation="Mitchell (1975), Callosobruchus maculatus eggs on beans",
        published={
            "lerch": {
                "params": (0.00116201, -24.9577, 2.04499),
                "expected": (2.79364, 67.0555, 93.2649, 26.8808),
                "ssd": 0.00160233,
            },
            "genpoisson": {
                "params": (3.1027, -0.7612),
                "expected": (8.67105, 57.5966, 97.4296, 29.5181),
                "ssd": 0.00581991,
            },
        },
    )


# Pearson's statistic for relative abundances needs a sample size that is not
# published with the data; this value reproduces the reported X^2 = 0.0259897
# at the published parameters (0.0259897 / 0.0304539 with unit sample size).
YUNOKO_CHI2_SIZE = 0.853412


def _yunoko():
    obs = [0.46798, 0.428571, 0.0738916, 0.0152709, 0.00837438, 0.00591133]
    return Dataset(
        "yunoko",
        FrequencyTable.from_columns(range(1, 7), obs, label="Ranked biotic compartments", n_total=1.0),
        GroupingSpec.singletons(range(1, 7)),
        truncation=Truncation(1, 6),
        citation="Aoki (1995), standing crop of biotic compartments in Lake Yunoko",
        chi2_size=YUNOKO_CHI2_SIZE,
        published={
            "lerch": {
                "params": (0.219158, -0.214704, -0.998437),
                "expected": (0.460902, 0.404575, 0.102876, 0.0245955, 0.00573359, 0.00131821),
                "x2": 0.0259897, "p_value": 0.987089, "dof": 2,
            },
        },
    )


def _urchin(name, obs, lerch, lerch_col, gp, gp_col, ssd, seconds):
    return Dataset(
        name,
        FrequencyTable.from_columns(range(5), obs, label=f"Sperm per egg, {seconds} s"),
        GroupingSpec.singletons(range(5)),
        citation=f"Moore (1975), sea-urchin eggs after {seconds} s exposure",
        published={
            "lerch": {"params": lerch, "expected": lerch_col, "ssd": ssd},
            "genpoisson": {"params": gp, "expected": gp_col},
        },
    )


_BUILDERS = {
    "sowbugs": _sowbugs,
    "death_notices": _death_notices,
    "bean_weevil": _bean_weevil,
    "yunoko": _yunoko,
    "urchin_40s": lambda: _urchin(
        "urchin_40s", [28, 44, 7, 1, 0],
        (0.00773867, -8.26894, 1.11633), (28.0876, 43.0737, 8.17627, 0.631919, 0.0295335),
        (1.0077, -0.3216), (29.2046, 40.5931, 10.2044, 0.0236894, 0.0),
        0.000372774, 40,
    ),
    "urchin_180s": lambda: _urchin(
        "urchin_180s", [2, 81, 15, 1, 1],
        (0.0835808, -1.15174, 0.00468234), (1.99482, 80.7898, 14.9625, 1.99311, 0.23192),
        (2.4654, -1.0893), (8.49748, 62.2665, 26.5388, 0.0, 0.0),
        0.000162184, 180,
    ),
}
BUILTIN_NAMES = tuple(_BUILDERS)


def builtin(name):
    """One of the embedded datasets, by name."""
    try:
        return _BUILDERS[name]()
    except KeyError:
        raise UnknownDataset(f"unknown dataset {name!r}; choose from {', '.join(BUILTIN_NAMES)}") from None


# -- file formats -----------------------------------------------------------------

def _detect_format(path, fmt):
    if fmt is not None:
        if fmt not in ("csv", "json"):
            raise DomainError(f"format must be 'csv' or 'json', got {fmt!r}")
        return fmt
    return "json" if Path(path).suffix.lower() == ".json" else "csv"


def _parse_csv(text, label):
    reader = csv.reader(io.StringIO(text))
    rows = []
    header_seen = False
    for lineno, row in enumerate(reader, start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        cells = [cell.strip() for cell in row]
        if not header_seen:
            if [c.lower() for c in cells] != ["count", "observed"]:
                raise ParseError("expected header 'count,observed'", line=lineno, column=1)
            header_seen = True
            continue
        if len(cells) != 2:
            raise ParseError(f"expected 2 fields, found {len(cells)}", line=lineno)
        try:
            count = int(cells[0])
        except ValueError:
            raise ParseError(f"count {cells[0]!r} is not an integer", line=lineno, column=1) from None
        try:
            observed = float(cells[1])
        except ValueError:
            raise ParseError(f"observed {cells[1]!r} is not a number", line=lineno, column=2) from None
        rows.append((count, observed))
    if not header_seen:
        raise ParseError("empty file", line=1)
    if not rows:
        raise ParseError("no data rows after the header", line=2)
    return FrequencyTable(tuple(rows), label=label)


def _parse_json(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from None
    if not isinstance(doc, dict) or "classes" not in doc:
        raise ParseError("JSON document must be an object with a 'classes' array")
    try:
        rows = tuple((row["count"], row["observed"]) for row in doc["classes"])
    except (TypeError, KeyError):
        raise ParseError("each class needs 'count' and 'observed' fields") from None
    table = FrequencyTable(rows, label=doc.get("label", ""), n_total=doc.get("n_total"))
    return table, doc


def load_table(path, fmt=None):
    """Read a :class:`FrequencyTable` from a CSV or JSON file."""
    fmt = _detect_format(path, fmt)
    text = Path(path).read_text(encoding="utf-8")
    if not text.strip():
        raise ParseError("empty file", line=1)
    if fmt == "csv":
        return _parse_csv(text, label=Path(path).stem)
    return _parse_json(text)[0]


def load_dataset(path, fmt=None):
    """Read a file into a :class:`Dataset`, taking grouping and truncation from JSON when present."""
    fmt = _detect_format(path, fmt)
    if fmt == "csv":
        table = load_table(path, "csv")
        return Dataset(table.label or "data", table, GroupingSpec.singletons(table.counts))
    text = Path(path).read_text(encoding="utf-8")
    if not text.strip():
        raise ParseError("empty file", line=1)
    table, doc = _parse_json(text)
    fold = bool(doc.get("fold_tail", True))
    grouping = doc.get("grouping")
    if grouping:
        grouping = GroupingSpec(tuple(tuple(g) for g in grouping), fold)
    else:
        grouping = GroupingSpec.singletons(table.counts, fold)
    trunc = doc.get("truncation") or {}
    truncation = Truncation(trunc.get("a", 0), trunc.get("b"))
    return Dataset(
        doc.get("name", table.label or "data"),
        table,
        grouping,
        truncation,
        citation=doc.get("citation", ""),
        chi2_size=doc.get("chi2_size"),
    )


def table_to_csv(table):
    lines = ["count,observed"]
    lines += [f"{c},{o!r}" for c, o in table.classes]
    return "\n".join(lines) + "\n"


def dataset_to_json(ds):
    doc = {
        "name": ds.name,
        "label": ds.table.label,
        "classes": [{"count": c, "observed": o} for c, o in ds.table.classes],
        "n_total": ds.table.n_total,
        "grouping": [list(g) for g in ds.grouping.groups],
        "fold_tail": ds.grouping.fold_tail,
        "truncation": {"a": ds.truncation.a, "b": ds.truncation.b},
        "citation": ds.citation,
    }
    if ds.chi2_size is not None:
        doc["chi2_size"] = ds.chi2_size
    return json.dumps(doc, indent=2) + "\n"


def write_dataset(ds, directory):
    """Write ``<name>.csv`` and ``<name>.json`` into ``directory``; returns both paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    csv_path = directory / f"{ds.name}.csv"
    json_path = directory / f"{ds.name}.json"
    csv_path.write_text(table_to_csv(ds.table), encoding="utf-8")
    json_path.write_text(dataset_to_json(ds), encoding="utf-8")
    return csv_path, json_path
