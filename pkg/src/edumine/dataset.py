"""Tabular container for the feature table, CSV I/O, cleaning, labels, splits."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import CellParseError, ContractError, SchemaError
from .schema import COLUMNS, ID_COLUMN, PASS_THRESHOLD, PREDICTORS, TARGET, FeatureRow

log = logging.getLogger(__name__)


class Label(str, Enum):
    GOOD = "good"
    BAD = "bad"


class FeatureTable:
    """Immutable ``n x 15`` float matrix in the canonical column order.

    Missing cells are NaN. ``ids`` optionally carries one student id per row.
    """

    column_names = COLUMNS

    def __init__(self, values, ids: Optional[Sequence[str]] = None):
        values = np.array(values, dtype=float).reshape(-1, len(COLUMNS))
        values.setflags(write=False)
        self._values = values
        if ids is not None:
            ids = tuple(str(i) for i in ids)
            if len(ids) != values.shape[0]:
                raise ContractError("ids and rows differ in length")
        self.ids = ids

    @classmethod
    def from_rows(cls, rows, ids=None):
        """Build from :class:`FeatureRow` objects or ``(id, FeatureRow)`` pairs."""
        rows = list(rows)
        if rows and isinstance(rows[0], tuple) and not isinstance(rows[0], FeatureRow):
            ids = [sid for sid, _ in rows]
            rows = [r for _, r in rows]
        data = [[np.nan if v is None else v for v in r.as_tuple()] for r in rows]
        return cls(np.array(data, dtype=float).reshape(-1, len(COLUMNS)), ids)

    @property
    def values(self):
        return self._values

    @property
    def n(self):
        return self._values.shape[0]

    def __len__(self):
        return self.n

    def column(self, name):
        return self._values[:, COLUMNS.index(name)]

    def predictors(self, names=PREDICTORS):
        return self._values[:, [COLUMNS.index(c) for c in names]]

    @property
    def etest(self):
        return self.column(TARGET)

    def has_etest(self):
        return bool(self.n) and not np.isnan(self.etest).all()

    def rows(self):
        out = []
        for vals in self._values:
            kw = {}
            for name, v in zip(COLUMNS, vals):
                if math.isnan(v):
                    kw[name] = None
                elif name == TARGET or name.endswith("_time"):
                    kw[name] = float(v)
                else:
                    kw[name] = int(v) if float(v).is_integer() else float(v)
            out.append(FeatureRow(**kw))
        return out

    def take(self, index):
        index = np.asarray(index, dtype=int)
        ids = None if self.ids is None else [self.ids[i] for i in index]
        return FeatureTable(self._values[index], ids)

    def __eq__(self, other):
        if not isinstance(other, FeatureTable):
            return NotImplemented
        return (
            self.ids == other.ids
            and self._values.shape == other._values.shape
            and np.array_equal(self._values, other._values, equal_nan=True)
        )

    def __repr__(self):
        return f"FeatureTable(n={self.n}, ids={'yes' if self.ids else 'no'})"


def _format_cell(v):
    if math.isnan(v):
        return ""
    if v.is_integer() and abs(v) < 1e15 and math.copysign(1.0, v) > 0:
        return str(int(v))
    return repr(v)


def save_csv(table: FeatureTable, path):
    """Write ``table`` with a header row; ``student_id`` first when present."""
    header = ([ID_COLUMN] if table.ids is not None else []) + list(COLUMNS)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i, vals in enumerate(table.values):
            cells = [_format_cell(float(v)) for v in vals]
            if table.ids is not None:
                cells.insert(0, table.ids[i])
            w.writerow(cells)


def load_csv(path) -> FeatureTable:
    """Read a feature CSV.

    Columns may appear in any order; absent attribute columns load as missing.
    Raises :class:`SchemaError` for unknown columns and
    :class:`CellParseError` for non-numeric cells.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            return FeatureTable(np.empty((0, len(COLUMNS))))
        known = set(COLUMNS) | {ID_COLUMN}
        unknown = [h for h in header if h not in known]
        if unknown:
            raise SchemaError(f"unknown column(s): {unknown}")
        if len(set(header)) != len(header):
            raise SchemaError("duplicate column names in header")
        pos = {name: header.index(name) for name in COLUMNS if name in header}
        id_pos = header.index(ID_COLUMN) if ID_COLUMN in header else None

        data, ids = [], []
        for rowno, cells in enumerate(reader, start=1):
            if not cells:
                continue
            if len(cells) != len(header):
                raise CellParseError(rowno, "<row>", ",".join(cells))
            vals = np.full(len(COLUMNS), np.nan)
            for j, name in enumerate(COLUMNS):
                if name not in pos:
                    continue
                text = cells[pos[name]].strip()
                if text == "":
                    continue
                try:
                    vals[j] = float(text)
                except ValueError:
                    raise CellParseError(rowno, name, text) from None
            data.append(vals)
            if id_pos is not None:
                ids.append(cells[id_pos])
    return FeatureTable(
        np.array(data).reshape(-1, len(COLUMNS)),
        ids if id_pos is not None else None,
    )


def clean_missing(table: FeatureTable, columns=COLUMNS):
    """Drop rows with any missing value among ``columns``.

    Returns ``(clean_table, n_dropped)``.
    """
    idx = [COLUMNS.index(c) for c in columns]
    keep = ~np.isnan(table.values[:, idx]).any(axis=1)
    dropped = int(table.n - keep.sum())
    if dropped:
        log.info("dropped %d of %d rows with missing values", dropped, table.n)
    return table.take(np.flatnonzero(keep)), dropped


def label_for(etest):
    if etest is None or math.isnan(etest):
        raise ContractError("cannot label a row without etest")
    return Label.GOOD if etest > PASS_THRESHOLD else Label.BAD


def derive_labels(table) -> list:
    """``good`` for etest strictly above 65 percent, ``bad`` otherwise."""
    etest = table.etest if isinstance(table, FeatureTable) else table
    return [label_for(float(e)) for e in etest]


@dataclass(frozen=True)
class SplitResult:
    train_indices: np.ndarray
    test_indices: np.ndarray
    seed: int
    ratio: float


def _largest_remainder(sizes, total):
    quotas = [s * total / sum(sizes) for s in sizes]
    alloc = [math.floor(q) for q in quotas]
    order = sorted(range(len(sizes)), key=lambda i: (-(quotas[i] - alloc[i]), i))
    for i in order[: total - sum(alloc)]:
        alloc[i] += 1
    return alloc


def train_test_split(n, ratio=0.8, seed=0, stratify=None) -> SplitResult:
    """Seeded shuffle split with ``round(ratio * n)`` training rows.

    With ``stratify`` the training quota is shared out between classes by
    largest remainder, so every class keeps its share within one row.
    Index arrays are returned sorted.
    """
    if not 0 < ratio < 1:
        raise ContractError("ratio must lie in (0, 1)")
    if n < 2:
        raise ContractError("need at least two rows to split")
    n_train = round(ratio * n)
    rng = np.random.default_rng(seed)
    if stratify is None:
        perm = rng.permutation(n)
        train, test = perm[:n_train], perm[n_train:]
    else:
        labels = np.asarray([getattr(s, "value", s) for s in stratify])
        if len(labels) != n:
            raise ContractError("stratify labels must have length n")
        classes = sorted(set(labels.tolist()))
        members = [np.flatnonzero(labels == c) for c in classes]
        quota = _largest_remainder([len(m) for m in members], n_train)
        train_parts, test_parts = [], []
        for c, m, q in zip(classes, members, quota):
            if q == 0 or q == len(m):
                raise ContractError(f"class {c!r} would be empty in one split")
            perm = rng.permutation(m)
            train_parts.append(perm[:q])
            test_parts.append(perm[q:])
        train = np.concatenate(train_parts)
        test = np.concatenate(test_parts)
    return SplitResult(np.sort(train), np.sort(test), seed, ratio)
