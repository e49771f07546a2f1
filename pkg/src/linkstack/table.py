"""Candidate-pair feature tables: the level-0 output / level-1 input.

Rows are node pairs, columns are predictor scores. Every column carries a
family tag (topological / model / embedding); values are finite float64 by
construction (the finite-value policy lives in the feature extractors).
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass

import numpy as np

FAMILY_TOPOLOGICAL = "topological"
FAMILY_MODEL = "model"
FAMILY_EMBEDDING = "embedding"
FAMILIES = (FAMILY_TOPOLOGICAL, FAMILY_MODEL, FAMILY_EMBEDDING)

_CACHE_VERSION = 1


class TableError(ValueError):
    pass


@dataclass
class PairFeatureTable:
    pairs: np.ndarray    # (p, 2) int64
    columns: list[str]
    families: list[str]  # parallel to columns
    values: np.ndarray   # (p, c) float64

    def __post_init__(self):
        self.pairs = np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (len(self.pairs), len(self.columns)):
            raise TableError(
                f"values shape {self.values.shape} != ({len(self.pairs)}, {len(self.columns)})"
            )
        if len(self.families) != len(self.columns):
            raise TableError("families must parallel columns")
        if len(set(self.columns)) != len(self.columns):
            raise TableError("duplicate column identifiers")
        for fam in self.families:
            if fam not in FAMILIES:
                raise TableError(f"unknown family tag {fam!r}")
        if not np.isfinite(self.values).all():
            bad = [self.columns[c] for c in np.unique(np.nonzero(~np.isfinite(self.values))[1])]
            raise TableError(f"non-finite values in columns {bad}")

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.columns.index(name)]

    def select(self, families: set[str] | None = None,
               columns: list[str] | None = None) -> "PairFeatureTable":
        """Sub-table by family set or explicit column list (original order kept)."""
        if columns is not None:
            idx = [self.columns.index(c) for c in self.columns if c in set(columns)]
        elif families is not None:
            idx = [i for i, fam in enumerate(self.families) if fam in families]
        else:
            idx = list(range(len(self.columns)))
        return PairFeatureTable(
            pairs=self.pairs,
            columns=[self.columns[i] for i in idx],
            families=[self.families[i] for i in idx],
            values=self.values[:, idx],
        )

    @staticmethod
    def concat_columns(tables: list["PairFeatureTable"]) -> "PairFeatureTable":
        base = tables[0]
        for t in tables[1:]:
            if not np.array_equal(t.pairs, base.pairs):
                raise TableError("cannot concat tables over different pair sets")
        return PairFeatureTable(
            pairs=base.pairs,
            columns=[c for t in tables for c in t.columns],
            families=[f for t in tables for f in t.families],
            values=np.concatenate([t.values for t in tables], axis=1),
        )

    # -- serialization ------------------------------------------------------

    def to_csv(self, path_or_buf) -> None:
        own = not isinstance(path_or_buf, io.TextIOBase)
        fh = open(path_or_buf, "w", encoding="utf-8") if own else path_or_buf
        try:
            fh.write("src,dst," + ",".join(self.columns) + "\n")
            for (i, j), row in zip(self.pairs, self.values):
                fh.write(f"{i},{j}," + ",".join(repr(float(v)) for v in row) + "\n")
        finally:
            if own:
                fh.close()

    @staticmethod
    def from_csv(path_or_buf, families: list[str] | None = None) -> "PairFeatureTable":
        own = not isinstance(path_or_buf, io.TextIOBase)
        fh = open(path_or_buf, encoding="utf-8") if own else path_or_buf
        try:
            header = fh.readline().strip().split(",")
            if header[:2] != ["src", "dst"]:
                raise TableError("expected header starting with src,dst")
            columns = header[2:]
            pairs, rows = [], []
            for line in fh:
                parts = line.strip().split(",")
                pairs.append((int(parts[0]), int(parts[1])))
                rows.append([float(v) for v in parts[2:]])
        finally:
            if own:
                fh.close()
        if families is None:
            families = [infer_family(c) for c in columns]
        return PairFeatureTable(
            pairs=np.array(pairs, dtype=np.int64).reshape(-1, 2),
            columns=columns,
            families=families,
            values=np.array(rows, dtype=np.float64).reshape(len(pairs), len(columns)),
        )

    def to_cache(self, path) -> None:
        meta = json.dumps({"version": _CACHE_VERSION, "columns": self.columns,
                           "families": self.families})
        np.savez_compressed(path, meta=np.frombuffer(meta.encode(), dtype=np.uint8),
                            pairs=self.pairs, values=self.values)

    @staticmethod
    def from_cache(path) -> "PairFeatureTable":
        with np.load(path) as data:
            meta = json.loads(bytes(data["meta"]).decode())
            if meta.get("version") != _CACHE_VERSION:
                raise TableError(f"cache version {meta.get('version')} unsupported")
            return PairFeatureTable(pairs=data["pairs"], columns=meta["columns"],
                                    families=meta["families"], values=data["values"])


def infer_family(column: str) -> str:
    if column.startswith("DW-"):
        return FAMILY_EMBEDDING
    if column in ("Q", "MDL-SBM", "MDL-DCSBM", "SNB"):
        return FAMILY_MODEL
    return FAMILY_TOPOLOGICAL
