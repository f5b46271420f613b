"""File formats for embeddings, labels, linksets, scores and clusters.

All writers emit rows in canonical order and format floats with ``repr``
(shortest round-trip), so re-running a pipeline with identical inputs
reproduces byte-identical artifacts.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .model import (
    ClusterPartition,
    EmbeddingTable,
    EntityId,
    Linkset,
    LinkforgeError,
    Pair,
    canonical_pair,
)


class FormatError(LinkforgeError, ValueError):
    """An input file does not match its documented format."""


# --- embeddings: UTF-8 TSV, header "id\tdim=<D>", one row per entity ---

def write_embeddings_tsv(table: EmbeddingTable, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"id\tdim={table.dim}\n")
        for eid in table.ids:
            vec = table.vector(eid)
            fh.write(eid + "\t" + "\t".join(repr(float(v)) for v in vec) + "\n")


def read_embeddings_tsv(path: str | Path) -> EmbeddingTable:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        parts = header.split("\t")
        if len(parts) != 2 or parts[0] != "id" or not parts[1].startswith("dim="):
            raise FormatError(f"bad embeddings header {header!r}")
        try:
            dim = int(parts[1][4:])
        except ValueError:
            raise FormatError(f"bad embeddings header {header!r}") from None
        ids: list[EntityId] = []
        rows: list[list[float]] = []
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != dim + 1:
                raise FormatError(
                    f"line {lineno}: expected {dim} components, got {len(fields) - 1}"
                )
            ids.append(fields[0])
            try:
                rows.append([float(v) for v in fields[1:]])
            except ValueError:
                raise FormatError(f"line {lineno}: non-numeric component") from None
    return EmbeddingTable(ids, np.asarray(rows, dtype=np.float64))


# --- expert labels: CSV id_a,id_b,label with label in {dup,distinct} ---

_LABELS_HEADER = ["id_a", "id_b", "label"]


def write_labels_csv(labels: Mapping[Pair, bool], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_LABELS_HEADER)
        for pair in sorted(labels):
            writer.writerow([pair[0], pair[1], "dup" if labels[pair] else "distinct"])


def read_labels_csv(path: str | Path) -> dict[Pair, bool]:
    labels: dict[Pair, bool] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            if lineno == 1 and row == _LABELS_HEADER:
                continue
            if len(row) != 3:
                raise FormatError(f"line {lineno}: expected id_a,id_b,label")
            if row[2] not in ("dup", "distinct"):
                raise FormatError(f"line {lineno}: label must be dup or distinct")
            labels[canonical_pair(row[0], row[1])] = row[2] == "dup"
    return labels


# --- linksets: CSV id_a,id_b in canonical order; optional same-as triples ---

_LINKSET_HEADER = ["id_a", "id_b"]


def write_linkset_csv(links: Iterable[Pair], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_LINKSET_HEADER)
        for a, b in sorted(links):
            writer.writerow([a, b])


def read_linkset_csv(path: str | Path) -> Linkset:
    links: Linkset = set()
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            if lineno == 1 and row == _LINKSET_HEADER:
                continue
            if len(row) != 2:
                raise FormatError(f"line {lineno}: expected id_a,id_b")
            links.add(canonical_pair(row[0], row[1]))
    return links


def write_sameas_triples(links: Iterable[Pair], path: str | Path) -> None:
    """One line per link: ``<id_a> owl:sameAs <id_b> .``"""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for a, b in sorted(links):
            fh.write(f"<{a}> owl:sameAs <{b}> .\n")


# --- pair scores: CSV id_a,id_b,p ---

_SCORES_HEADER = ["id_a", "id_b", "p"]


def write_scores_csv(scores: Mapping[Pair, float], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_SCORES_HEADER)
        for pair in sorted(scores):
            writer.writerow([pair[0], pair[1], repr(float(scores[pair]))])


def read_scores_csv(path: str | Path) -> dict[Pair, float]:
    scores: dict[Pair, float] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            if lineno == 1 and row == _SCORES_HEADER:
                continue
            if len(row) != 3:
                raise FormatError(f"line {lineno}: expected id_a,id_b,p")
            try:
                p = float(row[2])
            except ValueError:
                raise FormatError(f"line {lineno}: non-numeric probability") from None
            if not (0.0 <= p <= 1.0):
                raise FormatError(f"line {lineno}: probability {p} outside [0, 1]")
            scores[canonical_pair(row[0], row[1])] = p
    return scores


# --- ground-truth clusters: one cluster per line, ids space-separated ---

def write_clusters(truth: ClusterPartition, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for cluster in truth.clusters:
            fh.write(" ".join(cluster) + "\n")


def read_clusters(path: str | Path) -> ClusterPartition:
    clusters: list[list[str]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            members = line.split()
            if members:
                clusters.append(members)
    return ClusterPartition(clusters)


# --- flat key=value config echo ---

def write_config_kv(values: Mapping[str, object], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key in values:
            fh.write(f"{key}={values[key]}\n")


def read_config_kv(path: str | Path) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise FormatError(f"line {lineno}: expected key=value")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values


# --- per-component repair report: JSON lines ---

def write_component_report(rows: Iterable[Mapping[str, object]], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
