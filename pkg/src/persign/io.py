"""File formats: point clouds, attributed graphs, complexes, measures, Gram
and feature tables.

Writers are atomic (temp file in the target directory, then rename) and
deterministic: dict keys are sorted, floats render via repr, and no
timestamps or absolute paths leak into the output.  Readers raise InputError
with the offending file and line so the command line can report parse
failures distinctly from numeric ones.
"""
from __future__ import annotations

import csv
import json
import os
import tempfile

import numpy as np

from .measures import SignedMeasure
from .simplicial import AttributedGraph, FilteredComplex, PointCloud

__all__ = [
    "InputError",
    "atomic_write_text",
    "read_point_cloud",
    "read_graph",
    "read_complex",
    "write_complex",
    "read_measure",
    "write_measure",
    "write_gram",
    "write_features",
    "dump_json",
]


class InputError(ValueError):
    """Malformed input file; carries the path and 1-based line when known."""

    def __init__(self, message: str, path=None, line=None):
        self.path = str(path) if path is not None else None
        self.line = line
        where = ""
        if self.path is not None:
            where = f"{self.path}: "
            if line is not None:
                where = f"{self.path}:{line}: "
        super().__init__(where + message)


def atomic_write_text(path, text: str) -> None:
    """Write text to path via a temp file and rename, so readers never see a
    partial file."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(doc) -> str:
    """Canonical JSON: sorted keys, no trailing spaces, newline-terminated."""
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def _load_json(path):
    try:
        with open(path) as handle:
            return json.load(handle)
    except OSError as exc:
        raise InputError(str(exc.strerror or exc), path=path) from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc.msg}", path=path,
                         line=exc.lineno) from exc


def read_point_cloud(path) -> PointCloud:
    """CSV, one point per row, no header; every row needs the same number of
    numeric fields."""
    rows = []
    width = None
    try:
        handle = open(path, newline="")
    except OSError as exc:
        raise InputError(str(exc.strerror or exc), path=path) from exc
    with handle:
        for lineno, row in enumerate(csv.reader(handle), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                values = [float(cell) for cell in row]
            except ValueError as exc:
                raise InputError(f"not a number: {exc}", path=path,
                                 line=lineno) from exc
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise InputError(
                    f"row has {len(values)} fields, expected {width}",
                    path=path, line=lineno)
            rows.append(values)
    if not rows:
        raise InputError("no points found", path=path)
    try:
        return PointCloud(np.array(rows))
    except ValueError as exc:
        raise InputError(str(exc), path=path) from exc


def _canonical_labels(labels):
    """Dense ids for vertex labels: numeric order when every label parses as
    a number, lexicographic otherwise."""
    try:
        return sorted(labels, key=lambda s: (0, float(s)))
    except ValueError:
        return sorted(labels)


def read_graph(edge_path, attribute_path=None) -> AttributedGraph:
    """Edge list (`u v` lines, comma also tolerated) plus an optional
    attribute table whose header names the attributes and whose first column
    holds vertex labels."""
    raw_edges = []
    labels = set()
    try:
        handle = open(edge_path)
    except OSError as exc:
        raise InputError(str(exc.strerror or exc), path=edge_path) from exc
    with handle:
        for lineno, line in enumerate(handle, start=1):
            cells = line.replace(",", " ").split()
            if not cells:
                continue
            if len(cells) != 2:
                raise InputError(f"edge row has {len(cells)} fields, expected 2",
                                 path=edge_path, line=lineno)
            if cells[0] == cells[1]:
                raise InputError(f"self loop on vertex {cells[0]!r}",
                                 path=edge_path, line=lineno)
            raw_edges.append((cells[0], cells[1], lineno))
            labels.update(cells)

    attributes: dict[str, dict[str, float]] = {}
    if attribute_path is not None:
        try:
            handle = open(attribute_path, newline="")
        except OSError as exc:
            raise InputError(str(exc.strerror or exc), path=attribute_path) from exc
        with handle:
            reader = csv.reader(handle)
            try:
                header = next(reader)
            except StopIteration:
                raise InputError("empty attribute table", path=attribute_path)
            names = [cell.strip() for cell in header[1:]]
            if not names or any(not name for name in names):
                raise InputError("header must name one or more attributes",
                                 path=attribute_path, line=1)
            attributes = {name: {} for name in names}
            for lineno, row in enumerate(reader, start=2):
                if not row or all(not cell.strip() for cell in row):
                    continue
                cells = [cell.strip() for cell in row]
                if len(cells) != len(names) + 1:
                    raise InputError(
                        f"row has {len(cells)} fields, expected {len(names) + 1}",
                        path=attribute_path, line=lineno)
                label = cells[0]
                labels.add(label)
                for name, cell in zip(names, cells[1:]):
                    if label in attributes[name]:
                        raise InputError(f"duplicate vertex {label!r}",
                                         path=attribute_path, line=lineno)
                    try:
                        attributes[name][label] = float(cell)
                    except ValueError:
                        raise InputError(f"not a number: {cell!r}",
                                         path=attribute_path, line=lineno)

    if not labels:
        raise InputError("no vertices found", path=edge_path)
    ordered = _canonical_labels(labels)
    index = {label: i for i, label in enumerate(ordered)}
    for name, table in attributes.items():
        missing = [label for label in ordered if label not in table]
        if missing:
            raise InputError(
                f"attribute {name!r} missing for vertex {missing[0]!r}",
                path=attribute_path)
    edges = set()
    for a, b, lineno in raw_edges:
        edge = (min(index[a], index[b]), max(index[a], index[b]))
        if edge in edges:
            raise InputError(f"duplicate edge {a!r},{b!r}",
                             path=edge_path, line=lineno)
        edges.add(edge)
    vertex_attributes = {
        name: np.array([table[label] for label in ordered])
        for name, table in attributes.items()}
    return AttributedGraph(
        vertex_count=len(ordered),
        edges=tuple(sorted(edges)),
        vertex_attributes=vertex_attributes,
        label_map={label: i for label, i in index.items()})


def write_complex(c: FilteredComplex, path) -> None:
    doc = {
        "num_parameters": c.num_parameters,
        "vertex_count": c.vertex_count,
        "axis_kinds": list(c.axis_kinds),
        "simplices": [list(s) for s in c.simplices],
        "values": [[float(v) for v in row] for row in c.values],
    }
    atomic_write_text(path, dump_json(doc))


def read_complex(path) -> FilteredComplex:
    doc = _load_json(path)
    try:
        entries = [(tuple(s), tuple(v))
                   for s, v in zip(doc["simplices"], doc["values"], strict=True)]
        return FilteredComplex.from_simplices(
            entries,
            num_parameters=int(doc["num_parameters"]),
            vertex_count=int(doc["vertex_count"]),
            axis_kinds=tuple(doc["axis_kinds"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad complex file: {exc}", path=path) from exc


def write_measure(mu: SignedMeasure, path) -> None:
    atomic_write_text(path, dump_json(mu.to_dict()))


def read_measure(path) -> SignedMeasure:
    doc = _load_json(path)
    try:
        return SignedMeasure.from_dict(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad measure file: {exc}", path=path) from exc


def write_gram(gram, path) -> None:
    """CSV with a header row of labels (indices when unnamed) and repr floats."""
    labels = gram.labels or tuple(str(i) for i in range(len(gram)))
    lines = ["," + ",".join(labels)]
    for label, row in zip(labels, gram.values):
        lines.append(label + "," + ",".join(repr(float(x)) for x in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_features(vector, path) -> None:
    """One value per line, repr floats, deterministic."""
    lines = [repr(float(x)) for x in vector.values]
    atomic_write_text(path, "\n".join(lines) + "\n")
