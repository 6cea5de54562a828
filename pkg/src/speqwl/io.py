"""Reading and writing the TUDataset text format.

A dataset ``DS`` lives in one directory as ``DS_A.txt`` (one directed edge
per row, 1-based global node ids), ``DS_graph_indicator.txt`` (graph id per
node) and optional ``DS_graph_labels.txt``, ``DS_node_labels.txt`` and
``DS_edge_labels.txt``.
"""

from __future__ import annotations

import os
from pathlib import Path

from .graph import GraphCollection, LabeledGraph


class TUDatasetFormatError(ValueError):
    """A mandatory file is missing or a row cannot be parsed."""


class TUDatasetConsistencyError(ValueError):
    """Files parse but describe an invalid graph collection."""


def _read_rows(path: Path) -> list[list[str]]:
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append([tok.strip() for tok in line.split(",")])
    return rows


def _read_column(path: Path, cast=int) -> list:
    out = []
    for lineno, row in enumerate(_read_rows(path), start=1):
        try:
            out.append(cast(row[0]))
        except ValueError as exc:
            raise TUDatasetFormatError(f"{path.name}:{lineno}: cannot parse {row[0]!r}") from exc
    return out


def _parse_target(tok: str):
    try:
        return int(tok)
    except ValueError:
        return float(tok)


def load_tudataset(directory_path: str | os.PathLike, dataset_name: str) -> GraphCollection:
    """Load every graph of a TUDataset directory, converting to 0-based local ids."""
    root = Path(directory_path)
    prefix = root / dataset_name
    a_path = Path(f"{prefix}_A.txt")
    ind_path = Path(f"{prefix}_graph_indicator.txt")
    for p in (a_path, ind_path):
        if not p.is_file():
            raise TUDatasetFormatError(f"missing mandatory file {p}")

    indicator = _read_column(ind_path)
    n_total = len(indicator)
    graph_ids = sorted(set(indicator))
    gid_pos = {gid: i for i, gid in enumerate(graph_ids)}
    local = [0] * n_total
    sizes = [0] * len(graph_ids)
    for node, gid in enumerate(indicator):
        g = gid_pos[gid]
        local[node] = sizes[g]
        sizes[g] += 1

    node_label_path = Path(f"{prefix}_node_labels.txt")
    node_labels = _read_column(node_label_path) if node_label_path.is_file() else [0] * n_total
    if len(node_labels) != n_total:
        raise TUDatasetConsistencyError("node label file length differs from graph indicator")

    rows = _read_rows(a_path)
    edge_label_path = Path(f"{prefix}_edge_labels.txt")
    if edge_label_path.is_file():
        row_labels = _read_column(edge_label_path)
        if len(row_labels) != len(rows):
            raise TUDatasetConsistencyError("edge label file length differs from edge list")
    else:
        row_labels = [0] * len(rows)

    arcs: dict[tuple[int, int], int] = {}
    for lineno, (row, lab) in enumerate(zip(rows, row_labels), start=1):
        if len(row) != 2:
            raise TUDatasetFormatError(f"{a_path.name}:{lineno}: expected two ids")
        try:
            u, v = int(row[0]) - 1, int(row[1]) - 1
        except ValueError as exc:
            raise TUDatasetFormatError(f"{a_path.name}:{lineno}: cannot parse row") from exc
        if not (0 <= u < n_total and 0 <= v < n_total):
            raise TUDatasetConsistencyError(f"{a_path.name}:{lineno}: node id out of range")
        if u == v:
            raise TUDatasetConsistencyError(f"{a_path.name}:{lineno}: self-loop at node {u + 1}")
        if indicator[u] != indicator[v]:
            raise TUDatasetConsistencyError(f"{a_path.name}:{lineno}: edge crosses graphs")
        if arcs.setdefault((u, v), lab) != lab:
            raise TUDatasetConsistencyError(f"{a_path.name}:{lineno}: conflicting duplicate row")

    per_graph_edges: list[list[tuple[int, int]]] = [[] for _ in graph_ids]
    per_graph_labels: list[list[int]] = [[] for _ in graph_ids]
    for (u, v), lab in arcs.items():
        back = arcs.get((v, u))
        if back is None:
            raise TUDatasetConsistencyError(f"edge ({u + 1}, {v + 1}) has no reverse row")
        if back != lab:
            raise TUDatasetConsistencyError(f"edge ({u + 1}, {v + 1}) labeled differently per direction")
        if u < v:
            g = gid_pos[indicator[u]]
            per_graph_edges[g].append((local[u], local[v]))
            per_graph_labels[g].append(lab)

    per_graph_nodes: list[list[int]] = [[] for _ in graph_ids]
    for node, gid in enumerate(indicator):
        per_graph_nodes[gid_pos[gid]].append(node_labels[node])

    graphs = [
        LabeledGraph.from_edges(sizes[i], per_graph_edges[i], per_graph_nodes[i], per_graph_labels[i])
        for i in range(len(graph_ids))
    ]

    targets = None
    target_path = Path(f"{prefix}_graph_labels.txt")
    if target_path.is_file():
        targets = _read_column(target_path, cast=_parse_target)
        if len(targets) != len(graphs):
            raise TUDatasetConsistencyError("graph label file length differs from graph count")
    return GraphCollection(graphs, targets)


def write_tudataset(collection: GraphCollection, directory_path: str | os.PathLike, dataset_name: str) -> None:
    """Write ``collection`` so that :func:`load_tudataset` reproduces it exactly."""
    root = Path(directory_path)
    root.mkdir(parents=True, exist_ok=True)
    prefix = root / dataset_name
    a_lines, e_lines, ind_lines, n_lines = [], [], [], []
    offset = 0
    for gid, g in enumerate(collection.graphs, start=1):
        for v in range(g.node_count):
            ind_lines.append(f"{gid}\n")
            n_lines.append(f"{g.node_labels[v]}\n")
        for u in range(g.node_count):
            for v in g.adjacency[u]:
                a_lines.append(f"{u + offset + 1}, {v + offset + 1}\n")
                e_lines.append(f"{g.edge_label(u, v)}\n")
        offset += g.node_count
    Path(f"{prefix}_A.txt").write_text("".join(a_lines))
    Path(f"{prefix}_edge_labels.txt").write_text("".join(e_lines))
    Path(f"{prefix}_graph_indicator.txt").write_text("".join(ind_lines))
    Path(f"{prefix}_node_labels.txt").write_text("".join(n_lines))
    if collection.graph_targets is not None:
        Path(f"{prefix}_graph_labels.txt").write_text("".join(f"{t}\n" for t in collection.graph_targets))
