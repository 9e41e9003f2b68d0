"""Edge-list ingestion and JSON report documents."""
from __future__ import annotations

import io
import json
import os
from contextlib import contextmanager
from datetime import datetime, timezone

import numpy as np

from .chi2 import Chi2Report
from .detect import DetectionReport, EgonetScan
from .graph import Graph
from .harness import SimSummary

SCHEMA_VERSION = 1


class EdgeListError(ValueError):
    """Malformed edge-list input; ``lineno`` is 1-based."""

    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


@contextmanager
def _open(source, mode="r"):
    if source in (None, "-"):
        import sys
        yield sys.stdin if "r" in mode else sys.stdout
    elif isinstance(source, (str, os.PathLike)):
        with open(source, mode, encoding="utf-8") as fh:
            yield fh
    else:
        yield source


def parse_edge_list(lines):
    """Parse ``u v [w]`` lines into ``(Graph, labels)``.

    Labels are arbitrary strings, numbered by first appearance. A line with a
    single token declares a node without edges. Repeated pairs (in either
    order) have their weights summed.
    """
    index: dict[str, int] = {}
    us, vs, ws = [], [], []

    def node(tok):
        i = index.get(tok)
        if i is None:
            i = index[tok] = len(index)
        return i

    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if len(tok) == 1:
            node(tok[0])
            continue
        if len(tok) > 3:
            raise EdgeListError(lineno, f"expected 'u v [w]', got {len(tok)} fields")
        if tok[0] == tok[1]:
            raise EdgeListError(lineno, f"self-loop on {tok[0]!r}")
        w = 1
        if len(tok) == 3:
            try:
                w = int(tok[2])
            except ValueError:
                raise EdgeListError(lineno, f"weight {tok[2]!r} is not an integer") from None
            if w <= 0:
                raise EdgeListError(lineno, "weight must be a positive integer")
        us.append(node(tok[0]))
        vs.append(node(tok[1]))
        ws.append(w)
    g = Graph.from_edges(len(index), us, vs, ws)
    return g, list(index)


def read_edge_list(source):
    """Read an edge list from a path, an open text file, or ``'-'`` for stdin."""
    if isinstance(source, str) and "\n" in source:
        return parse_edge_list(io.StringIO(source))
    with _open(source) as fh:
        return parse_edge_list(fh)


def write_edge_list(g: Graph, sink, labels=None, header: str | None = None) -> None:
    """Write ``g``; every node is declared first so indices survive a round trip."""
    labels = [str(i) for i in range(g.n)] if labels is None else [str(x) for x in labels]
    if len(labels) != g.n:
        raise ValueError("need one label per node")
    u, v, w = g.edge_arrays()
    with _open(sink, "w") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        for lab in labels:
            fh.write(f"{lab}\n")
        for a, b, c in zip(u.tolist(), v.tolist(), w.tolist()):
            fh.write(f"{labels[a]} {labels[b]}\n" if c == 1 else f"{labels[a]} {labels[b]} {c}\n")


# --- reports --------------------------------------------------------------

_SCAN_COLS = ("degree", "pair_count", "egonet_degree", "null_mean", "p_value")


def detection_to_dict(r: DetectionReport) -> dict:
    labels = list(r.labels) if r.labels is not None else None
    name = (lambda i: labels[i]) if labels is not None else str
    nodes = {c: getattr(r.scan, c).tolist() for c in _SCAN_COLS}
    nodes["label"] = labels if labels is not None else [str(i) for i in range(len(r.scan))]
    return {
        "type": "detection",
        "model": r.model,
        "alpha": r.alpha,
        "threshold": r.threshold,
        "t_n": r.t_n,
        "reject": r.reject,
        "flagged": [name(i) for i in r.flagged],
        "labels_given": labels is not None,
        "nodes": nodes,
    }


def detection_from_dict(d: dict) -> DetectionReport:
    nodes = d["nodes"]
    scan = EgonetScan(
        np.asarray(nodes["degree"], dtype=np.int64),
        np.asarray(nodes["pair_count"], dtype=np.int64),
        np.asarray(nodes["egonet_degree"], dtype=np.int64),
        np.asarray(nodes["null_mean"], dtype=float),
        np.asarray(nodes["p_value"], dtype=float),
    )
    pos = {lab: i for i, lab in enumerate(nodes["label"])}
    flagged = tuple(sorted(pos[lab] for lab in d["flagged"]))
    labels = tuple(nodes["label"]) if d.get("labels_given", True) else None
    return DetectionReport(d["alpha"], d["threshold"], d["t_n"], d["reject"], flagged, scan,
                           d.get("model", ""), labels)


def chi2_to_dict(r: Chi2Report) -> dict:
    return {
        "type": "chi2",
        "statistic": r.statistic,
        "angle": r.angle,
        "critical_value": r.critical_value,
        "alpha": r.alpha,
        "reject": r.reject,
        "quadrant_tables": r.quadrant_tables.tolist(),
    }


def chi2_from_dict(d: dict) -> Chi2Report:
    return Chi2Report(d["statistic"], d["angle"], d["critical_value"], d["alpha"], d["reject"],
                      np.asarray(d["quadrant_tables"], dtype=np.int64))


def report_to_dict(report) -> dict:
    if isinstance(report, DetectionReport):
        return detection_to_dict(report)
    if isinstance(report, Chi2Report):
        return chi2_to_dict(report)
    if isinstance(report, SimSummary):
        return {"type": "simulation", **report.to_dict()}
    raise TypeError(f"cannot serialise {type(report).__name__}")


def report_from_dict(d: dict):
    kind = d.get("type")
    if kind == "detection":
        return detection_from_dict(d)
    if kind == "chi2":
        return chi2_from_dict(d)
    if kind == "simulation":
        return SimSummary.from_dict(d)
    raise ValueError(f"unknown report type {kind!r}")


def make_document(report, meta: dict | None = None, extra: dict | None = None) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "meta": {"generated_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
                 **(meta or {})},
        "report": report_to_dict(report),
    }
    for key, value in (extra or {}).items():
        doc[key] = report_to_dict(value) if not isinstance(value, dict) else value
    return doc


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def write_report(report, sink, meta: dict | None = None, extra: dict | None = None) -> None:
    """Serialise ``report`` (detection, chi2 or simulation) as a JSON document."""
    text = dumps(make_document(report, meta, extra))
    with _open(sink, "w") as fh:
        fh.write(text)


def read_document(source) -> dict:
    with _open(source) as fh:
        doc = json.load(fh)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema version {doc.get('schema_version')!r}")
    return doc


def read_report(source):
    return report_from_dict(read_document(source)["report"])
