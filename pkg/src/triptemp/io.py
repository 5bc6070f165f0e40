"""JSON file formats. Canonical form: sorted keys, compact separators,
trailing newline, so dump(load(x)) is byte-stable."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .model import (NetworkError, Schedule, Temporalisation, TripNetwork,
                    WeakSchedule, validate_network)

FORMAT_VERSION = 1


class FormatError(ValueError):
    pass


def canonical(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n"


def read_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from exc


def write_text(path: str | Path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def network_to_doc(net: TripNetwork) -> dict:
    doc: dict = {
        "version": FORMAT_VERSION,
        "nodes": net.node_count,
        "edges": [[e.tail, e.head, e.weight] for e in net.edges],
        "trips": [list(t) for t in net.trips],
    }
    if net.labels is not None:
        doc["labels"] = list(net.labels)
    if net.meta is not None:
        doc["meta"] = net.meta
    return doc


def _int(x: Any, what: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise FormatError(f"{what}: expected integer, got {x!r}")
    return x


def _int_list(x: Any, what: str) -> list[int]:
    if not isinstance(x, list):
        raise FormatError(f"{what}: expected list")
    return [_int(v, what) for v in x]


def network_from_doc(doc: Any) -> TripNetwork:
    if not isinstance(doc, dict):
        raise FormatError("instance must be a JSON object")
    if doc.get("version") != FORMAT_VERSION:
        raise FormatError(f"unsupported version {doc.get('version')!r}")
    for key in ("nodes", "edges", "trips"):
        if key not in doc:
            raise FormatError(f"missing field {key!r}")
    n = _int(doc["nodes"], "nodes")
    if not isinstance(doc["edges"], list):
        raise FormatError("edges: expected list")
    edges = []
    for e in doc["edges"]:
        row = _int_list(e, "edge")
        if len(row) != 3:
            raise FormatError(f"edge {e!r}: expected [tail, head, weight]")
        edges.append(tuple(row))
    if not isinstance(doc["trips"], list):
        raise FormatError("trips: expected list")
    trips = [_int_list(t, "trip") for t in doc["trips"]]
    labels = doc.get("labels")
    if labels is not None and (not isinstance(labels, list)
                               or not all(isinstance(x, str) for x in labels)):
        raise FormatError("labels: expected list of strings")
    meta = doc.get("meta")
    if meta is not None and not isinstance(meta, dict):
        raise FormatError("meta: expected object")
    try:
        net = TripNetwork.build(n, edges, trips, labels, meta)
    except (TypeError, ValueError) as exc:
        raise FormatError(str(exc)) from exc
    problems = validate_network(net)
    if problems:
        raise NetworkError("; ".join(problems))
    return net


def dump_network(net: TripNetwork) -> str:
    return canonical(network_to_doc(net))


def load_network(path: str | Path) -> TripNetwork:
    return network_from_doc(read_json(path))


def loads_network(text: str) -> TripNetwork:
    try:
        return network_from_doc(json.loads(text))
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON ({exc})") from exc


def _field(doc: Any, key: str) -> Any:
    if not isinstance(doc, dict) or key not in doc:
        raise FormatError(f"expected an object with field {key!r}")
    return doc[key]


def temporalisation_from_doc(doc: Any) -> Temporalisation:
    return Temporalisation(tuple(_int_list(_field(doc, "starts"), "starts")))


def schedule_from_doc(doc: Any) -> Schedule:
    return Schedule(tuple(_int_list(_field(doc, "order"), "order")))


def weak_from_doc(doc: Any) -> WeakSchedule:
    blocks = _field(doc, "blocks")
    if not isinstance(blocks, list):
        raise FormatError("blocks: expected list")
    return WeakSchedule(tuple(tuple(_int_list(b, "block")) for b in blocks))


def assignment_to_doc(a: Temporalisation | Schedule | WeakSchedule) -> dict:
    if isinstance(a, Schedule):
        return {"order": list(a.order)}
    if isinstance(a, WeakSchedule):
        return {"blocks": [list(b) for b in a.blocks]}
    return {"starts": list(a.starts)}
