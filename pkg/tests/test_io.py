import json
import random

import pytest
from _helpers import random_network

from triptemp import gen, io
from triptemp.figures import fig2
from triptemp.model import NetworkError, validate_network, Schedule, Temporalisation, WeakSchedule


def test_round_trip_is_byte_stable():
    rng = random.Random(0)
    nets = [fig2(), gen.gen_hard_family(4)[0], gen.gen_random_symmetric(9, 3, seed=1)]
    nets += [n for n in (random_network(rng, 6, 4) for _ in range(40)) if not validate_network(n)]
    assert len(nets) > 5
    for net in nets:
        text = io.dump_network(net)
        again = io.loads_network(text)
        assert again == net and again.meta == net.meta
        assert io.dump_network(again) == text
        assert text.endswith("\n") and ", " not in text


def test_canonical_sorts_keys():
    assert io.canonical({"b": 1, "a": [1, 2]}) == '{"a":[1,2],"b":1}\n'


def test_file_round_trip(tmp_path):
    p = tmp_path / "x.json"
    io.write_text(p, io.dump_network(fig2()))
    assert io.load_network(p) == fig2()


@pytest.mark.parametrize("doc,exc", [
    ([], io.FormatError),
    ({"version": 2, "nodes": 1, "edges": [], "trips": []}, io.FormatError),
    ({"version": 1, "nodes": 2, "edges": []}, io.FormatError),
    ({"version": 1, "nodes": "2", "edges": [], "trips": []}, io.FormatError),
    ({"version": 1, "nodes": 2, "edges": [[0, 1]], "trips": [[0]]}, io.FormatError),
    ({"version": 1, "nodes": 2, "edges": [[0, 1, True]], "trips": [[0]]}, io.FormatError),
    ({"version": 1, "nodes": 2, "edges": [[0, 1, 1]], "trips": [[0]], "labels": [1, 2]}, io.FormatError),
    ({"version": 1, "nodes": 2, "edges": [[0, 1, 1]], "trips": [[0]], "meta": []}, io.FormatError),
    ({"version": 1, "nodes": 2, "edges": [[0, 5, 1]], "trips": [[0]]}, (NetworkError, io.FormatError)),
    ({"version": 1, "nodes": 3, "edges": [[0, 1, 1], [2, 0, 1]], "trips": [[0, 1]]}, (NetworkError, io.FormatError)),
    ({"version": 1, "nodes": 2, "edges": [[0, 1, 0]], "trips": [[0]]}, (NetworkError, io.FormatError)),
])
def test_bad_documents(doc, exc):
    with pytest.raises(exc):
        io.network_from_doc(doc)


def test_bad_json_text(tmp_path):
    with pytest.raises(io.FormatError):
        io.loads_network("{")
    p = tmp_path / "bad.json"
    p.write_text("nope")
    with pytest.raises(io.FormatError):
        io.load_network(p)
    with pytest.raises(io.FormatError):
        io.load_network(tmp_path / "missing.json")


def test_assignment_docs():
    for a in (Schedule((2, 0, 1)), WeakSchedule(((1,), (0, 2))), Temporalisation((1, 6, 10))):
        doc = json.loads(io.canonical(io.assignment_to_doc(a)))
        back = {"order": io.schedule_from_doc, "blocks": io.weak_from_doc,
                "starts": io.temporalisation_from_doc}[next(iter(doc))](doc)
        assert back == a
    with pytest.raises(io.FormatError):
        io.schedule_from_doc({"starts": [1]})
    with pytest.raises(io.FormatError):
        io.weak_from_doc({"blocks": [[0], "x"]})
