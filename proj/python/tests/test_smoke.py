import json
import os
import pathlib

import pytest

import semistable

FIXTURES = pathlib.Path(os.environ["SEMISTABLE_FIXTURE_DIR"])


def read(name):
    return (FIXTURES / name).read_text()


def test_classify_example_8_2():
    out = semistable.classify(read("example_8_2.json"))
    assert out["level"] == "almost-semistable"
    assert out["flags"]["source_simplicial"]
    assert not out["flags"]["source_index_one"]
    assert any("multiplicity 2" in w["detail"] for w in out["witnesses"])


def test_check_properties():
    text = read("example_8_2.json")
    assert semistable.check(text, "weak")
    assert semistable.check(text, "almost")
    assert not semistable.check(text, "semistable")
    assert not semistable.check(read("double_cover.json"), "reduced")


def test_pipeline_and_verify():
    text = read("double_cover.json")
    out = semistable.pipeline(text)
    assert out["classification"]["level"] == "semistable"
    problems = semistable.verify_certificates(text, out["certificates"])
    assert problems == []


def test_recipe():
    out = semistable.recipe_8_2(read("example_8_2.json"), ["1", "1"], ["1", "0", "0", "0"])
    assert out["classification"]["level"] == "semistable"


def test_canonicalize_round_trip():
    text = semistable.canonicalize(read("blowup.json"))
    assert semistable.canonicalize(text) == text
    doc = json.loads(text)
    assert doc["kind"] == "morphism"


def test_schema_error():
    with pytest.raises(semistable.SchemaError):
        semistable.classify("{\"kind\": \"bogus\"}")


def test_simplicialize_square_cone():
    out = semistable.simplicialize(read("square_cone.json"))
    doc = json.loads(out)
    assert doc["kind"] == "subdivision"
    dims = [len(c["rays"]) for c in doc["refined"]["cones"] if c["rank"] == 3]
    assert dims and all(d == 3 for d in dims)


def test_hnf():
    assert semistable.hnf([["2", "1"], ["0", "1"]]) == [["1", "0"], ["1", "2"]]
