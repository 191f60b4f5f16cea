import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from destab.algebra import full_matrix_algebra, same_span
from destab.category import KAlgMorphism
from destab.destabilization import KAlgebra
from destab.fuzz import GenConfig, gen_bimodule, gen_correspondence, gen_kalgebra, gen_morphism
from destab.morphisms import NdMorphism
from destab.serialization import (
    CorrespondenceDocument,
    DocumentError,
    LinkingDocument,
    check_schema,
    dump,
    load,
    load_schema,
    parse,
    serialize,
    to_document,
)
from destab.units import standard_units

FIXTURES = Path(__file__).resolve().parent / "fixtures"
CORPUS = sorted(p for p in FIXTURES.glob("*.json"))


def test_corpus_is_present():
    assert len(CORPUS) == 10


@pytest.mark.parametrize("path", CORPUS, ids=lambda p: p.stem)
def test_corpus_roundtrips_byte_for_byte(path):
    text = path.read_text()
    assert serialize(parse(text)) == text


def test_malformed_complex_pair_reports_path():
    with pytest.raises(DocumentError) as info:
        load(FIXTURES / "bad" / "malformed_complex.json")
    assert info.value.path == "/payload/basis/0/0/0"


def test_invalid_json_reports_position():
    with pytest.raises(DocumentError) as info:
        load(FIXTURES / "bad" / "not_json.json")
    assert info.value.path.startswith("line 1")


def test_kalgebra_fixture_matches_generator():
    KA = load(FIXTURES / "kalgebra_seed1.json")
    assert isinstance(KA, KAlgebra) and KA.validate().passed
    fresh = gen_kalgebra(GenConfig(1))
    assert serialize(fresh) == (FIXTURES / "kalgebra_seed1.json").read_text()


def test_kinds_decode_to_domain_types():
    assert isinstance(load(FIXTURES / "linking_seed2.json"), LinkingDocument)
    assert isinstance(load(FIXTURES / "correspondence_seed3.json"), CorrespondenceDocument)
    assert isinstance(load(FIXTURES / "morphism_nd_seed5.json"), NdMorphism)
    assert isinstance(load(FIXTURES / "morphism_kalg_seed6.json"), KAlgMorphism)


def test_complex_entries_are_pairs_and_row_major():
    doc = to_document(standard_units(2))
    e01 = doc["payload"]["e"][0][1]
    assert e01 == [[[0.0, 0.0], [1.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]
    assert doc["schema_version"] == "1"


def test_schema_rejects_unknown_kind():
    with pytest.raises(DocumentError) as info:
        check_schema({"schema_version": "1", "kind": "banana", "payload": {}})
    assert info.value.path == "/kind"


def test_inconsistent_linking_sizes_rejected():
    doc = json.loads((FIXTURES / "linking_zero_bimodule.json").read_text())
    doc["payload"]["p"] += 1
    with pytest.raises(DocumentError) as info:
        parse(json.dumps(doc))
    assert info.value.path == "/payload/p"


def test_serialize_rejects_other_types():
    with pytest.raises(TypeError):
        serialize(3)


def test_dump_and_load(tmp_path):
    A = full_matrix_algebra(2)
    dump(A, tmp_path / "a.json")
    back = load(tmp_path / "a.json")
    assert np.array_equal(back.basis, A.basis)
    assert same_span(back, A)[0]


def test_report_schema_is_published():
    schema = load_schema("report")
    assert schema["type"] == "object"
    docs = Path(__file__).resolve().parents[1] / "docs"
    for name in ("document", "report"):
        assert json.loads((docs / f"{name}.schema.json").read_text()) == load_schema(name)


@settings(max_examples=15, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_generated_values_roundtrip_exactly(seed):
    cfg = GenConfig(seed, max_ambient=12)
    g = gen_bimodule(cfg)
    c = gen_correspondence(cfg)
    for value in (
        gen_kalgebra(cfg),
        gen_morphism(cfg),
        gen_morphism(cfg, kind="nd"),
        LinkingDocument(g.link, g.units),
        CorrespondenceDocument(c.X, c.iota, c.zeta),
    ):
        text = serialize(value)
        assert serialize(parse(text)) == text
