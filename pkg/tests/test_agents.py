import json
import math

import pytest

from proto3d.agents import (
    Canvas,
    CountMismatch,
    Edit,
    EditSet,
    ImplausibleDims,
    LengthMismatch,
    MissingField,
    PipelineConfig,
    Query,
    decompose,
    direct_generate,
    identify,
    metricize,
    proposal_to_code,
    propose_arrangement,
    recommend_edits,
    refine_code,
    run_naive,
)
from proto3d.agents import prompts
from proto3d.agents.coder import refiner_prompt
from proto3d.agents.designer import expand_pi, parse_arrangement
from proto3d.agents.inspector import matches, normalize_name
from proto3d.agents.types import PartDecomposition
from proto3d.mllm import FixtureMissing, MalformedResponse, Transcript
from proto3d.render import look_at, render_views
from proto3d.scene_lang import Cylinder, arrangement_to_program

from agent_fixtures import FAST, backend, entry, fenced, shipped
from helpers import make_chair

Q = Query("Chair")
D_CHAIR = PartDecomposition((("backrest", 1), ("seat", 1), ("legs", 4)))
C_CHAIR = Canvas((0.45, 0.45, 1.0))


def chair_renders(n=3):
    chair = make_chair()
    cams = [look_at((2, 2 * i - 2, 1.5), (0.3, 0.3, 0.5), resolution=(32, 32)) for i in range(n)]
    return render_views(chair, cams, None, ("shaded",))


# --- value types ------------------------------------------------------------------


def test_query_and_canvas():
    assert Query("  Chair ").text == "Chair"
    with pytest.raises(ValueError):
        Query("   ")
    with pytest.raises(ImplausibleDims):
        Canvas((0.6, -1, 1))
    with pytest.raises(ImplausibleDims):
        Canvas((1, 1, 1000))


def test_config_validation():
    with pytest.raises(ValueError):
        PipelineConfig(budget=-1)
    with pytest.raises(ValueError):
        PipelineConfig(agents={"designer", "inspector"})
    with pytest.raises(ValueError):
        PipelineConfig(views_per_iteration=0)
    cfg = PipelineConfig()
    assert (cfg.budget, cfg.views_per_iteration, cfg.max_parts, cfg.top_p_predictions, cfg.temperature) == (3, 3, 8, 3, 0.2)


# --- designer -------------------------------------------------------------------------


def test_metricize_chair():
    c = metricize(Q, shipped(), FAST)
    assert c.dims == (0.45, 0.45, 1.0)


def test_metricize_two_values_is_malformed():
    t = Transcript()
    with pytest.raises(MalformedResponse):
        metricize(Q, backend(entry("Metricizer", "dimensions = [0.45, 1.0]")), FAST, transcript=t)
    assert len(t) == FAST.max_retries + 1


def test_metricize_implausible():
    with pytest.raises(ImplausibleDims):
        metricize(Q, backend(entry("Metricizer", "dimensions = [0.6, -1, 1]")), FAST)


def test_metricize_resubmits_after_bad_parse():
    b = backend(entry("Metricizer", "sorry"), entry("Metricizer", "[1, 2, 3]", attempt=1))
    assert metricize(Q, b, FAST).dims == (1.0, 2.0, 3.0)


def test_decompose_chair():
    d = decompose(Q, shipped(), 8, FAST)
    assert d.entries == (("backrest", 1), ("seat", 1), ("legs", 4))


def test_decompose_length_mismatch():
    b = backend(entry("PartDecomposer", "part_list = ['a', 'b', 'c']\npart_counts = [1, 2]"))
    with pytest.raises(LengthMismatch):
        decompose(Q, b, 8, FAST)


def test_decompose_too_many_parts():
    labels = [f"p{i}" for i in range(9)]
    b = backend(entry("PartDecomposer", f"part_list = {labels}\npart_counts = {[1] * 9}"))
    with pytest.raises(MalformedResponse) as info:
        decompose(Q, b, 8, FAST)
    assert "p8" in str(info.value)


def test_arrangement_chair():
    diags = []
    a = propose_arrangement(Q, D_CHAIR, C_CHAIR, shipped(), FAST, diagnostics=diags)
    assert len(a) == 6
    back = a["Backrest"]
    assert back.dims == (0.1, 0.6, 0.45)
    assert back.position == (0.05, 0.3, 0.775)
    assert [d.code for d in diags if d.code == "CountMismatch"] == []


ARR = {
    "Seat": {"length": 0.6, "width": 0.6, "height": 0.1, "location": [0.3, 0.3, 0.5], "rotation": [0, 0, 0]},
    "Backrest": {"length": 0.1, "width": 0.6, "height": 0.45, "location": [0.05, 0.3, 0.775], "rotation": [0, 0, 0]},
}


def three_legs():
    doc = dict(ARR)
    for i in range(3):
        doc[f"Leg{i + 1}"] = {"length": 0.05, "width": 0.05, "height": 0.45, "location": [i * 0.2, 0, 0.23], "rotation": [0, 0, 0]}
    return json.dumps(doc)


def test_arrangement_missing_rotation():
    doc = json.loads(json.dumps(ARR))
    del doc["Seat"]["rotation"]
    with pytest.raises(MissingField) as info:
        parse_arrangement(json.dumps(doc))
    assert (info.value.part, info.value.field) == ("Seat", "rotation")


def test_arrangement_count_mismatch_strict_and_lenient():
    b = backend(entry("ArrangementProposer", three_legs()))
    strict = PipelineConfig(retry_pause=0.0, strict=True)
    with pytest.raises(CountMismatch):
        propose_arrangement(Q, D_CHAIR, C_CHAIR, b, strict)
    diags = []
    a = propose_arrangement(Q, D_CHAIR, C_CHAIR, b, FAST, diagnostics=diags)
    assert len(a) == 5
    assert [(d.code, d.part) for d in diags] == [("CountMismatch", "legs")]


def test_arrangement_exceeds_canvas_diagnostic():
    doc = json.loads(json.dumps(ARR))
    doc["Seat"]["length"] = 5.0
    diags = []
    d = PartDecomposition((("seat", 1), ("backrest", 1)))
    propose_arrangement(Q, d, C_CHAIR, backend(entry("ArrangementProposer", json.dumps(doc))), FAST, diagnostics=diags)
    assert [(x.code, x.part, x.field) for x in diags] == [("ExceedsCanvas", "Seat", "l")]


def test_expand_pi():
    assert float(expand_pi("pi/2")) == math.pi / 2
    assert float(expand_pi("-math.pi")) == -math.pi
    assert float(expand_pi("0.5*pi")) == 0.5 * math.pi
    a = parse_arrangement('{"A": {"length": 1, "width": 1, "height": 1, "location": [0,0,0], "rotation": [0, "pi/2", 0]}}')
    assert a["A"].rotation == (0.0, math.pi / 2, 0.0)


# --- coder ----------------------------------------------------------------------------


def chair_arrangement():
    return propose_arrangement(Q, D_CHAIR, C_CHAIR, shipped(), FAST)


def test_proposal_deterministic():
    a = chair_arrangement()
    p = proposal_to_code(a, FAST)
    assert p == arrangement_to_program(a)
    assert len(p.parts) == 6


def test_proposal_mllm_mode_retries_syntax_error():
    a = chair_arrangement()
    cfg = PipelineConfig(retry_pause=0.0, proposal_mode="mllm")
    good = fenced(arrangement_to_program(a))
    b = backend(entry("Proposal2Code", "```protoscene\npart \"Seat\" { cuboid dims [1,1] }\n```"), entry("Proposal2Code", good, attempt=1))
    t = Transcript()
    p = proposal_to_code(a, cfg, b, query="Chair", transcript=t)
    assert p == arrangement_to_program(a)
    assert [e["request"]["attempt"] for e in t.entries] == [0, 1]


def test_refine_replaces_legs_with_cylinders():
    coarse = arrangement_to_program(chair_arrangement())
    p = refine_code(coarse, None, FAST, shipped(), query=Q, iteration=0)
    assert p.labels == coarse.labels
    legs = [n for n in p.parts if n.label.startswith("Leg")]
    assert len(legs) == 4 and all(isinstance(n.kind, Cylinder) for n in legs)


def test_refine_failsafe_keeps_previous():
    diags = []
    chair = make_chair()
    b = backend(entry("CodeRefiner", "I cannot do that."))
    p = refine_code(chair, None, FAST, b, query=Q, diagnostics=diags)
    assert p is chair
    assert [d.code for d in diags] == ["RefinerFailsafe"]


def test_refiner_prompt_edit_section():
    chair = make_chair()
    first = refiner_prompt(Q, chair, None)
    assert "Requested changes" not in first
    edits = EditSet((Edit("Backrest", "stretch", "make it taller"),))
    later = refiner_prompt(Q, chair, edits)
    assert "Requested changes" in later and "[stretch] Backrest: make it taller" in later


def test_direct_and_naive():
    assert len(direct_generate(Q, shipped(), FAST).parts) >= 1
    naive = run_naive(Q, shipped(), FAST)
    assert naive.labels == ["Seat"]
    with pytest.raises(MalformedResponse):
        run_naive(Q, backend(entry("Naive", "def draw(): pass")), FAST)
    with pytest.raises(FixtureMissing):
        run_naive(Query("Lamp"), shipped(), FAST)


# --- inspector ------------------------------------------------------------------------


def test_identify_three_predictions():
    b = backend(entry("Identifier", "predictions = ['Chair', 'Laptop', 'Street Lamp']"))
    t = Transcript()
    preds = identify(chair_renders(), FAST, b, query=Q, transcript=t)
    assert preds == ["Chair", "Laptop", "Street Lamp"]
    assert t.entries[0]["request"]["n_images"] == 3


def test_identify_empty_and_truncation():
    with pytest.raises(MalformedResponse):
        identify(chair_renders(), FAST, backend(entry("Identifier", "predictions = []")), query=Q)
    five = backend(entry("Identifier", "['a', 'b', 'c', 'd', 'e']"))
    assert identify(chair_renders(), FAST, five, query=Q) == ["a", "b", "c"]


def edits_text(n, drop=None):
    items = []
    for i in range(n):
        d = {"visual_aspect": f"part{i}", "edit_type": "move", "command": f"shift part{i} up"}
        if drop:
            del d[drop]
        items.append(d)
    return "edits = " + json.dumps(items)


def test_recommend_edits():
    es = recommend_edits(chair_renders(), Q, ["Table"], backend(entry("EditRecommender", edits_text(2))), FAST)
    assert len(es) == 2
    assert es.edits[0] == Edit("part0", "move", "shift part0 up")
    seven = recommend_edits(chair_renders(), Q, ["Table"], backend(entry("EditRecommender", edits_text(7))), FAST)
    assert len(seven) == 5
    with pytest.raises(MalformedResponse):
        recommend_edits(chair_renders(), Q, ["Table"], backend(entry("EditRecommender", edits_text(2, "command"))), FAST)


def test_unknown_edit_type_is_a_warning():
    text = json.dumps([{"visual_aspect": "seat", "edit_type": "Adjust Materials", "command": "make it brown"}])
    es = recommend_edits(chair_renders(), Q, ["Table"], backend(entry("EditRecommender", text)), FAST)
    assert len(es) == 1 and [d.code for d in es.diagnostics] == ["UnknownEditType"]


def test_stopping_rule():
    assert normalize_name("  Street-Lamp ") == "street lamp"
    assert matches(["Table", " chair "], Q)
    assert not matches(["Table", "Chair"], Q, "top1")
    assert not matches(["Chairs"], Q)
    assert not matches([], Q)


# --- prompts --------------------------------------------------------------------------


def test_fill_rejects_unknown_and_missing_slots():
    with pytest.raises(KeyError):
        prompts.fill("{q}", q="x", bogus=1)
    with pytest.raises(KeyError):
        prompts.fill("{q} {C}", q="x")
    assert prompts.fill('{"json": 1} {q}', q="x") == '{"json": 1} x'


def test_naive_prompt_wording():
    assert prompts.render_prompt("naive", q="Chair").strip() == "Write a code that draws Chair"
