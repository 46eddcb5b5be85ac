from pathlib import Path

import pytest

from svgreuse.corpus import standard_corpus
from svgreuse.decompose import heuristic_decompose
from svgreuse.errors import RefinementRejected
from svgreuse.lmm import LmmAdapter, Mode, Transcript
from svgreuse.refine import ChatTurn, materialize_widgets, refine
from svgreuse.template.parser import parse_program, print_program
from svgreuse.template.synthesize import synthesize_heuristic

TRANSCRIPT = Path(__file__).resolve().parent.parent / "fixtures" / "transcripts" / "bars4.jsonl"


def live(reply):
    if callable(reply):
        return LmmAdapter(Mode.LIVE, provider=reply)
    return LmmAdapter(Mode.LIVE, provider=lambda r: reply)


# -- widget materialization --------------------------------------------------


def test_widget_kinds_map_one_to_one():
    program = parse_program(
        'param w number 10 range 1 100 1\n'
        'param c color "#ff0000"\n'
        'param label text "hi"\n'
        'param style choice "a" options "a" "b"\n'
    )
    widgets = {w.param_name: w for w in materialize_widgets(program)}
    assert widgets["w"].widget == "Slider"
    assert widgets["c"].widget == "ColorPicker"
    assert widgets["label"].widget == "TextInput"
    assert widgets["style"].widget == "Select"
    assert widgets["style"].options == ["a", "b"]


def test_slider_uses_declared_range():
    program = parse_program("param w number 10 range 1 100 0.5\n")
    (w,) = materialize_widgets(program)
    assert (w.minimum, w.maximum, w.step) == (1, 100, 0.5)


def test_slider_synthesizes_range_around_default():
    program = parse_program("param w number 20\n")
    (w,) = materialize_widgets(program)
    assert (w.minimum, w.maximum) == (5, 80)
    assert w.step == pytest.approx(0.75)


def test_slider_range_for_negative_default_is_sorted():
    program = parse_program("param w number -20\n")
    (w,) = materialize_widgets(program)
    assert (w.minimum, w.maximum) == (-80, -5)


def test_slider_range_for_zero_default():
    program = parse_program("param w number 0\n")
    (w,) = materialize_widgets(program)
    assert (w.minimum, w.maximum) == (-1.0, 1.0)
    assert w.step == pytest.approx(0.02)


def test_widget_titles_humanized():
    program = parse_program("param bar_width number 1\n")
    (w,) = materialize_widgets(program)
    assert w.title == "bar width"


# -- refinement turns --------------------------------------------------------


@pytest.fixture(scope="module")
def bar_template():
    chart = standard_corpus()[0]
    marked, dataset, ir = heuristic_decompose(chart.document)
    program = synthesize_heuristic(marked, ir)
    return program, marked, dataset


def test_bar_width_fixture_turn(bar_template):
    """The frozen first chat turn: exactly one new param, one Slider,
    and a (1, 1) minimal-change score."""
    program, marked, dataset = bar_template
    adapter = LmmAdapter(Mode.REPLAY, Transcript(TRANSCRIPT))
    result = refine(program, "Make the bars thinner.", adapter,
                    marked=marked, schema=dataset.columns, history=[])
    assert [p.name for p in result.new_params] == ["bar_width"]
    assert len(result.new_widgets) == 1
    assert result.new_widgets[0].widget == "Slider"
    assert (result.diff.nodes_changed, result.diff.params_added) == (1, 1)


def test_prose_reply_leaves_program_unchanged(bar_template):
    program, marked, dataset = bar_template
    result = refine(program, "What is this?", live("Just a bar chart."),
                    marked=marked, schema=dataset.columns)
    assert result.reply_text == "Just a bar chart."
    assert print_program(result.program_after) == print_program(program)
    assert result.new_params == [] and result.new_widgets == []
    assert (result.diff.nodes_changed, result.diff.params_added) == (0, 0)


def test_candidate_ranking_prefers_smaller_change(bar_template):
    program, marked, dataset = bar_template
    source = print_program(program)
    small = source.replace('fill "#4682b4"', 'fill "#123456"')
    big = source.replace("emit rect", "emit circle").replace(
        "x (scale x (field category))", "cx (scale x (field category))"
    )
    reply = "Two options:\n```\n" + big + "```\nor\n```\n" + small + "```"
    result = refine(program, "darker", live(reply),
                    marked=marked, schema=dataset.columns)
    assert result.diff.nodes_changed == 1
    assert 'fill "#123456"' in print_program(result.program_after)


def test_invalid_candidate_triggers_retry_then_rejection(bar_template):
    program, marked, dataset = bar_template
    prompts = []

    def bad(request):
        prompts.append(request.user)
        return "Here:\n```\nfrobnicate all\n```"

    with pytest.raises(RefinementRejected):
        refine(program, "do it", live(bad), marked=marked, schema=dataset.columns)
    assert len(prompts) == 2
    assert "rejected" in prompts[1]


def test_retry_can_succeed(bar_template):
    program, marked, dataset = bar_template
    source = print_program(program)
    replies = iter(["```\nbroken !\n```", "fixed\n```\n" + source + "```"])
    result = refine(program, "noop", live(lambda r: next(replies)),
                    marked=marked, schema=dataset.columns)
    assert print_program(result.program_after) == source


def test_history_is_windowed_in_prompt(bar_template):
    program, marked, dataset = bar_template
    seen = {}

    def capture(request):
        seen["prompt"] = request.user
        return "ok, no change needed"

    history = [ChatTurn("user", f"turn {i}") for i in range(10)]
    refine(program, "hello", live(capture),
           marked=marked, schema=dataset.columns, history=history)
    assert "turn 9" in seen["prompt"]
    assert "turn 3" not in seen["prompt"]  # only the last 6 turns survive
    assert "Request: hello" in seen["prompt"]
