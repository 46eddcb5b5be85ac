import pytest

from svgreuse.corpus import standard_corpus
from svgreuse.decompose import heuristic_decompose
from svgreuse.errors import SynthesisFailed
from svgreuse.ir import ColumnKind, Dataset
from svgreuse.svg.markers import strip_markers
from svgreuse.svg.model import serialize
from svgreuse.template.ast import FIXED_PARAMS, ParamKind
from svgreuse.template.diff import diff_geometry
from svgreuse.template.eval import evaluate
from svgreuse.template.parser import parse_program, print_program
from svgreuse.template.synthesize import (
    extract_source,
    synthesize_heuristic,
    synthesize_template,
)
from svgreuse.template.validate import validate_program

TOLERANCE = 0.005


@pytest.fixture(scope="module")
def synthesized():
    out = {}
    for chart in standard_corpus():
        marked, dataset, ir = heuristic_decompose(chart.document)
        program = synthesize_heuristic(marked, ir)
        out[chart.name] = (chart, marked, dataset, program)
    return out


def test_every_chart_round_trips_within_tolerance(synthesized):
    for chart, marked, dataset, program in synthesized.values():
        rendered = evaluate(program, marked, dataset, None)
        score = diff_geometry(strip_markers(marked), rendered)
        assert score.max_deviation <= TOLERANCE, chart.name
        assert not score.attribute_mismatches, (chart.name, score.attribute_mismatches)


def test_programs_validate(synthesized):
    for chart, marked, dataset, program in synthesized.values():
        report = validate_program(program, marked, dataset.columns)
        assert report.ok, f"{chart.name}: {report}"


def test_fixed_params_always_present(synthesized):
    for chart, _, _, program in synthesized.values():
        names = set(program.default_params())
        assert set(FIXED_PARAMS) <= names, chart.name


def test_field_params_declared_for_schema(synthesized):
    for chart, _, _, program in synthesized.values():
        field_params = [
            p for p in program.params
            if p.name.endswith("_field") and p.kind is ParamKind.TEXT
        ]
        assert {p.default for p in field_params} == {
            n for n, _ in program.required_schema
        }, chart.name


def test_sources_parse_and_print_stably(synthesized):
    for chart, _, _, program in synthesized.values():
        source = print_program(program)
        assert print_program(parse_program(source)) == source, chart.name


def test_templates_rescale_to_new_data(synthesized):
    chart, marked, dataset, program = synthesized["Quarterly revenue"]
    data = Dataset(dataset.columns, [("A", 12.0), ("B", 48.0), ("C", 3.0)])
    out = evaluate(program, marked, data, None)
    bars = [n for n in out.iter_elements() if n.get("fill") == "#4682b4"]
    assert len(bars) == 3
    heights = [float(b.get("height")) for b in bars]
    assert heights[1] == pytest.approx(4 * heights[0], rel=1e-6)


def test_synthesize_template_accepts_valid_completion():
    chart = standard_corpus()[0]
    marked, _, ir = heuristic_decompose(chart.document)
    source = print_program(synthesize_heuristic(marked, ir))
    out = synthesize_template(
        marked, ir, complete=lambda prompt: "```\n" + source + "```"
    )
    assert print_program(out) == source


def test_synthesize_template_retries_then_fails():
    chart = standard_corpus()[0]
    marked, _, ir = heuristic_decompose(chart.document)
    calls = []

    def broken(prompt):
        calls.append(prompt)
        return "```\nnot a template !!\n```"

    with pytest.raises(SynthesisFailed):
        synthesize_template(marked, ir, complete=broken)
    assert len(calls) == 2  # one retry with the parse issues appended
    assert calls[1] != calls[0]


def test_extract_source_takes_fenced_block(synthesized):
    _, _, _, program = synthesized["Quarterly revenue"]
    source = print_program(program)
    assert extract_source("before\n```\n" + source + "```\nafter") == source.rstrip(
        "\n"
    )


def test_extract_source_without_fence_returns_stripped():
    assert extract_source("  param a number 1\n") == "param a number 1"
