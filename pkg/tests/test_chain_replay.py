"""The full model chain replayed from the frozen transcript, no network."""

from pathlib import Path

import pytest

from svgreuse.chain import (
    decompose_document,
    run_chain,
    synthesize_with_adapter,
)
from svgreuse.corpus import standard_corpus
from svgreuse.decompose import heuristic_decompose
from svgreuse.errors import ChainStepFailed
from svgreuse.ir import serialize_ir
from svgreuse.lmm import LmmAdapter, Mode, Transcript
from svgreuse.svg.model import serialize
from svgreuse.template.parser import print_program

TRANSCRIPT = Path(__file__).resolve().parent.parent / "fixtures" / "transcripts" / "bars4.jsonl"


@pytest.fixture()
def replay_adapter():
    return LmmAdapter(Mode.REPLAY, Transcript(TRANSCRIPT))


@pytest.fixture(scope="module")
def bar_chart():
    return standard_corpus()[0]


def test_chain_replay_matches_heuristic_byte_wise(replay_adapter, bar_chart):
    h_marked, h_dataset, h_ir = heuristic_decompose(bar_chart.document)
    result = run_chain(bar_chart.document, replay_adapter)
    assert serialize(result.marked) == serialize(h_marked)
    assert serialize_ir(result.ir) == serialize_ir(h_ir)
    assert result.dataset.rows == h_dataset.rows
    assert result.dataset.columns == h_dataset.columns


def test_chain_replay_is_reproducible(replay_adapter, bar_chart):
    first = run_chain(bar_chart.document, replay_adapter)
    second = run_chain(bar_chart.document, replay_adapter)
    assert serialize(first.marked) == serialize(second.marked)
    assert serialize_ir(first.ir) == serialize_ir(second.ir)


def test_synthesis_replay_matches_heuristic(replay_adapter, bar_chart):
    marked, dataset, ir = heuristic_decompose(bar_chart.document)
    from svgreuse.template.synthesize import synthesize_heuristic

    program = synthesize_with_adapter(marked, ir, dataset, replay_adapter)
    assert print_program(program) == print_program(synthesize_heuristic(marked, ir))


def test_decompose_document_without_adapter_is_heuristic(bar_chart):
    result = decompose_document(bar_chart.document)
    h_marked, _, h_ir = heuristic_decompose(bar_chart.document)
    assert serialize(result.marked) == serialize(h_marked)
    assert serialize_ir(result.ir) == serialize_ir(h_ir)


def test_chain_step_fails_after_retry(bar_chart):
    calls = []

    def garbage(request):
        calls.append(request.user)
        return "no json here"

    adapter = LmmAdapter(Mode.LIVE, provider=garbage)
    with pytest.raises(ChainStepFailed) as err:
        run_chain(bar_chart.document, adapter)
    assert err.value.attempts == 2
    assert len(calls) == 2
    assert calls[0] != calls[1]  # retry appends the validation issues
