"""Walkthrough: hermetic replay of the model-driven pipeline.

Replays the frozen transcript in fixtures/transcripts/bars4.jsonl: the
three-step decomposition chain, template synthesis, and a chat turn that
lifts the bar width into a new slider-controlled parameter. No network
is touched — every model reply comes from the transcript.

Run from the repository root:  python3 demos/replay_refinement.py
"""

from pathlib import Path

from svgreuse import (
    LmmAdapter,
    Mode,
    Transcript,
    materialize_widgets,
    print_program,
    refine,
    run_chain,
    standard_corpus,
    synthesize_with_adapter,
)

ROOT = Path(__file__).resolve().parent.parent
adapter = LmmAdapter(Mode.REPLAY, Transcript(ROOT / "fixtures/transcripts/bars4.jsonl"))

chart = standard_corpus()[0]

# The chain: layer roles + data, enrichment, then the full IR.
result = run_chain(chart.document, adapter)
print(f"chain replayed: {len(result.dataset.rows)} data rows, "
      f"prototype {result.ir.globals.prototype.value}")

# Template synthesis through the same adapter.
program = synthesize_with_adapter(result.marked, result.ir, result.dataset, adapter)
print("synthesized params:", sorted(program.default_params()))

# One refinement turn: "Make the bars thinner." The reply rewrites the
# width binding to a new bar_width parameter.
turn = refine(program, "Make the bars thinner.", adapter,
              marked=result.marked, schema=result.dataset.columns, history=[])
print("assistant:", turn.reply_text)
print("new params:", [p.name for p in turn.new_params])
print("new widgets:", [(w.widget, w.param_name, w.minimum, w.maximum)
                       for w in turn.new_widgets])
print(f"minimal change: {turn.diff.nodes_changed} node(s), "
      f"{turn.diff.params_added} param(s) added")

# The full widget panel for the refined template.
for w in materialize_widgets(turn.program_after):
    print(f"  [{w.widget:<11}] {w.title}: default {w.default}")

print()
print(print_program(turn.program_after))
