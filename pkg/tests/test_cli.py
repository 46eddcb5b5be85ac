import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from svgreuse.cli import main
from svgreuse.corpus import standard_corpus
from svgreuse.svg.model import serialize

TRANSCRIPT = Path(__file__).resolve().parent.parent / "fixtures" / "transcripts" / "bars4.jsonl"


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def bar_svg(tmp_path):
    chart = standard_corpus()[0]
    path = tmp_path / "bars.svg"
    path.write_text(serialize(chart.document), encoding="utf-8")
    return path


def _decompose(runner, bar_svg, out_dir, *extra):
    return runner.invoke(
        main, ["decompose", str(bar_svg), "--out-dir", str(out_dir), *extra]
    )


def test_decompose_writes_bundle(runner, bar_svg, tmp_path):
    out = tmp_path / "out"
    result = _decompose(runner, bar_svg, out)
    assert result.exit_code == 0, result.output
    for suffix in (".svg", ".dwsvg", ".ir.json", ".dwt", ".dataset.json"):
        assert (out / f"bars{suffix}").exists(), suffix
    ir = json.loads((out / "bars.ir.json").read_text())
    assert ir["globals"]["prototype"] == "Bar"


def test_decompose_replay_without_transcript_is_usage_error(runner, bar_svg, tmp_path):
    result = _decompose(runner, bar_svg, tmp_path, "--mode", "replay")
    assert result.exit_code != 0
    assert "--transcript" in result.output


def test_decompose_replay_matches_heuristic(runner, bar_svg, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert _decompose(runner, bar_svg, a).exit_code == 0
    result = _decompose(
        runner, bar_svg, b, "--mode", "replay", "--transcript", str(TRANSCRIPT)
    )
    assert result.exit_code == 0, result.output
    for name in ("bars.dwsvg", "bars.ir.json", "bars.dwt", "bars.dataset.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_render_reproduces_reference(runner, bar_svg, tmp_path):
    out = tmp_path / "out"
    _decompose(runner, bar_svg, out)
    rendered = tmp_path / "rendered.svg"
    result = runner.invoke(
        main,
        [
            "render", str(out / "bars.dwt"),
            "--markup", str(out / "bars.dwsvg"),
            "--data", str(out / "bars.dataset.json"),
            "--out", str(rendered),
        ],
    )
    assert result.exit_code == 0, result.output
    assert rendered.exists()
    # Geometry is recovered from tick labels, so expect near-identity.
    from svgreuse.svg.model import parse
    from svgreuse.template.diff import diff_geometry

    score = diff_geometry(parse(bar_svg.read_bytes()), parse(rendered.read_bytes()))
    assert score.max_deviation <= 0.005


def test_render_with_csv_and_params(runner, bar_svg, tmp_path):
    out = tmp_path / "out"
    _decompose(runner, bar_svg, out)
    csv = tmp_path / "new.csv"
    csv.write_text("category,value\nA,10\nB,30\n")
    params = tmp_path / "params.txt"
    params.write_text("chart_height = 100\n# comment\n")
    rendered = tmp_path / "rendered.svg"
    result = runner.invoke(
        main,
        [
            "render", str(out / "bars.dwt"),
            "--markup", str(out / "bars.dwsvg"),
            "--data", str(csv),
            "--params", str(params),
            "--out", str(rendered),
        ],
    )
    assert result.exit_code == 0, result.output
    assert rendered.read_text().count('fill="#4682b4"') == 2


def test_render_requires_markup(runner, bar_svg, tmp_path):
    out = tmp_path / "out"
    _decompose(runner, bar_svg, out)
    result = runner.invoke(
        main, ["render", str(out / "bars.dwt"), "--out", str(tmp_path / "x.svg")]
    )
    assert result.exit_code != 0


def test_verify_passes_on_good_bundle(runner, bar_svg, tmp_path):
    out = tmp_path / "out"
    _decompose(runner, bar_svg, out)
    result = runner.invoke(main, ["verify", str(out)])
    assert result.exit_code == 0, result.output
    assert "ok   bars" in result.output


def test_verify_fails_on_corrupted_template(runner, bar_svg, tmp_path):
    out = tmp_path / "out"
    _decompose(runner, bar_svg, out)
    dwt = out / "bars.dwt"
    dwt.write_text(dwt.read_text().replace("260", "120"))
    result = runner.invoke(main, ["verify", str(out)])
    assert result.exit_code == 1
    assert "FAIL bars" in result.output


def test_verify_empty_dir_errors(runner, tmp_path):
    result = runner.invoke(main, ["verify", str(tmp_path)])
    assert result.exit_code != 0


def test_help_lists_subcommands(runner):
    result = runner.invoke(main, ["--help"])
    assert result.exit_code == 0
    for name in ("decompose", "render", "verify", "serve"):
        assert name in result.output
