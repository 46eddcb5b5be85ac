"""Command line interface: decompose, render, verify, serve."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .chain import decompose_document, synthesize_with_adapter
from .decompose import validate_markup
from .errors import SvgReuseError
from .ir import Dataset, parse_ir, serialize_ir, validate_ir
from .lmm import LmmAdapter, Mode, Transcript
from .service.csvdata import ingest_csv
from .svg.model import ensure_ids, parse, serialize
from .template import (
    diff_geometry,
    evaluate,
    parse_program,
    print_program,
    validate_program,
)
from .template.synthesize import synthesize_heuristic

FIDELITY_TOLERANCE = 0.005


@click.group()
def main():
    """Decompose SVG charts into reusable templates and render them."""


def _make_adapter(mode: str, transcript: str | None) -> LmmAdapter | None:
    if mode == "heuristic":
        return None
    if mode == "replay":
        if not transcript:
            raise click.UsageError("--mode replay requires --transcript")
        return LmmAdapter(Mode.REPLAY, Transcript(transcript))
    adapter = LmmAdapter.from_env(
        transcript=Transcript(transcript) if transcript else None
    )
    adapter.mode = Mode.RECORD if transcript else Mode.LIVE
    return adapter


@main.command()
@click.argument("input_svg", type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", type=click.Choice(["heuristic", "lmm", "replay"]),
              default="heuristic", show_default=True)
@click.option("--transcript", type=click.Path(dir_okay=False), default=None)
@click.option("--out-dir", type=click.Path(file_okay=False), default=".",
              show_default=True)
def decompose(input_svg, mode, transcript, out_dir):
    """Decompose INPUT_SVG into markup, IR, and a template."""
    adapter = _make_adapter(mode, transcript)
    doc = ensure_ids(parse(Path(input_svg).read_bytes()))
    try:
        result = decompose_document(doc, adapter)
        if adapter is not None:
            program = synthesize_with_adapter(result.marked, result.ir,
                                              result.dataset, adapter)
        else:
            program = synthesize_heuristic(result.marked, result.ir)
    except SvgReuseError as exc:
        raise click.ClickException(str(exc))

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(input_svg).stem
    (out / f"{stem}.svg").write_text(serialize(doc), encoding="utf-8")
    (out / f"{stem}.dwsvg").write_text(serialize(result.marked), encoding="utf-8")
    (out / f"{stem}.ir.json").write_text(serialize_ir(result.ir), encoding="utf-8")
    (out / f"{stem}.dwt").write_text(print_program(program), encoding="utf-8")
    (out / f"{stem}.dataset.json").write_text(_dataset_json(result.dataset),
                                              encoding="utf-8")
    click.echo(f"wrote {stem}.dwsvg, {stem}.ir.json, {stem}.dwt to {out}")


def _dataset_json(dataset: Dataset) -> str:
    from .service.sessions import _dataset_json as impl

    return impl(dataset)


def _dataset_from_json(text: str) -> Dataset:
    from .service.sessions import _dataset_from_json as impl

    return impl(text)


def _read_params(path: str | None) -> dict:
    """Key-value parameter file: one `name = value` per line."""
    if path is None:
        return {}
    params = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise click.ClickException(f"bad parameter line: {raw!r}")
        name, value = line.split("=", 1)
        params[name.strip()] = value.strip()
    return params


@main.command()
@click.argument("template", type=click.Path(exists=True, dir_okay=False))
@click.option("--markup", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--data", "data_path", type=click.Path(exists=True, dir_okay=False),
              default=None)
@click.option("--params", "params_path", type=click.Path(exists=True, dir_okay=False),
              default=None)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def render(template, markup, data_path, params_path, out):
    """Evaluate TEMPLATE against a marked-up reference and data."""
    try:
        program = parse_program(Path(template).read_text(encoding="utf-8"))
        marked = parse(Path(markup).read_bytes())
        if data_path is None:
            dataset = Dataset([], [])
        elif data_path.endswith(".json"):
            dataset = _dataset_from_json(Path(data_path).read_text(encoding="utf-8"))
        else:
            dataset = ingest_csv(Path(data_path).read_bytes())
        result = evaluate(program, marked, dataset, _read_params(params_path))
    except SvgReuseError as exc:
        raise click.ClickException(str(exc))
    Path(out).write_text(serialize(result), encoding="utf-8")
    click.echo(f"wrote {out}")


@main.command()
@click.argument("bundle_dir", type=click.Path(exists=True, file_okay=False))
def verify(bundle_dir):
    """Check every decomposition bundle in BUNDLE_DIR; exit 1 on failure."""
    root = Path(bundle_dir)
    failures = 0
    bundles = sorted(root.glob("*.dwsvg"))
    if not bundles:
        raise click.ClickException(f"no .dwsvg bundles in {root}")
    for marked_path in bundles:
        stem = marked_path.name[: -len(".dwsvg")]
        problems = []
        try:
            marked = parse(marked_path.read_bytes())
            reference = parse((root / f"{stem}.svg").read_bytes())
            ir = parse_ir((root / f"{stem}.ir.json").read_text(encoding="utf-8"))
            program = parse_program((root / f"{stem}.dwt").read_text(encoding="utf-8"))
            dataset = _dataset_from_json(
                (root / f"{stem}.dataset.json").read_text(encoding="utf-8")
            )
            markup_report = validate_markup(marked, reference)
            if not markup_report.ok:
                problems.append(f"markup: {markup_report}")
            ir_report = validate_ir(ir, reference)
            if not ir_report.ok:
                problems.append(f"ir: {ir_report}")
            program_report = validate_program(program, marked,
                                              schema=list(dataset.columns))
            if not program_report.ok:
                problems.append(f"program: {program_report}")
            rendered = evaluate(program, marked, dataset)
            score = diff_geometry(reference, rendered)
            if score.max_deviation > FIDELITY_TOLERANCE:
                problems.append(f"fidelity: deviation {score.max_deviation:.5f}")
        except (SvgReuseError, OSError) as exc:
            problems.append(f"{type(exc).__name__}: {exc}")
        if problems:
            failures += 1
            click.echo(f"FAIL {stem}: " + "; ".join(problems))
        else:
            click.echo(f"ok   {stem}")
    if failures:
        sys.exit(1)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              required=True)
def serve(config_path):
    """Run the HTTP service."""
    import uvicorn

    from .service.app import create_app
    from .service.config import ServiceConfig

    config = ServiceConfig.load(config_path)
    uvicorn.run(create_app(config), host=config.host, port=config.port,
                log_level="warning")


if __name__ == "__main__":
    main()
