"""Command-line entry points: build, chat, serve, eval, validate."""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from .baseline import BaselineEngine, prepare_descriptions
from .config import AppConfig, GatewayConfig, load_config
from .dialogue import ReviverEngine
from .domain import Phase, Transcript, validate_tree
from .eval_harness import UserScript, manifest_stub_for_tree, run_scripted_session
from .gateway import (
    FixtureAnnotations,
    HttpBackend,
    MockBackend,
    ModelGateway,
    annotations_path_for,
    load_annotations,
)
from .persistence import load_manifest, load_tree, save_transcript, save_tree
from .service import MOCK_BUILT_AT, create_app
from .tree_builder import build_memory_tree


def _make_gateway(gw_config: GatewayConfig, mode: str, annotations: FixtureAnnotations | None) -> ModelGateway:
    if mode == "mock":
        return ModelGateway(MockBackend(annotations), gw_config)
    api_key = os.environ.get(gw_config.api_key_env, "")
    return ModelGateway(HttpBackend(gw_config, api_key), gw_config)


def _resolve_mode(config: AppConfig, flag: str | None) -> str:
    return flag or config.gateway.mode


def _find_annotations(manifest_path: str | None, explicit: str | None) -> FixtureAnnotations | None:
    if explicit:
        return load_annotations(explicit)
    if manifest_path:
        candidate = annotations_path_for(manifest_path)
        if candidate.exists():
            return load_annotations(candidate)
    return None


@click.group()
def main() -> None:
    """Reminiscence chatbot engine for event photo collections."""


@main.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--portrait", type=click.Path(exists=True), default=None)
@click.option("--threshold", type=float, default=None, help="Similarity cut threshold (default 0.5).")
@click.option("--mode", type=click.Choice(["mock", "live"]), default=None)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--annotations", "annotations_path", type=click.Path(exists=True), default=None)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def build(manifest_path, portrait, threshold, mode, out_path, annotations_path, config_path) -> None:
    """Construct the memory tree for a collection and write it as JSON."""
    config = load_config(config_path)
    mode = _resolve_mode(config, mode)
    manifest = load_manifest(manifest_path)
    gateway = _make_gateway(config.gateway, mode, _find_annotations(manifest_path, annotations_path))
    tree = build_memory_tree(
        manifest,
        gateway,
        portrait=portrait,
        threshold=threshold if threshold is not None else config.build.similarity_threshold,
        workers=config.build.scorer_workers,
        built_at=MOCK_BUILT_AT if mode == "mock" else None,
    )
    save_tree(tree, out_path)
    click.echo(f"built {len(tree.scenes)} scenes from {len(manifest.photos)} photos -> {out_path}")


@main.command()
@click.option("--tree", "tree_path", type=click.Path(exists=True), default=None)
@click.option("--engine", type=click.Choice(["reviver", "baseline"]), default="reviver")
@click.option("--manifest", "manifest_path", type=click.Path(exists=True), default=None)
@click.option("--mode", type=click.Choice(["mock", "live"]), default=None)
@click.option("--annotations", "annotations_path", type=click.Path(exists=True), default=None)
@click.option("--transcript-out", type=click.Path(), default=None)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def chat(tree_path, engine, manifest_path, mode, annotations_path, transcript_out, config_path) -> None:
    """Interactive text chat; reads user turns from stdin."""
    config = load_config(config_path)
    mode = _resolve_mode(config, mode)
    annotations = _find_annotations(manifest_path, annotations_path)

    tree = load_tree(tree_path) if tree_path else None
    manifest = load_manifest(manifest_path) if manifest_path else None
    if engine == "reviver":
        if tree is None:
            raise click.UsageError("reviver chat needs --tree")
        manifest = manifest or manifest_stub_for_tree(tree)
        gateway = _make_gateway(config.gateway, mode, annotations)
        bot = ReviverEngine(tree, manifest, gateway, config.dialogue)
    else:
        if manifest is None:
            raise click.UsageError("baseline chat needs --manifest")
        gateway = _make_gateway(config.gateway, mode, annotations)
        report = prepare_descriptions(manifest, gateway)
        if not report.complete:
            raise click.ClickException(f"description generation failed for: {sorted(report.failures)}")
        bot = BaselineEngine(manifest, gateway, config.dialogue)

    state, opening = bot.start_session("cli")
    click.echo(f"bot> {opening.text}")
    for line in sys.stdin:
        text = line.rstrip("\n")
        if not text.strip():
            continue
        turn = bot.reply(state, text)
        click.echo(f"bot> {turn.text}")
        if state.phase is Phase.CONCLUDED:
            break
    if transcript_out:
        transcript = Transcript(collection_id=state.collection_id, engine=engine, turns=state.history)
        save_transcript(transcript, transcript_out)
        click.echo(f"transcript written to {transcript_out}")


@main.command()
@click.option("--port", type=int, default=8000)
@click.option("--mode", type=click.Choice(["mock", "live"]), default=None)
@click.option("--store", "store_dir", type=click.Path(), default=None)
@click.option("--host", default="127.0.0.1")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def serve(port, mode, store_dir, host, config_path) -> None:
    """Run the HTTP session service."""
    import uvicorn

    config = load_config(config_path)
    if mode:
        config.gateway.mode = mode
    if store_dir:
        config.store_dir = store_dir
    uvicorn.run(create_app(config), host=host, port=port, log_level="warning")


@main.command("eval")
@click.option("--tree", "tree_path", type=click.Path(exists=True), default=None)
@click.option("--engine", type=click.Choice(["reviver", "baseline"]), default="reviver")
@click.option("--script", "script_path", required=True, type=click.Path(exists=True))
@click.option("--seed", type=int, default=0)
@click.option("--report", "report_path", required=True, type=click.Path())
@click.option("--manifest", "manifest_path", type=click.Path(exists=True), default=None)
@click.option("--mode", type=click.Choice(["mock", "live"]), default=None)
@click.option("--annotations", "annotations_path", type=click.Path(exists=True), default=None)
@click.option("--transcript-out", type=click.Path(), default=None)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def eval_command(
    tree_path, engine, script_path, seed, report_path, manifest_path, mode, annotations_path, transcript_out,
    config_path,
) -> None:
    """Run one scripted session and write a metrics report."""
    config = load_config(config_path)
    mode = _resolve_mode(config, mode)
    tree = load_tree(tree_path) if tree_path else None
    manifest = load_manifest(manifest_path) if manifest_path else None
    if engine == "reviver" and tree is None:
        raise click.UsageError("reviver eval needs --tree")
    if engine == "baseline":
        if manifest is None:
            raise click.UsageError("baseline eval needs --manifest (photos must be readable)")
        gateway = _make_gateway(config.gateway, mode, _find_annotations(manifest_path, annotations_path))
        report = prepare_descriptions(manifest, gateway)
        if not report.complete:
            raise click.ClickException(f"description generation failed for: {sorted(report.failures)}")
    else:
        gateway = _make_gateway(config.gateway, mode, _find_annotations(manifest_path, annotations_path))

    script = UserScript.load(script_path)
    transcript, metrics = run_scripted_session(
        engine,
        script,
        gateway,
        tree=tree,
        manifest=manifest,
        seed=seed,
        config=config.dialogue,
        eval_config=config.eval,
    )
    payload = {"seed": seed, "collection_id": transcript.collection_id, **metrics.to_dict()}
    Path(report_path).parent.mkdir(parents=True, exist_ok=True)
    Path(report_path).write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    if transcript_out:
        save_transcript(transcript, transcript_out)
    coverage = "n/a" if metrics.scene_coverage is None else f"{metrics.scene_coverage:.2f}"
    click.echo(f"{engine}: coverage={coverage} concluded={metrics.concluded} bot_turns={metrics.bot_turn_count}")


@main.command()
@click.option("--tree", "tree_path", required=True, type=click.Path(exists=True))
@click.option("--manifest", "manifest_path", type=click.Path(exists=True), default=None)
def validate(tree_path, manifest_path) -> None:
    """Validate a tree file; exit 0 when every invariant holds."""
    tree = load_tree(tree_path)
    manifest = load_manifest(manifest_path) if manifest_path else None
    report = validate_tree(tree, manifest)
    if report.ok:
        click.echo("valid")
        return
    for violation in report.violations:
        click.echo(f"{violation.invariant}: {violation.message}")
    sys.exit(1)


if __name__ == "__main__":
    main()
