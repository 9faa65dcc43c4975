import logging
from pathlib import Path
from typing import Any, Dict, List, NoReturn, Optional

import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from rich.panel import Panel
from rich.table import Table

from src.gate import LearningMode
from src.models import ExperimentCall, MetricsRecord
from src.orchestrator.engine import (
    Event,
    RunContext,
    apply_label_map,
    evaluate_stream,
    load_knowledge,
    load_label_map,
    new_knowledge,
    node_summary,
    run_curve,
    train_stream,
    write_metrics,
)
from src.orchestrator.experiment_router import ExperimentRouter
from src.orchestrator.protocols import MODEL_HINTS, column_title, curve_config, flagged_requests
from src.orchestrator.state import RunState
from src.simenv import GROUND_STREAM, generate_datasets
from src.store import save
from src.utils import UmlError, apply_cli_overrides, ensure_dir, load_config, write_json


# Setup logging
logging.basicConfig(
    level=logging.INFO,
    format="%(message)s",
    handlers=[RichHandler(rich_tracebacks=True)]
)
logger = logging.getLogger(__name__)

# CLI setup
app = typer.Typer(help="Uncertainty-modulated lifelong learning: ARTMAP experiments on a simulated drone")
console = Console()

CONFIG_OPTION = typer.Option(None, "-c", "--config", help="Custom config file")
SEED_OPTION = typer.Option(None, "--seed", help="Override simulation.seed")
OUT_OPTION = typer.Option(None, "--out", help="Override output.dir")
VERBOSE_OPTION = typer.Option(False, "-v", "--verbose", help="Enable verbose output")


def _load_configuration(
    config_path: Optional[Path], seed: Optional[int], out: Optional[Path]
) -> Dict[str, Any]:
    """Load configuration file and surface friendly errors."""
    try:
        cfg = load_config(str(config_path)) if config_path else load_config()
    except Exception as exc:
        console.print(f"[red]Error loading config: {exc}[/red]")
        raise typer.Exit(1)
    return apply_cli_overrides(cfg, seed=seed, out_dir=out)


def setup_logging(
    verbose: bool = False, out_dir: Path = Path("out"), level_name: str = "INFO"
) -> None:
    """Configure logging from verbosity and the configured level (`logging.level`)."""
    level = logging.DEBUG if verbose else logging.getLevelName(level_name.upper())
    if not isinstance(level, int):
        level = logging.INFO
    root = logging.getLogger()
    root.setLevel(min(level, logging.INFO))

    # Update console handler
    for handler in root.handlers:
        if isinstance(handler, RichHandler):
            handler.setLevel(level)

    # Also log to file (always at INFO level), once per output directory
    log_path = (ensure_dir(out_dir) / "run.log").resolve()
    for handler in root.handlers:
        if isinstance(handler, logging.FileHandler) and Path(handler.baseFilename) == log_path:
            return
    file_handler = logging.FileHandler(log_path, encoding="utf-8")
    file_handler.setFormatter(
        logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    )
    file_handler.setLevel(logging.INFO)
    root.addHandler(file_handler)


def _prepare(
    config_path: Optional[Path], seed: Optional[int], out: Optional[Path], verbose: bool
) -> RunContext:
    cfg = _load_configuration(config_path, seed, out)
    setup_logging(
        verbose, Path(cfg["output"]["dir"]), cfg.get("logging", {}).get("level", "INFO")
    )
    try:
        return RunContext.from_config(cfg)
    except (UmlError, OSError) as exc:
        _fail(exc, "Setup")


def _fail(exc: Exception, what: str) -> NoReturn:
    console.print(f"\n[red]Error: {escape(str(exc))}[/red]")
    logger.error(f"{what} failed", exc_info=True)
    raise typer.Exit(1)


def _handle_event(event: Event) -> None:
    if event.kind == "checkpoint":
        row = event.payload
        accs = ", ".join(
            f"{key[4:]}={value:.1f}%" for key, value in row.items() if key.startswith("acc_")
        )
        console.print(f"[dim]{row['phase']} @ {row['training_fraction']:g}%: {accs}[/dim]")
    elif event.kind == "label_request":
        console.print(
            f"[yellow]Label requested for class {event.payload['class_index']} "
            f"(support {event.payload['support_count']})[/yellow]"
        )


def _records_table(title: str, records: List[MetricsRecord]) -> Table:
    columns = sorted({name for record in records for name in record.accuracies})
    table = Table(title=title)
    table.add_column("Phase", style="cyan")
    table.add_column("Training %", justify="right")
    for column in columns:
        table.add_column(column_title(column), style="green", justify="right")
    table.add_column("New classes", justify="right")
    for record in records:
        table.add_row(
            record.phase,
            f"{record.training_fraction:g}",
            *[f"{record.accuracies[c]:.1f}%" if c in record.accuracies else "-" for c in columns],
            str(record.new_classes),
        )
    return table


def _render_run(run: RunState) -> None:
    """Show the experiment table (final row per phase) and where results went."""
    final_rows: Dict[str, MetricsRecord] = {}
    for record in run.records:
        final_rows[record.phase] = record
    console.print("\n[bold green]✓ Experiment complete![/bold green]\n")
    console.print(_records_table(f"{run.experiment} results", list(final_rows.values())))

    if run.results:
        details = Table.grid(padding=(0, 1))
        details.add_column(style="cyan", justify="right", no_wrap=True)
        details.add_column(style="white")
        for key, value in run.results.items():
            details.add_row(key.replace("_", " ").title(), str(value))
        console.print(Panel(details, title="📊 Run Details", border_style="cyan"))

    for step, duration in run.timings.items():
        logger.debug(f"Time {step}: {duration:.2f}s")
    if "summary" in run.artifacts:
        console.print(f"\n[bold]📁 Results saved to:[/bold] {Path(run.artifacts['summary']).parent}")


def _run_experiment(ctx: RunContext, name: str, **args: Any) -> RunState:
    console.print(Panel.fit(
        f"[bold blue]Experiment: {name}[/bold blue]\n"
        f"Seed: {ctx.seed}\n"
        f"Output: {ctx.out_dir}",
        title="🛩  UML-ARTMAP"
    ))
    router = ExperimentRouter(ctx)
    try:
        with console.status(f"[bold green]Running {name}..."):
            run = router.dispatch(ExperimentCall(name=name, args=args), on_event=_handle_event)
    except (UmlError, OSError, KeyError) as exc:
        _fail(exc, f"Experiment {name}")
    _render_run(run)
    return run


@app.command("gen-data")
def gen_data(
    config: Optional[Path] = CONFIG_OPTION,
    seed: Optional[int] = SEED_OPTION,
    out: Optional[Path] = OUT_OPTION,
    verbose: bool = VERBOSE_OPTION,
):
    """Generate the ground, aerial and multi-height sample streams."""
    ctx = _prepare(config, seed, out, verbose)
    try:
        with console.status("[bold green]Generating streams..."):
            manifest = generate_datasets(ctx.scenario, ctx.seed, ctx.data_dir)
    except (UmlError, OSError) as exc:
        _fail(exc, "Data generation")

    table = Table(title=f"Streams (seed {ctx.seed})")
    table.add_column("Stream", style="cyan")
    table.add_column("Frames", justify="right", style="green")
    table.add_column("Detections", justify="right")
    for name, info in sorted(manifest["streams"].items()):
        table.add_row(name, str(info["frames"]), str(info["detections"]))
    console.print(table)
    console.print(f"\n[bold]📁 Data written to:[/bold] {ctx.data_dir}")


@app.command()
def train(
    stream: str = typer.Option(GROUND_STREAM, "--stream", help="Training stream name"),
    mode: LearningMode = typer.Option(LearningMode.SUPERVISED, "--mode", help="Learning mode"),
    model: Optional[Path] = typer.Option(None, "--model", help="Model file to write"),
    resume: bool = typer.Option(False, "--resume", help="Continue training an existing model file"),
    config: Optional[Path] = CONFIG_OPTION,
    seed: Optional[int] = SEED_OPTION,
    out: Optional[Path] = OUT_OPTION,
    verbose: bool = VERBOSE_OPTION,
):
    """Train on a stream in random order, save the model and score it on the same stream."""
    ctx = _prepare(config, seed, out, verbose)
    model_path = model or ctx.model_path(stream)
    shuffle = bool(ctx.experiment_settings("train").get("shuffle", True))
    try:
        frames = ctx.stream(stream)
        if resume:
            state = load_knowledge(model_path, ctx.scenario.feature_dim)
        else:
            state = new_knowledge(ctx.config, ctx.scenario)
        with console.status(f"[bold green]Training on {stream}..."):
            learned = train_stream(state, frames, mode, name=stream, seed=ctx.seed, shuffle=shuffle)
            scored = evaluate_stream(state, frames, stream)
        digest = save(state, model_path)
    except (UmlError, OSError) as exc:
        _fail(exc, "Training")

    summary = {
        "stream": stream,
        "mode": mode.value,
        "training": learned.to_dict(),
        "evaluation": scored.to_dict(),
        "nodes": state.network.node_count,
        "classes": state.registry.class_count,
        "model": str(model_path),
        "model_digest": digest,
    }
    write_json(ctx.experiment_dir("train") / f"{stream}.json", summary)

    details = Table.grid(padding=(0, 1))
    details.add_column(style="cyan", justify="right", no_wrap=True)
    details.add_column(style="green")
    details.add_row("Samples", str(learned.samples))
    details.add_row("Accuracy (frozen)", f"{scored.accuracy:.2f}%")
    details.add_row("Nodes", str(state.network.node_count))
    details.add_row("Classes", str(state.registry.class_count))
    details.add_row("Model", str(model_path))
    console.print(Panel(details, title=f"📋 Trained on {stream}", border_style="green"))


@app.command("eval")
def eval_(
    model: Optional[Path] = typer.Option(None, "--model", help="Model file to evaluate"),
    stream: str = typer.Option(GROUND_STREAM, "--stream", help="Stream to score"),
    config: Optional[Path] = CONFIG_OPTION,
    seed: Optional[int] = SEED_OPTION,
    out: Optional[Path] = OUT_OPTION,
    verbose: bool = VERBOSE_OPTION,
):
    """Score a model on a stream with learning disabled."""
    ctx = _prepare(config, seed, out, verbose)
    model_path = model or ctx.model_path("ground")
    try:
        state = load_knowledge(model_path, ctx.scenario.feature_dim, MODEL_HINTS["ground"])
        result = evaluate_stream(state, ctx.stream(stream), stream)
    except (UmlError, OSError) as exc:
        _fail(exc, "Evaluation")

    summary = {"model": str(model_path), "stream": stream, **result.to_dict()}
    write_json(ctx.experiment_dir("eval") / f"{model_path.stem}_{stream}.json", summary)
    table = Table(title=f"{model_path.name} on {stream}")
    table.add_column("Samples", justify="right")
    table.add_column("Accuracy", style="green", justify="right")
    table.add_column("Unknown", justify="right")
    table.add_column("Rejected", justify="right")
    table.add_row(
        str(result.samples), f"{result.accuracy:.2f}%", str(result.unknown), str(result.rejected)
    )
    console.print(table)
    console.print(f"[dim]Decision digest: {result.digest}[/dim]")


@app.command()
def curve(
    model: Optional[Path] = typer.Option(None, "--model", help="Starting model file"),
    stream: Optional[str] = typer.Option(None, "--stream", help="Training stream (default from config)"),
    config: Optional[Path] = CONFIG_OPTION,
    seed: Optional[int] = SEED_OPTION,
    out: Optional[Path] = OUT_OPTION,
    verbose: bool = VERBOSE_OPTION,
):
    """Accuracy on several test sets versus the fraction of a training stream seen."""
    ctx = _prepare(config, seed, out, verbose)
    settings = ctx.experiment_settings("curve")
    train_name = stream or settings.get("train_stream", "aerial_A_train")
    test_names = settings.get("test_streams", [GROUND_STREAM])
    model_path = model or ctx.model_path("ground")
    run = RunState("curve")
    try:
        exp = curve_config(ctx, train_name, test_names)
        state = load_knowledge(model_path, ctx.scenario.feature_dim, MODEL_HINTS["ground"])
        test_sets = {name: ctx.stream(stream_name) for name, stream_name in exp.eval_streams.items()}
        with console.status(f"[bold green]Training on {train_name}..."):
            run.add_records(
                run_curve(
                    state,
                    ctx.stream(train_name),
                    test_sets,
                    exp.checkpoints,
                    experiment=exp.experiment,
                    phase=exp.phases[0].name,
                    seed=ctx.seed,
                    on_event=_handle_event,
                )
            )
        run.add_result("train_stream", train_name)
        run.add_result("model", str(model_path))
        paths = write_metrics(run.records, ctx.experiment_dir("curve"), run.to_json())
    except (UmlError, OSError) as exc:
        _fail(exc, "Curve")

    console.print(_records_table(f"Curve on {train_name}", run.records))
    console.print(f"\n[bold]📁 Curve saved to:[/bold] {paths['metrics']}")


@app.command("exp-transfer")
def exp_transfer(
    config: Optional[Path] = CONFIG_OPTION,
    seed: Optional[int] = SEED_OPTION,
    out: Optional[Path] = OUT_OPTION,
    verbose: bool = VERBOSE_OPTION,
):
    """Ground-to-aerial transfer on Set A."""
    _run_experiment(_prepare(config, seed, out, verbose), "transfer")


@app.command("exp-boundary")
def exp_boundary(
    config: Optional[Path] = CONFIG_OPTION,
    seed: Optional[int] = SEED_OPTION,
    out: Optional[Path] = OUT_OPTION,
    verbose: bool = VERBOSE_OPTION,
):
    """Aerial Set A then Set B, checking earlier sets for forgetting."""
    _run_experiment(_prepare(config, seed, out, verbose), "boundary")


@app.command("exp-oneshot")
def exp_oneshot(
    label_map: Optional[Path] = typer.Option(None, "--map", help="Label map (YAML/JSON) for flagged classes"),
    config: Optional[Path] = CONFIG_OPTION,
    seed: Optional[int] = SEED_OPTION,
    out: Optional[Path] = OUT_OPTION,
    verbose: bool = VERBOSE_OPTION,
):
    """Self-generated classes for unlabeled Set C, then human labels for the flagged ones."""
    ctx = _prepare(config, seed, out, verbose)
    args: Dict[str, Any] = {}
    if label_map is not None:
        try:
            args["label_map"] = load_label_map(label_map)
        except (UmlError, OSError) as exc:
            _fail(exc, "Loading label map")
    _run_experiment(ctx, "oneshot", **args)


@app.command("exp-heights")
def exp_heights(
    config: Optional[Path] = CONFIG_OPTION,
    seed: Optional[int] = SEED_OPTION,
    out: Optional[Path] = OUT_OPTION,
    verbose: bool = VERBOSE_OPTION,
):
    """Models adapted at one or two heights, scored at every altitude."""
    _run_experiment(_prepare(config, seed, out, verbose), "heights")


@app.command("exp-mission")
def exp_mission(
    config: Optional[Path] = CONFIG_OPTION,
    seed: Optional[int] = SEED_OPTION,
    out: Optional[Path] = OUT_OPTION,
    verbose: bool = VERBOSE_OPTION,
):
    """Scripted drone mission with self-supervised learning and return validation."""
    _run_experiment(_prepare(config, seed, out, verbose), "mission")


@app.command("exp-all")
def exp_all(
    config: Optional[Path] = CONFIG_OPTION,
    seed: Optional[int] = SEED_OPTION,
    out: Optional[Path] = OUT_OPTION,
    verbose: bool = VERBOSE_OPTION,
):
    """Every experiment in dependency order (transfer, boundary, oneshot, heights, mission)."""
    ctx = _prepare(config, seed, out, verbose)
    calls = [ExperimentCall(name=name) for name in ("transfer", "boundary", "oneshot", "heights", "mission")]
    try:
        with console.status("[bold green]Running all experiments..."):
            summaries = ExperimentRouter(ctx).dispatch_all(calls)
    except (UmlError, OSError, KeyError) as exc:
        _fail(exc, "Experiments")
    write_json(ctx.out_dir / "experiments.json", summaries)
    console.print(f"\n[bold green]✓ {len(summaries)} experiments complete[/bold green]")


@app.command()
def label(
    model: Optional[Path] = typer.Option(None, "--model", help="Model with flagged classes"),
    label_map: Optional[Path] = typer.Option(None, "--map", help="Non-interactive label map (YAML/JSON)"),
    config: Optional[Path] = CONFIG_OPTION,
    out: Optional[Path] = OUT_OPTION,
    verbose: bool = VERBOSE_OPTION,
):
    """Assign human labels to self-generated classes that asked for one."""
    ctx = _prepare(config, None, out, verbose)
    model_path = model or ctx.model_path("oneshot")
    try:
        state = load_knowledge(model_path, ctx.scenario.feature_dim, "run exp-oneshot first")
        requests = flagged_requests(state)
        if not requests:
            console.print("none")
            return

        if label_map is not None:
            applied = apply_label_map(
                state.registry, load_label_map(label_map), state.criteria.label_request_min_support
            )
        else:
            applied = {}
            for request in requests:
                console.print(
                    f"Class [cyan]{request.class_index}[/cyan]: support {request.support_count}, "
                    f"exemplar {request.exemplar_digest}"
                )
                answer = typer.prompt("Label (blank to skip)", default="", show_default=False).strip()
                if answer:
                    state.registry.assign_human_label([request.class_index], answer)
                    applied.setdefault(answer, []).append(request.class_index)
        save(state, model_path)
    except (UmlError, OSError) as exc:
        _fail(exc, "Labeling")

    for name, classes in applied.items():
        console.print(f"[green]{name}[/green] ← classes {classes}")
    remaining = flagged_requests(state)
    console.print(f"{len(remaining)} class(es) still flagged; model saved to {model_path}")


@app.command()
def inspect(
    model: Path = typer.Option(..., "--model", help="Model file to describe"),
    config: Optional[Path] = CONFIG_OPTION,
    verbose: bool = VERBOSE_OPTION,
):
    """Describe a saved model: nodes per class, origins, supports and label status."""
    ctx = _prepare(config, None, None, verbose)
    try:
        state = load_knowledge(model, ctx.scenario.feature_dim)
    except (UmlError, OSError) as exc:
        _fail(exc, "Inspect")

    overview = Table.grid(padding=(0, 1))
    overview.add_column(style="cyan", justify="right", no_wrap=True)
    overview.add_column(style="white")
    overview.add_row("Nodes", str(state.network.node_count))
    overview.add_row("Classes", str(state.registry.class_count))
    overview.add_row("Frames processed", str(state.clock))
    overview.add_row("Digest", state.digest()[:16])
    console.print(Panel(overview, title=f"🔎 {model.name}", border_style="cyan"))

    table = Table(title="Classes")
    for column in ("Class", "Origin", "Label", "Nodes", "Support", "Active", "Flagged"):
        table.add_column(column)
    for row in node_summary(state):
        table.add_row(
            str(row["class"]), row["origin"], row["label"], str(row["nodes"]),
            str(row["support"]), "yes" if row["active"] else "no",
            "yes" if row["flagged"] else "",
        )
    console.print(table)


if __name__ == "__main__":
    app()
