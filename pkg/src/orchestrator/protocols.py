"""Experiment protocols: domain transfer, class boundaries, one-shot labeling,
multi-height generalization and the scripted drone mission.

Every protocol reads its prerequisites from the output directory, writes
``<out>/<experiment>/metrics.csv`` plus ``summary.json`` and returns the
:class:`RunState` it filled.
"""

import copy
import logging
from collections import Counter
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

from pydantic import ValidationError

from src.attention import SpatialMemory
from src.gate import UNKNOWN_DISPLAY, DecisionKind, LabelRequest, LearningMode
from src.models import ExperimentConfig, MetricsRecord, PhaseSpec
from src.orchestrator.engine import (
    Event,
    EventHandler,
    RunContext,
    StreamResult,
    accuracies,
    apply_label_map,
    evaluate_sets,
    evaluate_stream,
    finalized_accuracy,
    make_gate,
    run_curve,
    run_frames,
    strip_labels,
    train_stream,
    write_metrics,
)
from src.orchestrator.state import RunState
from src.simenv import (
    GROUND_STREAM,
    SimFrame,
    ViewCondition,
    aerial_stream_name,
    build_world,
    heights_stream_name,
    render_frame,
)
from src.simenv.datasets import stream_rng
from src.store import KnowledgeState, save
from src.utils import ConfigError, Timer

logger = logging.getLogger(__name__)

PHASE_A = "After Aerial A Training"
PHASE_B = "After Aerial B Training"
PHASE_C_LEARNING = "After Aerial C Self-Supervised Learning"
PHASE_C_LABELING = "After Aerial C Few-Shot Labeling"

MODEL_HINTS = {
    "ground": "run `train` on the ground stream first",
    "boundary": "run `exp-boundary` first",
}

COLUMN_NAMES = {
    "ground": "Ground",
    "aerial_A": "Aerial A",
    "aerial_B": "Aerial B",
    "aerial_C": "Aerial C",
}


def column_title(column: str) -> str:
    return COLUMN_NAMES.get(column, column.replace("_", " ").title())


def _experiment_config(ctx: RunContext, **fields: Any) -> ExperimentConfig:
    try:
        return ExperimentConfig(
            scenario=ctx.config["simulation"]["scenario"],
            seed=ctx.seed,
            output_dir=str(ctx.out_dir),
            **fields,
        )
    except ValidationError as exc:
        raise ConfigError(f"Invalid {fields.get('experiment')} settings: {exc}") from exc


def transfer_config(ctx: RunContext) -> ExperimentConfig:
    settings = ctx.experiment_settings("transfer")
    return _experiment_config(
        ctx,
        experiment="transfer",
        checkpoints=settings.get("checkpoints", [100]),
        phases=[
            PhaseSpec(
                name=PHASE_A,
                train_streams=[aerial_stream_name("A", "train"), aerial_stream_name("O", "train")],
            )
        ],
        eval_streams={"ground": GROUND_STREAM, "aerial_A": aerial_stream_name("A", "test")},
        model_in="ground",
        model_out="transfer",
    )


def boundary_config(ctx: RunContext) -> ExperimentConfig:
    settings = ctx.experiment_settings("boundary")
    return _experiment_config(
        ctx,
        experiment="boundary",
        checkpoints=settings.get("checkpoints", [100]),
        phases=[
            PhaseSpec(
                name=PHASE_A,
                train_streams=[aerial_stream_name("A", "train"), aerial_stream_name("O", "train")],
            ),
            PhaseSpec(name=PHASE_B, train_streams=[aerial_stream_name("B", "train")]),
        ],
        eval_streams={
            "ground": GROUND_STREAM,
            "aerial_A": aerial_stream_name("A", "test"),
            "aerial_B": aerial_stream_name("B", "test"),
        },
        model_in="ground",
        model_out="boundary",
    )


def curve_config(ctx: RunContext, train_stream: str, test_streams: Sequence[str]) -> ExperimentConfig:
    """Single-phase learning curve of ``train_stream`` scored on every test stream."""
    settings = ctx.experiment_settings("curve")
    return _experiment_config(
        ctx,
        experiment="curve",
        checkpoints=settings.get("checkpoints", [100]),
        phases=[PhaseSpec(name=f"After {train_stream}", train_streams=[train_stream])],
        eval_streams={name: name for name in test_streams},
        model_in="ground",
    )


def _test_sets(ctx: RunContext, columns: Dict[str, str]) -> Dict[str, List[SimFrame]]:
    return {column: ctx.stream(stream) for column, stream in columns.items()}


def _finish(ctx: RunContext, run: RunState, on_event: EventHandler) -> RunState:
    indent = int(ctx.config.get("output", {}).get("json_indent", 2))
    paths = write_metrics(run.records, ctx.experiment_dir(run.experiment), run.to_json(), indent)
    for key, path in paths.items():
        run.add_artifact(key, path)
    on_event(Event("experiment_complete", {"experiment": run.experiment, **run.artifacts}))
    return run


def run_phased(
    ctx: RunContext, exp: ExperimentConfig, on_event: EventHandler = lambda e: None
) -> RunState:
    """Sequential training phases with incremental re-testing after each checkpoint."""
    timer = Timer()
    run = RunState(exp.experiment)

    # Step 1: load the starting model and the fixed test sets
    with timer.time("load"):
        model_in = exp.model_in or "ground"
        state = ctx.load_model(model_in, MODEL_HINTS.get(model_in, f"produce {model_in}.json first"))
        test_sets = _test_sets(ctx, exp.eval_streams)
        base_criteria = state.criteria.with_overrides(**exp.criteria_overrides)

    # Step 2: one incremental curve per phase
    for i, phase in enumerate(exp.phases):
        with timer.time(f"phase_{i + 1}"):
            train: List[SimFrame] = []
            for name in phase.train_streams:
                train.extend(ctx.stream(name))
            if phase.strip_labels:
                train = strip_labels(train)
            records = run_curve(
                state,
                train,
                test_sets,
                exp.checkpoints,
                experiment=exp.experiment,
                phase=phase.name,
                seed=exp.seed,
                mode=LearningMode(phase.mode),
                criteria=base_criteria.with_overrides(**phase.criteria_overrides),
                include_initial=i == 0,
                on_event=on_event,
            )
            run.add_records(records)

    # Step 3: persist the adapted model
    with timer.time("save"):
        if exp.model_out:
            path = ctx.model_path(exp.model_out)
            run.add_result("model_digest", save(state, path))
            run.add_artifact("model", path)

    initial = run.records[0]
    run.add_result(
        "max_abs_drift_pp",
        {
            column: round(max(abs(r.accuracies[column] - initial.accuracies[column]) for r in run.records), 4)
            for column in initial.accuracies
        },
    )
    run.add_result("nodes", state.network.node_count)
    run.timings = timer.get_summary()
    return _finish(ctx, run, on_event)


def run_transfer(ctx: RunContext, on_event: EventHandler = lambda e: None) -> RunState:
    """Ground-trained knowledge adapted to the aerial view of Set A."""
    return run_phased(ctx, transfer_config(ctx), on_event)


def run_boundary(ctx: RunContext, on_event: EventHandler = lambda e: None) -> RunState:
    """Aerial Set A, then Set B, watching every earlier test set for forgetting."""
    return run_phased(ctx, boundary_config(ctx), on_event)


def flagged_requests(state: KnowledgeState) -> List[LabelRequest]:
    """Label requests for every self-generated class that earned enough support."""
    requests = []
    for index in state.registry.flag_label_requests(state.criteria.label_request_min_support):
        record = state.registry.get(index)
        requests.append(LabelRequest.for_class(state.network, record, record.created_frame))
    return requests


def run_oneshot(
    ctx: RunContext,
    label_map: Optional[Dict[str, Any]] = None,
    on_event: EventHandler = lambda e: None,
) -> RunState:
    """Unlabeled Set C under a relaxed similarity criterion, then human labeling of flagged classes."""
    settings = ctx.experiment_settings("oneshot")
    timer = Timer()
    run = RunState("oneshot")

    # Step 1: baseline on every set; Set C has never been seen so "unknown" is the right answer
    with timer.time("initial"):
        state = ctx.load_model("boundary", MODEL_HINTS["boundary"])
        test_sets = _test_sets(
            ctx,
            {
                "ground": GROUND_STREAM,
                "aerial_A": aerial_stream_name("A", "test"),
                "aerial_B": aerial_stream_name("B", "test"),
                "aerial_C": aerial_stream_name("C", "test"),
            },
        )
        initial = evaluate_sets(state, test_sets, expected={"aerial_C": UNKNOWN_DISPLAY})
        run.add_records([MetricsRecord("oneshot", "Initial", 0.0, accuracies(initial))])
        on_event(Event("checkpoint", run.records[-1].to_row()))

    # Step 2: self-generated classes from the stripped training samples
    with timer.time("learn"):
        criteria = state.criteria.with_overrides(**settings.get("criteria_overrides", {}))
        mode = LearningMode(settings.get("mode", LearningMode.UNSUPERVISED.value))
        learned = train_stream(
            state,
            ctx.stream(aerial_stream_name("C", "train")),
            mode,
            name="oneshot/aerial_C_train",
            seed=ctx.seed,
            criteria=criteria,
            remove_labels=True,
        )
        requests = flagged_requests(state)
        for request in requests:
            run.add_event("label_request", request)
            on_event(Event("label_request", {"class_index": request.class_index,
                                             "support_count": request.support_count}))
        after_learning = evaluate_sets(state, test_sets)
        run.add_records(
            [
                MetricsRecord(
                    "oneshot",
                    PHASE_C_LEARNING,
                    100.0,
                    accuracies(after_learning),
                    new_classes=learned.new_classes,
                    resets=learned.resets,
                    match_tracked=learned.match_tracked,
                    label_requests=len(requests),
                    samples_seen=learned.samples,
                )
            ]
        )
        on_event(Event("checkpoint", run.records[-1].to_row()))
        path = ctx.model_path("oneshot")
        save(state, path)
        run.add_artifact("model", path)

    # Step 3: human labels on a copy, so the saved model keeps its flags for `label`
    with timer.time("label"):
        labeled = KnowledgeState(
            state.network.copy(), copy.deepcopy(state.registry), state.criteria, state.clock
        )
        label_map = label_map or {
            "labels": [{"label": settings.get("flag_label", "fire_truck"), "classes": "flagged"}]
        }
        applied = apply_label_map(labeled.registry, label_map, state.criteria.label_request_min_support)
        final = evaluate_sets(labeled, test_sets)
        run.add_records(
            [
                MetricsRecord(
                    "oneshot",
                    PHASE_C_LABELING,
                    100.0,
                    accuracies(final),
                    new_classes=learned.new_classes,
                    label_requests=len(requests),
                    samples_seen=learned.samples,
                )
            ]
        )
        on_event(Event("checkpoint", run.records[-1].to_row()))
        labeled_path = ctx.model_path("oneshot_labeled")
        save(labeled, labeled_path)
        run.add_artifact("labeled_model", labeled_path)

    first = learned.decisions[0] if learned.decisions else None
    run.add_result("first_decision", first.kind.value if first else None)
    run.add_result("new_classes", learned.new_classes)
    run.add_result("supervised_learns", learned.supervised_learns)
    run.add_result("flagged_classes", [r.class_index for r in requests])
    run.add_result("applied_labels", applied)
    run.timings = timer.get_summary()
    return _finish(ctx, run, on_event)


def run_heights(ctx: RunContext, on_event: EventHandler = lambda e: None) -> RunState:
    """Per-altitude accuracy of models adapted at one height, two heights, or none."""
    heights = ctx.scenario.heights
    if heights is None:
        raise ConfigError("The scenario defines no heights block")
    settings = ctx.experiment_settings("heights")
    arms: Dict[str, List[float]] = settings.get(
        "arms", {"ground_only": [], "two_height": list(heights.train_altitudes)}
    )
    timer = Timer()
    run = RunState("heights")
    test_sets = {
        f"alt_{altitude:g}": ctx.stream(heights_stream_name("test", altitude))
        for altitude in heights.eval_altitudes
    }

    for arm, altitudes in arms.items():
        with timer.time(arm):
            state = ctx.load_model("ground", MODEL_HINTS["ground"])
            total = StreamResult(arm)
            for altitude in altitudes:
                total.absorb(
                    train_stream(
                        state,
                        ctx.stream(heights_stream_name("train", altitude)),
                        LearningMode.SUPERVISED,
                        name=f"heights/{arm}/{altitude:g}",
                        seed=ctx.seed,
                    )
                )
            results = evaluate_sets(state, test_sets)
            run.add_records(
                [
                    MetricsRecord(
                        "heights",
                        arm,
                        100.0 if altitudes else 0.0,
                        accuracies(results),
                        new_classes=total.new_classes,
                        resets=total.resets,
                        match_tracked=total.match_tracked,
                        samples_seen=total.samples,
                    )
                ]
            )
            on_event(Event("checkpoint", run.records[-1].to_row()))

    run.add_result("multi_height_margin_pp", _multi_height_margin(run.records, arms))
    run.timings = timer.get_summary()
    return _finish(ctx, run, on_event)


def _multi_height_margin(
    records: Sequence[MetricsRecord], arms: Dict[str, List[float]]
) -> Dict[str, float]:
    """Accuracy of the multi-height arm minus the best single-height arm, per altitude."""
    by_arm = {r.phase: r for r in records}
    singles = [by_arm[a] for a, alts in arms.items() if len(alts) == 1]
    multi = [a for a, alts in arms.items() if len(alts) > 1]
    if not singles or not multi:
        return {}
    best_multi = by_arm[max(multi, key=lambda a: len(arms[a]))]
    return {
        column: round(best_multi.accuracies[column] - max(s.accuracies[column] for s in singles), 4)
        for column in best_multi.accuracies
    }


class MissionRunner:
    """Scripted flight over the intersections with self-supervised learning on the way.

    The hypothesis buffers, relevance pruning and spatial memory are all live;
    the agent only ever sees rendered frames of the intersection it flies over.
    """

    def __init__(
        self,
        ctx: RunContext,
        state: KnowledgeState,
        on_event: EventHandler,
        ground: Optional[Sequence[SimFrame]] = None,
    ):
        settings = ctx.experiment_settings("mission")
        attention_cfg = ctx.config.get("attention", {})
        self.ctx = ctx
        self.settings = settings
        self.state = state
        self.on_event = on_event
        self.world = build_world(ctx.scenario, ctx.seed)
        self.attention = SpatialMemory(
            association_radius=float(attention_cfg.get("association_radius", 2.0)),
            confidence_floor=float(attention_cfg.get("confidence_floor", 0.95)),
        )
        self.max_age = int(attention_cfg.get("max_age", 200))
        self.gate = make_gate(state, attention=self.attention, buffers_enabled=True)
        self.rng = stream_rng(ctx.seed, "mission")
        self.jitter = float(settings.get("position_jitter", 0.0))
        self.azimuths = [float(a) for a in settings.get("azimuths", [0.0])]
        self.run = RunState("mission")
        self.ground = ground or []
        self.ground_retention: Dict[str, float] = {}
        self.ground_baseline = (
            evaluate_stream(state, self.ground, GROUND_STREAM).accuracy if self.ground else None
        )

    def frames(
        self, intersection: int, altitude: float, count: int, azimuths: Optional[Sequence[float]] = None
    ) -> Iterator[SimFrame]:
        """Frames rendered on demand so each carries the gate's current frame index."""
        azimuths = azimuths or self.azimuths
        for k in range(count):
            view = ViewCondition(
                altitude=float(altitude),
                azimuth=azimuths[k % len(azimuths)],
                noise_seed=int(self.rng.integers(0, 2**31 - 1)),
            )
            yield render_frame(
                self.world, view, self.gate.clock, intersection=intersection,
                position_jitter=self.jitter,
            )

    def fly(
        self,
        intersection: int,
        altitude: float,
        count: int,
        mode: LearningMode,
        azimuths: Optional[Sequence[float]] = None,
        expected: Optional[str] = None,
    ) -> StreamResult:
        result = StreamResult(f"intersection_{intersection}@{altitude:g}m")
        for frame in self.frames(intersection, altitude, count, azimuths):
            for det in frame.detections:
                self.attention.observe(det, self.gate.clock)
            result.absorb(
                run_frames(self.gate, [frame], mode, result.name, expected, score_category=True)
            )
            self.attention.prune_stale(self.gate.clock, self.max_age)
        return result

    def truth(self, intersection: int, expected: Optional[str] = None) -> Dict[str, str]:
        return {
            obj.object_id: expected if expected is not None else obj.label
            for obj in self.world.at_intersection(intersection)
        }

    def observe_pass(
        self,
        phase: str,
        intersection: int,
        altitude: float,
        count: int,
        fraction: float,
        expected: Optional[str] = None,
    ) -> Tuple[MetricsRecord, StreamResult]:
        """Frozen pass with fresh buffers; scores detections and finalized objects."""
        self.gate.reset_buffers()
        result = self.fly(intersection, altitude, count, LearningMode.FROZEN, expected=expected)
        record = MetricsRecord(
            "mission",
            phase,
            fraction,
            {
                "detection": result.accuracy,
                "object": finalized_accuracy(self.gate, self.truth(intersection, expected)),
            },
            samples_seen=result.samples,
        )
        self.run.add_records([record])
        self.on_event(Event("checkpoint", record.to_row()))
        return record, result

    def acquire(self, intersection: int) -> Dict[str, Optional[int]]:
        """Close-range look; each object's segmentation class id becomes its spatial-memory label.

        Confidence is the share of close-range frames in which the object
        passed the objectness criterion.
        """
        settings = self.settings
        count = int(settings.get("acquire_frames", 10))
        _, result = self.observe_pass(
            f"Intersection {intersection} Acquisition",
            intersection,
            float(settings.get("acquire_altitude", 2)),
            count,
            0.0,
        )
        seen = Counter(
            d.object_id for d in result.decisions if d.kind is not DecisionKind.REJECTED
        )
        acquired: Dict[str, Optional[int]] = {}
        for obj in self.world.at_intersection(intersection):
            confidence = min(seen[obj.object_id] / count, 1.0) if count else 0.0
            tracked = self.attention.acquire(
                obj.object_id, obj.position, obj.supervised_index, confidence, self.gate.clock
            )
            acquired[obj.object_id] = tracked.acquired_label
        self.run.add_event("acquired", {"intersection": intersection, "labels": acquired})
        return acquired

    def climb(self, intersection: int) -> StreamResult:
        """Self-supervised learning at every climb altitude while sweeping the azimuths.

        The climb runs under ``climb_criteria_overrides`` so aerial views that
        miss the ground templates commit templates of their own.
        """
        settings = self.settings
        total = StreamResult(f"climb_{intersection}")
        self.gate.set_criteria(
            self.state.criteria.with_overrides(**settings.get("climb_criteria_overrides", {}))
        )
        self.gate.reset_buffers()
        for altitude in settings.get("climb_altitudes", [10, 15, 20, 25, 30]):
            step = self.fly(
                intersection,
                float(altitude),
                int(settings.get("frames_per_altitude", 25)),
                LearningMode.SELF_SUPERVISED,
            )
            logger.info(
                f"Intersection {intersection} at {altitude}m: {step.learned} learning events, "
                f"{step.accuracy:.1f}% correct"
            )
            total.absorb(step)
        self.gate.set_criteria(self.state.criteria)
        self.run.add_event("climb", {"intersection": intersection, **_counts(total)})
        self.check_ground_retention(intersection)
        return total

    def check_ground_retention(self, intersection: int) -> Optional[float]:
        """Frozen score of the ground stream; a drop means the climb overwrote ground templates."""
        if not self.ground:
            return None
        accuracy = evaluate_stream(self.state, self.ground, f"ground_after_{intersection}").accuracy
        self.ground_retention[str(intersection)] = accuracy
        if self.ground_baseline is not None and accuracy < self.ground_baseline - 1.0:
            logger.warning(
                f"Ground accuracy fell from {self.ground_baseline:.1f}% to {accuracy:.1f}% "
                f"after the climb at intersection {intersection}"
            )
        return accuracy

    def survey(self, intersection: int) -> None:
        cruise = float(self.settings.get("cruise_altitude", 30))
        frames = int(self.settings.get("assessment_frames", 10))
        self.observe_pass(f"Intersection {intersection} Initial Assessment", intersection, cruise, frames, 0.0)
        self.acquire(intersection)
        self.climb(intersection)
        self.observe_pass(f"Intersection {intersection} After Learning", intersection, cruise, frames, 100.0)

    def validate(self) -> MetricsRecord:
        intersection = int(self.settings.get("validation_intersection", 1))
        record, _ = self.observe_pass(
            "Return Validation",
            intersection,
            float(self.settings.get("validation_altitude", 20)),
            int(self.settings.get("validation_frames", 20)),
            100.0,
        )
        return record

    def novelty(self) -> None:
        """Unknown objects become self-generated classes, then receive a human label."""
        novelty = self.settings.get("novelty", {})
        intersection = int(novelty.get("intersection", 3))
        altitude = float(novelty.get("altitude", 20))
        frames = int(self.settings.get("assessment_frames", 10))

        self.observe_pass(
            f"Intersection {intersection} Initial Assessment",
            intersection, altitude, frames, 0.0, expected=UNKNOWN_DISPLAY,
        )

        self.gate.set_criteria(self.state.criteria.with_overrides(**novelty.get("criteria_overrides", {})))
        self.gate.reset_buffers()
        learned = self.fly(intersection, altitude, int(novelty.get("frames", 30)), LearningMode.SELF_SUPERVISED)
        for request in self.gate.drain_label_requests():
            self.run.add_event("label_request", request)
            self.on_event(Event("label_request", {"class_index": request.class_index,
                                                  "support_count": request.support_count}))
        self.gate.set_criteria(self.state.criteria)

        flagged = self.state.registry.flag_label_requests(self.state.criteria.label_request_min_support)
        human_label = novelty.get("human_label", "fire_truck")
        if flagged:
            self.state.registry.assign_human_label(flagged, human_label)
        self.run.add_event(
            "human_label",
            {"label": human_label, "classes": flagged, "new_classes": learned.new_classes},
        )
        self.run.add_result("novelty_new_classes", learned.new_classes)
        self.observe_pass(f"Intersection {intersection} After Labeling", intersection, altitude, frames, 100.0)

    def execute(self) -> RunState:
        timer = Timer()
        for intersection in self.settings.get("survey_intersections", [1, 2]):
            with timer.time(f"intersection_{intersection}"):
                self.survey(int(intersection))
        with timer.time("validation"):
            validation = self.validate()
        if self.settings.get("novelty", {}).get("enabled", False):
            with timer.time("novelty"):
                self.novelty()

        self.state.clock = self.gate.clock
        path = self.ctx.model_path("mission")
        self.run.add_result("model_digest", save(self.state, path))
        self.run.add_artifact("model", path)
        self.run.add_result("validation_detection_accuracy", validation.accuracies["detection"])
        self.run.add_result("validation_object_accuracy", validation.accuracies["object"])
        self.run.add_result("nodes", self.state.network.node_count)
        self.run.add_result("ground_baseline_accuracy", self.ground_baseline)
        self.run.add_result("ground_retention", self.ground_retention)
        self.run.timings = timer.get_summary()
        return self.run


def _counts(result: StreamResult) -> Dict[str, Any]:
    data = result.to_dict()
    data.pop("name")
    return data


def run_mission(ctx: RunContext, on_event: EventHandler = lambda e: None) -> RunState:
    """Assessment, acquisition, self-supervised climb, return validation, novelty labeling."""
    state = ctx.load_model("ground", MODEL_HINTS["ground"])
    run = MissionRunner(ctx, state, on_event, ground=ctx.stream(GROUND_STREAM)).execute()
    return _finish(ctx, run, on_event)
