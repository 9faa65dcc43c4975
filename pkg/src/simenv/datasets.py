"""Dataset generation: ground and aerial sample streams, splits, feature export."""

import hashlib
import logging
import math
import zlib
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.simenv.frames import SimFrame, read_stream, render_frame, write_stream
from src.simenv.scenario import ScenarioSpec
from src.simenv.world import SimObject, ViewCondition, World, build_instances, build_world
from src.utils.errors import MissingArtifactError
from src.utils.io_helpers import ensure_dir, write_json

logger = logging.getLogger(__name__)

GROUND_STREAM = "ground"
MANIFEST_NAME = "manifest.json"
FEATURES_CSV = "features.csv"


def stream_rng(seed: int, name: str) -> np.random.Generator:
    """Independent generator per named stream so adding a stream never shifts the others."""
    return np.random.default_rng(np.random.SeedSequence([seed, zlib.crc32(name.encode("utf-8"))]))


def aerial_stream_name(set_id: str, part: str) -> str:
    return f"aerial_{set_id}_{part}"


def heights_stream_name(part: str, altitude: float) -> str:
    return f"heights_{part}_{altitude:g}"


def sample_frames(
    world: World,
    objects: Sequence[SimObject],
    altitudes: Sequence[float],
    count: int,
    rng: np.random.Generator,
) -> List[SimFrame]:
    """Single-detection frames cycling over ``objects`` with random altitude and azimuth."""
    if not objects or count <= 0:
        return []
    frames = []
    for i in range(count):
        view = ViewCondition(
            altitude=float(altitudes[int(rng.integers(len(altitudes)))]),
            azimuth=round(float(rng.uniform(0.0, 360.0)), 3),
            noise_seed=int(rng.integers(0, 2**31 - 1)),
        )
        frames.append(render_frame(world, view, i, objects=[objects[i % len(objects)]]))
    return frames


def split_frames(
    frames: Sequence[SimFrame], train_fraction: float, seed: int
) -> Tuple[List[SimFrame], List[SimFrame]]:
    """Seeded train/test split with ``floor(fraction * N)`` training frames, original order kept."""
    n = len(frames)
    n_train = int(math.floor(train_fraction * n + 1e-9))
    order = np.random.default_rng(seed).permutation(n)
    train_idx = set(int(i) for i in order[:n_train])
    train = [f for i, f in enumerate(frames) if i in train_idx]
    test = [f for i, f in enumerate(frames) if i not in train_idx]
    return train, test


def renumber(frames: Iterable[SimFrame]) -> List[SimFrame]:
    out = []
    for i, frame in enumerate(frames):
        frame.frame_index = i
        out.append(frame)
    return out


def build_streams(spec: ScenarioSpec, seed: int) -> Dict[str, List[SimFrame]]:
    """Every stream the experiments consume, keyed by stream name."""
    world = build_world(spec, seed)
    streams: Dict[str, List[SimFrame]] = {}

    ground: List[SimFrame] = []
    for set_id, set_spec in spec.sets.items():
        ground.extend(
            sample_frames(
                world, world.objects_of(set_id), spec.ground_altitudes,
                set_spec.counts.get("ground", 0), stream_rng(seed, f"ground/{set_id}"),
            )
        )
    streams[GROUND_STREAM] = renumber(ground)

    for set_id, set_spec in spec.sets.items():
        count = set_spec.counts.get("aerial", 0)
        if count <= 0:
            continue
        frames = sample_frames(
            world, world.objects_of(set_id), spec.aerial_altitudes, count,
            stream_rng(seed, f"aerial/{set_id}"),
        )
        split_seed = int(stream_rng(seed, f"split/{set_id}").integers(0, 2**31 - 1))
        train, test = split_frames(frames, set_spec.aerial_train_fraction, split_seed)
        streams[aerial_stream_name(set_id, "train")] = renumber(train)
        streams[aerial_stream_name(set_id, "test")] = renumber(test)

    heights = spec.heights
    if heights is not None:
        set_spec = spec.sets[heights.set_id]
        # fresh instances, never seen by the ground stream
        objects = build_instances(
            set_spec, heights.instances, np.random.default_rng(seed + heights.seed_offset), prefix="H"
        )
        for altitude in heights.train_altitudes:
            name = heights_stream_name("train", altitude)
            streams[name] = sample_frames(
                world, objects, [altitude], heights.train_per_altitude, stream_rng(seed, name)
            )
        for altitude in heights.eval_altitudes:
            name = heights_stream_name("test", altitude)
            streams[name] = sample_frames(
                world, objects, [altitude], heights.test_per_altitude, stream_rng(seed, name)
            )
    return streams


def generate_datasets(spec: ScenarioSpec, seed: int, data_dir: Union[str, Path]) -> Dict[str, Any]:
    """Write every stream as JSONL plus ``manifest.json`` and ``features.csv``."""
    data_dir = ensure_dir(data_dir)
    streams = build_streams(spec, seed)
    manifest: Dict[str, Any] = {
        "seed": seed,
        "scenario_digest": spec.digest,
        "feature_dim": spec.feature_dim,
        "streams": {},
        "splits": {},
    }
    for name, frames in streams.items():
        path = data_dir / f"{name}.jsonl"
        write_stream(path, frames)
        manifest["streams"][name] = {
            "file": path.name,
            "frames": len(frames),
            "detections": sum(len(f.detections) for f in frames),
            "sha256": _file_digest(path),
        }
        logger.info(f"Wrote {len(frames)} frames to {path}")

    for set_id, set_spec in spec.sets.items():
        train = manifest["streams"].get(aerial_stream_name(set_id, "train"))
        test = manifest["streams"].get(aerial_stream_name(set_id, "test"))
        if train is not None and test is not None:
            manifest["splits"][set_id] = {
                "fraction": set_spec.aerial_train_fraction,
                "train": train["frames"],
                "test": test["frames"],
            }

    world = build_world(spec, seed)
    views = [
        ViewCondition(altitude, azimuth, noise_seed=seed)
        for altitude in list(spec.ground_altitudes) + list(spec.aerial_altitudes)
        for azimuth in (0.0, 90.0)
    ]
    export_features(world, views, data_dir / FEATURES_CSV)
    manifest["separability"] = separability_report(streams, spec)
    write_json(data_dir / MANIFEST_NAME, manifest)
    return manifest


def load_stream(data_dir: Union[str, Path], name: str) -> List[SimFrame]:
    path = Path(data_dir) / f"{name}.jsonl"
    if not path.exists():
        raise MissingArtifactError(str(path), "run gen-data first")
    return read_stream(path)


def export_features(
    world: World, views: Sequence[ViewCondition], path: Optional[Union[str, Path]] = None
) -> pd.DataFrame:
    """One row per (object, view) with the transformed feature columns."""
    rows = []
    dim = world.scenario.feature_dim
    for frame_index, view in enumerate(views):
        frame = render_frame(world, view, frame_index)
        for det in frame.detections:
            row: Dict[str, Any] = {
                "set_id": det.set_id,
                "object_id": det.object_id,
                "label": det.truth,
                "altitude": view.altitude,
                "azimuth": view.azimuth,
            }
            row.update({f"f{i:02d}": float(v) for i, v in enumerate(det.features)})
            rows.append(row)
    columns = ["set_id", "object_id", "label", "altitude", "azimuth"] + [f"f{i:02d}" for i in range(dim)]
    frame_df = pd.DataFrame(rows, columns=columns)
    if path is not None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        frame_df.to_csv(path, index=False, float_format="%.6f")
    return frame_df


def nearest_centroid_error(first: np.ndarray, second: np.ndarray) -> float:
    """Fraction of the pooled samples that sit closer to the other group's centroid."""
    if len(first) == 0 or len(second) == 0:
        return 0.0
    c1, c2 = first.mean(axis=0), second.mean(axis=0)
    wrong_first = np.linalg.norm(first - c2, axis=1) < np.linalg.norm(first - c1, axis=1)
    wrong_second = np.linalg.norm(second - c1, axis=1) < np.linalg.norm(second - c2, axis=1)
    return float((wrong_first.sum() + wrong_second.sum()) / (len(first) + len(second)))


def separability_report(streams: Dict[str, List[SimFrame]], spec: ScenarioSpec) -> Dict[str, float]:
    """Centroid statistics of the aerial samples (A vs B overlap, C vs A∪B separation)."""
    aerial: Dict[str, np.ndarray] = {}
    for set_id in spec.sets:
        frames = streams.get(aerial_stream_name(set_id, "train"), []) + streams.get(
            aerial_stream_name(set_id, "test"), []
        )
        if frames:
            aerial[set_id] = np.array([d.features for f in frames for d in f.detections])
    report: Dict[str, float] = {}
    if "A" in aerial and "B" in aerial:
        report["nearest_centroid_error_A_B"] = nearest_centroid_error(aerial["A"], aerial["B"])
        report["centroid_distance_A_B"] = _centroid_distance(aerial["A"], aerial["B"])
    if "C" in aerial and "A" in aerial and "B" in aerial:
        ab = np.vstack((aerial["A"], aerial["B"]))
        report["nearest_centroid_error_C_AB"] = nearest_centroid_error(aerial["C"], ab)
        report["centroid_distance_C_A"] = _centroid_distance(aerial["C"], aerial["A"])
    return report


def _centroid_distance(first: np.ndarray, second: np.ndarray) -> float:
    return float(np.linalg.norm(first.mean(axis=0) - second.mean(axis=0)))


def _file_digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()
