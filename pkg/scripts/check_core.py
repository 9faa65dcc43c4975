#!/usr/bin/env python3
"""Exercise the learning core without the simulator or any generated data."""
import sys
import tempfile
from pathlib import Path

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np

from src.artmap import ArtmapNetwork, ArtmapParams, complement_code
from src.gate import ClassRegistry, LearningMode, UncertaintyCriteria, UncertaintyGate
from src.models import Detection
from src.store import KnowledgeState, load, save


def check_coding():
    print("Checking complement coding...")
    coded = complement_code(np.array([0.2, 0.7]))
    print(f"  (0.2, 0.7) -> {tuple(round(v, 3) for v in coded)}")
    assert np.allclose(coded, [0.2, 0.7, 0.8, 0.3])
    print("  ✓ complement_code working")


def check_gate():
    print("\nChecking uncertainty gate...")
    registry = ClassRegistry()
    registry.register_supervised(1, "sedan")
    network = ArtmapNetwork(2, ArtmapParams())
    gate = UncertaintyGate(network, registry, UncertaintyCriteria())

    rng = np.random.default_rng(0)
    for _ in range(20):
        gate.process_frame([Detection(rng.uniform(0.1, 0.3, 2), 0.9, supervised_label=1)],
                           LearningMode.SUPERVISED)
    novel = gate.process_frame([Detection(np.array([0.95, 0.9]), 0.9)], LearningMode.UNSUPERVISED)[0]
    print(f"  Nodes: {network.node_count}, classes: {registry.class_count}")
    print(f"  Novel sample decision: {novel.kind.value} (class {novel.new_class})")
    print("  ✓ gate working")
    return KnowledgeState(network, registry, gate.criteria, clock=gate.clock)


def check_snapshot(state):
    print("\nChecking snapshot...")
    with tempfile.TemporaryDirectory() as tmp:
        first, second = Path(tmp) / "a.json", Path(tmp) / "b.json"
        digest = save(state, first)
        save(load(first), second)
        print(f"  Digest: {digest[:16]}...")
        assert first.read_bytes() == second.read_bytes()
    print("  ✓ save/load stable")


if __name__ == "__main__":
    print("Running core checks...\n")

    try:
        check_coding()
        state = check_gate()
        check_snapshot(state)

        print("\n✅ All core checks passed!")
    except Exception as e:
        print(f"\n❌ Check failed: {e}")
        import traceback
        traceback.print_exc()
        sys.exit(1)
