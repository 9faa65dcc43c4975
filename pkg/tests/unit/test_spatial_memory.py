import pytest

from src.attention import SpatialMemory
from src.utils.errors import AssociationConflictError, InputDomainError


@pytest.fixture
def memory():
    memory = SpatialMemory(association_radius=2.0, confidence_floor=0.95)
    memory.acquire("car-1", (0.0, 0.0), 1, confidence=1.0)
    memory.acquire("van-1", (10.0, 0.0), 2, confidence=0.99)
    return memory


class TestAcquire:
    def test_close_range_pass(self):
        memory = SpatialMemory()
        for i in range(4):
            memory.acquire(f"obj-{i}", (5.0 * i, 0.0), 1 + i % 2, confidence=1.0)
        assert len(memory) == 4
        assert all(t.acquired_label is not None for t in memory.objects.values())

    def test_low_confidence_keeps_position_only(self):
        memory = SpatialMemory(confidence_floor=0.95)
        tracked = memory.acquire("obj", (1.0, 1.0), 1, confidence=0.5)
        assert tracked.position == (1.0, 1.0)
        assert tracked.acquired_label is None

    def test_reacquire_updates_position_keeps_label(self, memory):
        memory.acquire("car-1", (0.5, 0.5), None, confidence=0.2)
        assert memory.objects["car-1"].position == (0.5, 0.5)
        assert memory.objects["car-1"].acquired_label == 1

    def test_conflicting_position(self, memory):
        with pytest.raises(AssociationConflictError):
            memory.acquire("car-2", (1.0, 0.0), 1, confidence=1.0)

    def test_confidence_domain(self, memory):
        with pytest.raises(InputDomainError):
            memory.acquire("car-3", (50.0, 0.0), 1, confidence=1.5)


class TestLookup:
    def test_within_radius(self, memory, make_detection):
        assert memory.self_supervision_label(make_detection([0.5], position=(0.5, 0.0))) == 1

    def test_out_of_range(self, memory, make_detection):
        assert memory.self_supervision_label(make_detection([0.5], position=(5.0, 0.0))) is None

    def test_nearest_wins(self, make_detection):
        memory = SpatialMemory(association_radius=2.0)
        memory.acquire("a", (1.0, 0.0), 1, confidence=1.0)
        memory.acquire("b", (-1.5, 0.0), 2, confidence=1.0)
        assert memory.self_supervision_label(make_detection([0.5], position=(0.0, 0.0))) == 1

    def test_deterministic(self, memory, make_detection):
        det = make_detection([0.5], position=(9.0, 0.5))
        assert memory.snapshot().self_supervision_label(det) == memory.self_supervision_label(det)


class TestPruneStale:
    def test_age_boundary(self, memory, make_detection):
        memory.observe(make_detection([0.5], position=(0.0, 0.0)), frame=20)
        # van-1 last seen at 0, car-1 at 20
        assert memory.prune_stale(9, max_age=10) == []
        assert memory.prune_stale(10, max_age=10) == ["van-1"]
        assert "car-1" in memory.objects

    def test_observe_unassociated(self, memory, make_detection):
        assert memory.observe(make_detection([0.5], position=(100.0, 0.0)), frame=3) is None
