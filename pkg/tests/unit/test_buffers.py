from collections import Counter

import numpy as np
import pytest

from src.gate import BufferBank, HypothesisBuffer


def _fill(bank, object_id, categories):
    for frame, category in enumerate(categories):
        if category:
            bank.push(object_id, category, frame)
        bank.decay(frame)


class TestHypothesisBuffer:
    def test_capacity_bounded(self):
        buffer = HypothesisBuffer("obj", 3)
        for category in (1, 2, 3, 4):
            buffer.append(category)
        assert list(buffer.slots) == [2, 3, 4]

    def test_modal_tie_goes_to_lower_index(self):
        buffer = HypothesisBuffer("obj", 4)
        for category in (5, 2, 5, 2):
            buffer.append(category)
        assert buffer.modal_category() == (2, 2)

    def test_negative_categories_stored_as_non_detection(self):
        buffer = HypothesisBuffer("obj", 2)
        buffer.append(-1)
        assert list(buffer.slots) == [0]


class TestBufferBank:
    def test_seven_of_ten(self):
        bank = BufferBank(10)
        _fill(bank, "obj", [3, 3, 0, 3, 3, 0, 3, 3, 0, 3])
        assert Counter(bank.get("obj").slots) == {3: 7, 0: 3}
        assert bank.persistence("obj", 0.6) == (3, pytest.approx(0.7))

    def test_half_is_not_persistent(self):
        bank = BufferBank(10)
        _fill(bank, "obj", [3, 0] * 5)
        hypothesis, freq = bank.persistence("obj", 0.6)
        assert hypothesis == -1
        assert freq == pytest.approx(0.5)

    def test_all_zero_buffer(self):
        bank = BufferBank(10)
        _fill(bank, "obj", [4] + [0] * 10)
        assert bank.persistence("obj", 0.6) == (-1, 0.0)

    def test_unknown_object(self):
        assert BufferBank(10).persistence("ghost", 0.6) == (-1, 0.0)

    def test_drop_stale(self):
        bank = BufferBank(10)
        bank.push("old", 1, 0)
        bank.push("new", 1, 40)
        assert bank.drop_stale(50, 49) == ["old"]
        assert "new" in bank

    def test_unseen_for_exactly_window_is_dropped(self):
        bank = BufferBank(10)
        bank.push("car", 1, 0)
        assert bank.drop_stale(49, 50) == []
        assert bank.drop_stale(50, 50) == ["car"]
        assert "car" not in bank

    def test_persistence_matches_brute_force(self):
        rng = np.random.default_rng(5)
        for _ in range(300):
            length = int(rng.integers(1, 30))
            sequence = [int(c) for c in rng.integers(0, 4, size=length)]
            bank = BufferBank(10)
            _fill(bank, "obj", sequence)

            window = sequence[-10:]
            counts = Counter(c for c in window if c)
            expected = -1
            if counts:
                top = max(counts.values())
                modal = min(c for c, n in counts.items() if n == top)
                if top / 10 >= 0.6:
                    expected = modal
            assert bank.persistence("obj", 0.6)[0] == expected
