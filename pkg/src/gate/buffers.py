import logging
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Deque, Dict, Hashable, List, Optional, Tuple

logger = logging.getLogger(__name__)

NON_DETECTION = 0
UNKNOWN_HYPOTHESIS = -1


@dataclass
class HypothesisBuffer:
    """The last ``K`` per-frame categories of one object (0 = not detected that frame)."""

    object_id: Hashable
    capacity: int
    slots: Deque[int] = field(default_factory=deque)
    last_update_frame: int = -1

    def __post_init__(self) -> None:
        self.slots = deque(self.slots, maxlen=self.capacity)

    def append(self, category: int) -> None:
        self.slots.append(max(int(category), NON_DETECTION))

    def modal_category(self) -> Tuple[int, int]:
        """Most frequent nonzero category and its count; ties go to the lower index."""
        counts = Counter(c for c in self.slots if c != NON_DETECTION)
        if not counts:
            return UNKNOWN_HYPOTHESIS, 0
        category, count = min(counts.items(), key=lambda item: (-item[1], item[0]))
        return category, count

    def frequency(self) -> float:
        """Modal count over the full capacity (missing warm-up slots count as zeros)."""
        _, count = self.modal_category()
        return count / self.capacity


class BufferBank:
    """Hypothesis buffers keyed by object id."""

    def __init__(self, buffer_len: int = 10) -> None:
        self.buffer_len = buffer_len
        self.buffers: Dict[Hashable, HypothesisBuffer] = {}

    def __contains__(self, object_id: object) -> bool:
        return object_id in self.buffers

    def __len__(self) -> int:
        return len(self.buffers)

    def get(self, object_id: Hashable) -> Optional[HypothesisBuffer]:
        return self.buffers.get(object_id)

    def push(self, object_id: Hashable, category: int, frame: int) -> HypothesisBuffer:
        buffer = self.buffers.get(object_id)
        if buffer is None:
            buffer = HypothesisBuffer(object_id, self.buffer_len)
            self.buffers[object_id] = buffer
        buffer.append(category)
        buffer.last_update_frame = frame
        return buffer

    def decay(self, frame: int) -> None:
        """Insert a non-detection into every buffer not updated at ``frame``."""
        for buffer in self.buffers.values():
            if buffer.last_update_frame != frame:
                buffer.append(NON_DETECTION)

    def persistence(self, object_id: Hashable, psi5: float) -> Tuple[int, float]:
        """Finalized hypothesis ``H`` (or -1) and the modal buffer frequency."""
        buffer = self.buffers.get(object_id)
        if buffer is None:
            return UNKNOWN_HYPOTHESIS, 0.0
        category, _ = buffer.modal_category()
        freq = buffer.frequency()
        if category != UNKNOWN_HYPOTHESIS and freq >= psi5:
            return category, freq
        return UNKNOWN_HYPOTHESIS, freq

    def drop_stale(self, frame: int, window: int) -> List[Hashable]:
        """Forget objects whose last update is ``window`` or more frames before ``frame``."""
        stale = [oid for oid, b in self.buffers.items() if frame - b.last_update_frame >= window]
        for object_id in stale:
            del self.buffers[object_id]
        if stale:
            logger.debug(f"Dropped {len(stale)} stale object buffers at frame {frame}")
        return stale
