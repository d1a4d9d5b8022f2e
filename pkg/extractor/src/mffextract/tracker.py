"""Greedy IoU box tracker assigning stable object ids across frames."""

from __future__ import annotations


def iou(a, b) -> float:
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    x1, y1 = max(ax, bx), max(ay, by)
    x2, y2 = min(ax + aw, bx + bw), min(ay + ah, by + bh)
    inter = max(0, x2 - x1) * max(0, y2 - y1)
    union = aw * ah + bw * bh - inter
    return inter / union if union > 0 else 0.0


class IouTracker:
    def __init__(self, min_iou: float = 0.1):
        self.min_iou = min_iou
        self._next_id = 0
        self._previous = []  # [(object_id, box)]

    def update(self, boxes) -> list:
        """Returns [(object_id, box)] for this frame's boxes."""
        pairs = sorted(
            ((iou(prev_box, box), oid, j)
             for oid, prev_box in self._previous
             for j, box in enumerate(boxes)),
            key=lambda t: (-t[0], t[1], t[2]))
        assigned = {}
        used_ids = set()
        for score, oid, j in pairs:
            if score < self.min_iou:
                break
            if oid in used_ids or j in assigned:
                continue
            assigned[j] = oid
            used_ids.add(oid)
        result = []
        for j, box in enumerate(boxes):
            if j not in assigned:
                assigned[j] = self._next_id
                self._next_id += 1
            result.append((assigned[j], box))
        self._previous = result
        return result
