"""Per-iteration task ledger.

Every loop iteration carries one tag: unscheduled, scheduled, or finished.
The ledger is what makes robust rescheduling possible: once nothing is left
unscheduled, idle workers can be handed duplicates of scheduled-but-unfinished
ranges, and whichever copy reports first wins.  Finished is terminal.
"""

from __future__ import annotations

from collections import deque

import numpy as np

UNSCHEDULED = 0
SCHEDULED = 1
FINISHED = 2


class LedgerError(RuntimeError):
    """Internal-consistency violation (bad range, premature select)."""


class TaskLedger:
    def __init__(self, n_total: int):
        if n_total < 1:
            raise ValueError("ledger needs at least one iteration")
        self.n_total = n_total
        self._tags = np.zeros(n_total, dtype=np.int8)
        self.n_unscheduled = n_total
        self.n_scheduled = 0
        self.n_finished = 0
        # original assignment order, the basis for duplicate selection
        self.scheduled_order: list = []
        self._pending: deque = deque()  # rotation cursor over scheduled_order

    def _check_range(self, start: int, size: int) -> None:
        if size < 1 or start < 0 or start + size > self.n_total:
            raise LedgerError("range [%d, %d) outside ledger" % (start, start + size))

    def mark_scheduled(self, start: int, size: int, pe: int) -> None:
        """First assignment of a fresh range; duplicates never come through here."""
        self._check_range(start, size)
        if size == 1:
            if self._tags[start] != UNSCHEDULED:
                raise LedgerError("iteration %d scheduled twice" % start)
            self._tags[start] = SCHEDULED
        else:
            seg = self._tags[start:start + size]
            if seg.any():
                raise LedgerError("range [%d, %d) overlaps scheduled work" % (start, start + size))
            seg[:] = SCHEDULED
        self.n_unscheduled -= size
        self.n_scheduled += size
        self._pending.append(len(self.scheduled_order))
        self.scheduled_order.append((start, size, pe))

    def report_completion(self, start: int, size: int, pe: int) -> bool:
        """Mark a range finished. Returns False for a losing duplicate report."""
        self._check_range(start, size)
        if size == 1:
            tag = self._tags[start]
            if tag == UNSCHEDULED:
                raise LedgerError("completion of unscheduled iteration %d" % start)
            if tag == FINISHED:
                return False
            self._tags[start] = FINISHED
            self.n_scheduled -= 1
            self.n_finished += 1
            return True
        seg = self._tags[start:start + size]
        if (seg == UNSCHEDULED).any():
            raise LedgerError("completion overlaps unscheduled iterations in [%d, %d)"
                              % (start, start + size))
        fresh = int(np.count_nonzero(seg == SCHEDULED))
        if fresh == 0:
            return False
        seg[:] = FINISHED
        self.n_scheduled -= fresh
        self.n_finished += fresh
        return True

    def is_complete(self) -> bool:
        return self.n_finished == self.n_total

    def rdlb_select(self):
        """Next scheduled-but-unfinished range to duplicate, or None when done.

        Rotates through unfinished ranges in original scheduling order so
        consecutive idle PEs get distinct ranges before any repeat; finished
        ranges drop out lazily.
        """
        if self.n_unscheduled:
            raise LedgerError("duplicate selection before all iterations were scheduled")
        while self._pending:
            idx = self._pending.popleft()
            start, size, _pe = self.scheduled_order[idx]
            if size == 1:
                done = self._tags[start] == FINISHED
            else:
                done = bool((self._tags[start:start + size] == FINISHED).all())
            if done:
                continue
            self._pending.append(idx)
            return (start, size)
        return None
