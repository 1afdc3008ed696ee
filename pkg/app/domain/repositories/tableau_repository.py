"""
In-process store for the shared tableau of a decision run.
"""

import threading
from typing import Callable

from app.core.logging import get_logger
from app.domain.models.tableau import Tableau

logger = get_logger(__name__)


class TableauStore:
    """
    Shared tableau with snapshot reads and serialized commits.

    Readers get immutable snapshots; every commit merges a contribution into
    the current tableau through merge, under one lock.
    """

    def __init__(self, initial: Tableau, merge: Callable[[Tableau, Tableau], Tableau]):
        self._tableau = initial
        self._merge = merge
        self._lock = threading.Lock()
        self._commits = 0

    def snapshot(self) -> Tableau:
        with self._lock:
            return self._tableau

    def commit(self, contribution: Tableau) -> Tableau:
        with self._lock:
            self._tableau = self._merge(self._tableau, contribution)
            self._commits += 1
            logger.debug("Tableau committed", commits=self._commits, summary=self._tableau.summary())
            return self._tableau

    @property
    def commits(self) -> int:
        return self._commits
