"""
Cache service for certificate memoization.
Keeps expensive per-isomorphism-class results (alpha scans, SBO searches,
excluded-minor searches) keyed by canonical key, shared across threads.
"""

import hashlib
import json
import threading
from collections import OrderedDict
from typing import Any, Callable, Dict, Optional

from app.core.logging import get_logger

logger = get_logger(__name__)

_MISSING = object()


class CacheService:
    """Thread-safe in-process LRU cache with the get-or-set pattern."""

    def __init__(self, max_entries: int = 50_000):
        """
        Initialize cache service.

        Args:
            max_entries: Entries kept before least-recently-used eviction
        """
        self._store: "OrderedDict[str, Any]" = OrderedDict()
        self._lock = threading.Lock()
        self._key_locks: Dict[str, Any] = {}
        self._max_entries = max_entries
        self.hits = 0
        self.misses = 0

    def get(self, key: str) -> Optional[Any]:
        """
        Get value from cache.

        Args:
            key (str): Cache key

        Returns:
            Optional[Any]: Cached value or None
        """
        with self._lock:
            value = self._store.get(key, _MISSING)
            if value is _MISSING:
                return None
            self._store.move_to_end(key)
            return value

    def set(self, key: str, value: Any) -> bool:
        """
        Set value in cache.

        Args:
            key (str): Cache key
            value (Any): Value to cache

        Returns:
            bool: True if successful
        """
        with self._lock:
            self._store[key] = value
            self._store.move_to_end(key)
            while len(self._store) > self._max_entries:
                self._store.popitem(last=False)
        return True

    def delete(self, key: str) -> bool:
        """
        Delete key from cache.

        Args:
            key (str): Cache key to delete

        Returns:
            bool: True if deleted
        """
        with self._lock:
            return self._store.pop(key, _MISSING) is not _MISSING

    def exists(self, key: str) -> bool:
        with self._lock:
            return key in self._store

    def clear(self) -> None:
        with self._lock:
            self._store.clear()
            self.hits = 0
            self.misses = 0

    def generate_key(self, prefix: str, *args, **kwargs) -> str:
        """
        Generate a cache key from prefix and arguments.

        Args:
            prefix (str): Key prefix
            *args: Positional arguments to include in key
            **kwargs: Keyword arguments to include in key

        Returns:
            str: Generated cache key
        """
        key_parts = [prefix]

        for arg in args:
            if isinstance(arg, (dict, list)):
                key_parts.append(json.dumps(arg, sort_keys=True))
            else:
                key_parts.append(str(arg))

        for key, value in sorted(kwargs.items()):
            if isinstance(value, (dict, list)):
                key_parts.append(f"{key}:{json.dumps(value, sort_keys=True)}")
            else:
                key_parts.append(f"{key}:{value}")

        key_string = ":".join(key_parts)
        if len(key_string) > 250:
            digest = hashlib.sha256(key_string.encode()).hexdigest()
            return f"{prefix}:hash:{digest}"

        return key_string

    def get_or_set(self, key: str, factory: Callable[[], Any]) -> Any:
        """
        Get a cached value, computing and storing it on a miss.

        Threads missing the same key together wait for the first one to
        compute it; the factory runs outside the store lock.

        Args:
            key (str): Cache key
            factory: Zero-argument function computing the value

        Returns:
            Any: Cached or freshly computed value
        """
        value = self._hit(key)
        if value is not _MISSING:
            return value
        with self._lock:
            key_lock = self._key_locks.setdefault(key, threading.RLock())
        with key_lock:
            value = self._hit(key)
            if value is not _MISSING:
                return value
            with self._lock:
                self.misses += 1
            try:
                value = factory()
                self.set(key, value)
            finally:
                with self._lock:
                    self._key_locks.pop(key, None)
        return value

    def _hit(self, key: str) -> Any:
        with self._lock:
            value = self._store.get(key, _MISSING)
            if value is not _MISSING:
                self._store.move_to_end(key)
                self.hits += 1
            return value


certificate_cache = CacheService()
