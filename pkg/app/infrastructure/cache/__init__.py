"""
Cache infrastructure module.
Provides the in-process certificate cache keyed by canonical matroid keys.
"""

from .cache_service import CacheService, certificate_cache

__all__ = [
    "CacheService",
    "certificate_cache",
]
