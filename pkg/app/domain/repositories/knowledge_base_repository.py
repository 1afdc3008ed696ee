"""
File repository for knowledge bases (exported tableaux).
"""

from pathlib import Path

from app.core.exceptions import InputError
from app.core.logging import get_logger
from app.domain.models.tableau import Tableau
from app.infrastructure.formats.knowledge_base_format import (
    dump_knowledge_base,
    parse_knowledge_base,
)

logger = get_logger(__name__)


class KnowledgeBaseRepository:
    """Repository for knowledge-base files."""

    def save(self, t: Tableau, path: str) -> None:
        try:
            Path(path).write_text(dump_knowledge_base(t), encoding="utf-8")
        except OSError as e:
            raise InputError(f"cannot write {path}: {e.strerror}", {"path": path}) from None
        logger.info("Knowledge base saved", path=path, summary=t.summary())

    def load(self, path: str) -> Tableau:
        """
        Raises:
            InputError: unreadable or malformed file
        """
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise InputError(f"cannot read {path}: {e.strerror}", {"path": path}) from None
        t = parse_knowledge_base(text)
        logger.info("Knowledge base loaded", path=path, summary=t.summary())
        return t


knowledge_base_repository = KnowledgeBaseRepository()
