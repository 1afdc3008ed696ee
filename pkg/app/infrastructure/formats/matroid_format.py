"""
Matroid text format.

    ELEMENTS <n>
    LABELS <l0> ... <l(n-1)>        (optional)
    BASES                           one basis per following line
    NONBASES <r>                    all r-sets except the listed lines
    CIRCUITS [<r>]                  bases are the maximal sets with no listed circuit

Elements are referenced by label (default labels are the indices). A line
holding only "-" denotes the empty set. '#' starts a comment.
"""

from itertools import combinations
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from app.core.exceptions import InputError, MatroidFormatError
from app.core.logging import get_logger
from app.domain.models.matroid import GroundSet, Matroid, bases_from_nonbases
from app.domain.models.subsets import elements, mask_of, popcount

logger = get_logger(__name__)

_RECORDS = ("BASES", "NONBASES", "CIRCUITS")


def _tokens(text: str) -> List[Tuple[int, List[str]]]:
    out = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append((number, line.split()))
    return out


def _parse_int(token: str, number: int, what: str) -> int:
    try:
        value = int(token)
    except ValueError:
        raise MatroidFormatError(f"{what} must be an integer, got {token!r}", number) from None
    if value < 0:
        raise MatroidFormatError(f"{what} must be non-negative", number)
    return value


def _parse_set(ground: GroundSet, words: Sequence[str], number: Optional[int]) -> int:
    if list(words) == ["-"]:
        return 0
    mask = 0
    for word in words:
        try:
            index = ground.index_of(word)
        except KeyError:
            raise MatroidFormatError(f"unknown element {word!r}", number) from None
        if mask >> index & 1:
            raise MatroidFormatError(f"element {word!r} repeated", number)
        mask |= 1 << index
    return mask


def parse_matroid(text: str) -> Matroid:
    """
    Parse and validate a matroid record.

    Args:
        text: File contents

    Returns:
        Matroid: validated matroid

    Raises:
        MatroidFormatError: malformed record
        MatroidAxiomError: basis family violates the exchange axiom
    """
    lines = _tokens(text)
    if not lines or lines[0][1][0] != "ELEMENTS" or len(lines[0][1]) != 2:
        raise MatroidFormatError("first record must be 'ELEMENTS <n>'", lines[0][0] if lines else 1)
    number, words = lines[0]
    size = _parse_int(words[1], number, "element count")
    if size > 20:
        raise MatroidFormatError(f"ground set of {size} elements exceeds cap 20", number)
    rest = lines[1:]

    labels: Tuple[str, ...] = ()
    if rest and rest[0][1][0] == "LABELS":
        number, words = rest[0]
        labels = tuple(words[1:])
        if len(labels) != size or len(set(labels)) != size:
            raise MatroidFormatError(f"LABELS needs {size} distinct names", number)
        rest = rest[1:]
    ground = GroundSet(size=size, labels=labels)

    if not rest or rest[0][1][0] not in _RECORDS:
        raise MatroidFormatError(
            f"expected one of {', '.join(_RECORDS)}", rest[0][0] if rest else number
        )
    number, header = rest[0]
    kind = header[0]
    body = [(n, _parse_set(ground, w, n)) for n, w in rest[1:]]

    if kind == "BASES":
        if len(header) > 1:
            raise MatroidFormatError("BASES takes no argument", number)
        if not body:
            raise MatroidFormatError("BASES record lists no basis", number)
        bases = [mask for _, mask in body]
    elif kind == "NONBASES":
        if len(header) != 2:
            raise MatroidFormatError("expected 'NONBASES <r>'", number)
        rank = _parse_int(header[1], number, "rank")
        if rank > size:
            raise MatroidFormatError(f"rank {rank} exceeds {size} elements", number)
        for n, mask in body:
            if popcount(mask) != rank:
                raise MatroidFormatError(f"non-basis must have {rank} elements", n)
        bases = bases_from_nonbases(size, rank, [mask for _, mask in body])
        if not bases:
            raise MatroidFormatError("every r-set is listed as a non-basis", number)
    else:
        rank = _parse_int(header[1], number, "rank") if len(header) == 2 else None
        bases = bases_from_circuits(size, [mask for _, mask in body], rank)
        if not bases:
            raise MatroidFormatError(f"no independent set of size {rank}", number)

    matroid = Matroid(ground, bases)
    logger.debug(f"Parsed matroid n={size} rank={matroid.rank_of_ground} bases={len(matroid.bases)}")
    return matroid


def bases_from_circuits(size: int, circuits: List[int], rank: Optional[int] = None) -> List[int]:
    """Maximal circuit-free sets; with `rank` given, only sets of that size."""
    sizes = [rank] if rank is not None else range(size, -1, -1)
    for k in sizes:
        found = []
        for combo in combinations(range(size), k):
            mask = mask_of(combo)
            if not any(c & mask == c for c in circuits):
                found.append(mask)
        if found:
            return found
    return []


def dump_matroid(matroid: Matroid) -> str:
    """Serialize in the BASES form."""
    ground = matroid.ground
    out = [f"ELEMENTS {matroid.size}"]
    if ground.labels != tuple(str(i) for i in range(matroid.size)):
        out.append("LABELS " + " ".join(ground.labels))
    out.append("BASES")
    for b in matroid.bases:
        out.append(" ".join(ground.labels[i] for i in elements(b)) if b else "-")
    return "\n".join(out) + "\n"


def parse_subset(matroid: Matroid, words: Sequence[str]) -> int:
    """
    Resolve element labels from the command line; the token 'E' means the ground set.

    Raises:
        InputError: unknown element
    """
    if list(words) == ["E"] and "E" not in matroid.ground.labels:
        return matroid.full
    try:
        return _parse_set(matroid.ground, words, None)
    except MatroidFormatError as e:
        raise InputError(e.message) from None


def load_matroid(path: str) -> Matroid:
    """Read and parse a matroid file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}", {"path": path}) from None
    return parse_matroid(text)
