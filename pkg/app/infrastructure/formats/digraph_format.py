"""
Digraph text format for gammoid representations.

    VERTICES <n>
    TARGETS <i> <j> ...
    GROUND <i> <j> ...
    ARCS
    <u> <v>
"""

from pathlib import Path
from typing import List, Set, Tuple

from app.core.exceptions import InputError, MatroidFormatError
from app.domain.models.digraph import Digraph, Representation


def _vertex(token: str, n: int, number: int) -> int:
    try:
        v = int(token)
    except ValueError:
        raise MatroidFormatError(f"vertex must be an integer, got {token!r}", number) from None
    if not 0 <= v < n:
        raise MatroidFormatError(f"vertex {v} outside 0..{n - 1}", number)
    return v


def parse_digraph(text: str) -> Representation:
    """
    Parse a representation (D, T, E).

    Raises:
        MatroidFormatError: malformed record
    """
    lines: List[Tuple[int, List[str]]] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append((number, line.split()))
    if not lines or lines[0][1][0] != "VERTICES" or len(lines[0][1]) != 2:
        raise MatroidFormatError("first record must be 'VERTICES <n>'", lines[0][0] if lines else 1)
    try:
        n = int(lines[0][1][1])
    except ValueError:
        raise MatroidFormatError("vertex count must be an integer", lines[0][0]) from None

    targets: Set[int] = set()
    ground: List[int] = []
    arcs: Set[Tuple[int, int]] = set()
    in_arcs = False
    seen = set()
    for number, words in lines[1:]:
        head = words[0]
        if head in ("TARGETS", "GROUND", "ARCS"):
            if head in seen:
                raise MatroidFormatError(f"duplicate {head} record", number)
            seen.add(head)
            in_arcs = head == "ARCS"
            if head == "TARGETS":
                targets = {_vertex(w, n, number) for w in words[1:]}
            elif head == "GROUND":
                ground = [_vertex(w, n, number) for w in words[1:]]
                if len(set(ground)) != len(ground):
                    raise MatroidFormatError("ground vertex repeated", number)
            elif len(words) > 1:
                raise MatroidFormatError("ARCS takes no argument", number)
            continue
        if not in_arcs or len(words) != 2:
            raise MatroidFormatError(f"unexpected line {' '.join(words)!r}", number)
        arcs.add((_vertex(words[0], n, number), _vertex(words[1], n, number)))

    return Representation(
        digraph=Digraph(vertex_count=n, arcs=frozenset(arcs)),
        targets=frozenset(targets),
        ground=tuple(ground),
    )


def dump_digraph(rep: Representation) -> str:
    out = [
        f"VERTICES {rep.vertex_count}",
        "TARGETS " + " ".join(str(t) for t in sorted(rep.targets)),
        "GROUND " + " ".join(str(e) for e in rep.ground),
        "ARCS",
    ]
    out.extend(f"{u} {v}" for u, v in sorted(rep.digraph.arcs))
    return "\n".join(line.rstrip() for line in out) + "\n"


def load_digraph(path: str) -> Representation:
    """Read and parse a digraph file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}", {"path": path}) from None
    return parse_digraph(text)
