"""
Knowledge-base text format for tableaux.

    GAMMOID-KB 1
    GOAL <key>
    MATROID <key> <families|-> <family=certificate,...|->
    LINK <key> <key> <reason>
    MINOR-CLOSED <key>
    MINOR-OF <child key> <parent key>
    LOG <count>
    <one JSON derivation record per line>
    END

Keys are hex canonical keys; each one rebuilds its matroid.
"""

from typing import Dict, List, Set, Tuple

from pydantic import ValidationError

from app.core.exceptions import InputError
from app.domain.models.canonical import CanonicalKey
from app.domain.models.matroid import Matroid
from app.domain.models.tableau import (
    Certificate,
    DerivationRecord,
    Family,
    Link,
    LinkReason,
    Tableau,
)

HEADER = "GAMMOID-KB 1"


def dump_knowledge_base(t: Tableau) -> str:
    """Serialize a tableau; output is sorted and byte-stable."""
    lines = [HEADER, f"GOAL {t.goal_key.hex()}"]
    for key in sorted(t.registry):
        families = t.families_of(key) or "-"
        certificates = ",".join(
            f"{f.value}={t.certificates[(f, key)].value}"
            for f in Family
            if (f, key) in t.certificates
        )
        lines.append(f"MATROID {key.hex()} {families} {certificates or '-'}")
    for link in sorted(t.links):
        lines.append(f"LINK {link.a.hex()} {link.b.hex()} {link.reason.value}")
    for key in sorted(t.minor_closed):
        lines.append(f"MINOR-CLOSED {key.hex()}")
    for child, parent in sorted(t.minor_of):
        lines.append(f"MINOR-OF {child.hex()} {parent.hex()}")
    lines.append(f"LOG {len(t.log)}")
    lines.extend(record.model_dump_json() for record in t.log)
    lines.append("END")
    return "\n".join(lines) + "\n"


def _key(token: str, number: int) -> CanonicalKey:
    try:
        return CanonicalKey.from_hex(token)
    except ValueError:
        raise InputError(f"kb line {number}: malformed key {token!r}") from None


def parse_knowledge_base(text: str) -> Tableau:
    """
    Parse a knowledge-base file into a tableau.

    Raises:
        InputError: malformed file
    """
    lines = text.splitlines()
    if not lines or lines[0].strip() != HEADER:
        raise InputError(f"kb line 1: expected {HEADER!r}")

    goal = None
    registry: Dict[CanonicalKey, Matroid] = {}
    families: Dict[Family, Set[CanonicalKey]] = {f: set() for f in Family}
    certificates: Dict[Tuple[Family, CanonicalKey], Certificate] = {}
    links: Set[Link] = set()
    minor_closed: Set[CanonicalKey] = set()
    minor_of: Set[Tuple[CanonicalKey, CanonicalKey]] = set()
    log: List[DerivationRecord] = []

    number = 1
    ended = False
    while number < len(lines):
        number += 1
        words = lines[number - 1].split()
        if not words:
            continue
        head = words[0]
        try:
            if head == "GOAL" and len(words) == 2:
                goal = _key(words[1], number)
            elif head == "MATROID" and len(words) == 4:
                key = _key(words[1], number)
                registry[key] = Matroid.from_key(key)
                if words[2] != "-":
                    for letter in words[2]:
                        families[Family(letter)].add(key)
                if words[3] != "-":
                    for item in words[3].split(","):
                        family, certificate = item.split("=", 1)
                        certificates[(Family(family), key)] = Certificate(certificate)
            elif head == "LINK" and len(words) == 4:
                links.add(Link.of(_key(words[1], number), _key(words[2], number), LinkReason(words[3])))
            elif head == "MINOR-CLOSED" and len(words) == 2:
                minor_closed.add(_key(words[1], number))
            elif head == "MINOR-OF" and len(words) == 3:
                minor_of.add((_key(words[1], number), _key(words[2], number)))
            elif head == "LOG" and len(words) == 2:
                count = int(words[1])
                for _ in range(count):
                    number += 1
                    if number > len(lines):
                        raise InputError(f"kb line {number}: log ends early")
                    log.append(DerivationRecord.model_validate_json(lines[number - 1]))
            elif head == "END" and len(words) == 1:
                ended = True
                break
            else:
                raise InputError(f"kb line {number}: unknown record {head!r}")
        except (ValueError, ValidationError) as e:
            raise InputError(f"kb line {number}: {e}") from None

    if not ended:
        raise InputError("kb file has no END record")
    if goal is None:
        raise InputError("kb file has no GOAL record")
    registry.setdefault(goal, Matroid.from_key(goal))
    referenced = set(minor_closed) | {k for pair in minor_of for k in pair}
    referenced |= {link.a for link in links} | {link.b for link in links}
    missing = referenced - set(registry)
    if missing:
        raise InputError(f"kb references unregistered key {min(missing).hex()}")

    return Tableau(
        goal=registry[goal],
        registry=registry,
        gammoids=frozenset(families[Family.GAMMOIDS]),
        intermediates=frozenset(families[Family.INTERMEDIATES]),
        excluded=frozenset(families[Family.EXCLUDED]),
        certificates=certificates,
        links=frozenset(links),
        minor_closed=frozenset(minor_closed),
        minor_of=frozenset(minor_of),
        log=tuple(log),
    )
