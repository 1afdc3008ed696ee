"""
Command-line front end.

Parsing (click) produces a Command; execute() dispatches it to the services
and returns an exit code with deterministic text. Logs go to stderr.
"""

import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import click
from pydantic import BaseModel, Field

from app.core.exceptions import (
    GammoidException,
    InputError,
    ResourceExhaustedError,
    UsageError,
    get_exception_exit_code,
)
from app.core.logging import get_logger, log_error, setup_logging
from app.api.services.engine_service import engine_service
from app.api.services.extension_service import extension_service
from app.api.services.invariant_service import invariant_service
from app.api.services.matroid_service import PATTERNS, matroid_service
from app.api.services.oracle_service import oracle_service
from app.api.services.tableau_service import tableau_service
from app.domain.models.certificates import OrderabilityVerdict
from app.domain.models.engine import EngineConfig
from app.domain.models.matroid import Matroid
from app.domain.models.tableau import Decision, Tableau
from app.domain.repositories.knowledge_base_repository import knowledge_base_repository
from app.infrastructure.formats.digraph_format import dump_digraph, load_digraph
from app.infrastructure.formats.knowledge_base_format import HEADER, dump_knowledge_base
from app.infrastructure.formats.matroid_format import dump_matroid, load_matroid, parse_subset

logger = get_logger(__name__)

EXIT_GAMMOID = 0
EXIT_NOT_GAMMOID = 1


class Command(BaseModel):
    """A parsed command line."""

    verb: str = Field(..., description="decide | alpha | sbo | minor-check | deflate | cuts | extensions | oracle | kb | validate")
    action: Optional[str] = Field(None, description="Sub-verb of oracle and kb")
    path: Optional[str] = None
    options: Dict[str, Any] = Field(default_factory=dict)


class CommandResult(BaseModel):
    exit_code: int = 0
    output: str = ""
    error: str = ""


# Parsing


@click.group(name="gammoid")
def cli() -> None:
    """Decide whether a matroid is a gammoid."""


@cli.command()
@click.argument("path")
@click.option("--kb", "kb", default=None, help="Knowledge base to start from")
@click.option("--workers", type=click.IntRange(min=1), default=None)
@click.option("--batch", type=click.IntRange(min=1), default=None, help="Extension classes per exhaustion visit")
@click.option("--seed", type=int, default=None)
@click.option("--goal-selection", type=click.Choice(["smallest", "goal-first"]), default=None)
@click.option("--max-iterations", type=click.IntRange(min=1), default=None)
@click.option("--time-limit", type=float, default=None)
@click.option("--max-extension-size", type=click.IntRange(min=0), default=None)
@click.option("--trace", "trace_path", default=None, help="Write the step trace here")
@click.option("--export-kb", "export_kb", default=None, help="Write the final tableau here")
def decide(path: str, **options: Any) -> Command:
    """Run the decision procedure on a matroid file."""
    return Command(verb="decide", path=path, options=options)


@cli.command()
@click.argument("path")
@click.argument("elements", nargs=-1)
@click.option("--subset", "subset", is_flag=True, help="Evaluate alpha on the listed elements ('E' for all)")
@click.option("--flats-only", is_flag=True, default=False)
def alpha(path: str, elements: Sequence[str], subset: bool, flats_only: bool) -> Command:
    """Alpha table of a matroid, or alpha of one subset."""
    if elements and not subset:
        raise click.UsageError("element arguments need --subset")
    if subset and not elements:
        raise click.UsageError("--subset needs at least one element")
    return Command(verb="alpha", path=path, options={"subset": list(elements) if subset else None, "flats_only": flats_only})


@cli.command()
@click.argument("path")
def sbo(path: str) -> Command:
    """Strong base-orderability check."""
    return Command(verb="sbo", path=path)


@cli.command("minor-check")
@click.argument("path")
@click.option("--pattern", required=True, help="U24, MK4 or a matroid file")
def minor_check(path: str, pattern: str) -> Command:
    """Search for a minor isomorphic to a pattern."""
    return Command(verb="minor-check", path=path, options={"pattern": pattern})


@cli.command()
@click.argument("path")
@click.option("--greedy", is_flag=True, default=False)
def deflate(path: str, greedy: bool) -> Command:
    """Minimal deflate with its removal certificate."""
    return Command(verb="deflate", path=path, options={"greedy": greedy})


@cli.command()
@click.argument("path")
def cuts(path: str) -> Command:
    """Modular cuts, one antichain of generating flats per line."""
    return Command(verb="cuts", path=path)


@cli.command()
@click.argument("path")
@click.option("--size", type=click.IntRange(min=0), required=True, help="Ground size of the extensions")
def extensions(path: str, size: int) -> Command:
    """Extensions up to isomorphism with the given number of elements."""
    return Command(verb="extensions", path=path, options={"size": size})


@cli.group()
def oracle() -> None:
    """Gammoids from digraph representations."""


@oracle.command("gamma")
@click.argument("path")
def oracle_gamma(path: str) -> Command:
    """Print the gammoid of a digraph file."""
    return Command(verb="oracle", action="gamma", path=path)


@oracle.command("random")
@click.option("--seed", type=int, default=0)
@click.option("--vmax", type=click.IntRange(min=0), default=6)
@click.option("--emax", type=click.IntRange(min=0), default=6)
@click.option("--strict", is_flag=True, default=False)
def oracle_random(**options: Any) -> Command:
    """Print a seeded random representation and its gammoid."""
    return Command(verb="oracle", action="random", options=options)


@cli.group()
def kb() -> None:
    """Knowledge-base files."""


@kb.command("export")
@click.argument("path")
@click.option("--out", required=True, help="Knowledge-base file to write")
@click.option("--kb", "kb", default=None, help="Knowledge base to join first")
def kb_export(path: str, out: str, kb: Optional[str]) -> Command:
    """Seed a tableau for a matroid and write it."""
    return Command(verb="kb", action="export", path=path, options={"out": out, "kb": kb})


@kb.command("import")
@click.argument("path")
@click.option("--out", default=None, help="Write the imported tableau back out")
def kb_import(path: str, out: Optional[str]) -> Command:
    """Join a knowledge base into a fresh tableau."""
    return Command(verb="kb", action="import", path=path, options={"out": out})


@cli.command()
@click.argument("path")
@click.option("--budget", type=click.IntRange(min=0), default=None, help="Audit ground-size budget")
def validate(path: str, budget: Optional[int]) -> Command:
    """Check a matroid file's axioms or audit a knowledge base."""
    return Command(verb="validate", path=path, options={"budget": budget})


def parse_args(argv: Sequence[str]) -> Command:
    """
    Parse a command line.

    Raises:
        UsageError: unknown verb, flag or missing argument
    """
    try:
        result = cli.main(args=list(argv), prog_name="gammoid", standalone_mode=False)
    except click.ClickException as e:
        raise UsageError(e.format_message()) from None
    if isinstance(result, Command):
        return result
    if result in (None, 0):
        return Command(verb="help")
    raise UsageError("no command given")


# Execution


def _decide(cmd: Command) -> CommandResult:
    options = cmd.options
    goal = load_matroid(cmd.path)
    kb_tableau = knowledge_base_repository.load(options["kb"]) if options.get("kb") else None
    cfg = EngineConfig.from_settings(
        worker_count=options.get("workers"),
        extension_batch=options.get("batch"),
        deterministic_seed=options.get("seed"),
        goal_selection=options.get("goal_selection"),
        max_iterations=options.get("max_iterations"),
        time_limit_seconds=options.get("time_limit"),
        max_extension_size=options.get("max_extension_size"),
    )
    try:
        verdict, trace, final = engine_service.decide(goal, cfg, kb_tableau)
    except ResourceExhaustedError as e:
        if options.get("trace_path") and e.trace is not None:
            _write(options["trace_path"], "\n".join(e.trace.lines()) + "\n")
        if options.get("export_kb") and e.tableau is not None:
            knowledge_base_repository.save(e.tableau, options["export_kb"])
        partial = e.tableau.summary() if e.tableau is not None else "no tableau"
        return CommandResult(
            exit_code=get_exception_exit_code(e),
            output=f"RESOURCE EXHAUSTED: {e.message}\npartial tableau: {partial}\n",
        )

    if options.get("trace_path"):
        _write(options["trace_path"], "\n".join(trace.lines()) + "\n")
    if options.get("export_kb"):
        knowledge_base_repository.save(final, options["export_kb"])
    lines = [
        verdict.describe(),
        f"case: {verdict.case.value}",
        f"steps: {len(trace.steps)}",
        f"tableau: {final.summary()}",
    ]
    exit_code = EXIT_GAMMOID if verdict.decision == Decision.GAMMOID else EXIT_NOT_GAMMOID
    return CommandResult(exit_code=exit_code, output="\n".join(lines) + "\n")


def _alpha(cmd: Command) -> CommandResult:
    m = load_matroid(cmd.path)
    table = invariant_service.alpha_table(m)
    if cmd.options.get("subset"):
        x = parse_subset(m, cmd.options["subset"])
        return CommandResult(output=f"{invariant_service.alpha(m, x, table)}\n")
    lines = [f"alpha {m.format(flat)} = {value}" for flat, value in sorted(table.values.items(), key=lambda kv: (m.rank(kv[0]), kv[0]))]
    negative = invariant_service.alpha_non_negative(m, flats_only=cmd.options.get("flats_only") or None)
    if negative is None:
        lines.append("alpha nonnegative: strict gammoid")
    else:
        lines.append(f"alpha negative on {m.format(negative)} = {invariant_service.alpha(m, negative, table)}")
    return CommandResult(output="\n".join(lines) + "\n")


def _sbo(cmd: Command) -> CommandResult:
    m = load_matroid(cmd.path)
    witness = invariant_service.strongly_base_orderable(m)
    lines = []
    if witness.verdict == OrderabilityVerdict.ORDERABLE:
        lines.append("strongly base-orderable")
        if witness.basis_pair is not None:
            b1, b2 = witness.basis_pair
            pairs = " ".join(f"{m.ground.labels[x]}->{m.ground.labels[y]}" for x, y in witness.bijection or [])
            lines.append(f"largest exchange: {m.format(b1)} {m.format(b2)} via {pairs}")
    else:
        b1, b2 = witness.basis_pair
        lines.append(f"NOT strongly base-orderable: bases {m.format(b1)} {m.format(b2)}")
        for pairs, x in witness.failing_subsets:
            mapping = " ".join(f"{m.ground.labels[a]}->{m.ground.labels[b]}" for a, b in pairs)
            lines.append(f"  {mapping} fails on {m.format(x)}")
    return CommandResult(output="\n".join(lines) + "\n")


def _pattern(name: str) -> Matroid:
    if name in PATTERNS:
        return PATTERNS[name]
    if Path(name).exists():
        return load_matroid(name)
    raise InputError(f"unknown pattern {name!r}; use {', '.join(sorted(PATTERNS))} or a matroid file")


def _minor_check(cmd: Command) -> CommandResult:
    m = load_matroid(cmd.path)
    name = cmd.options["pattern"]
    spec = matroid_service.has_minor_isomorphic_to(m, _pattern(name))
    if spec is None:
        return CommandResult(output=f"no minor isomorphic to {name}\n")
    return CommandResult(output=f"minor {name} via {matroid_service.describe_minor(m, spec)}\n")


def _deflate(cmd: Command) -> CommandResult:
    m = load_matroid(cmd.path)
    deflate_matroid, certificate = extension_service.minimal_deflate(m, greedy=cmd.options.get("greedy") or None)
    if certificate.is_trivial:
        return CommandResult(output=f"deflated: no element can be removed ({m.size} elements)\n")
    lines = [f"minimal deflate: {deflate_matroid.size} of {m.size} elements, kept {m.format(certificate.kept_set)}"]
    for e, flat in zip(certificate.removal_order, certificate.minimal_flat_per_step):
        lines.append(f"  re-attach {m.ground.labels[e]} via minimal flat {m.format(flat)}")
    return CommandResult(output="\n".join(lines) + "\n" + dump_matroid(deflate_matroid))


def _cuts(cmd: Command) -> CommandResult:
    m = load_matroid(cmd.path)
    found = extension_service.modular_cuts(m)
    lines = [f"{len(found)} modular cuts"]
    for cut in found:
        lines.append(" ".join(m.format(f) for f in cut.minimal_flats) if cut.minimal_flats else "-")
    return CommandResult(output="\n".join(lines) + "\n")


def _extensions(cmd: Command) -> CommandResult:
    m = load_matroid(cmd.path)
    size = cmd.options["size"]
    if size < m.size:
        raise UsageError(f"--size must be at least {m.size}")
    classes = list(extension_service.extensions_up_to_iso(m, size))
    lines = [f"{len(classes)} extension classes with {size} elements"]
    lines.extend(f"{n.key.hex()} rank {n.rank_of_ground} bases {len(n.bases)}" for n in classes)
    return CommandResult(output="\n".join(lines) + "\n")


def _oracle(cmd: Command) -> CommandResult:
    if cmd.action == "gamma":
        return CommandResult(output=dump_matroid(oracle_service.gamma(load_digraph(cmd.path))))
    o = cmd.options
    rep, m = oracle_service.random_gammoid(o["seed"], o["vmax"], o["emax"], strict=o["strict"])
    return CommandResult(output=dump_digraph(rep) + "\n" + dump_matroid(m))


def _kb(cmd: Command) -> CommandResult:
    if cmd.action == "export":
        m = load_matroid(cmd.path)
        seeded = tableau_service.seed_tableau(m)
        if cmd.options.get("kb"):
            seeded = tableau_service.join([seeded, knowledge_base_repository.load(cmd.options["kb"])])
        t = engine_service.merge(seeded, seeded)
        knowledge_base_repository.save(t, cmd.options["out"])
        return CommandResult(output=f"exported {t.summary()}\n")
    imported = knowledge_base_repository.load(cmd.path)
    t = tableau_service.join([Tableau.initial(imported.goal), imported])
    if cmd.options.get("out"):
        knowledge_base_repository.save(t, cmd.options["out"])
    return CommandResult(output=f"imported {t.summary()}\n")


def _validate(cmd: Command) -> CommandResult:
    head = _read_head(cmd.path)
    if head == HEADER:
        t = knowledge_base_repository.load(cmd.path)
        report = tableau_service.is_valid(t, cmd.options.get("budget"))
        lines = [
            f"{'VALID' if report.is_valid else 'INVALID'}: {len(report.verified)} verified, "
            f"{len(report.failures)} failures, {len(report.unverified)} unverified, "
            f"{len(report.open_classes)} open classes"
        ]
        lines.extend(f"  failure {e.family} {e.key[:16]}: {e.note}" for e in report.failures)
        lines.extend(f"  unverified {e.family} {e.key[:16]}: {e.note}" for e in report.unverified)
        return CommandResult(exit_code=0 if report.is_valid else 1, output="\n".join(lines) + "\n")
    m = load_matroid(cmd.path)
    return CommandResult(
        output=f"valid matroid: {m.size} elements, rank {m.rank_of_ground}, {len(m.bases)} bases\n"
    )


def _read_head(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as handle:
            return handle.readline().strip()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}", {"path": path}) from None


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot write {path}: {e.strerror}", {"path": path}) from None


HANDLERS: Dict[str, Callable[[Command], CommandResult]] = {
    "decide": _decide,
    "alpha": _alpha,
    "sbo": _sbo,
    "minor-check": _minor_check,
    "deflate": _deflate,
    "cuts": _cuts,
    "extensions": _extensions,
    "oracle": _oracle,
    "kb": _kb,
    "validate": _validate,
}


def execute(cmd: Command) -> CommandResult:
    """
    Run a parsed command.

    Returns:
        CommandResult: exit code, stdout text and stderr text
    """
    if cmd.verb == "help":
        return CommandResult()
    try:
        return HANDLERS[cmd.verb](cmd)
    except GammoidException as e:
        log_error(e, {"verb": cmd.verb, "path": cmd.path})
        return CommandResult(exit_code=get_exception_exit_code(e), error=f"error: {e.message}\n")


def main(argv: Optional[List[str]] = None) -> int:
    setup_logging()
    try:
        cmd = parse_args(sys.argv[1:] if argv is None else argv)
    except UsageError as e:
        click.echo(f"usage error: {e.message}", err=True)
        return get_exception_exit_code(e)
    result = execute(cmd)
    if result.output:
        click.echo(result.output, nl=False)
    if result.error:
        click.echo(result.error, nl=False, err=True)
    return result.exit_code
