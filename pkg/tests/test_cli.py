import pytest

from app.cli.commands import Command, execute, main, parse_args
from app.core.exceptions import UsageError
from app.domain.models.matroid import uniform
from app.infrastructure.formats.knowledge_base_format import parse_knowledge_base
from app.infrastructure.formats.matroid_format import parse_matroid


def run(*argv: str):
    return execute(parse_args(list(argv)))


class TestParseArgs:
    def test_decide_options(self):
        cmd = parse_args(["decide", "g.matroid", "--workers", "4", "--batch", "3", "--trace", "t.txt"])
        assert cmd.verb == "decide"
        assert cmd.path == "g.matroid"
        assert cmd.options["workers"] == 4
        assert cmd.options["batch"] == 3
        assert cmd.options["trace_path"] == "t.txt"
        assert cmd.options["seed"] is None

    def test_alpha_subset(self):
        cmd = parse_args(["alpha", "g.matroid", "--subset", "1", "2", "3"])
        assert cmd == Command(verb="alpha", path="g.matroid", options={"subset": ["1", "2", "3"], "flats_only": False})

    def test_nested_verbs(self):
        assert parse_args(["oracle", "gamma", "d.digraph"]).action == "gamma"
        assert parse_args(["kb", "export", "g.matroid", "--out", "x.kb"]).options["out"] == "x.kb"

    @pytest.mark.parametrize(
        "argv",
        [
            ["decide"],
            ["decide", "g.matroid", "--bogus"],
            ["decide", "g.matroid", "--workers", "0"],
            ["alpha", "g.matroid", "1", "2"],
            ["frobnicate"],
            ["minor-check", "g.matroid"],
        ],
    )
    def test_usage_errors(self, argv):
        with pytest.raises(UsageError):
            parse_args(argv)

    def test_no_verb_is_help(self):
        assert parse_args([]).verb == "help"


class TestExecute:
    def test_alpha_of_ground_set(self, data_file):
        result = run("alpha", data_file("g841.matroid"), "--subset", "E")
        assert result.exit_code == 0
        assert result.output == "-1\n"

    def test_alpha_table_reports_negative_set(self, data_file):
        result = run("alpha", data_file("g841.matroid"))
        assert "alpha {1,3,7,8} = 1" in result.output
        assert result.output.endswith("alpha negative on {1,2,3,4,5,6,7,8} = -1\n")

    def test_decide_mk4(self, data_file):
        result = run("decide", data_file("mk4.matroid"))
        assert result.exit_code == 1
        assert result.output.startswith("NOT A GAMMOID: excluded minor M(K4)")
        assert "case: ii\n" in result.output

    def test_decide_writes_trace_and_kb(self, data_file, tmp_path):
        trace = tmp_path / "u24.trace"
        kb = tmp_path / "u24.kb"
        result = run("decide", data_file("u24.matroid"), "--trace", str(trace), "--export-kb", str(kb))
        assert result.exit_code == 0
        assert result.output.startswith("GAMMOID:")
        assert trace.read_text().splitlines()[-1].endswith("decisive, case (i)")
        assert kb.read_text().startswith("GAMMOID-KB 1\n")

    def test_resource_exhaustion(self, data_file, tmp_path):
        kb = tmp_path / "partial.kb"
        result = run("decide", data_file("g841.matroid"), "--max-iterations", "1", "--export-kb", str(kb))
        assert result.exit_code == 2
        assert result.output.startswith("RESOURCE EXHAUSTED:")
        assert kb.exists()

    def test_missing_file(self, tmp_path):
        result = run("sbo", str(tmp_path / "absent.matroid"))
        assert result.exit_code == 65
        assert result.error.startswith("error: cannot read")

    def test_axiom_violation(self, tmp_path):
        path = tmp_path / "bad.matroid"
        path.write_text("ELEMENTS 4\nBASES\n0 1\n2 3\n")
        assert run("validate", str(path)).exit_code == 65

    def test_sbo(self, data_file):
        result = run("sbo", data_file("mk4.matroid"))
        assert result.output.startswith("NOT strongly base-orderable")
        assert len(result.output.splitlines()) == 7

    def test_minor_check(self, data_file):
        assert run("minor-check", data_file("mk4.matroid"), "--pattern", "U24").output.startswith("no minor")
        assert run("minor-check", data_file("g841.matroid"), "--pattern", "U24").output.startswith("minor U24 via")
        assert run("minor-check", data_file("g841.matroid"), "--pattern", "nothing").exit_code == 65

    def test_deflate(self, data_file):
        result = run("deflate", data_file("g841_dual.matroid"))
        assert result.output.startswith("minimal deflate: 7 of 8 elements")
        assert run("deflate", data_file("g841.matroid")).output.startswith("deflated")

    def test_cuts_and_extensions(self, tmp_path):
        path = tmp_path / "u23.matroid"
        path.write_text("ELEMENTS 3\nBASES\n0 1\n0 2\n1 2\n")
        assert run("cuts", str(path)).output.startswith("6 modular cuts\n")
        assert run("extensions", str(path), "--size", "3").output.startswith("1 extension classes")
        assert run("extensions", str(path), "--size", "2").exit_code == 64

    def test_oracle_gamma(self, data_file):
        result = run("oracle", "gamma", data_file("u12.digraph"))
        assert parse_matroid(result.output).is_isomorphic(uniform(1, 2))

    def test_oracle_random_is_seeded(self):
        first = run("oracle", "random", "--seed", "5", "--strict")
        assert first.output == run("oracle", "random", "--seed", "5", "--strict").output
        assert "ELEMENTS" in first.output

    def test_kb_round_trip_and_validate(self, data_file, tmp_path):
        exported = tmp_path / "mk4.kb"
        copied = tmp_path / "copy.kb"
        assert run("kb", "export", data_file("mk4.matroid"), "--out", str(exported)).exit_code == 0
        assert run("kb", "import", str(exported), "--out", str(copied)).output.startswith("imported")
        assert parse_knowledge_base(copied.read_text()).same_state(parse_knowledge_base(exported.read_text()))
        result = run("validate", str(exported))
        assert result.exit_code == 0
        assert result.output.startswith("VALID:")

    def test_decide_from_knowledge_base(self, data_file, tmp_path):
        exported = tmp_path / "mk4.kb"
        run("kb", "export", data_file("mk4.matroid"), "--out", str(exported))
        result = run("decide", data_file("mk4.matroid"), "--kb", str(exported))
        assert result.exit_code == 1
        assert "steps: 1\n" in result.output

    def test_validate_matroid(self, data_file):
        result = run("validate", data_file("g841.matroid"))
        assert result.output == "valid matroid: 8 elements, rank 4, 65 bases\n"


def test_main_exit_codes(data_file, capsys):
    assert main(["alpha", data_file("u24.matroid"), "--subset", "E"]) == 0
    assert capsys.readouterr().out == "2\n"
    assert main(["frobnicate"]) == 64
    assert "usage error" in capsys.readouterr().err
