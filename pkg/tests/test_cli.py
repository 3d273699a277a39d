from __future__ import annotations

import json

import pytest

from seedpeg.cli import EXIT_GRAMMAR, EXIT_IO, EXIT_OK, EXIT_PARSE_FAILED, main

from conftest import corpus_path


@pytest.fixture
def write(tmp_path):
    def put(name, text):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)
    return put


def test_parse_tree(write, capsys):
    code = main(["parse", str(corpus_path("cluster_tree.peg")), write("in.txt", "1+2*3")])
    assert code == EXIT_OK
    assert capsys.readouterr().out.strip() == '(add (num "1") (mul (num "2") (num "3")))'


def test_parse_failure(write, capsys):
    code = main(["parse", str(corpus_path("cluster_tree.peg")), write("in.txt", "1+")])
    assert code == EXIT_PARSE_FAILED
    assert capsys.readouterr().out.strip() == "error at 1:3: expected one of {num}"


def test_parse_requires_full_match(write, capsys):
    grammar, text = str(corpus_path("cluster_tree.peg")), write("in.txt", "1+2x")
    assert main(["parse", grammar, text]) == EXIT_PARSE_FAILED
    capsys.readouterr()
    assert main(["parse", grammar, text, "--no-full-match"]) == EXIT_OK


def test_missing_files(write, tmp_path, capsys):
    missing = str(tmp_path / "nope.peg")
    assert main(["parse", missing, write("in.txt", "1")]) == EXIT_IO
    assert main(["parse", str(corpus_path("cluster.peg")), missing]) == EXIT_IO
    assert main(["check", missing]) == EXIT_IO
    assert "cannot read" in capsys.readouterr().err


@pytest.mark.parametrize("text", ["A = ;", "A = B ;", "E = expr -> E '+' E -> [0-9] @+ ;"])
def test_grammar_errors(write, capsys, text):
    grammar = write("g.peg", text)
    assert main(["parse", grammar, write("in.txt", "1")]) == EXIT_GRAMMAR
    assert "grammar error" in capsys.readouterr().err


def test_json_tree(write, capsys):
    main(["parse", str(corpus_path("cluster_tree.peg")), write("in.txt", "7"),
          "--tree-format", "json"])
    assert json.loads(capsys.readouterr().out) == {
        "name": "num", "span": [0, 1], "text": "7", "children": []}


def test_stats(write, capsys):
    main(["parse", str(corpus_path("cluster.peg")), write("in.txt", "7"), "--stats"])
    lines = dict(line.split("\t") for line in capsys.readouterr().out.splitlines()[1:])
    assert int(lines["digit_invocations"]) == 2
    assert set(lines) == {"total_invocations", "digit_invocations", "peak_seeds", "wall_ms"}


def test_trace_on_stderr(write, capsys):
    main(["parse", str(corpus_path("layered_right.peg")), write("in.txt", "7"), "--trace"])
    captured = capsys.readouterr()
    lines = captured.err.splitlines()
    # lines appear when an invocation returns, indented by depth
    assert lines[-1].split("\t") == ["E", "0", "1"]
    assert lines[0].startswith("        N\t")
    assert sum(1 for line in lines if line.strip().startswith("N\t")) == 9
    assert captured.out.strip() == "(root)"


def test_check_layered_left(capsys):
    assert main(["check", str(corpus_path("layered_left.peg"))]) == EXIT_OK
    out = capsys.readouterr().out
    assert "left-recursive cycles: 2" in out
    assert "auto-marked left-recursive: rule E, rule S" in out


def test_check_right_recursive(capsys):
    assert main(["check", str(corpus_path("layered_right.peg"))]) == EXIT_OK
    assert capsys.readouterr().out.splitlines()[0] == "no left recursion"


def test_check_hidden(capsys):
    main(["check", str(corpus_path("hidden.peg"))])
    out = capsys.readouterr().out
    assert "cycle 1: rule X" in out
    assert "hidden: recursion through nullable prefix Y?" in out


def test_check_nullable_warning(write, capsys):
    main(["check", write("g.peg", "A = 'a'* ;")])
    assert "warning: rule A can succeed without consuming input" in capsys.readouterr().out


def test_check_syntax_error(write, capsys):
    assert main(["check", write("g.peg", "A = ;")]) == EXIT_GRAMMAR


def test_bench_tsv(capsys):
    assert main(["bench", "-L", "2", "-P", "2", "--style", "layered-right", "--reps", "1",
                 "--input-len", "11"]) == EXIT_OK
    rows = [line.split("\t") for line in capsys.readouterr().out.splitlines()]
    assert rows[0][:6] == ["style", "L", "P", "digit_invocations", "total_invocations", "wall_ms"]
    assert rows[1][:4] == ["layered-right", "2", "2", "9"]
    assert len(rows) == 3


def test_bench_all_styles(capsys):
    main(["bench", "-L", "1", "-P", "1", "--reps", "1", "--input-len", "1"])
    styles = [line.split("\t")[0] for line in capsys.readouterr().out.splitlines()[1:]]
    assert styles == ["layered-right", "idiomatic", "layered-left", "cluster"]
