import io
import random
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from regulus import cli
from regulus.acceptance import CriterionResult
from regulus.parser import (
    BinOp,
    Bundle,
    Call,
    DerLit,
    IdemLit,
    ImagUnit,
    MatLit,
    Neg,
    ParseError,
    Pow,
    Rational,
    Var,
    parse,
    parse_sequence,
)
from regulus.sampling import random_derivation, random_element, random_idempotent, random_matrix, random_matrix_derivation
from regulus.session import Session, SessionError, format_value, load_algebra_text, run_command

TWO_ATOMS = "atoms 2\n1/3 2/3\nvars t s\n"
ONE_ATOM = "atoms 1\n1\nvars t s\n"


@pytest.fixture
def workdir(tmp_path):
    (tmp_path / "two.alg").write_text(TWO_ATOMS)
    (tmp_path / "one.alg").write_text(ONE_ATOM)
    return tmp_path


def session_for(workdir, name="two.alg"):
    s = Session(base_dir=workdir)
    run_command(s, f"load-algebra {name}")
    return s


# -- parser ------------------------------------------------------------------------------


def test_parse_examples():
    assert parse("t + 1/2") == BinOp("+", Var("t"), Rational(1, 2))
    assert parse("mat[[0,1],[0,0]]") == MatLit(((Rational(0), Rational(1)), (Rational(0), Rational(0))))
    assert parse("s/1/2") == BinOp("/", BinOp("/", Var("s"), Rational(1)), Rational(2))
    assert parse("-t^2") == Neg(Pow(Var("t"), 2))
    assert parse("2*t - s/3") == BinOp("-", BinOp("*", Rational(2), Var("t")), BinOp("/", Var("s"), Rational(3)))
    assert parse("[t ; i]") == Bundle((Var("t"), ImagUnit()))
    assert parse("der{t: 1}") == DerLit((("t", Rational(1)),))
    assert parse("{1, 3}") == IdemLit((1, 3))
    assert parse("rho(x, y)") == Call("rho", (Var("x"), Var("y")))
    assert parse("4/6") == Rational(2, 3)


@pytest.mark.parametrize(
    "source, offset",
    [("(t+s)/(t-s", 6), ("t +", 3), ("mat[[1,2]", 3), ("t)", 1), ("3 $ 4", 2), ("t^s", 2), ("1/0", 2), ("mat + 1", 0)],
)
def test_syntax_errors_carry_offsets(source, offset):
    with pytest.raises(ParseError) as info:
        parse(source)
    assert info.value.offset == offset
    assert f"offset {offset}" in str(info.value)


def test_parse_sequence_splits_adjacent_expressions():
    assert parse_sequence("t s") == [Var("t"), Var("s")]
    assert parse_sequence("t, -s") == [Var("t"), Neg(Var("s"))]


fractions = st.fractions(min_value=0, max_denominator=12).map(lambda f: Rational(f.numerator, f.denominator))
leaves = st.one_of(fractions, st.sampled_from([Var("t"), Var("s"), Var("x1"), ImagUnit()]))


def _extend(children):
    return st.one_of(
        st.builds(Neg, children),
        st.builds(BinOp, st.sampled_from("+-*/"), children, children),
        st.builds(Pow, children, st.integers(-3, 5)),
        st.lists(children, min_size=1, max_size=3).map(lambda xs: Bundle(tuple(xs))),
        st.builds(Call, st.sampled_from(["f", "rho", "apply"]), st.lists(children, max_size=2).map(tuple)),
        st.integers(1, 2).flatmap(
            lambda n: st.lists(st.lists(children, min_size=n, max_size=n).map(tuple), min_size=n, max_size=n)
        ).map(lambda rows: MatLit(tuple(rows))),
        st.lists(st.tuples(st.sampled_from(["t", "s"]), children), max_size=2).map(lambda es: DerLit(tuple(es))),
        st.lists(st.integers(1, 9), max_size=3).map(lambda ks: IdemLit(tuple(ks))),
    )


asts = st.recursive(leaves, _extend, max_leaves=12)


@given(asts)
def test_print_then_parse_is_the_identity_on_trees(tree):
    assert parse(str(tree)) == tree


def test_print_then_parse_is_the_identity_on_values(workdir):
    session = session_for(workdir)
    alg = session.algebra
    rng = random.Random(17)
    corpus = []
    for _ in range(40):
        corpus.append(random_element(rng, alg, rational_prob=0.4))
        corpus.append(random_derivation(rng, alg))
        corpus.append(random_matrix(rng, alg, rng.choice((1, 2, 3))))
        corpus.append(random_matrix_derivation(rng, alg, 2))
        corpus.append(random_idempotent(rng, alg.space))
    for value in corpus:
        assert session.eval(format_value(value)) == value, format_value(value)


# -- evaluation ------------------------------------------------------------------------------


def test_eval_examples(workdir):
    s = session_for(workdir)
    run_command(s, "let x = [t ; 0]")
    assert format_value(s.eval("support(x)")) == "{1}"
    assert format_value(s.eval("pinv(0)")) == "0"
    assert format_value(s.eval("rho(x, x)")) == "0"
    assert format_value(s.eval("rho(x, 0)")) == "1/3"
    assert format_value(s.eval("measure(complement({1}))")) == "2/3"
    assert format_value(s.eval("jacobian(t, t^2)")) == "{}"
    assert format_value(s.eval("membership([t^2 ; s], t)")) == "{1}"
    assert format_value(s.eval("depends_on(x, t, 1)")) == "true"
    assert format_value(s.eval("apply(der{t: s}, t^2)")) == "2*t*s"
    assert format_value(s.eval("commutator(unit(2,1,2), unit(2,1,1))")) == "mat[[0, -1], [0, 0]]"
    assert format_value(s.eval("(1 + i)^2")) == "2*i"


def test_eval_errors(workdir):
    s = session_for(workdir)
    for source in ["y", "t + {1}", "support(t, s)", "1/(t - t)", "mat[[1, 2]]", "[t]", "unit(2, 3, 1)", "nosuch(t)"]:
        with pytest.raises(SessionError):
            s.eval(source)


def test_let_guards_names(workdir):
    s = session_for(workdir)
    for line in ["let t = 1", "let support = 1", "let i = 1"]:
        with pytest.raises((SessionError, ParseError)):
            run_command(s, line)


def test_algebra_file_validation():
    alg = load_algebra_text("# comment\natoms 2\n1/2 1/2\nvars t s u\n")
    assert alg.atom_count == 2 and alg.variables == ("t", "s", "u")
    for bad in ["atoms 2\n1\nvars t", "atoms 1\n1\nvars i", "atoms 1\n0\nvars t", "atoms 1\n1\nt s", "atoms x\n1\nvars t"]:
        with pytest.raises(SessionError):
            load_algebra_text(bad)


# -- commands -----------------------------------------------------------------------------------


def test_counterexample_then_check_additivity(workdir):
    s = session_for(workdir, "one.alg")
    report = run_command(s, "counterexample t s")
    assert report.text[1:] == ["cex(t) = 1", "cex(s) = 1", "cex(t + s) = 0"]
    report = run_command(s, "check-additivity cex")
    assert ("counter-pair", "t", "s") in report.records
    assert "counter-pair (t, s)" in report.render()


def test_certify_command(workdir):
    s = session_for(workdir, "one.alg")
    run_command(s, "counterexample t s")
    report = run_command(s, "certify cex t, t + s")
    assert report.ok and report.text[0].startswith("certified (t, t + s)")


def test_linearize_prints_the_recovered_pair(workdir):
    s = session_for(workdir)
    run_command(s, "let D = mder(mat[[0, t], [1, s]], der{s: [t ; 1]})")
    run_command(s, "let tl = twolocal(D)")
    report = run_command(s, "linearize tl --seed 3")
    assert report.ok
    assert "recovered a = mat[[0, t], [1, s]]" in report.text
    assert "recovered delta = der{s: [t ; 1]}" in report.text
    assert s.eval("_") == s.eval("D")


def test_decompose_zero_table(workdir):
    s = session_for(workdir)
    run_command(s, "let D0 = mder(mat[[0, 0], [0, 0]], der{})")
    report = run_command(s, "decompose D0")
    assert report.text == ["(a, delta) = (mat[[0, 0], [0, 0]], der{})"]


def test_reports_are_deterministic(workdir):
    script = [
        "load-algebra two.alg",
        "let M = mder(mat[[0, t], [s, 1]], der{t: 1/s})",
        "linearize M",
        "check-additivity M --samples 5",
        "counterexample t s",
        "check-additivity cex",
        "pinv([t + s ; 0])",
    ]
    outputs = []
    for _ in range(2):
        s = Session(base_dir=workdir)
        outputs.append(
            "\n".join(run_command(s, line).render(machine) for line in script for machine in (False, True))
        )
    assert outputs[0] == outputs[1]


def test_machine_records_are_tab_separated(workdir):
    s = session_for(workdir)
    text = run_command(s, "support([t ; 0])").render(machine=True)
    assert text.splitlines() == ["value\tstatus\tok", "value\tidempotent\t{1}"]


# -- command line ------------------------------------------------------------------------------------


def test_cli_run_script(workdir, capsys):
    (workdir / "demo.reg").write_text("load-algebra one.alg\n# comment\ncounterexample t s\ncheck-additivity cex\n")
    assert cli.main(["run", str(workdir / "demo.reg")]) == 0
    out = capsys.readouterr().out
    assert "> check-additivity cex" in out and "counter-pair (t, s)" in out


def test_cli_run_stops_at_errors(workdir, capsys):
    (workdir / "bad.reg").write_text("load-algebra one.alg\n(t+s)/(t-s\n")
    assert cli.main(["run", str(workdir / "bad.reg")]) == 1
    err = capsys.readouterr().err
    assert "bad.reg:2" in err and "offset 6" in err


def test_cli_repl_continues_after_errors(workdir):
    args = cli.build_parser().parse_args(["repl", str(workdir / "two.alg")])
    out = io.StringIO()
    assert cli.cmd_repl(args, out=out, inp=io.StringIO("foo\nsupport([t ; 0])\nquit\n")) == 0
    lines = out.getvalue().splitlines()
    assert "error: at offset 0: unbound name 'foo'" in lines
    assert lines[-1] == "{1}"


def test_cli_selftest_exit_status(monkeypatch, capsys):
    fake = [CriterionResult(1, "one", True, "fine", 0.1, 5.0), CriterionResult(2, "two", False, "broken", 0.1, None)]
    monkeypatch.setattr(cli, "run_all", lambda seed: fake)
    assert cli.main(["selftest", "--seed", "3"]) == 1
    out = capsys.readouterr().out
    assert "[PASS] criterion 1" in out and "[FAIL] criterion 2" in out and "1/2 criteria passed" in out
    assert cli.main(["selftest", "--machine"]) == 1
    assert capsys.readouterr().out.count("\t") > 0
