import pytest
from hypothesis import given, settings, strategies as st

from satmc.ctmc import DeadlockWarning, build_state_space
from satmc.errors import ModelError, ParseError
from satmc.lang import (
    ProbQuery,
    RewardQuery,
    SteadyQuery,
    Until,
    bind_constants,
    format_expr,
    format_model,
    parse_expression,
    parse_model,
    parse_properties,
    parse_property,
)
from satmc.lang.expr import evaluate
from satmc.ram.models import single_satellite_source

MERGED = "ctmc module m x:[0..2] init 0; [] x=0 -> 0.5:(x'=0) + 0.8:(x'=1); endmodule"
SPLIT = "ctmc module m x:[0..2] init 0; [] x=0 -> 0.5:(x'=0); [] x=0 -> 0.8:(x'=1); endmodule"


def test_parse_merged_command():
    ast = parse_model(MERGED)
    assert len(ast.modules) == 1
    (cmd,) = ast.modules[0].commands
    assert len(cmd.updates) == 2


def test_empty_module():
    ast = parse_model("ctmc module m x:[0..1] init 0; endmodule")
    assert ast.modules[0].commands == ()


def test_split_and_merged_differ_syntactically_but_not_semantically():
    a, b = parse_model(MERGED), parse_model(SPLIT)
    assert a != b
    with pytest.warns(DeadlockWarning):
        ca, cb = build_state_space(a), build_state_space(b)
    assert (ca.rates != cb.rates).nnz == 0
    assert ca.rates.toarray().tolist() == cb.rates.toarray().tolist()


@pytest.mark.parametrize(
    "text, kind",
    [
        ("P=?[F<=129600 s=5]", ProbQuery),
        ("P=?[!p2 U p1]", ProbQuery),
        ("P=?[F<=0 s=5]", ProbQuery),
        ('R{"num_repair"}=?[C<=T]', RewardQuery),
        ("S=?[s<=3]", SteadyQuery),
        ("P>=0.5 [ X s=1 ]", ProbQuery),
    ],
)
def test_parse_queries(text, kind):
    assert isinstance(parse_property(text), kind)


def test_unbounded_until_shape():
    q = parse_property("P=?[!p2 U p1]")
    assert isinstance(q.path, Until)
    assert q.path.interval.upper is None


@pytest.mark.parametrize(
    "text",
    [
        "P=?[F<=129600 s=5]",
        "P=?[true U[3,7] s=1]",
        'R{"availability"}=?[C<=T]/T',
        "S>0.9 [s<=3]",
        "P<0.1 [X>=2 s=0] & !(s=1)",
        "P=?[(s=0 | s=1) U<=5 P>0.5 [F s=2]]",
        "s=0 ? 1 : 2 + 3*x",
    ],
)
def test_property_round_trip(text):
    expr = parse_property(text)
    assert parse_property(format_expr(expr)) == expr


def test_model_round_trip():
    ast = parse_model(single_satellite_source())
    assert parse_model(format_model(ast)) == ast


def test_parse_properties_skips_comments():
    props = parse_properties("// header\nP=?[F<=1 s=1]\n\nS=?[s=0] // trailing\n")
    assert len(props) == 2


@pytest.mark.parametrize(
    "source, line",
    [
        ("ctmc\nmodule m\n x : [0..2] init 0;\n [] x=0 -> 1 (x'=1);\nendmodule", 4),
        ("ctmc\nmodule m\n x : [0..2] init 0\nendmodule", 4),
        ("ctmc\nconst double a = ;", 2),
    ],
)
def test_parse_errors_carry_location(source, line):
    with pytest.raises(ParseError) as info:
        parse_model(source)
    assert info.value.line == line
    assert info.value.column >= 1


@pytest.mark.parametrize(
    "source, message",
    [
        ("ctmc module m x:[0..2] init 0; [] y=0 -> 1:(x'=1); endmodule", "y"),
        ("ctmc module m x:[0..2] init 0; [] x=0 -> -1:(x'=1); endmodule", "rate"),
        ("ctmc module m x:[0..2] init 0; endmodule module m y:[0..1] init 0; endmodule", "m"),
        ("ctmc module m x:[0..2] init 5; endmodule", "init"),
    ],
)
def test_semantic_errors(source, message):
    with pytest.raises(ModelError) as info:
        parse_model(source)
    assert message in str(info.value)


def test_bind_overrides():
    ast = parse_model(single_satellite_source())
    bound = bind_constants(ast, {"r": 0.5, "MTTR": 0.1})
    values = {c.name: c.value.value for c in bound.constants}
    assert values["r"] == 0.5
    assert values["mu"] == pytest.approx(10.0)
    with pytest.raises(ModelError, match="unknown constant"):
        bind_constants(ast, {"zz": 1})


def test_missing_constant_value():
    ast = parse_model("ctmc const double k; module m x:[0..1] init 0; [] x=0 -> k:(x'=1); endmodule")
    with pytest.raises(ModelError):
        build_state_space(ast)
    with pytest.warns(DeadlockWarning):
        assert build_state_space(ast, {"k": 2.0}).exit_rates[0] == 2.0


@settings(max_examples=60, deadline=None)
@given(a=st.integers(-50, 50), b=st.integers(1, 50), c=st.integers(-50, 50))
def test_arithmetic_matches_python(a, b, c):
    expr = parse_expression(f"{a} + {b} * {c} - ({a}) / {b}")
    assert evaluate(expr, {}) == pytest.approx(a + b * c - a / b)
    again = parse_expression(format_expr(expr))
    assert again == expr


@pytest.mark.parametrize(
    "text, value",
    [
        ("true => false", False),
        ("false => false", True),
        ("true <=> !false", True),
        ("min(3, 2) + max(1, 4)", 6),
        ("floor(2.7) + ceil(0.2)", 3),
        ("mod(7, 3)", 1),
        ("pow(2, 10)", 1024),
        ("1 < 2 ? 5 : 6", 5),
    ],
)
def test_expression_values(text, value):
    assert evaluate(parse_expression(text), {}) == value
