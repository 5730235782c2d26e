import random
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from randgen import exprs, random_document

from jetvar.dsl import (
    ModelError,
    expr_from_json,
    expr_to_json,
    parse_expr,
    parse_model,
    render_expr,
    render_latex,
    render_model,
)
from jetvar.dsl.lexer import tokenize
from jetvar.kernel import Expr

MODELS = Path(__file__).resolve().parents[1] / "models"
MECH = parse_model((MODELS / "mechanics.jv").read_text())


def diagnostics(text):
    with pytest.raises(ModelError) as info:
        parse_model(text)
    return info.value.diagnostics


HEAD = "bundle { base t\n fields y\n order 2 }\n"


# ---------------------------------------------------------------- parsing


def test_lexer_tracks_positions():
    toks = tokenize("lagrangian = y_tt  # comment\n  + 1/2")
    texts = [(t.text, t.line, t.col) for t in toks if t.kind != "EOF"]
    assert texts[:5] == [("lagrangian", 1, 1), ("=", 1, 12), ("y", 1, 14), ("_", 1, 15), ("tt", 1, 16)]
    assert ("+", 2, 3) in texts


def test_corpus_parses():
    assert set(MECH.lagrangians) == {"oscillator", "quartic", "higher", "forced"}
    assert MECH.spec.max_order == 4
    assert render_expr(MECH.lagrangians["oscillator"], MECH.spec.coords) == "1/2*y_t^2 - 1/2*omega^2*y^2"
    bf = parse_model((MODELS / "bf2d.jv").read_text())
    assert bf.spec.fields == ("A[0]", "A[1]", "B")
    assert bf.gauge.params == ("xi[0]", "xi[1]", "eps")
    kdv = parse_model((MODELS / "kdv.jv").read_text())
    assert kdv.spec.max_order == 6 and "evolution" in kdv.sources


def test_defs_expand_like_direct_entry():
    maxwell = parse_model((MODELS / "maxwell.jv").read_text())
    direct = parse_expr("1/2*(A[1]_t - A[0]_x)^2 + 1/2*(A[2]_t - A[0]_y)^2 + 1/2*(A[3]_t - A[0]_z)^2"
                        " - 1/2*(A[2]_x - A[1]_y)^2 - 1/2*(A[3]_x - A[1]_z)^2 - 1/2*(A[3]_y - A[2]_z)^2",
                        maxwell)
    assert maxwell.lagrangians["maxwell"] == direct


def test_specific_defs_win():
    doc = parse_model("bundle { base t, x\n fields A[mu] }\ndefs {\n G[mu] = 1\n G[0] = 2\n}\n"
                      "lagrangian = G[0] + 10*G[1]\n")
    assert doc.lagrangians["L"] == 12


def test_default_order_leaves_room_for_euler_lagrange():
    assert parse_model("bundle { base t\n fields y }\nlagrangian = y_tt^2\n").spec.max_order == 4
    assert parse_model("bundle { base t\n fields y }\nlagrangian = y\n").spec.max_order == 2


def test_statements_and_exact_decimals():
    doc = parse_model("bundle { base t; fields y; order 2 }\nlagrangian = 0.25*y^2; lagrangian K = y^-1*y")
    assert doc.lagrangians["L"] == parse_expr("1/4*y^2", doc)
    assert doc.lagrangians["K"] == 1


# ---------------------------------------------------------------- diagnostics


@pytest.mark.parametrize("text, message, line, col", [
    (HEAD + "lagrangian = y_t^2 + q\n", "undeclared identifier 'q'", 4, 22),
    (HEAD + "lagrangian = y_ttt^2\n", "jet order 3 exceeds declared cap 2", 4, 14),
    (HEAD + "lagrangian = (y_t^2\n", "expected ')', found end of file", 5, 1),
    ("lagrangian = y\n" + HEAD, "the bundle block must come first", 1, 1),
    (HEAD + "lagrangian = y $ 2\n", "unexpected character '$'", 4, 16),
    ("bundle { base t, x\n fields A[mu] }\ndefs {\n G[mu] = 1\n G[mu] = 2\n}\n", "G[0] is defined twice", 5, 2),
    ("bundle { base t\n fields y }\nparams { gauge eps\n r 1\n k 1 }\nlagrangian = y*eps\n",
     "parameter fields may only appear in lift and defs blocks", 6, 16),
])
def test_diagnostics(text, message, line, col):
    diags = diagnostics(text)
    assert (diags[0].message, diags[0].line, diags[0].column) == (message, line, col)
    assert diags[0].severity == "error"
    assert diags[0].format("m.jv").startswith(f"m.jv:{line}:{col}: error: ")


def test_diagnostic_json_shape():
    d = diagnostics(HEAD + "lagrangian = q\n")[0].to_json()
    assert set(d) == {"severity", "message", "line", "column", "length"}


def test_parse_expr_respects_context():
    with pytest.raises(ModelError):
        parse_expr("y_t + zz", MECH)
    assert parse_expr("f_t*y", MECH) == parse_expr("y*f_t", MECH)


# ---------------------------------------------------------------- rendering


def test_render_formats():
    L = MECH.lagrangians["forced"]
    coords = MECH.spec.coords
    assert render_expr(L, coords) == "-(f*y - 1/2*y^2*y_t^2)"
    assert render_latex(L, coords) == r"-\left(f y - \frac{1}{2} y^{2} {y_{t}}^{2}\right)"
    assert render_latex(MECH.lagrangians["oscillator"], coords) == \
        r"\frac{1}{2} {y_{t}}^{2} - \frac{1}{2} \omega^{2} y^{2}"


def test_zero_renders_in_every_format():
    assert render_expr(Expr()) == "0"
    assert render_latex(Expr()) == "0"
    assert expr_from_json(expr_to_json(Expr())) == Expr()


def test_json_schema():
    js = expr_to_json(MECH.lagrangians["oscillator"])
    assert js["schema"] == "jetvar/expr@1"
    assert js["terms"][0] == {"coeff": "1/2", "factors": [[{"kind": "jet", "name": "y", "alpha": [1]}, 2]]}
    with pytest.raises(ValueError):
        expr_from_json({"schema": "other", "terms": []})


@settings(max_examples=60, deadline=None)
@given(exprs(MECH.spec, order=2, max_degree=3))
def test_render_parse_round_trip(e):
    assert parse_expr(render_expr(e, MECH.spec.coords), MECH) == e
    assert expr_from_json(expr_to_json(e)) == e


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_model_round_trip(seed):
    doc = random_document(random.Random(seed))
    text = render_model(doc)
    assert render_model(parse_model(text)) == text
