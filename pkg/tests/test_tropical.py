import itertools
from fractions import Fraction

import pytest

from posetnn.errors import (
    ArityError,
    NegativeExponentError,
    NotLatticeError,
    NotPosetPolynomialError,
    ParseError,
)
from posetnn.polytope import LatticePolytope, order_polytope_vertices
from posetnn.poset import (
    antichain,
    chain,
    enumerate_posets,
    lex_sum,
    linear_extensions,
    parse_poset,
    point,
)
from posetnn.tropical import (
    TropicalPolynomial,
    act_on_tropical,
    constant,
    eval_tropical,
    evaluate_presentation,
    expanded_presentation,
    format_polynomial,
    format_presentation,
    monomial,
    parse_polynomial,
    poset_from_tropical,
    polynomial_of_polytope,
    polytope_of_polynomial,
    rational,
    splice_chain,
    substitute_chain,
    sum_all,
    top,
    tr_of_poset,
    tropical_product,
    tropical_sum,
    variable,
    variable_names,
)
from posetnn.types import NEG_INF


def _small_posets(largest):
    return [p for n in range(1, largest + 1) for p in enumerate_posets(n)]


def test_from_terms_keeps_largest_coefficient():
    f = TropicalPolynomial.from_terms(1, [((1,), 2), ((1,), 5), ((0,), 0)])
    assert f.monomials == (((0,), Fraction(0)), ((1,), Fraction(5)))


def test_negative_exponent():
    with pytest.raises(NegativeExponentError):
        monomial((1, -1))


def test_exponent_arity():
    with pytest.raises(ArityError):
        TropicalPolynomial(nvars=2, monomials=(((1,), Fraction(0)),))


def test_eval_two_chain():
    assert eval_tropical(tr_of_poset(chain(2)), [1, 2]) == 3


def test_eval_at_origin_is_largest_coefficient():
    f = parse_polynomial("3 + 5*x + -2*x*y")
    assert eval_tropical(f, [0, 0]) == 5


def test_eval_example_polynomial():
    f = parse_polynomial("4*x^2*y + 1")
    assert eval_tropical(f, [1, 1]) == 7


def test_eval_negative_infinity():
    assert eval_tropical(constant(NEG_INF, 1), [3]) is NEG_INF
    assert eval_tropical(parse_polynomial("-inf + x"), [-2]) == -2


def test_eval_arity():
    with pytest.raises(ArityError):
        eval_tropical(tr_of_poset(chain(2)), [1])


def test_sum_and_product():
    f = tropical_sum(constant(0, 1), variable(0, 1))
    assert tropical_product(f, f) == parse_polynomial("0 + x + x^2")
    assert tropical_sum(f, constant(NEG_INF, 1)) == TropicalPolynomial(
        nvars=1,
        monomials=(((0,), Fraction(0)), ((1,), Fraction(0))),
    )
    assert tropical_product(f, constant(NEG_INF, 1)).finite_monomials() == []


def test_sum_arity():
    with pytest.raises(ArityError):
        tropical_sum(constant(0, 1), constant(0, 2))


def test_top():
    f = parse_polynomial("0 + x + 2*y + x*y + 3*x^2")
    assert top(f) == parse_polynomial("x*y + 3*x^2")


def test_tr_of_chain():
    assert tr_of_poset(chain(3)) == parse_polynomial("0 + z + y*z + x*y*z")
    assert format_polynomial(tr_of_poset(chain(2))) == "0 + y + x*y"


def test_tr_of_antichain():
    assert tr_of_poset(antichain(2)) == parse_polynomial("0 + x + y + x*y")


def test_tr_of_n_poset(n_poset):
    expected = parse_polynomial(
        "0 + z + y + y*z + w*y + x*y*z + w*y*z + w*x*y*z"
    )
    assert tr_of_poset(n_poset) == expected


def test_tr_of_poset_is_injective(posets4):
    polynomials = {tr_of_poset(poset) for poset in posets4}
    assert len(polynomials) == 16


def test_expanded_presentation_of_n_poset(n_poset):
    presentation = expanded_presentation(n_poset)
    assert len(presentation) == 5
    assert presentation.members[0] == parse_polynomial(
        "0 + z + y*z + x*y*z + w*x*y*z"
    )
    assert presentation.total() == tr_of_poset(n_poset)


def test_expanded_presentation_of_chain():
    presentation = expanded_presentation(chain(3))
    assert presentation.members == (tr_of_poset(chain(3)),)


def test_expanded_presentation_of_antichain():
    presentation = expanded_presentation(antichain(2))
    assert presentation.members == (
        parse_polynomial("0 + y + x*y"),
        parse_polynomial("0 + x + x*y"),
    )
    assert format_presentation(presentation) == (
        "(0 + y*(0 + x)) + (0 + x*(0 + y))"
    )


def test_presentation_evaluates_like_reduced_form(posets4, uniform):
    for poset in posets4:
        f = tr_of_poset(poset)
        members = expanded_presentation(poset).members
        for x in uniform(20, 4):
            x = list(x)
            assert eval_tropical(f, x) == max(
                eval_tropical(member, x) for member in members
            )


def test_polytope_of_polynomial():
    f = parse_polynomial("4*x^2*y + 1")
    polytope = polytope_of_polynomial(f)
    assert polytope.vertices == ((0, 0, 1), (2, 1, 4))


def test_polytope_of_constant():
    assert polytope_of_polynomial(constant(0, 2)).vertices == ((0, 0, 0),)


def test_polytope_of_poset_polynomial():
    polytope = polytope_of_polynomial(tr_of_poset(chain(2)))
    assert polytope.vertices == tuple(
        vertex + (0,) for vertex in order_polytope_vertices(chain(2)).vertices
    )


def test_polytope_of_rational_polynomial():
    f = parse_polynomial("1/2 + x + -3/2*x^2")
    polytope = polytope_of_polynomial(f)
    assert polytope.vertices == (
        (0, Fraction(1, 2)),
        (1, 0),
        (2, Fraction(-3, 2)),
    )
    assert polynomial_of_polytope(polytope) == f


def test_polytope_of_rational_polynomial_drops_edge_points():
    f = parse_polynomial("0 + 1/2*x + x^2")
    assert polytope_of_polynomial(f).vertices == ((0, 0), (2, 1))


def test_polytope_needs_finite_monomials():
    with pytest.raises(NotLatticeError):
        polytope_of_polynomial(constant(NEG_INF, 1))


def test_polynomial_of_polytope_needs_integer_exponents():
    polytope = LatticePolytope(dim=2, vertices=((0, 0), (Fraction(1, 2), 0)))
    with pytest.raises(NotLatticeError):
        polynomial_of_polytope(polytope)


def test_polynomial_of_polytope_round_trip():
    f = parse_polynomial("4*x^2*y + 1")
    assert polynomial_of_polytope(polytope_of_polynomial(f)) == f

    origin = LatticePolytope(dim=1, vertices=((0,),))
    assert polynomial_of_polytope(origin) == constant(0, 0)


def test_polynomial_of_polytope_reduces():
    f = parse_polynomial("0 + x + x^2")
    assert polynomial_of_polytope(polytope_of_polynomial(f)) == (
        parse_polynomial("0 + x^2")
    )


def test_polynomial_of_n_polytope(n_poset):
    polytope = polytope_of_polynomial(tr_of_poset(n_poset))
    assert polynomial_of_polytope(polytope) == tr_of_poset(n_poset)


def test_polynomial_of_polytope_negative_exponent():
    polytope = LatticePolytope(dim=2, vertices=((-1, 0), (0, 0)))
    with pytest.raises(NegativeExponentError):
        polynomial_of_polytope(polytope)


def test_poset_from_tropical(n_poset):
    assert poset_from_tropical(tr_of_poset(n_poset)) == n_poset
    assert poset_from_tropical(parse_polynomial("0 + x")) == point()


def test_poset_from_tropical_round_trip():
    for poset in _small_posets(4):
        assert poset_from_tropical(tr_of_poset(poset)) == poset


def test_poset_from_tropical_rejects():
    with pytest.raises(NotPosetPolynomialError):
        poset_from_tropical(parse_polynomial("0 + x*y"))
    with pytest.raises(NotPosetPolynomialError):
        poset_from_tropical(parse_polynomial("0 + 1*x"))
    with pytest.raises(NotPosetPolynomialError):
        poset_from_tropical(parse_polynomial("x + x*y"))
    with pytest.raises(NotPosetPolynomialError):
        poset_from_tropical(parse_polynomial("0 + x^2"))


def test_act_on_monomials():
    result = act_on_tropical(
        parse_poset("3; 0<2, 1<2"),
        [
            parse_polynomial("x", nvars=3),
            parse_polynomial("x^2", nvars=3),
            parse_polynomial("z", nvars=3),
        ],
        shared_variables=True,
    )
    assert format_polynomial(result) == "0 + z + x*z + x^2*z + x^3*z"


def test_act_on_binomial():
    result = act_on_tropical(
        parse_poset("3; 0<2, 1<2"),
        [
            parse_polynomial("x", nvars=3),
            parse_polynomial("x^2 + y", nvars=3),
            parse_polynomial("z", nvars=3),
        ],
        shared_variables=True,
    )
    assert result == parse_polynomial(
        "0 + z + x*z + y*z + x^2*z + x*y*z + x^3*z"
    )


def test_act_unit():
    f = parse_polynomial("0 + 1*x + y + -1*x*y")
    assert act_on_tropical(point(), [f]) == f


def test_act_matches_lex_sum():
    small = _small_posets(2)
    for outer in small:
        for inner in itertools.product(small, repeat=outer.n):
            result = act_on_tropical(
                outer, [tr_of_poset(q) for q in inner]
            )
            assert result == tr_of_poset(lex_sum(outer, list(inner)))


def test_act_arity():
    with pytest.raises(ArityError):
        act_on_tropical(chain(2), [tr_of_poset(point())])


def test_act_shared_needs_equal_variables():
    with pytest.raises(ArityError):
        act_on_tropical(
            antichain(2),
            [constant(0, 1), constant(0, 2)],
            shared_variables=True,
        )


def test_evaluation_differs_from_action():
    inputs = [tr_of_poset(chain(2)), tr_of_poset(point())]
    summands = evaluate_presentation(antichain(2), inputs)
    action = act_on_tropical(antichain(2), inputs)

    assert len(summands) == 2
    assert (
        len(linear_extensions(lex_sum(antichain(2), [chain(2), point()])))
        == 3
    )
    assert summands[0] == parse_polynomial("0 + z + y*z + x*y*z")
    assert summands[1] == parse_polynomial("0 + y + x*y + x*y*z")
    assert sum_all(summands, 3) == action
    assert len(action) == 6


def test_substitute_chain():
    three = tr_of_poset(chain(3))
    assert substitute_chain(2, 1, tr_of_poset(chain(2))) == three
    assert substitute_chain(2, 2, tr_of_poset(chain(2))) == three


def test_substitute_chain_matches_action():
    g = tr_of_poset(chain(2))
    assert substitute_chain(2, 1, g) == act_on_tropical(
        chain(2), [g, tr_of_poset(point())]
    )


def test_substitute_into_one_chain():
    g = parse_polynomial("0 + 2*x + x*y")
    assert substitute_chain(1, 1, g) == g


def test_substitute_chain_slot():
    with pytest.raises(ArityError):
        substitute_chain(2, 0, tr_of_poset(point()))
    with pytest.raises(ArityError):
        substitute_chain(2, 3, tr_of_poset(point()))


def test_splice_chain_of_points():
    points = [tr_of_poset(point())] * 4
    assert splice_chain(points) == tr_of_poset(chain(4))


def test_rational_arithmetic(uniform):
    f = rational(parse_polynomial("0 + x + 2*y"))
    g = rational(parse_polynomial("1 + x*y"), parse_polynomial("0 + y"))
    for x in uniform(20, 2):
        x = [Fraction(v) for v in x]
        fx, gx = f.evaluate(x), g.evaluate(x)
        assert f.times(g).evaluate(x) == fx + gx
        assert f.divide(g).evaluate(x) == fx - gx
        assert f.plus(g).evaluate(x) == max(fx, gx)


def test_rational_needs_finite_denominator():
    with pytest.raises(ArityError):
        rational(constant(0, 1), constant(NEG_INF, 1))


def test_variable_names():
    assert variable_names(2) == ["x", "y"]
    assert variable_names(4) == ["w", "x", "y", "z"]
    assert variable_names(5) == ["x1", "x2", "x3", "x4", "x5"]


def test_format_polynomial():
    f = parse_polynomial("-3/2*x^2*y + 5 + -inf*y")
    assert format_polynomial(f) == "5 + -inf*y + -3/2*x^2*y"
    assert format_polynomial(constant(NEG_INF, 0)) == "-inf"
    assert format_polynomial(TropicalPolynomial(nvars=1, monomials=())) == (
        "-inf"
    )


def test_format_parse_round_trip(posets4):
    for poset in posets4:
        f = tr_of_poset(poset)
        assert parse_polynomial(format_polynomial(f), nvars=4) == f


def test_parse_numbered_variables():
    f = parse_polynomial("x1 + x5")
    assert f.nvars == 5


def test_parse_unknown_variable():
    with pytest.raises(ParseError):
        parse_polynomial("a + b")
    with pytest.raises(ParseError):
        parse_polynomial("w", nvars=2)
