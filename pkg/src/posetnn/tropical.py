"""
Tropical (max-plus) polynomials.

A polynomial is a finite set of monomials, each an exponent vector with a
coefficient, and evaluates to the maximum over its monomials of the
coefficient plus the dot product of the exponents with the input.
"""
import dataclasses
import logging
import math
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

from posetnn import hull, lexer, parser
from posetnn import nodes as n
from posetnn.errors import (
    ArityError,
    DimensionError,
    NegativeExponentError,
    NotLatticeError,
    NotPosetPolynomialError,
    ParseError,
)
from posetnn.polytope import (
    LatticePolytope,
    action_candidates,
    is_lattice_point,
    order_polytope_vertices,
)
from posetnn.poset import (
    LinearExtension,
    Poset,
    linear_extensions,
)
from posetnn.types import NEG_INF, Coefficient, NegativeInfinity

logger = logging.getLogger(__name__)

Exponent = tuple[int, ...]
Monomial = tuple[Exponent, Coefficient]
Scalar = Union[int, float, Fraction]


def _monomial_key(monomial: Monomial) -> tuple[int, Exponent]:
    exp, _ = monomial
    return (sum(exp), exp)


@dataclasses.dataclass(frozen=True)
class TropicalPolynomial:
    """
    A reduced tropical polynomial: exponent vectors are distinct and kept in
    graded lexicographic order.
    """

    nvars: int
    monomials: tuple[Monomial, ...]

    def __post_init__(self) -> None:
        for exp, coef in self.monomials:
            if len(exp) != self.nvars:
                raise ArityError(
                    f"exponent {exp!r} does not have {self.nvars} entries"
                )
            if any(e < 0 for e in exp):
                raise NegativeExponentError(f"negative exponent in {exp!r}")
            assert isinstance(coef, (Fraction, NegativeInfinity))
        assert list(self.monomials) == sorted(
            self.monomials, key=_monomial_key
        )
        assert len({exp for exp, _ in self.monomials}) == len(self.monomials)

    @classmethod
    def from_terms(
        cls, nvars: int, terms: Iterable[tuple[Sequence[int], object]]
    ) -> "TropicalPolynomial":
        """
        Reduces `terms`, keeping the largest coefficient for each exponent.
        """
        best: dict[Exponent, Coefficient] = {}
        for exp, coef in terms:
            key = tuple(int(e) for e in exp)
            value: Coefficient = (
                NEG_INF if coef is NEG_INF else Fraction(coef)  # type: ignore
            )
            if key not in best or value > best[key]:
                best[key] = value
        return cls(
            nvars=nvars,
            monomials=tuple(sorted(best.items(), key=_monomial_key)),
        )

    def coefficient(self, exp: Sequence[int]) -> Coefficient:
        for candidate, coef in self.monomials:
            if candidate == tuple(exp):
                return coef
        return NEG_INF

    def finite_monomials(self) -> list[Monomial]:
        return [
            (exp, coef) for exp, coef in self.monomials if coef is not NEG_INF
        ]

    def degree(self) -> int:
        return max((sum(exp) for exp, _ in self.finite_monomials()), default=0)

    def __len__(self) -> int:
        return len(self.monomials)


def constant(value: object, nvars: int = 0) -> TropicalPolynomial:
    return TropicalPolynomial.from_terms(nvars, [((0,) * nvars, value)])


def monomial(exp: Sequence[int], coef: object = 0) -> TropicalPolynomial:
    return TropicalPolynomial.from_terms(len(exp), [(exp, coef)])


def variable(index: int, nvars: int) -> TropicalPolynomial:
    if not 0 <= index < nvars:
        raise ArityError(f"variable {index} out of range for {nvars}")
    return monomial(tuple(int(i == index) for i in range(nvars)))


def tropical_sum(
    f: TropicalPolynomial, g: TropicalPolynomial
) -> TropicalPolynomial:
    if f.nvars != g.nvars:
        raise ArityError(
            f"cannot add polynomials in {f.nvars} and {g.nvars} variables"
        )
    return TropicalPolynomial.from_terms(
        f.nvars, list(f.monomials) + list(g.monomials)
    )


def tropical_product(
    f: TropicalPolynomial, g: TropicalPolynomial
) -> TropicalPolynomial:
    if f.nvars != g.nvars:
        raise ArityError(
            f"cannot multiply polynomials in {f.nvars} and {g.nvars} "
            f"variables"
        )
    return TropicalPolynomial.from_terms(
        f.nvars,
        [
            (tuple(a + b for a, b in zip(exp_f, exp_g)), coef_f + coef_g)
            for exp_f, coef_f in f.monomials
            for exp_g, coef_g in g.monomials
        ],
    )


def embed_variables(
    f: TropicalPolynomial, offset: int, nvars: int
) -> TropicalPolynomial:
    """
    Moves the variables of `f` to positions `offset..offset+f.nvars-1` of a
    space with `nvars` variables.
    """
    if offset < 0 or offset + f.nvars > nvars:
        raise ArityError(
            f"cannot place {f.nvars} variables at offset {offset} "
            f"of {nvars}"
        )
    after = nvars - offset - f.nvars
    return TropicalPolynomial.from_terms(
        nvars,
        [
            ((0,) * offset + exp + (0,) * after, coef)
            for exp, coef in f.monomials
        ],
    )


def top(f: TropicalPolynomial) -> TropicalPolynomial:
    """
    The finite monomials of `f` of highest total degree.
    """
    finite = f.finite_monomials()
    degree = f.degree()
    return TropicalPolynomial.from_terms(
        f.nvars, [(exp, coef) for exp, coef in finite if sum(exp) == degree]
    )


def eval_tropical(
    f: TropicalPolynomial, x: Sequence[Scalar]
) -> Union[Scalar, NegativeInfinity]:
    if len(x) != f.nvars:
        raise ArityError(
            f"polynomial in {f.nvars} variables evaluated at {len(x)} values"
        )

    if not all(math.isfinite(xi) for xi in x):
        return _eval_float(f, x)

    # Every value is exact; float inputs get the maximum rounded once.
    exact = [Fraction(xi) for xi in x]
    scale = math.lcm(1, *(xi.denominator for xi in exact))
    scaled = [int(xi * scale) for xi in exact]

    best: Union[Fraction, NegativeInfinity] = NEG_INF
    for exp, coef in f.monomials:
        if coef is NEG_INF:
            continue
        total = sum(e * xi for e, xi in zip(exp, scaled) if e)
        value = coef + Fraction(total, scale)
        if value > best:
            best = value

    if best is NEG_INF or not any(isinstance(xi, float) for xi in x):
        return best
    return float(best)


def _eval_float(
    f: TropicalPolynomial, x: Sequence[Scalar]
) -> Union[Scalar, NegativeInfinity]:
    best: Union[Scalar, NegativeInfinity] = NEG_INF
    for exp, coef in f.monomials:
        if coef is NEG_INF:
            continue
        value: Scalar = coef  # type: ignore[assignment]
        for e, xi in zip(exp, x):
            if e:
                value = value + e * xi
        if value > best:
            best = value
    return best


# === Posets ===================================================================


def tr_of_poset(poset: Poset) -> TropicalPolynomial:
    polytope = order_polytope_vertices(poset)
    return TropicalPolynomial.from_terms(
        poset.n,
        [(tuple(int(v) for v in vertex), 0) for vertex in polytope.vertices],
    )


def chain_polynomial(extension: LinearExtension) -> TropicalPolynomial:
    """
    The polynomial of the chain `extension`, one monomial for each of its
    top segments.
    """
    n = len(extension)
    exp = [0] * n
    terms = [(tuple(exp), 0)]
    for point in reversed(extension.perm):
        exp[point] = 1
        terms.append((tuple(exp), 0))
    return TropicalPolynomial.from_terms(n, terms)


@dataclasses.dataclass(frozen=True)
class ExpandedPresentation:
    """
    A poset polynomial written as the tropical sum of the chain polynomials
    of the linear extensions of the poset, in extension order.
    """

    source: Poset
    extensions: tuple[LinearExtension, ...]
    members: tuple[TropicalPolynomial, ...]

    def __post_init__(self) -> None:
        assert len(self.extensions) == len(self.members)
        assert len(set(self.members)) == len(self.members)

    def total(self) -> TropicalPolynomial:
        result = constant(NEG_INF, self.source.n)
        for member in self.members:
            result = tropical_sum(result, member)
        return TropicalPolynomial.from_terms(
            self.source.n, result.finite_monomials()
        )

    def __len__(self) -> int:
        return len(self.members)


def expanded_presentation(poset: Poset) -> ExpandedPresentation:
    extensions = tuple(linear_extensions(poset))
    return ExpandedPresentation(
        source=poset,
        extensions=extensions,
        members=tuple(chain_polynomial(ext) for ext in extensions),
    )


def poset_from_tropical(f: TropicalPolynomial) -> Poset:
    """
    Recovers the poset of a poset polynomial from its maximal divisibility
    chains of monomials.  Each chain reads off a linear extension and the
    poset is their intersection.
    """
    for exp, coef in f.monomials:
        if coef != 0 or any(e not in (0, 1) for e in exp):
            raise NotPosetPolynomialError(
                "poset polynomials have zero coefficients and 0/1 exponents"
            )

    n = f.nvars
    masks = {
        sum(1 << i for i, e in enumerate(exp) if e) for exp, _ in f.monomials
    }
    if 0 not in masks:
        raise NotPosetPolynomialError("missing constant monomial")

    orders: list[list[int]] = []
    added: list[int] = []

    def _follow(mask: int) -> None:
        if len(added) == n:
            # Points are added top down.
            orders.append(list(reversed(added)))
            return
        for i in range(n):
            if mask >> i & 1 or mask | (1 << i) not in masks:
                continue
            added.append(i)
            _follow(mask | (1 << i))
            added.pop()

    _follow(0)
    if not orders:
        raise NotPosetPolynomialError("no chain of monomials reaches degree n")

    positions = [LinearExtension(perm=tuple(p)).positions() for p in orders]
    relations = [
        (i, j)
        for i in range(n)
        for j in range(n)
        if i != j and all(pos[i] < pos[j] for pos in positions)
    ]
    poset = Poset.from_relations(n, relations)

    if tr_of_poset(poset) != f:
        raise NotPosetPolynomialError(
            "monomials are not the up-sets of any poset"
        )
    return poset


# === Newton polytopes =========================================================


def polytope_of_polynomial(f: TropicalPolynomial) -> LatticePolytope:
    """
    The convex hull of the points `(exp, coef)` of the finite monomials of
    `f`.  Rational coefficients give a polytope with a rational last
    coordinate.
    """
    return LatticePolytope.from_points(
        _newton_points(f), dim=f.nvars + 1, lattice=False
    )


def polynomial_of_polytope(polytope: LatticePolytope) -> TropicalPolynomial:
    if polytope.dim < 1:
        raise DimensionError("polytope needs a coefficient coordinate")

    terms = []
    for vertex in polytope.vertices:
        exp = vertex[:-1]
        if not is_lattice_point(exp):
            raise NotLatticeError(
                f"vertex {vertex!r} has a fractional exponent"
            )
        if any(value < 0 for value in exp):
            raise NegativeExponentError(
                f"vertex {vertex!r} has a negative exponent"
            )
        terms.append((tuple(int(e) for e in exp), vertex[-1]))

    return TropicalPolynomial.from_terms(polytope.dim - 1, terms)


def _newton_points(f: TropicalPolynomial) -> list[tuple[Fraction, ...]]:
    finite = f.finite_monomials()
    if not finite:
        raise NotLatticeError("polynomial has no finite monomials")
    return [
        tuple(Fraction(e) for e in exp) + (coef,)  # type: ignore[operator]
        for exp, coef in finite
    ]


# === Operad action ============================================================


def act_on_tropical(
    poset: Poset,
    fs: Sequence[TropicalPolynomial],
    *,
    shared_variables: bool = False,
) -> TropicalPolynomial:
    """
    The action of `poset` on the polynomials `fs`.

    By default the variables of `fs[i]` occupy block `i` of the result, in
    the block order of `lex_sum`.  With `shared_variables` every input is a
    polynomial in the same variables and the result is too.
    """
    if len(fs) != poset.n:
        raise ArityError(
            f"poset of size {poset.n} takes {poset.n} arguments, "
            f"got {len(fs)}"
        )
    if shared_variables and len({f.nvars for f in fs}) > 1:
        raise ArityError("shared variables need equal variable counts")

    blocks = [
        [tuple(point) for point in hull.hull_vertices(_newton_points(f))]
        for f in fs
    ]

    def _top(block: Sequence[tuple]) -> list[tuple]:
        # The last coordinate is the coefficient and does not count.
        degree = max(sum(point[:-1]) for point in block)
        return [point for point in block if sum(point[:-1]) == degree]

    candidates = action_candidates(poset, blocks, top=_top)
    flat = [
        tuple(value for part in parts for value in part)
        for parts in candidates
    ]
    extreme = set(hull.hull_vertices(flat))

    widths = [f.nvars + 1 for f in fs]
    offsets = [sum(widths[:i]) for i in range(len(widths))]

    if shared_variables:
        nvars = fs[0].nvars if fs else 0
    else:
        nvars = sum(f.nvars for f in fs)

    terms = []
    for point in extreme:
        parts = [
            point[offset : offset + width]
            for offset, width in zip(offsets, widths)
        ]
        coef = sum((part[-1] for part in parts), Fraction(0))
        if shared_variables:
            exp = tuple(
                sum(int(part[k]) for part in parts) for k in range(nvars)
            )
        else:
            exp = tuple(int(value) for part in parts for value in part[:-1])
        terms.append((exp, coef))

    logger.debug(
        "action kept %d of %d candidates", len(extreme), len(candidates)
    )
    return TropicalPolynomial.from_terms(nvars, terms)


def splice_chain(gs: Sequence[TropicalPolynomial]) -> TropicalPolynomial:
    """
    Evaluates the nested factorization of a chain with `gs[k]` in slot `k`,
    slot 0 at the bottom.  Each slot contributes itself plus its top degree
    part times everything below it.  The variables of `gs[k]` occupy block
    `k` of the result.
    """
    nvars = sum(g.nvars for g in gs)
    offsets = [sum(g.nvars for g in gs[:k]) for k in range(len(gs))]

    result = constant(0, nvars)
    for offset, g in zip(offsets, gs):
        placed = embed_variables(g, offset, nvars)
        result = tropical_sum(placed, tropical_product(top(placed), result))
    return result


def substitute_chain(
    length: int, slot: int, g: TropicalPolynomial
) -> TropicalPolynomial:
    """
    The chain polynomial on `length` points with `g` spliced into `slot`
    (counted from 1 at the bottom) and a fresh variable in every other slot.
    """
    if not 1 <= slot <= length:
        raise ArityError(f"slot {slot} out of range for chain of {length}")
    plain = tropical_sum(constant(0, 1), variable(0, 1))
    return splice_chain(
        [g if k == slot else plain for k in range(1, length + 1)]
    )


def evaluate_presentation(
    poset: Poset, gs: Sequence[TropicalPolynomial]
) -> list[TropicalPolynomial]:
    """
    Evaluates the expanded presentation of `poset` on `gs`, chain by chain,
    giving one summand per linear extension.  The variables of `gs[i]`
    occupy block `i`.
    """
    if len(gs) != poset.n:
        raise ArityError(
            f"poset of size {poset.n} takes {poset.n} arguments, "
            f"got {len(gs)}"
        )

    nvars = sum(g.nvars for g in gs)
    offsets = [sum(g.nvars for g in gs[:k]) for k in range(len(gs))]

    summands = []
    for extension in linear_extensions(poset):
        result = constant(0, nvars)
        for point in extension.perm:
            placed = embed_variables(gs[point], offsets[point], nvars)
            result = tropical_sum(
                placed, tropical_product(top(placed), result)
            )
        summands.append(result)
    return summands


def sum_all(
    polynomials: Sequence[TropicalPolynomial], nvars: int
) -> TropicalPolynomial:
    result = constant(NEG_INF, nvars)
    for f in polynomials:
        result = tropical_sum(result, f)
    return TropicalPolynomial.from_terms(nvars, result.finite_monomials())


# === Rational functions =======================================================


@dataclasses.dataclass(frozen=True)
class TropicalRational:
    """
    A tropical fraction, evaluating to `numerator(x) - denominator(x)`.
    """

    numerator: TropicalPolynomial
    denominator: TropicalPolynomial

    def __post_init__(self) -> None:
        if self.numerator.nvars != self.denominator.nvars:
            raise ArityError("numerator and denominator variables differ")
        if not self.denominator.finite_monomials():
            raise ArityError("denominator is identically -inf")

    @property
    def nvars(self) -> int:
        return self.numerator.nvars

    def evaluate(self, x: Sequence[Scalar]) -> Union[Scalar, NegativeInfinity]:
        top_value = eval_tropical(self.numerator, x)
        bottom_value = eval_tropical(self.denominator, x)
        if top_value is NEG_INF:
            return NEG_INF
        assert not isinstance(bottom_value, NegativeInfinity)
        return top_value - bottom_value  # type: ignore[operator]

    def times(self, other: "TropicalRational") -> "TropicalRational":
        return TropicalRational(
            numerator=tropical_product(self.numerator, other.numerator),
            denominator=tropical_product(self.denominator, other.denominator),
        )

    def divide(self, other: "TropicalRational") -> "TropicalRational":
        return TropicalRational(
            numerator=tropical_product(self.numerator, other.denominator),
            denominator=tropical_product(self.denominator, other.numerator),
        )

    def plus(self, other: "TropicalRational") -> "TropicalRational":
        return TropicalRational(
            numerator=tropical_sum(
                tropical_product(self.numerator, other.denominator),
                tropical_product(other.numerator, self.denominator),
            ),
            denominator=tropical_product(self.denominator, other.denominator),
        )


def rational(
    numerator: TropicalPolynomial,
    denominator: Optional[TropicalPolynomial] = None,
) -> TropicalRational:
    if denominator is None:
        denominator = constant(0, numerator.nvars)
    return TropicalRational(numerator=numerator, denominator=denominator)


# === Text =====================================================================


def variable_names(nvars: int) -> list[str]:
    if nvars <= 3:
        return ["x", "y", "z"][:nvars]
    if nvars == 4:
        return ["w", "x", "y", "z"]
    return [f"x{i}" for i in range(1, nvars + 1)]


def _format_coefficient(coef: Coefficient) -> str:
    if coef is NEG_INF:
        return "-inf"
    return str(coef)


def format_monomial(
    exp: Exponent, coef: Coefficient, names: Sequence[str]
) -> str:
    factors = []
    if coef != 0 or not any(exp):
        factors.append(_format_coefficient(coef))
    for name, e in zip(names, exp):
        if e == 1:
            factors.append(name)
        elif e > 1:
            factors.append(f"{name}^{e}")
    return "*".join(factors)


def format_polynomial(
    f: TropicalPolynomial, names: Optional[Sequence[str]] = None
) -> str:
    """
    Renders `f` in ASCII with `+` for the tropical sum (max) and `*` for the
    tropical product (addition), e.g. `0 + y + x*y`.
    """
    if names is None:
        names = variable_names(f.nvars)
    if not f.monomials:
        return "-inf"
    return " + ".join(
        format_monomial(exp, coef, names) for exp, coef in f.monomials
    )


def format_presentation(
    presentation: ExpandedPresentation,
    names: Optional[Sequence[str]] = None,
) -> str:
    """
    Renders each member in factored form, e.g.
    `(0 + y*(0 + x)) + (0 + x*(0 + y))`.
    """
    if names is None:
        names = variable_names(presentation.source.n)

    def _nested(perm: Sequence[int]) -> str:
        if not perm:
            return "0"
        inner = _nested(perm[:-1])
        if len(perm) == 1:
            return f"0 + {names[perm[-1]]}"
        return f"0 + {names[perm[-1]]}*({inner})"

    return " + ".join(
        f"({_nested(extension.perm)})" for extension in presentation.extensions
    )


def infer_nvars(names: Iterable[str]) -> int:
    """
    The smallest variable count whose naming scheme covers `names`.
    """
    names = set(names)
    for nvars in range(0, 5):
        if names <= set(variable_names(nvars)):
            return nvars
    numbered = 0
    for name in names:
        if name.startswith("x") and name[1:].isdigit():
            numbered = max(numbered, int(name[1:]))
        else:
            raise ParseError(f"unknown variable {name!r}")
    return max(numbered, 5)


def _literal_names(literal: n.PolynomialLiteral) -> set[str]:
    return {
        factor.name
        for term in literal.terms
        for factor in term.factors
        if isinstance(factor, n.Power)
    }


def polynomial_variables(text: str) -> set[str]:
    return _literal_names(parser.parse_polynomial(lexer.tokenize(text)))


def parse_polynomial(
    text: str, *, nvars: Optional[int] = None
) -> TropicalPolynomial:
    """
    Parses the ASCII form written by `format_polynomial`.  Variables follow
    `variable_names`; the variable count is inferred when not given.
    """
    literal = parser.parse_polynomial(lexer.tokenize(text))
    if nvars is None:
        nvars = infer_nvars(_literal_names(literal))

    index = {name: i for i, name in enumerate(variable_names(nvars))}

    terms = []
    for term in literal.terms:
        exp = [0] * nvars
        coef: Coefficient = Fraction(0)
        for factor in term.factors:
            if isinstance(factor, n.Number):
                coef = coef + factor.value  # type: ignore[operator]
                continue
            assert isinstance(factor, n.Power)
            if factor.name not in index:
                raise ParseError(
                    f"unknown variable {factor.name!r} for a polynomial in "
                    f"{nvars} variables"
                )
            exp[index[factor.name]] += factor.exponent
        terms.append((exp, coef))
    return TropicalPolynomial.from_terms(nvars, terms)

