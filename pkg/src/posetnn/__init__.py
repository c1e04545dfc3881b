from posetnn.filters import PoolingFilter, filter_from_poset, pool2d
from posetnn.nn import eval_nn, poset_nn
from posetnn.polytope import act_on_polytopes, order_polytope_vertices
from posetnn.poset import (
    Poset,
    enumerate_posets,
    lex_sum,
    linear_extensions,
    parse_poset,
)
from posetnn.tropical import (
    TropicalPolynomial,
    act_on_tropical,
    eval_tropical,
    poset_from_tropical,
    tr_of_poset,
)

__all__ = [
    "Poset",
    "PoolingFilter",
    "TropicalPolynomial",
    "act_on_polytopes",
    "act_on_tropical",
    "enumerate_posets",
    "eval_nn",
    "eval_tropical",
    "filter_from_poset",
    "lex_sum",
    "linear_extensions",
    "order_polytope_vertices",
    "parse_poset",
    "pool2d",
    "poset_from_tropical",
    "poset_nn",
    "tr_of_poset",
]
