"""Exact inference on convolutional and multiplicative factor graphs over Z_N."""
from .algebra import (
    Factor,
    Semantics,
    Variable,
    character,
    convolve,
    dft,
    evaluate,
    marginalize,
    multiply,
    normalize,
    product_all,
    rel_linf,
    sum_product,
)
from .graph import (
    FactorGraph,
    check_marginal_independence,
    dualize,
    joint,
    random_factor_graph,
    separates,
    to_dot,
    validate,
)
from .inference import (
    Method,
    Query,
    answer,
    cfg_eliminate,
    cfg_push_marginalization,
    default_order,
    fft_query,
    mfg_eliminate,
    mfg_push_evidence,
)

__all__ = [
    "Factor",
    "Semantics",
    "Variable",
    "character",
    "convolve",
    "dft",
    "evaluate",
    "marginalize",
    "multiply",
    "normalize",
    "product_all",
    "rel_linf",
    "sum_product",
    "FactorGraph",
    "check_marginal_independence",
    "dualize",
    "joint",
    "random_factor_graph",
    "separates",
    "to_dot",
    "validate",
    "Method",
    "Query",
    "answer",
    "cfg_eliminate",
    "cfg_push_marginalization",
    "default_order",
    "fft_query",
    "mfg_eliminate",
    "mfg_push_evidence",
]

__version__ = "0.1.0"
