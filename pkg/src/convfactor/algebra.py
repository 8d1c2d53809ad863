"""Dense factor algebra over products of cyclic groups Z_N.

Every variable ranges over ``0..N-1`` with addition mod ``N``.  A
:class:`Factor` is a dense complex table over an ordered scope, stored
row-major with the first scope variable on the slowest axis.

Two products are provided:

* :func:`multiply` -- the ordinary pointwise product over the union of scopes;
* :func:`convolve` -- the generalized convolution, a cyclic convolution over
  the shared variables that treats every other variable as a parameter.  With
  no shared variables it is exactly :func:`multiply`.

:func:`dft` is the per-variable discrete Fourier transform under which the
two products are exchanged (``dft(convolve(f, g)) == multiply(dft(f), dft(g))``).
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Literal, Mapping, Sequence

import numpy as np
import scipy.fft

from .errors import DomainError

__all__ = [
    "Variable",
    "Factor",
    "Semantics",
    "multiply",
    "convolve",
    "product_all",
    "marginalize",
    "sum_product",
    "evaluate",
    "dft",
    "normalize",
    "character",
    "rel_linf",
]

# Above this many entries the gathered (circulant) operand is not materialised
# and convolve falls back to a shift-and-accumulate loop.
GATHER_LIMIT = 1 << 22


class Semantics(enum.Enum):
    CONVOLUTIONAL = "convolutional"
    MULTIPLICATIVE = "multiplicative"

    def dual(self) -> "Semantics":
        if self is Semantics.CONVOLUTIONAL:
            return Semantics.MULTIPLICATIVE
        return Semantics.CONVOLUTIONAL


@dataclass(frozen=True)
class Variable:
    """A variable over the cyclic group Z_size."""

    id: int
    name: str
    size: int

    def __post_init__(self):
        if int(self.size) < 1:
            raise ValueError(f"domain size of {self.name!r} must be >= 1, got {self.size}")

    def __repr__(self):
        return f"Variable({self.name}#{self.id}, Z_{self.size})"


class Factor:
    """A dense complex table over an ordered scope of variables.

    ``values`` is an ndarray whose axis ``k`` indexes ``scope[k]``.  The array
    is read-only; every operation returns a new factor.
    """

    __slots__ = ("scope", "values")

    def __init__(self, scope: Iterable[Variable], values):
        scope = tuple(scope)
        ids = [v.id for v in scope]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate variable ids in scope: {ids}")
        shape = tuple(v.size for v in scope)
        arr = np.array(values, dtype=complex)
        if arr.size != math.prod(shape):
            raise ValueError(
                f"factor over {[v.name for v in scope]} needs {math.prod(shape)} values, got {arr.size}"
            )
        arr = arr.reshape(shape)
        arr.flags.writeable = False
        object.__setattr__(self, "scope", scope)
        object.__setattr__(self, "values", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Factor is immutable")

    @classmethod
    def _wrap(cls, scope: tuple[Variable, ...], arr: np.ndarray) -> "Factor":
        # Internal fast path: ``arr`` is freshly computed (or already
        # read-only) and has the right shape, so skip the defensive copy.
        f = object.__new__(cls)
        arr = np.asarray(arr, dtype=complex)
        if arr.flags.writeable:
            arr.flags.writeable = False
        object.__setattr__(f, "scope", tuple(scope))
        object.__setattr__(f, "values", arr)
        return f

    @classmethod
    def scalar(cls, value=1.0) -> "Factor":
        return cls((), value)

    @classmethod
    def ones(cls, scope: Iterable[Variable]) -> "Factor":
        scope = tuple(scope)
        return cls(scope, np.ones(tuple(v.size for v in scope)))

    @classmethod
    def delta(cls, scope: Iterable[Variable], at: Sequence[int] | None = None) -> "Factor":
        """Indicator of a single point (the origin by default)."""
        scope = tuple(scope)
        table = np.zeros(tuple(v.size for v in scope))
        table[tuple(at) if at is not None else (0,) * len(scope)] = 1.0
        return cls(scope, table)

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(v.id for v in self.scope)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.scope]

    def axis(self, var_id: int) -> int:
        try:
            return self.ids.index(var_id)
        except ValueError:
            raise KeyError(f"variable id {var_id} not in scope {self.names}") from None

    def reorder(self, ids: Sequence[int]) -> "Factor":
        """Same function with its scope permuted to ``ids``."""
        ids = list(ids)
        if sorted(ids) != sorted(self.ids):
            raise KeyError(f"reorder ids {ids} do not match scope ids {list(self.ids)}")
        axes = [self.axis(i) for i in ids]
        return Factor._wrap([self.scope[a] for a in axes], np.transpose(self.values, axes))

    def total(self) -> complex:
        return complex(self.values.sum())

    def is_real(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self.values.imag) <= tol))

    def __repr__(self):
        return f"Factor({self.names}, shape={self.shape})"


def _check_shared(f: Factor, g: Factor) -> list[Variable]:
    g_by_id = {v.id: v for v in g.scope}
    shared = []
    for v in f.scope:
        w = g_by_id.get(v.id)
        if w is None:
            continue
        if w.size != v.size:
            raise DomainError(f"variable id {v.id} has size {v.size} in one factor and {w.size} in the other")
        shared.append(v)
    return shared


def _union(f: Factor, g: Factor) -> tuple[Variable, ...]:
    f_ids = set(f.ids)
    return f.scope + tuple(v for v in g.scope if v.id not in f_ids)


def multiply(f: Factor, g: Factor) -> Factor:
    """Pointwise product over the ordered union of the two scopes."""
    _check_shared(f, g)
    union = _union(f, g)
    return Factor._wrap(union, _broadcast(f, union) * _broadcast(g, union))


def _broadcast(f: Factor, union: Sequence[Variable]) -> np.ndarray:
    """View of ``f.values`` with axes permuted and padded to ``union``."""
    pos = {v.id: k for k, v in enumerate(union)}
    order = sorted(range(len(f.scope)), key=lambda a: pos[f.scope[a].id])
    arr = np.transpose(f.values, order) if order != sorted(order) else f.values
    present = {pos[i] for i in f.ids}
    return arr.reshape(tuple(v.size if k in present else 1 for k, v in enumerate(union)))


def convolve(f: Factor, g: Factor) -> Factor:
    """Generalized convolution of ``f`` and ``g``.

    With ``T`` the shared variables, the result at ``(a, x_T, b)`` is
    ``sum_y f(a, x_T - y) * g(y, b)`` (componentwise mod N).  Scope is
    ``f``'s scope followed by ``g``'s new variables.
    """
    shared = _check_shared(f, g)
    if not shared:
        return multiply(f, g)
    union = _union(f, g)
    label = {v.id: k for k, v in enumerate(union)}
    dummy = {v.id: len(union) + k for k, v in enumerate(shared)}
    shared_ids = set(dummy)
    out_labels = list(range(len(union)))

    # The sum is symmetric under y -> x - y, so the shifted role can go to
    # whichever operand is smaller.
    small, big = (f, g) if f.values.size <= g.values.size else (g, f)
    big_labels = [dummy[i] if i in shared_ids else label[i] for i in big.ids]
    n_shifts = math.prod(v.size for v in shared)

    if small.values.size * n_shifts <= GATHER_LIMIT:
        gathered = small.values
        labels = [label[i] for i in small.ids]
        for v in shared:
            pos = labels.index(label[v.id])
            n = np.arange(v.size)
            circulant = (n[:, None] - n[None, :]) % v.size
            gathered = np.take(gathered, circulant, axis=pos)
            labels[pos:pos + 1] = [label[v.id], dummy[v.id]]
        out = np.einsum(gathered, labels, big.values, big_labels, out_labels, optimize=True)
        return Factor._wrap(union, out)

    small_labels = [label[i] for i in small.ids]
    small_axes = [small.axis(v.id) for v in shared]
    big_axes = {big.axis(v.id): k for k, v in enumerate(shared)}
    rest_labels = [lab for ax, lab in enumerate(big_labels) if ax not in big_axes]
    out = np.zeros(tuple(v.size for v in union), dtype=complex)
    for y in itertools.product(*(range(v.size) for v in shared)):
        shifted = np.roll(small.values, shift=y, axis=small_axes)
        index = tuple(y[big_axes[ax]] if ax in big_axes else slice(None) for ax in range(big.values.ndim))
        out += np.einsum(shifted, small_labels, big.values[index], rest_labels, out_labels)
    return Factor._wrap(union, out)


def product_all(factors: Iterable[Factor], semantics: Semantics) -> Factor:
    """Left fold of :func:`convolve` or :func:`multiply`; the empty product is 1."""
    op = convolve if semantics is Semantics.CONVOLUTIONAL else multiply
    result = None
    for f in factors:
        result = f if result is None else op(result, f)
    return Factor.scalar(1.0) if result is None else result


def sum_product(factors: Sequence[Factor], var_ids: Iterable[int]) -> Factor:
    """``marginalize(product_all(factors, MULTIPLICATIVE), var_ids)`` in one contraction."""
    factors = list(factors)
    if not factors:
        return Factor.scalar(1.0)
    seen: dict[int, Variable] = {}
    for f in factors:
        for v in f.scope:
            w = seen.setdefault(v.id, v)
            if w.size != v.size:
                raise DomainError(f"variable id {v.id} has sizes {w.size} and {v.size}")
    union = tuple(seen.values())
    var_ids = set(var_ids)
    label = {v.id: k for k, v in enumerate(union)}
    missing = var_ids - set(label)
    if missing:
        raise KeyError(f"variable ids {sorted(missing)} not in any factor scope")
    operands = []
    for f in factors:
        operands += [f.values, [label[i] for i in f.ids]]
    keep = [v for v in union if v.id not in var_ids]
    out = np.einsum(*operands, [label[v.id] for v in keep], optimize=len(factors) > 2)
    return Factor._wrap(keep, out)


def marginalize(f: Factor, var_ids: Iterable[int]) -> Factor:
    """Sum ``f`` over the given variables."""
    var_ids = set(var_ids)
    axes = tuple(f.axis(i) for i in var_ids)
    if not axes:
        return f
    keep = [v for v in f.scope if v.id not in var_ids]
    return Factor._wrap(keep, f.values.sum(axis=axes))


def evaluate(f: Factor, evidence: Mapping[int, int]) -> Factor:
    """Slice ``f`` at fixed values of some of its variables."""
    if not evidence:
        return f
    index: list = [slice(None)] * len(f.scope)
    for var_id, value in evidence.items():
        ax = f.axis(var_id)
        size = f.scope[ax].size
        if not 0 <= int(value) < size:
            raise ValueError(f"value {value} out of domain Z_{size} for {f.scope[ax].name}")
        index[ax] = int(value)
    keep = [v for v in f.scope if v.id not in evidence]
    return Factor._wrap(keep, f.values[tuple(index)])


def dft(
    f: Factor,
    direction: Literal["forward", "inverse"] = "forward",
    var_ids: Iterable[int] | None = None,
) -> Factor:
    """Per-variable DFT over ``var_ids`` (all scope variables by default).

    Forward uses the kernel ``exp(-2j*pi*k*x/N)`` unscaled; inverse uses
    ``exp(+2j*pi*k*x/N)`` with a ``1/N`` per variable.
    """
    axes = list(range(len(f.scope))) if var_ids is None else [f.axis(i) for i in var_ids]
    if not axes:
        return f
    # Real tables take the cheaper real-input transform.
    values = f.values if np.any(f.values.imag) else f.values.real
    if direction == "forward":
        out = scipy.fft.fftn(values, axes=axes)
    elif direction == "inverse":
        out = scipy.fft.ifftn(values, axes=axes)
    else:
        raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    return Factor._wrap(f.scope, out)


def character(var: Variable, value: int) -> Factor:
    """Inverse-DFT kernel at ``value``: ``exp(+2j*pi*k*value/N) / N`` over k.

    Summing a transformed factor against this over one dual variable is the
    transform of slicing the original at ``value``.
    """
    if not 0 <= int(value) < var.size:
        raise ValueError(f"value {value} out of domain Z_{var.size} for {var.name}")
    k = np.arange(var.size)
    return Factor([var], np.exp(2j * np.pi * k * int(value) / var.size) / var.size)


def normalize(f: Factor, tol: float = 1e-12) -> Factor:
    """Scale a real non-negative factor so its entries sum to one."""
    if not f.is_real(tol):
        raise ValueError("cannot normalize a factor with non-real values")
    if np.any(f.values.real < -tol):
        raise ValueError("cannot normalize a factor with negative values")
    total = f.values.real.sum()
    if total == 0:
        raise ZeroDivisionError("cannot normalize a factor with zero total")
    return Factor(f.scope, f.values.real / total)


def rel_linf(a: Factor, b: Factor) -> float:
    """``max|a - b| / max(max|b|, tiny)`` after aligning ``a`` to ``b``'s scope."""
    a = a.reorder(b.ids)
    scale = max(float(np.max(np.abs(b.values), initial=0.0)), np.finfo(float).tiny)
    return float(np.max(np.abs(a.values - b.values), initial=0.0)) / scale
