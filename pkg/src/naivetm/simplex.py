"""Finite probability simplices and their tangent spaces.

A ``SymbolSet`` fixes an ordered finite alphabet; a ``Distribution`` is a
point of the simplex spanned by it and a ``TangentVector`` is a sum-zero
vector in the ambient coordinate space.  Everything downstream (tape
beliefs, state beliefs, learnable parameters) is built from these three
types, so the numeric conventions live here: double precision throughout,
constructor normalisation for sums within 1e-9 of one, and hard rejection
beyond that.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .errors import DivergenceError, InputError

SUM_SLACK = 1e-9
WEIGHT_SLACK = 1e-12

Symbol = Hashable


@dataclass(frozen=True)
class SymbolSet:
    """Ordered finite set of distinct symbols.

    The ordering is load-bearing: argmax tie-breaks, coordinate layouts and
    serialisation all follow it.  Index 0 plays the role of the blank where
    one exists (tape alphabets).
    """

    symbols: tuple[Symbol, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __init__(self, symbols: Iterable[Symbol]):
        syms = tuple(symbols)
        if not syms:
            raise InputError("symbol set must be nonempty")
        index = {}
        for i, s in enumerate(syms):
            if s in index:
                raise InputError(f"duplicate symbol {s!r}")
            index[s] = i
        object.__setattr__(self, "symbols", syms)
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __contains__(self, symbol: Symbol) -> bool:
        return symbol in self._index

    def index(self, symbol: Symbol) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise InputError(f"unknown symbol {symbol!r}; expected one of {list(self.symbols)}") from None

    def subset(self, symbols: Iterable[Symbol]) -> "SymbolSet":
        """Sub-alphabet in this set's order, checking membership."""
        chosen = tuple(symbols)
        for s in chosen:
            self.index(s)
        return SymbolSet(chosen)


def _as_readonly(values: Sequence[float]) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64).copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Distribution:
    """A point of the probability simplex over a SymbolSet.

    The constructor renormalises inputs whose sum is within 1e-9 of one and
    rejects anything further off; individual weights may undershoot zero by
    at most 1e-12 (they are clipped).
    """

    set: SymbolSet
    weights: np.ndarray

    def __eq__(self, other) -> bool:
        if not isinstance(other, Distribution):
            return NotImplemented
        return self.set == other.set and np.array_equal(self.weights, other.weights)

    def __init__(self, set: SymbolSet, weights: Sequence[float]):
        arr = np.asarray(weights, dtype=np.float64)
        if arr.shape != (len(set),):
            raise InputError(f"expected {len(set)} weights, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InputError("weights must be finite")
        total = float(arr.sum())
        if abs(total - 1.0) > SUM_SLACK:
            raise InputError(f"weights sum to {total!r}, outside 1e-9 of 1")
        if arr.min() < -WEIGHT_SLACK or arr.max() > 1.0 + SUM_SLACK:
            raise InputError("weights out of [0, 1]")
        arr = np.clip(arr, 0.0, None)
        arr = arr / arr.sum()
        object.__setattr__(self, "set", set)
        object.__setattr__(self, "weights", _as_readonly(arr))

    def __getitem__(self, symbol: Symbol) -> float:
        return float(self.weights[self.set.index(symbol)])

    def argmax(self) -> Symbol:
        """Most probable symbol; ties break toward the earlier set index."""
        return self.set.symbols[int(np.argmax(self.weights))]

    def is_dirac(self, symbol: Symbol, tol: float = 0.0) -> bool:
        target = np.zeros(len(self.set))
        target[self.set.index(symbol)] = 1.0
        return bool(np.max(np.abs(self.weights - target)) <= tol)

    def to_json(self) -> dict:
        return {"symbols": list(self.set.symbols), "weights": [float(w) for w in self.weights]}

    @classmethod
    def from_json(cls, obj: Mapping) -> "Distribution":
        try:
            return cls(SymbolSet(obj["symbols"]), obj["weights"])
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed distribution object: {exc}") from exc


@dataclass(frozen=True, eq=False)
class TangentVector:
    """Sum-zero vector attached to a SymbolSet (a direction in the simplex)."""

    set: SymbolSet
    components: np.ndarray

    def __eq__(self, other) -> bool:
        if not isinstance(other, TangentVector):
            return NotImplemented
        return self.set == other.set and np.array_equal(self.components, other.components)

    def __init__(self, set: SymbolSet, components: Sequence[float]):
        arr = np.asarray(components, dtype=np.float64)
        if arr.shape != (len(set),):
            raise InputError(f"expected {len(set)} components, got shape {arr.shape}")
        if abs(float(arr.sum())) > WEIGHT_SLACK * max(1.0, float(np.abs(arr).max())):
            raise InputError(f"tangent components must sum to 0, got {arr.sum()!r}")
        object.__setattr__(self, "set", set)
        object.__setattr__(self, "components", _as_readonly(arr))

    def __getitem__(self, symbol: Symbol) -> float:
        return float(self.components[self.set.index(symbol)])


def dirac(set: SymbolSet, symbol: Symbol) -> Distribution:
    """Point mass on ``symbol``."""
    w = np.zeros(len(set))
    w[set.index(symbol)] = 1.0
    return Distribution(set, w)


def uniform(set: SymbolSet) -> Distribution:
    """Barycenter of the simplex."""
    n = len(set)
    return Distribution(set, np.full(n, 1.0 / n))


def kl_divergence(v: Distribution, w: Distribution) -> float:
    """Relative entropy sum_s v_s ln(v_s / w_s), with 0 ln(0/q) = 0.

    Raises DivergenceError when w vanishes somewhere v does not; callers
    that cannot rule this out must smooth w first (see smooth_mu).
    """
    if v.set != w.set:
        raise InputError("kl_divergence requires distributions over the same symbol set")
    p = v.weights
    q = w.weights
    mask = p > 0.0
    if np.any(q[mask] == 0.0):
        bad = v.set.symbols[int(np.argmax(mask & (q == 0.0)))]
        raise DivergenceError(f"KL divergence infinite: zero weight at {bad!r} in the second argument")
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


def smooth_mu(v: Distribution, mu: float) -> Distribution:
    """Pull v toward the barycenter: (1 - mu) v + mu / |set|.

    mu = 0 is the identity; every output weight is >= mu / |set| so the
    result is safe as the second KL argument.
    """
    if not 0.0 <= mu < 1.0:
        raise InputError(f"smoothing parameter must be in [0, 1), got {mu!r}")
    if mu == 0.0:
        return v
    n = len(v.set)
    return Distribution(v.set, (1.0 - mu) * v.weights + mu / n)


def basis_tangent(set: SymbolSet, zeta: Symbol, rho: Symbol) -> TangentVector:
    """Revision-of-belief direction: +1 at zeta, -1 at rho.

    Fixing rho and letting zeta range over the other symbols yields a basis
    of the tangent space.
    """
    iz = set.index(zeta)
    ir = set.index(rho)
    if iz == ir:
        raise InputError(f"basis tangent needs two distinct symbols, got {zeta!r} twice")
    c = np.zeros(len(set))
    c[iz] = 1.0
    c[ir] = -1.0
    return TangentVector(set, c)


def project_to_affine_tangent(set: SymbolSet, vector: Sequence[float]) -> TangentVector:
    """Orthogonal projection onto the sum-zero subspace (subtract the mean)."""
    arr = np.asarray(vector, dtype=np.float64)
    if arr.shape != (len(set),):
        raise InputError(f"expected {len(set)} components, got shape {arr.shape}")
    return TangentVector(set, arr - arr.mean())


def clip_to_simplex(set: SymbolSet, point: Sequence[float]) -> Distribution:
    """Euclidean projection onto the simplex (sort-and-threshold).

    Idempotent on valid distributions.
    """
    v = np.asarray(point, dtype=np.float64)
    if v.shape != (len(set),):
        raise InputError(f"expected {len(set)} coordinates, got shape {v.shape}")
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, len(v) + 1)
    cond = u + (1.0 - css) / idx > 0.0
    rho = int(np.nonzero(cond)[0][-1])
    theta = (1.0 - css[rho]) / (rho + 1)
    return Distribution(set, np.maximum(v + theta, 0.0))
