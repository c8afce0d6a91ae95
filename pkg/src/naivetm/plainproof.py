"""Combinatorial plain proofs and their polynomial semantics.

A plain proof copies each input slot a fixed number of times (its degree)
and then applies a multilinear core, represented here as a total lookup
table over the tuple of copies.  Three evaluation modes are provided:

* ``naive_extension``  -- propagate one distribution per slot by sampling
  every copy independently (the output polynomial restricted to simplices);
* ``ket_evaluate``     -- iterated partial derivatives of those polynomials,
  which is what derivative kets evaluate to;
* ``standard_extension`` -- the ordinary pushforward of a joint input
  distribution through the underlying discrete function.

Polynomials are never materialised; everything is computed by direct
enumeration over the copy tuples, guarded by an enumeration cap.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import CapacityError, InputError
from .simplex import Distribution, Symbol, SymbolSet, TangentVector, dirac

ENUM_LIMIT = 10**7


@dataclass(frozen=True)
class Slot:
    """One input slot: its proof set and the number of copies taken of it."""

    set: SymbolSet
    degree: int

    def __post_init__(self):
        if self.degree < 0:
            raise InputError(f"slot degree must be >= 0, got {self.degree}")


@dataclass(frozen=True, eq=False)
class PlainProof:
    """Input slots plus a total lookup table for the multilinear core.

    The table maps every flat tuple (n_1 symbols from slot 1, then n_2 from
    slot 2, ...) to an output symbol.  Totality and containment of values in
    the output set are checked at construction.
    """

    slots: tuple[Slot, ...]
    output_set: SymbolSet
    table: Mapping[tuple, Symbol]

    def __init__(self, slots: Sequence[Slot], output_set: SymbolSet, table: Mapping[tuple, Symbol]):
        slots = tuple(slots)
        size = self.domain_size(slots)
        if size > ENUM_LIMIT:
            raise CapacityError(f"table domain has {size} tuples, over the {ENUM_LIMIT} cap")
        table = dict(table)
        if len(table) != size:
            raise InputError(f"table must be total: expected {size} entries, got {len(table)}")
        for key, value in table.items():
            if value not in output_set:
                raise InputError(f"table value {value!r} not in the output set")
            if len(key) != sum(s.degree for s in slots):
                raise InputError(f"table key {key!r} has the wrong arity")
        for key in self.iter_domain(slots):
            if key not in table:
                raise InputError(f"table missing entry for {key!r}")
        object.__setattr__(self, "slots", slots)
        object.__setattr__(self, "output_set", output_set)
        object.__setattr__(self, "table", table)

    @staticmethod
    def domain_size(slots: Sequence[Slot]) -> int:
        size = 1
        for s in slots:
            size *= len(s.set) ** s.degree
        return size

    @staticmethod
    def iter_domain(slots: Sequence[Slot]):
        per_copy = []
        for s in slots:
            per_copy.extend([s.set.symbols] * s.degree)
        return itertools.product(*per_copy)

    @property
    def arity(self) -> int:
        return len(self.slots)

    def apply(self, flat: tuple) -> Symbol:
        """Evaluate the core on one flat tuple of copies."""
        try:
            return self.table[flat]
        except KeyError:
            raise InputError(f"tuple {flat!r} outside the table domain") from None

    def apply_diagonal(self, inputs: Sequence[Symbol]) -> Symbol:
        """The underlying discrete function: each input repeated per degree."""
        if len(inputs) != self.arity:
            raise InputError(f"expected {self.arity} inputs, got {len(inputs)}")
        flat = []
        for slot, sym in zip(self.slots, inputs):
            slot.set.index(sym)
            flat.extend([sym] * slot.degree)
        return self.apply(tuple(flat))

    def to_json(self) -> dict:
        return {
            "slots": [{"set": [str(x) for x in s.set.symbols], "degree": s.degree} for s in self.slots],
            "output_set": [str(x) for x in self.output_set.symbols],
            "table": {",".join(str(x) for x in key): str(val) for key, val in self.table.items()},
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "PlainProof":
        try:
            slots = tuple(Slot(SymbolSet(s["set"]), int(s["degree"])) for s in obj["slots"])
            output_set = SymbolSet(obj["output_set"])
            table = {}
            for key, val in obj["table"].items():
                flat = tuple(key.split(",")) if key else ()
                table[flat] = val
            return cls(slots, output_set, table)
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed plain proof object: {exc}") from exc


@dataclass(frozen=True)
class Multiplicities:
    """Per-slot derivative orders: how many times to differentiate in each symbol."""

    by_slot: tuple[Mapping[Symbol, int], ...]

    def __init__(self, by_slot: Sequence[Mapping[Symbol, int]]):
        cleaned = []
        for m in by_slot:
            m = {k: int(v) for k, v in m.items() if int(v) != 0}
            if any(v < 0 for v in m.values()):
                raise InputError("multiplicities must be nonnegative")
            cleaned.append(m)
        object.__setattr__(self, "by_slot", tuple(cleaned))

    @classmethod
    def zero(cls, psi: PlainProof) -> "Multiplicities":
        return cls([{} for _ in psi.slots])

    @classmethod
    def single(cls, psi: PlainProof, slot: int, symbol: Symbol) -> "Multiplicities":
        ms: list[dict] = [{} for _ in psi.slots]
        ms[slot] = {symbol: 1}
        return cls(ms)


def _check_inputs(psi: PlainProof, inputs: Sequence[Distribution]) -> None:
    if len(inputs) != psi.arity:
        raise InputError(f"expected {psi.arity} input distributions, got {len(inputs)}")
    for slot, dist in zip(psi.slots, inputs):
        if dist.set != slot.set:
            raise InputError(
                f"input over {list(dist.set.symbols)} does not match slot set {list(slot.set.symbols)}"
            )


def _check_enum(psi: PlainProof) -> None:
    size = PlainProof.domain_size(psi.slots)
    if size > ENUM_LIMIT:
        raise CapacityError(f"enumeration of {size} copy tuples exceeds the {ENUM_LIMIT} cap")


def naive_extension(psi: PlainProof, inputs: Sequence[Distribution]) -> Distribution:
    """Propagate one distribution per slot, sampling every copy independently.

    Output weight of tau is the sum over copy tuples mapping to tau of the
    product of the copies' input weights; on vertex inputs this reduces to
    the discrete table lookup exactly.
    """
    _check_inputs(psi, inputs)
    _check_enum(psi)
    weight_maps = []
    for slot, dist in zip(psi.slots, inputs):
        weight_maps.extend([dict(zip(slot.set.symbols, dist.weights))] * slot.degree)
    out = np.zeros(len(psi.output_set))
    for flat, tau in psi.table.items():
        w = 1.0
        for sym, wm in zip(flat, weight_maps):
            w *= wm[sym]
            if w == 0.0:
                break
        if w != 0.0:
            out[psi.output_set.index(tau)] += w
    return Distribution(psi.output_set, out)


def _falling(k: int, m: int) -> float:
    out = 1.0
    for i in range(m):
        out *= k - i
    return out


def ket_evaluate(
    psi: PlainProof,
    base: Sequence[Distribution],
    mults: Multiplicities | Sequence[Mapping[Symbol, int]],
) -> np.ndarray:
    """Iterated partial derivatives of the output polynomials at ``base``.

    Returns the vector over the output set (in set order) whose tau entry is
    the mults-fold derivative of the tau output polynomial, evaluated at the
    base point.  With zero multiplicities this equals naive_extension; it is
    a plain vector, not a distribution, for any nonzero order.
    """
    _check_inputs(psi, base)
    _check_enum(psi)
    if not isinstance(mults, Multiplicities):
        mults = Multiplicities(mults)
    if len(mults.by_slot) != psi.arity:
        raise InputError(f"expected {psi.arity} multiplicity maps, got {len(mults.by_slot)}")
    for slot, m in zip(psi.slots, mults.by_slot):
        for sym in m:
            slot.set.index(sym)

    degrees = [s.degree for s in psi.slots]
    weight_maps = [dict(zip(s.set.symbols, d.weights)) for s, d in zip(psi.slots, base)]
    out = np.zeros(len(psi.output_set))
    for flat, tau in psi.table.items():
        factor = 1.0
        pos = 0
        for i, n_i in enumerate(degrees):
            counts = Counter(flat[pos : pos + n_i])
            pos += n_i
            wm = weight_maps[i]
            for sym, m_rho in mults.by_slot[i].items():
                k = counts.get(sym, 0)
                if k < m_rho:
                    factor = 0.0
                    break
                factor *= _falling(k, m_rho)
                counts[sym] = k - m_rho
            if factor == 0.0:
                break
            for sym, k in counts.items():
                if k:
                    factor *= wm[sym] ** k
                    if factor == 0.0:
                        break
            if factor == 0.0:
                break
        if factor != 0.0:
            out[psi.output_set.index(tau)] += factor
    return out


def tangent_map(
    psi: PlainProof, base: Sequence[Distribution], slot: int, direction: TangentVector
) -> np.ndarray:
    """Directional derivative of naive_extension in one slot.

    Linear in the direction; for a +1/-1 basis direction it is the
    difference of two single-derivative ket evaluations.  The result sums
    to zero whenever the base inputs are distributions.
    """
    _check_inputs(psi, base)
    if not 0 <= slot < psi.arity:
        raise InputError(f"slot index {slot} out of range")
    if direction.set != psi.slots[slot].set:
        raise InputError("direction must live on the chosen slot's symbol set")
    out = np.zeros(len(psi.output_set))
    for sym, c in zip(direction.set.symbols, direction.components):
        if c != 0.0:
            out += c * ket_evaluate(psi, base, Multiplicities.single(psi, slot, sym))
    return out


def joint_set(psi: PlainProof) -> SymbolSet:
    """Product symbol set of one symbol per slot, in lexicographic slot order."""
    return SymbolSet(tuple(itertools.product(*[s.set.symbols for s in psi.slots])))


def standard_extension(psi: PlainProof, joint: Distribution) -> Distribution:
    """Pushforward of a joint input distribution through the discrete function.

    The joint lives on joint_set(psi); each tuple is run through the
    diagonal evaluation (inputs repeated per degree) and the probabilities
    of tuples with equal outputs accumulate.
    """
    expected = joint_set(psi)
    if joint.set != expected:
        raise InputError("joint distribution must be over the product of the slot sets")
    out = np.zeros(len(psi.output_set))
    for tup, w in zip(joint.set.symbols, joint.weights):
        if w != 0.0:
            out[psi.output_set.index(psi.apply_diagonal(tup))] += w
    return Distribution(psi.output_set, out)


def cut(phi: PlainProof, psi: PlainProof) -> PlainProof:
    """Compose two plain proofs: feed psi's output into phi's single slot.

    phi must have exactly one input slot whose set equals psi's output set.
    The composite keeps psi's slots with degrees scaled by phi's degree m:
    the m*n_i copies are split into m consecutive blocks, psi's core is
    applied to each block and phi's core to the m results.  The naive
    extension of the composite is the composition of the naive extensions.
    """
    if phi.arity != 1:
        raise InputError("cut requires the outer proof to have exactly one input slot")
    if phi.slots[0].set != psi.output_set:
        raise InputError("outer slot set must equal the inner proof's output set")
    m = phi.slots[0].degree
    new_slots = tuple(Slot(s.set, m * s.degree) for s in psi.slots)
    size = PlainProof.domain_size(new_slots)
    if size > ENUM_LIMIT:
        raise CapacityError(f"cut table would need {size} entries, over the {ENUM_LIMIT} cap")

    degrees = [s.degree for s in psi.slots]
    table = {}
    for flat in PlainProof.iter_domain(new_slots):
        # slot i occupies m*n_i consecutive entries; block b takes its b-th n_i chunk
        mids = []
        for b in range(m):
            inner = []
            pos = 0
            for n_i in degrees:
                start = pos + b * n_i
                inner.extend(flat[start : start + n_i])
                pos += m * n_i
            mids.append(psi.apply(tuple(inner)))
        table[flat] = phi.apply(tuple(mids))
    return PlainProof(new_slots, phi.output_set, table)
