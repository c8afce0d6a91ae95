"""Turing machines, deterministic stepping, and belief propagation.

Configurations are head-relative: the cell under the head is position 0 and
every move re-indexes the tape, so the head never appears explicitly.  The
belief-level step treats the written symbol, the move and the next state as
independently sampled from the current cell/state beliefs, which makes one
step a bilinear update computed by the kernels in ``_backend``.

The exact counterpart ``standard_run`` enumerates every joint assignment of
the uncertain cells and mixes deterministic runs; it is exponential by
construction and only intended as an oracle.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _backend
from .errors import CapacityError, InputError
from .simplex import Distribution, Symbol, SymbolSet, dirac

MOVES = ("left", "right", "stay")
_MOVE_CODE = {"left": _backend.MOVE_LEFT, "right": _backend.MOVE_RIGHT, "stay": _backend.MOVE_STAY}

PRUNE_TOL = 1e-14
STANDARD_RUN_CAP = 2**20


@dataclass(frozen=True, eq=False)
class TuringMachine:
    """Alphabet, states and a total transition table.

    The blank is the alphabet's first symbol.  ``delta`` maps every
    (symbol, state) pair to (written symbol, next state, move).  When a halt
    state is designated its rows must be self-loops that rewrite the read
    symbol and stay, so halted probability mass is preserved under belief
    propagation.
    """

    alphabet: SymbolSet
    states: SymbolSet
    delta: Mapping[tuple, tuple]
    start_state: Symbol
    halt_state: Symbol | None

    def __init__(
        self,
        alphabet: SymbolSet,
        states: SymbolSet,
        delta: Mapping[tuple, tuple],
        start_state: Symbol,
        halt_state: Symbol | None = None,
    ):
        states.index(start_state)
        if halt_state is not None:
            states.index(halt_state)
        delta = dict(delta)
        s, q = len(alphabet), len(states)
        if len(delta) != s * q:
            raise InputError(f"transition table must be total: expected {s * q} rules, got {len(delta)}")
        write_t = np.zeros((s, q), dtype=np.int64)
        next_t = np.zeros((s, q), dtype=np.int64)
        move_t = np.zeros((s, q), dtype=np.int64)
        for (sym, st), rule in delta.items():
            i, j = alphabet.index(sym), states.index(st)
            if len(rule) != 3:
                raise InputError(f"rule for ({sym!r}, {st!r}) must be (write, next, move)")
            w, nq, mv = rule
            if mv not in MOVES:
                raise InputError(f"invalid move {mv!r} for ({sym!r}, {st!r})")
            write_t[i, j] = alphabet.index(w)
            next_t[i, j] = states.index(nq)
            move_t[i, j] = _MOVE_CODE[mv]
        if halt_state is not None:
            for sym in alphabet:
                if delta[(sym, halt_state)] != (sym, halt_state, "stay"):
                    raise InputError(
                        f"halt state must self-loop with stay; rule for ({sym!r}, {halt_state!r}) is "
                        f"{delta[(sym, halt_state)]!r}"
                    )
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "start_state", start_state)
        object.__setattr__(self, "halt_state", halt_state)
        for arr in (write_t, next_t, move_t):
            arr.flags.writeable = False
        object.__setattr__(self, "_write_t", write_t)
        object.__setattr__(self, "_next_t", next_t)
        object.__setattr__(self, "_move_t", move_t)

    @property
    def blank(self) -> Symbol:
        return self.alphabet.symbols[0]

    def uses_stay(self) -> bool:
        return bool(np.any(self._move_t == _backend.MOVE_STAY))

    def to_json(self) -> dict:
        rules = []
        for sym in self.alphabet:
            for st in self.states:
                w, nq, mv = self.delta[(sym, st)]
                rules.append({"read": str(sym), "state": str(st), "write": str(w), "next": str(nq), "move": mv})
        return {
            "alphabet": [str(x) for x in self.alphabet.symbols],
            "states": [str(x) for x in self.states.symbols],
            "start": str(self.start_state),
            "halt": None if self.halt_state is None else str(self.halt_state),
            "delta": rules,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "TuringMachine":
        try:
            alphabet = SymbolSet(obj["alphabet"])
            states = SymbolSet(obj["states"])
            delta = {}
            for rule in obj["delta"]:
                key = (rule["read"], rule["state"])
                if key in delta:
                    raise InputError(f"duplicate rule for {key!r}")
                delta[key] = (rule["write"], rule["next"], rule["move"])
            return cls(alphabet, states, delta, obj["start"], obj.get("halt"))
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed machine object: {exc}") from exc


@dataclass(frozen=True, eq=False)
class DiscreteConfig:
    """A fully known configuration: sparse tape plus one state."""

    tape: Mapping[int, Symbol]
    state: Symbol

    def __init__(self, tape: Mapping[int, Symbol], state: Symbol, blank: Symbol | None = None):
        cells = {int(p): s for p, s in tape.items() if blank is None or s != blank}
        object.__setattr__(self, "tape", cells)
        object.__setattr__(self, "state", state)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiscreteConfig):
            return NotImplemented
        return self.tape == other.tape and self.state == other.state

    def cell(self, pos: int, blank: Symbol) -> Symbol:
        return self.tape.get(pos, blank)

    def to_json(self) -> dict:
        return {"tape": {str(p): str(s) for p, s in sorted(self.tape.items())}, "state": str(self.state)}

    @classmethod
    def from_json(cls, obj: Mapping) -> "DiscreteConfig":
        try:
            return cls({int(p): s for p, s in obj["tape"].items()}, obj["state"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed configuration object: {exc}") from exc


def _check_config_symbols(m: TuringMachine, config: DiscreteConfig) -> None:
    for pos, sym in config.tape.items():
        if sym not in m.alphabet:
            raise InputError(f"tape symbol {sym!r} at position {pos} is not in the machine alphabet")
    if config.state not in m.states:
        raise InputError(f"state {config.state!r} is not a machine state")


def det_step(m: TuringMachine, config: DiscreteConfig) -> DiscreteConfig:
    """One deterministic step, re-indexed so the head stays at position 0."""
    _check_config_symbols(m, config)
    sym = config.cell(0, m.blank)
    w, nq, mv = m.delta[(sym, config.state)]
    tape = dict(config.tape)
    if w == m.blank:
        tape.pop(0, None)
    else:
        tape[0] = w
    if mv == "right":
        tape = {p - 1: s for p, s in tape.items()}
    elif mv == "left":
        tape = {p + 1: s for p, s in tape.items()}
    return DiscreteConfig(tape, nq, blank=m.blank)


def det_run(m: TuringMachine, config: DiscreteConfig, t: int) -> DiscreteConfig:
    if t < 0:
        raise InputError(f"step count must be >= 0, got {t}")
    for _ in range(t):
        config = det_step(m, config)
    return config


@dataclass(frozen=True, eq=False)
class TapeBelief:
    """Finitely supported map from positions to cell distributions.

    Cells equal to the blank point mass (within 1e-14) are never stored;
    lookups of missing positions return the blank point mass.
    """

    alphabet: SymbolSet
    cells: Mapping[int, Distribution]

    def __init__(self, alphabet: SymbolSet, cells: Mapping[int, Distribution]):
        blank = dirac(alphabet, alphabet.symbols[0])
        stored = {}
        for pos, dist in cells.items():
            if dist.set != alphabet:
                raise InputError(f"cell at {pos} is over the wrong symbol set")
            if np.max(np.abs(dist.weights - blank.weights)) > PRUNE_TOL:
                stored[int(pos)] = dist
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "cells", stored)

    def cell(self, pos: int) -> Distribution:
        got = self.cells.get(int(pos))
        if got is None:
            return dirac(self.alphabet, self.alphabet.symbols[0])
        return got

    def window(self) -> tuple[int, int]:
        if not self.cells:
            return (0, 0)
        return (min(self.cells), max(self.cells))


@dataclass(frozen=True, eq=False)
class ConfigBelief:
    """Belief state: a tape of cell distributions plus a state distribution."""

    tape: TapeBelief
    state: Distribution

    def to_json(self) -> dict:
        return {
            "tape": {str(p): d.to_json() for p, d in sorted(self.tape.cells.items())},
            "state": self.state.to_json(),
        }

    @classmethod
    def from_json(cls, obj: Mapping, alphabet: SymbolSet | None = None) -> "ConfigBelief":
        try:
            cells = {int(p): Distribution.from_json(d) for p, d in obj["tape"].items()}
            state = Distribution.from_json(obj["state"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed belief object: {exc}") from exc
        if alphabet is None:
            if not cells:
                raise InputError("belief with empty tape needs an explicit alphabet")
            alphabet = next(iter(cells.values())).set
        return cls(TapeBelief(alphabet, cells), state)


def lift_config(m: TuringMachine, config: DiscreteConfig) -> ConfigBelief:
    """Embed a discrete configuration as point masses."""
    _check_config_symbols(m, config)
    cells = {p: dirac(m.alphabet, s) for p, s in config.tape.items()}
    return ConfigBelief(TapeBelief(m.alphabet, cells), dirac(m.states, config.state))


def support_window(c: ConfigBelief) -> tuple[int, int]:
    """Smallest interval containing the stored cells; [0, 0] when blank."""
    return c.tape.window()


# ---------------------------------------------------------------------------
# array bridge for the kernels
# ---------------------------------------------------------------------------

def _to_arrays(m: TuringMachine, c: ConfigBelief) -> tuple[np.ndarray, np.ndarray, int]:
    """Dense window covering the support and position 0; returns (cells, state, lo)."""
    if c.state.set != m.states:
        raise InputError("state distribution is over the wrong state set")
    positions = list(c.tape.cells)
    lo = min(min(positions), 0) if positions else 0
    hi = max(max(positions), 0) if positions else 0
    s = len(m.alphabet)
    cells = np.zeros((hi - lo + 1, s))
    cells[:, 0] = 1.0
    for pos, dist in c.tape.cells.items():
        cells[pos - lo] = dist.weights
    return cells, c.state.weights.copy(), lo


def _snap_blanks(cells: np.ndarray, dcells: np.ndarray | None = None) -> None:
    """Set rows within PRUNE_TOL of the blank point mass to exactly blank."""
    s = cells.shape[1]
    blank = np.zeros(s)
    blank[0] = 1.0
    near = np.all(np.abs(cells - blank) <= PRUNE_TOL, axis=1)
    if np.any(near):
        cells[near] = blank
        if dcells is not None:
            dcells[near] = 0.0


def _trim(cells: np.ndarray, lo: int, dcells: np.ndarray | None = None):
    """Drop exactly-blank edge rows, keeping position 0 inside the window."""
    n, s = cells.shape
    blank = np.zeros(s)
    blank[0] = 1.0
    is_blank = np.all(cells == blank, axis=1)
    if dcells is not None:
        is_blank &= np.all(dcells == 0.0, axis=1)
    head = -lo
    first, last = 0, n - 1
    while first < head and is_blank[first]:
        first += 1
    while last > head and is_blank[last]:
        last -= 1
    if first == 0 and last == n - 1:
        return (cells, lo) if dcells is None else (cells, dcells, lo)
    if dcells is None:
        return cells[first : last + 1], lo + first
    return cells[first : last + 1], dcells[first : last + 1], lo + first


def _from_arrays(m: TuringMachine, cells: np.ndarray, state: np.ndarray, lo: int) -> ConfigBelief:
    out = {}
    s = cells.shape[1]
    blank = np.zeros(s)
    blank[0] = 1.0
    for i in range(cells.shape[0]):
        if np.max(np.abs(cells[i] - blank)) > PRUNE_TOL:
            out[lo + i] = Distribution(m.alphabet, cells[i])
    return ConfigBelief(TapeBelief(m.alphabet, out), Distribution(m.states, state))


def _run_arrays(m: TuringMachine, cells: np.ndarray, state: np.ndarray, lo: int, t: int):
    """Iterate the step kernel t times with per-step snapping and trimming.

    Each step renormalises every cell row and the state vector, mirroring
    the constructor normalisation that composing single steps would apply;
    without it the bilinear update compounds round-off geometrically.
    """
    step = _backend.step_kernel
    for _ in range(t):
        cells, state = step(cells, state, -lo, m._write_t, m._next_t, m._move_t)
        lo -= 1
        cells /= cells.sum(axis=1, keepdims=True)
        state /= state.sum()
        _snap_blanks(cells)
        cells, lo = _trim(cells, lo)
    return cells, state, lo


def _run_arrays_dual(m, cells, dcells, state, dstate, lo, t):
    """Dual-number variant of _run_arrays (quotient rule through the renorm)."""
    step = _backend.dual_step_kernel
    for _ in range(t):
        cells, dcells, state, dstate = step(
            cells, dcells, state, dstate, -lo, m._write_t, m._next_t, m._move_t
        )
        lo -= 1
        sums = cells.sum(axis=1, keepdims=True)
        dsums = dcells.sum(axis=1, keepdims=True)
        dcells = dcells / sums - cells * dsums / sums**2
        cells = cells / sums
        ssum = state.sum()
        dssum = dstate.sum()
        dstate = dstate / ssum - state * dssum / ssum**2
        state = state / ssum
        _snap_blanks(cells, dcells)
        cells, dcells, lo = _trim(cells, lo, dcells)
    return cells, dcells, state, dstate, lo


def naive_step(m: TuringMachine, c: ConfigBelief) -> ConfigBelief:
    """One belief-propagation step.

    The move, written symbol and next state are each mixed over the head
    cell and state beliefs as if sampled independently; every output cell is
    the move-weighted mixture of its three possible sources.  On point-mass
    inputs this reproduces det_step exactly.
    """
    return naive_run(m, c, 1)


def naive_run(m: TuringMachine, c: ConfigBelief, t: int) -> ConfigBelief:
    """t-fold naive_step (t = 0 is the identity)."""
    if t < 0:
        raise InputError(f"step count must be >= 0, got {t}")
    for pos, dist in c.tape.cells.items():
        if dist.set != m.alphabet:
            raise InputError(f"cell at {pos} is not over the machine alphabet")
    cells, state, lo = _to_arrays(m, c)
    cells, state, lo = _run_arrays(m, cells, state, lo, t)
    return _from_arrays(m, cells, state, lo)


# ---------------------------------------------------------------------------
# exact oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class StandardRunResult:
    """Weighted mixture of deterministic outcomes from an exact enumeration."""

    machine: TuringMachine
    outcomes: tuple[tuple[float, DiscreteConfig], ...]

    def cell_marginal(self, pos: int) -> Distribution:
        w = np.zeros(len(self.machine.alphabet))
        for p, config in self.outcomes:
            w[self.machine.alphabet.index(config.cell(pos, self.machine.blank))] += p
        return Distribution(self.machine.alphabet, w)

    def state_marginal(self) -> Distribution:
        w = np.zeros(len(self.machine.states))
        for p, config in self.outcomes:
            w[self.machine.states.index(config.state)] += p
        return Distribution(self.machine.states, w)

    def joint(self, positions: Sequence[int], include_state: bool = False) -> dict:
        """Exact joint over the requested cells (plus the state if asked)."""
        out: dict = {}
        for p, config in self.outcomes:
            key = tuple(config.cell(pos, self.machine.blank) for pos in positions)
            if include_state:
                key = key + (config.state,)
            out[key] = out.get(key, 0.0) + p
        return out

    def as_belief(self) -> ConfigBelief:
        """Per-cell marginals over the union of outcome supports."""
        positions = set()
        for _, config in self.outcomes:
            positions.update(config.tape)
        cells = {pos: self.cell_marginal(pos) for pos in positions}
        return ConfigBelief(TapeBelief(self.machine.alphabet, cells), self.state_marginal())


def standard_run(
    m: TuringMachine,
    base: DiscreteConfig,
    uncertain: Mapping[int, Distribution],
    t: int,
    cap: int = STANDARD_RUN_CAP,
) -> StandardRunResult:
    """Exact pushforward: enumerate every assignment of the uncertain cells.

    Each uncertain position carries a distribution over a subset of the
    alphabet; all joint assignments are run deterministically for t steps
    and the outcomes mixed with the product weights.  The enumeration size
    is capped (CapacityError beyond it).
    """
    _check_config_symbols(m, base)
    for pos in uncertain:
        if int(pos) in base.tape:
            raise InputError(f"position {pos} is both clamped and uncertain")
    positions = sorted(int(p) for p in uncertain)
    size = 1
    for pos in positions:
        size *= len(uncertain[pos].set)
        if size > cap:
            raise CapacityError(f"standard run would enumerate over {size} assignments (cap {cap})")
    supports = []
    for pos in positions:
        dist = uncertain[pos]
        for sym in dist.set:
            m.alphabet.index(sym)
        supports.append(list(zip(dist.set.symbols, dist.weights)))

    outcomes = []
    for assignment in itertools.product(*supports):
        prob = 1.0
        tape = dict(base.tape)
        for pos, (sym, w) in zip(positions, assignment):
            prob *= w
            tape[pos] = sym
        if prob == 0.0:
            continue
        final = det_run(m, DiscreteConfig(tape, base.state, blank=m.blank), t)
        outcomes.append((prob, final))
    return StandardRunResult(m, tuple(outcomes))
