"""Hot kernels for the belief-step update, with backend selection.

Two interchangeable implementations exist: numba-jitted loops and a pure
numpy vectorised path.  The environment variable ``NAIVETM_BACKEND``
chooses between them at import time:

* unset or ``auto``  -- numba when importable, numpy otherwise;
* ``numba``          -- require numba, fail loudly if missing;
* ``numpy``          -- force the fallback (useful for debugging and for
  the backend-comparison benchmark).

Kernel contract: ``cells`` has one row per tape position on a contiguous
window, ``head`` is the row index of relative position 0 and ``write``,
``nxt``, ``move`` are the transition tables as integer matrices indexed by
(symbol, state).  Move codes are 0=left, 1=right, 2=stay; symbol index 0 is
the blank.  The output window is one row wider on each side and the new
head row index is ``head + 1``.

The dual kernels carry one derivative array alongside each value array,
propagated with the product rule; they back the forward-mode gradients in
the synthesis module.
"""

from __future__ import annotations

import os

import numpy as np

MOVE_LEFT, MOVE_RIGHT, MOVE_STAY = 0, 1, 2


# ---------------------------------------------------------------------------
# pure numpy implementation
# ---------------------------------------------------------------------------

def _np_step_kernel(cells, state, head, write, nxt, move):
    n, s = cells.shape
    q = state.shape[0]
    outer = np.outer(cells[head], state)
    m = np.bincount(move.ravel(), weights=outer.ravel(), minlength=3)
    w_written = np.bincount(write.ravel(), weights=outer.ravel(), minlength=s)
    new_state = np.bincount(nxt.ravel(), weights=outer.ravel(), minlength=q)

    blank = np.zeros(s)
    blank[0] = 1.0
    right = np.empty((n + 2, s))
    right[:n] = cells
    right[n:] = blank
    left = np.empty((n + 2, s))
    left[:2] = blank
    left[2:] = cells
    stay = np.empty((n + 2, s))
    stay[0] = blank
    stay[1 : n + 1] = cells
    stay[n + 1] = blank
    right[head] = w_written
    left[head + 2] = w_written
    stay[head + 1] = w_written

    new_cells = m[MOVE_RIGHT] * right + m[MOVE_LEFT] * left + m[MOVE_STAY] * stay
    return new_cells, new_state


def _np_dual_step_kernel(cells, dcells, state, dstate, head, write, nxt, move):
    n, s = cells.shape
    q = state.shape[0]
    outer = np.outer(cells[head], state)
    douter = np.outer(dcells[head], state) + np.outer(cells[head], dstate)
    m = np.bincount(move.ravel(), weights=outer.ravel(), minlength=3)
    dm = np.bincount(move.ravel(), weights=douter.ravel(), minlength=3)
    w_written = np.bincount(write.ravel(), weights=outer.ravel(), minlength=s)
    dw_written = np.bincount(write.ravel(), weights=douter.ravel(), minlength=s)
    new_state = np.bincount(nxt.ravel(), weights=outer.ravel(), minlength=q)
    dnew_state = np.bincount(nxt.ravel(), weights=douter.ravel(), minlength=q)

    blank = np.zeros(s)
    blank[0] = 1.0

    def sources(values, dvalues):
        right = np.empty((n + 2, s))
        dright = np.empty((n + 2, s))
        right[:n] = values
        right[n:] = blank
        dright[:n] = dvalues
        dright[n:] = 0.0
        left = np.empty((n + 2, s))
        dleft = np.empty((n + 2, s))
        left[:2] = blank
        left[2:] = values
        dleft[:2] = 0.0
        dleft[2:] = dvalues
        stay = np.empty((n + 2, s))
        dstay = np.empty((n + 2, s))
        stay[0] = blank
        stay[1 : n + 1] = values
        stay[n + 1] = blank
        dstay[0] = 0.0
        dstay[1 : n + 1] = dvalues
        dstay[n + 1] = 0.0
        return right, dright, left, dleft, stay, dstay

    right, dright, left, dleft, stay, dstay = sources(cells, dcells)
    right[head] = w_written
    dright[head] = dw_written
    left[head + 2] = w_written
    dleft[head + 2] = dw_written
    stay[head + 1] = w_written
    dstay[head + 1] = dw_written

    new_cells = m[MOVE_RIGHT] * right + m[MOVE_LEFT] * left + m[MOVE_STAY] * stay
    dnew_cells = (
        m[MOVE_RIGHT] * dright
        + dm[MOVE_RIGHT] * right
        + m[MOVE_LEFT] * dleft
        + dm[MOVE_LEFT] * left
        + m[MOVE_STAY] * dstay
        + dm[MOVE_STAY] * stay
    )
    return new_cells, dnew_cells, new_state, dnew_state


# ---------------------------------------------------------------------------
# numba implementation (same contract, explicit loops)
# ---------------------------------------------------------------------------

def _build_numba_kernels():
    from numba import njit

    @njit(cache=True)
    def step_kernel(cells, state, head, write, nxt, move):
        n, s = cells.shape
        q = state.shape[0]
        m_left = 0.0
        m_right = 0.0
        m_stay = 0.0
        w_written = np.zeros(s)
        new_state = np.zeros(q)
        for sig in range(s):
            x = cells[head, sig]
            if x == 0.0:
                continue
            for st in range(q):
                p = x * state[st]
                if p == 0.0:
                    continue
                mv = move[sig, st]
                if mv == 0:
                    m_left += p
                elif mv == 1:
                    m_right += p
                else:
                    m_stay += p
                w_written[write[sig, st]] += p
                new_state[nxt[sig, st]] += p

        new_cells = np.zeros((n + 2, s))
        for j in range(n + 2):
            # right move: cell comes from one position further right
            if j == head:
                for sig in range(s):
                    new_cells[j, sig] += m_right * w_written[sig]
            elif j < n:
                for sig in range(s):
                    new_cells[j, sig] += m_right * cells[j, sig]
            else:
                new_cells[j, 0] += m_right
            # left move
            if j == head + 2:
                for sig in range(s):
                    new_cells[j, sig] += m_left * w_written[sig]
            elif 2 <= j < n + 2:
                for sig in range(s):
                    new_cells[j, sig] += m_left * cells[j - 2, sig]
            else:
                new_cells[j, 0] += m_left
            # stay
            if j == head + 1:
                for sig in range(s):
                    new_cells[j, sig] += m_stay * w_written[sig]
            elif 1 <= j < n + 1:
                for sig in range(s):
                    new_cells[j, sig] += m_stay * cells[j - 1, sig]
            else:
                new_cells[j, 0] += m_stay
        return new_cells, new_state

    @njit(cache=True)
    def dual_step_kernel(cells, dcells, state, dstate, head, write, nxt, move):
        n, s = cells.shape
        q = state.shape[0]
        m3 = np.zeros(3)
        dm3 = np.zeros(3)
        w_written = np.zeros(s)
        dw_written = np.zeros(s)
        new_state = np.zeros(q)
        dnew_state = np.zeros(q)
        for sig in range(s):
            x = cells[head, sig]
            dx = dcells[head, sig]
            if x == 0.0 and dx == 0.0:
                continue
            for st in range(q):
                p = x * state[st]
                dp = dx * state[st] + x * dstate[st]
                if p == 0.0 and dp == 0.0:
                    continue
                m3[move[sig, st]] += p
                dm3[move[sig, st]] += dp
                w_written[write[sig, st]] += p
                dw_written[write[sig, st]] += dp
                new_state[nxt[sig, st]] += p
                dnew_state[nxt[sig, st]] += dp

        m_left, m_right, m_stay = m3[0], m3[1], m3[2]
        dm_left, dm_right, dm_stay = dm3[0], dm3[1], dm3[2]
        new_cells = np.zeros((n + 2, s))
        dnew_cells = np.zeros((n + 2, s))
        for j in range(n + 2):
            if j == head:
                for sig in range(s):
                    new_cells[j, sig] += m_right * w_written[sig]
                    dnew_cells[j, sig] += m_right * dw_written[sig] + dm_right * w_written[sig]
            elif j < n:
                for sig in range(s):
                    new_cells[j, sig] += m_right * cells[j, sig]
                    dnew_cells[j, sig] += m_right * dcells[j, sig] + dm_right * cells[j, sig]
            else:
                new_cells[j, 0] += m_right
                dnew_cells[j, 0] += dm_right
            if j == head + 2:
                for sig in range(s):
                    new_cells[j, sig] += m_left * w_written[sig]
                    dnew_cells[j, sig] += m_left * dw_written[sig] + dm_left * w_written[sig]
            elif 2 <= j < n + 2:
                for sig in range(s):
                    new_cells[j, sig] += m_left * cells[j - 2, sig]
                    dnew_cells[j, sig] += m_left * dcells[j - 2, sig] + dm_left * cells[j - 2, sig]
            else:
                new_cells[j, 0] += m_left
                dnew_cells[j, 0] += dm_left
            if j == head + 1:
                for sig in range(s):
                    new_cells[j, sig] += m_stay * w_written[sig]
                    dnew_cells[j, sig] += m_stay * dw_written[sig] + dm_stay * w_written[sig]
            elif 1 <= j < n + 1:
                for sig in range(s):
                    new_cells[j, sig] += m_stay * cells[j - 1, sig]
                    dnew_cells[j, sig] += m_stay * dcells[j - 1, sig] + dm_stay * cells[j - 1, sig]
            else:
                new_cells[j, 0] += m_stay
                dnew_cells[j, 0] += dm_stay
        return new_cells, dnew_cells, new_state, dnew_state

    return step_kernel, dual_step_kernel


_NUMPY_KERNELS = {"step": _np_step_kernel, "dual_step": _np_dual_step_kernel, "name": "numpy"}
_numba_cache: dict | None = None


def _numba_kernels() -> dict:
    global _numba_cache
    if _numba_cache is None:
        step, dual = _build_numba_kernels()
        _numba_cache = {"step": step, "dual_step": dual, "name": "numba"}
    return _numba_cache


def get_backend(name: str) -> dict:
    """Kernel set for an explicit backend name ('numba' or 'numpy')."""
    if name == "numpy":
        return _NUMPY_KERNELS
    if name == "numba":
        return _numba_kernels()
    raise ValueError(f"unknown backend {name!r}")


def _select() -> dict:
    requested = os.environ.get("NAIVETM_BACKEND", "auto").lower()
    if requested == "numpy":
        return _NUMPY_KERNELS
    if requested == "numba":
        return _numba_kernels()
    if requested != "auto":
        raise ValueError(f"NAIVETM_BACKEND must be auto, numba or numpy, got {requested!r}")
    try:
        return _numba_kernels()
    except ImportError:
        return _NUMPY_KERNELS


_SELECTED = _select()
BACKEND = _SELECTED["name"]
step_kernel = _SELECTED["step"]
dual_step_kernel = _SELECTED["dual_step"]
