"""Closure kernels for multi-ideal fixpoints.

The multi-ideal closure is the innermost loop of tensor construction: every
join in a tensor lattice is one closure call. Two interchangeable backends
are provided:

* ``numba`` - ``@njit``-compiled loops (default when numba is importable)
* ``numpy`` - vectorised boolean array passes

Set ``MORITA_PURE_NUMPY=1`` to force the numpy path. ``benchmarks/
bench_kernels.py`` compares the two.
"""

import os

import numpy as np

_FORCE_NUMPY = os.environ.get("MORITA_PURE_NUMPY", "") not in ("", "0")


# --- numpy backend -----------------------------------------------------------

def _down_pass_np(dmask, below):
    'Add every tuple below a member. below[s,t] iff s <= t componentwise.'
    new = (below & dmask[None, :]).any(axis=1)
    changed = bool((new & ~dmask).any())
    dmask |= new
    return changed


def _fiber_pass_np(dmask, flat_idx, join):
    'Close every fiber of one slot under binary joins. flat_idx is (n, rest).'
    n = flat_idx.shape[0]
    view = dmask[flat_idx]
    changed = False
    stable = False
    while not stable:
        stable = True
        for x in range(n):
            if not view[x].any():
                continue
            for y in range(x + 1, n):
                j = join[x, y]
                if j == x or j == y:
                    continue
                add = view[x] & view[y] & ~view[j]
                if add.any():
                    view[j] |= add
                    stable = False
                    changed = True
    if changed:
        dmask[flat_idx] = view
    return changed


_NUMPY_BACKEND = (_down_pass_np, _fiber_pass_np)


# --- numba backend ------------------------------------------------------------

_NUMBA_BACKEND = None
if not _FORCE_NUMPY:
    try:
        from numba import njit

        @njit(cache=True)
        def _down_pass_nb(dmask, below):
            t_count = dmask.shape[0]
            changed = False
            for t in range(t_count):
                if not dmask[t]:
                    continue
                for s in range(t_count):
                    if below[s, t] and not dmask[s]:
                        dmask[s] = True
                        changed = True
            return changed

        @njit(cache=True)
        def _fiber_pass_nb(dmask, flat_idx, join):
            n = flat_idx.shape[0]
            rest = flat_idx.shape[1]
            changed = False
            stable = False
            while not stable:
                stable = True
                for x in range(n):
                    for y in range(x + 1, n):
                        j = join[x, y]
                        if j == x or j == y:
                            continue
                        for r in range(rest):
                            if (dmask[flat_idx[x, r]] and dmask[flat_idx[y, r]]
                                    and not dmask[flat_idx[j, r]]):
                                dmask[flat_idx[j, r]] = True
                                stable = False
                                changed = True
            return changed

        _NUMBA_BACKEND = (_down_pass_nb, _fiber_pass_nb)
    except ImportError:
        _NUMBA_BACKEND = None


def backends():
    'Available backends by name; used by the equivalence tests and benchmark.'
    out = {"numpy": _NUMPY_BACKEND}
    if _NUMBA_BACKEND is not None:
        out["numba"] = _NUMBA_BACKEND
    return out


ACTIVE = "numba" if _NUMBA_BACKEND is not None else "numpy"
_down_pass, _fiber_pass = _NUMBA_BACKEND or _NUMPY_BACKEND


def close_ideal(dmask, below, flat_idxs, joins, backend=None):
    """Least multi-ideal containing the marked tuples, in place.

    Alternates a downset pass with per-slot fiber join passes until stable.
    ``dmask`` must already include the bottom mask (tuples with a bottom
    coordinate); callers seed it that way.
    """
    down, fiber = backends()[backend] if backend else (_down_pass, _fiber_pass)
    changed = True
    while changed:
        changed = down(dmask, below)
        for flat_idx, join in zip(flat_idxs, joins):
            if fiber(dmask, flat_idx, join):
                changed = True
    return dmask
