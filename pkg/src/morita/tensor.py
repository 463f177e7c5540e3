"""Tensor products of finite sup-lattices.

The tensor of lattices X1, ..., Xk is realised concretely: its elements are
the multi-ideals of the coordinate grid X1 x ... x Xk, ordered by inclusion.
A multi-ideal is a set of tuples that is downward closed and closed in every
fiber under binary joins in the moving slot; the least one is the set of
tuples with a bottom coordinate. Elementary tensors are the closures of
single tuples, every multi-ideal is a join of elementary tensors, and maps
out of the tensor are exactly the liftings of multimorphisms.
"""

import os

import numpy as np

from . import _kernels
from .errors import (DomainMismatch, MoritaError, NotAMultimorphism,
                     PASS, ResourceLimit, ShapeMismatch, failure)
from .lattice import FiniteSupLattice, SupMap, is_sup_map, validate_lattice

DEFAULT_TENSOR_CAP = 100_000


def _tensor_cap(cap):
    if cap is not None:
        return int(cap)
    env = os.environ.get("MORITA_MAX_TENSOR", "")
    return int(env) if env else DEFAULT_TENSOR_CAP


def _freeze(arr):
    arr.flags.writeable = False
    return arr


class _Grid:
    'Coordinate-grid scaffolding: tuple order, bottom mask, fiber indexing.'

    def __init__(self, factors):
        self.factors = tuple(factors)
        self.sizes = tuple(f.n for f in self.factors)
        self.tcount = int(np.prod(self.sizes))
        self.coords = np.unravel_index(np.arange(self.tcount), self.sizes)
        below = np.ones((self.tcount, self.tcount), dtype=bool)
        bottom = np.zeros(self.tcount, dtype=bool)
        for i, f in enumerate(self.factors):
            ci = self.coords[i]
            below &= f.leq[ci][:, ci]
            bottom |= ci == f.bottom
        self.below = _freeze(below)
        self.bottom_mask = _freeze(bottom)
        grid = np.arange(self.tcount).reshape(self.sizes)
        self.flat_idxs = tuple(
            np.ascontiguousarray(np.moveaxis(grid, i, 0).reshape(s, -1))
            for i, s in enumerate(self.sizes))
        self.joins = tuple(f.join for f in self.factors)

    def ravel(self, coords):
        if len(coords) != len(self.sizes):
            raise DomainMismatch(
                f"expected {len(self.sizes)} coordinates, got {len(coords)}")
        for c, f in zip(coords, self.factors):
            if not 0 <= int(c) < f.n:
                raise DomainMismatch(f"coordinate {c} outside factor of size {f.n}")
        return int(np.ravel_multi_index(tuple(int(c) for c in coords), self.sizes))

    def close(self, mask):
        'Least multi-ideal containing the masked tuples (fresh array).'
        dmask = mask | self.bottom_mask
        _kernels.close_ideal(dmask, self.below, self.flat_idxs, self.joins)
        return dmask

    def elem_bits(self, coords):
        'Closure of a single tuple: its box union the bottom tuples.'
        box = np.ones(self.tcount, dtype=bool)
        for i, f in enumerate(self.factors):
            box &= f.leq[self.coords[i], int(coords[i])]
        return box | self.bottom_mask

    def tuples_of(self, mask):
        flat = np.flatnonzero(mask)
        per = np.unravel_index(flat, self.sizes)
        return [tuple(int(a[k]) for a in per) for k in range(len(flat))]


def multi_ideal_closure(factors, tuples):
    'The least multi-ideal containing the given tuples, as a frozenset.'
    g = _Grid(factors)
    mask = np.zeros(g.tcount, dtype=bool)
    for t in tuples:
        mask[g.ravel(t)] = True
    return frozenset(g.tuples_of(g.close(mask)))


class MultiTensorLattice:
    """A computed tensor product.

    ``lattice`` is the tensor as a plain lattice; ``bits[i]`` is the tuple
    mask of element i; ``elem_table`` maps coordinate tuples to the index of
    their elementary tensor.
    """

    def __init__(self, factors, grid, lattice, bits, elem_table):
        self.factors = tuple(factors)
        self.grid = grid
        self.lattice = lattice
        self.bits = _freeze(bits)
        self.elem_table = _freeze(elem_table)
        self._index = {bits[i].tobytes(): i for i in range(bits.shape[0])}

    @property
    def n(self):
        return self.lattice.n

    def elem(self, coords):
        'Index of the elementary tensor of a coordinate tuple.'
        return int(self.elem_table[tuple(int(c) for c in coords)])

    def index_of(self, mask):
        i = self._index.get(mask.tobytes())
        if i is None:
            raise MoritaError("internal: mask is not a multi-ideal of this tensor")
        return i

    def tuples_of(self, i):
        return self.grid.tuples_of(self.bits[i])

    def maximal_tuples(self, i):
        'Maximal tuples without bottom coordinates; they generate element i.'
        nb = np.flatnonzero(self.bits[i] & ~self.grid.bottom_mask)
        if len(nb) == 0:
            return []
        strict = self.grid.below[np.ix_(nb, nb)] & ~np.eye(len(nb), dtype=bool)
        keep = nb[~strict.any(axis=1)]
        per = np.unravel_index(keep, self.grid.sizes)
        return [tuple(int(a[k]) for a in per) for k in range(len(keep))]

    def __repr__(self):
        shape = " x ".join(str(f.n) for f in self.factors)
        return f"MultiTensorLattice({shape} -> {self.n} elements)"


def _tensor_names(bits, grid, factors):
    'Readable names from maximal generating tuples, index fallback beyond two.'
    names = []
    for i in range(bits.shape[0]):
        nb = np.flatnonzero(bits[i] & ~grid.bottom_mask)
        if len(nb) == 0:
            names.append("0")
            continue
        strict = grid.below[np.ix_(nb, nb)] & ~np.eye(len(nb), dtype=bool)
        keep = nb[~strict.any(axis=1)]
        if len(keep) > 2:
            names.append(f"t{i}")
            continue
        per = np.unravel_index(keep, grid.sizes)
        parts = []
        for k in range(len(keep)):
            parts.append("⊗".join(
                factors[s].names[int(per[s][k])] for s in range(len(factors))))
        names.append("∨".join(parts))
    return names


def tensor_product(*factors, cap=None) -> MultiTensorLattice:
    """Build the tensor of two or more lattices.

    Enumerates multi-ideals by closing the elementary tensors under binary
    joins (closure of unions). Raises ResourceLimit beyond ``cap`` elements;
    the default cap is 100000, overridable via MORITA_MAX_TENSOR.
    """
    if len(factors) == 1 and isinstance(factors[0], (list, tuple)):
        factors = tuple(factors[0])
    if len(factors) < 2:
        raise DomainMismatch("a tensor product needs at least two factors")
    if not all(isinstance(f, FiniteSupLattice) for f in factors):
        raise DomainMismatch("tensor factors must be validated lattices")
    cap = _tensor_cap(cap)
    g = _Grid(factors)

    gens = {}
    for flat in range(g.tcount):
        coords = tuple(int(a[flat]) for a in g.coords)
        b = g.elem_bits(coords)
        gens.setdefault(b.tobytes(), b)
    gen_list = list(gens.values())

    elements = dict(gens)
    queue = list(gen_list)
    qi = 0
    while qi < len(queue):
        cur = queue[qi]
        qi += 1
        for gb in gen_list:
            if not (gb & ~cur).any():
                continue
            closed = g.close(cur | gb)
            key = closed.tobytes()
            if key not in elements:
                if len(elements) >= cap:
                    raise ResourceLimit(
                        f"tensor exceeds {cap} elements; raise MORITA_MAX_TENSOR")
                elements[key] = closed
                queue.append(closed)

    order = sorted(elements.values(), key=lambda b: (int(b.sum()), b.tobytes()))
    bits = np.array(order)
    n = bits.shape[0]

    a = bits.astype(np.int32)
    leq = (a @ (1 - a).T) == 0   # subset relation
    names = _tensor_names(bits, g, factors)
    lattice = validate_lattice(leq, names)

    index = {order[i].tobytes(): i for i in range(n)}
    elem_table = np.empty(g.sizes, dtype=np.int64)
    flat_table = elem_table.reshape(-1)
    for flat in range(g.tcount):
        coords = tuple(int(a[flat]) for a in g.coords)
        flat_table[flat] = index[g.elem_bits(coords).tobytes()]

    return MultiTensorLattice(factors, g, lattice, bits, elem_table)


def elem_tensor(tensor: MultiTensorLattice, coords):
    'The elementary tensor x1 (x) ... (x) xk as an element of the tensor.'
    return tensor.elem(coords)


# --- multimorphisms --------------------------------------------------------------

class Multimorphism:
    'A map of several lattice arguments, sup-preserving in each slot separately.'

    __slots__ = ("factors", "target", "values")

    def __init__(self, factors, target, values):
        self.factors = tuple(factors)
        self.target = target
        arr = np.array(values, dtype=np.int64)
        expect = tuple(f.n for f in self.factors)
        if arr.shape != expect:
            raise ShapeMismatch(f"value table {arr.shape} does not match {expect}")
        if arr.size and (int(arr.min()) < 0 or int(arr.max()) >= target.n):
            raise DomainMismatch("value outside the target carrier")
        self.values = _freeze(arr)

    def __call__(self, *coords):
        return int(self.values[coords])

    def __eq__(self, other):
        return (isinstance(other, Multimorphism)
                and self.factors == other.factors and self.target == other.target
                and self.values.tobytes() == other.values.tobytes())

    def __hash__(self):
        return hash((self.factors, self.target, self.values.tobytes()))

    def __repr__(self):
        shape = " x ".join(str(f.n) for f in self.factors)
        return f"Multimorphism({shape} -> {self.target.n})"


def is_multimorphism(f: Multimorphism):
    'Verdict: each slot preserves the empty and binary joins.'
    tgt = f.target
    for i, fac in enumerate(f.factors):
        flat = np.moveaxis(f.values, i, 0).reshape(fac.n, -1)
        bad = np.flatnonzero(flat[fac.bottom] != tgt.bottom)
        if len(bad):
            return failure(f"slot-{i}-bottom", (fac.names[fac.bottom],),
                           "bottom in this slot does not map to bottom")
        lhs = flat[fac.join]
        rhs = tgt.join[flat[:, None, :], flat[None, :, :]]
        mism = np.argwhere(lhs != rhs)
        if len(mism):
            x, y, r = map(int, mism[0])
            return failure(
                f"slot-{i}-joins", (fac.names[x], fac.names[y]),
                f"join in slot {i} at rest-index {r}: maps to "
                f"{tgt.names[lhs[x, y, r]]} but joins to {tgt.names[rhs[x, y, r]]}")
    return PASS


def as_multimorphism(factors, target, values) -> Multimorphism:
    f = Multimorphism(factors, target, values)
    v = is_multimorphism(f)
    if not v:
        raise NotAMultimorphism(str(v))
    return f


def lift_multimorphism(f: Multimorphism, tensor: MultiTensorLattice = None) -> SupMap:
    """The unique sup-map on the tensor agreeing with f on elementary tensors.

    The lift sends a multi-ideal to the join of f over its tuples. Closure
    only ever adds tuples that are dominated or fiber joins, so the join over
    a closed union equals the join of the joins: the lift is sup-preserving.
    """
    v = is_multimorphism(f)
    if not v:
        raise NotAMultimorphism(str(v))
    if tensor is None:
        tensor = tensor_product(*f.factors)
    elif tensor.factors != f.factors:
        raise DomainMismatch("tensor was built from different factors")
    flat_vals = f.values.reshape(-1)
    values = []
    for i in range(tensor.n):
        idxs = np.flatnonzero(tensor.bits[i])
        values.append(f.target.join_of(int(flat_vals[k]) for k in idxs))
    lifted = SupMap(tensor.lattice, f.target, tuple(values))
    check = is_sup_map(lifted)
    if not check:
        raise MoritaError(f"internal: lift failed to preserve joins: {check}")
    return lifted


def restrict_to_elementaries(g: SupMap, tensor: MultiTensorLattice) -> Multimorphism:
    'The multimorphism a sup-map on the tensor induces on elementary tensors.'
    if g.dom != tensor.lattice:
        raise DomainMismatch("map is not defined on this tensor")
    vals = np.asarray(g.values, dtype=np.int64)[tensor.elem_table]
    return Multimorphism(tensor.factors, g.cod, vals)


def splice(tensor: MultiTensorLattice, sub: MultiTensorLattice, sub_element,
           pos, fixed):
    """Embed a sub-tensor element with the remaining coordinates fixed.

    ``sub`` must match ``tensor.factors[pos:pos+k]``; ``fixed`` supplies the
    other coordinates in slot order. Returns the index in ``tensor`` of the
    closure of { prefix + t + suffix : t a tuple of the sub element }. This
    is sup-preserving in the element and in every fixed coordinate.
    """
    k = len(sub.factors)
    if tensor.factors[pos:pos + k] != sub.factors:
        raise DomainMismatch("sub-tensor factors do not sit at that position")
    fixed = tuple(int(c) for c in fixed)
    if len(fixed) != len(tensor.factors) - k:
        raise DomainMismatch(f"expected {len(tensor.factors) - k} fixed coordinates")
    mask = np.zeros(tensor.grid.tcount, dtype=bool)
    pre, post = fixed[:pos], fixed[pos:]
    for t in sub.tuples_of(sub_element):
        mask[tensor.grid.ravel(pre + t + post)] = True
    return tensor.index_of(tensor.grid.close(mask))
