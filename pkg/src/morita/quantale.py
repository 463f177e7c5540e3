"""Quantales on finite sup-lattices.

A quantale here is a lattice with an associative multiplication that
distributes over joins in both arguments. Finiteness reduces the sup-side
laws to binary joins plus annihilation by bottom. The motivating example is
the endomorphism quantale Q(X) of all sup-maps X -> X under composition.
"""

import numpy as np

from .errors import (DomainMismatch, MissingInvolution, MoritaError,
                     NotCompositionClosed, NotSupMap, PASS, ShapeMismatch,
                     failure)
from .lattice import (FiniteSupLattice, SupMap, enumerate_sup_maps,
                      is_sup_map, validate_lattice)


def _freeze(arr):
    arr.flags.writeable = False
    return arr


class Quantale:
    __slots__ = ("carrier", "mult", "unit")

    def __init__(self, carrier: FiniteSupLattice, mult, unit=None):
        self.carrier = carrier
        arr = np.array(mult, dtype=np.int64)
        n = carrier.n
        if arr.shape != (n, n):
            raise ShapeMismatch(f"multiplication table {arr.shape}, carrier {n}")
        if arr.size and (int(arr.min()) < 0 or int(arr.max()) >= n):
            raise DomainMismatch("product outside the carrier")
        self.mult = _freeze(arr)
        self.unit = None if unit is None else int(unit)

    @property
    def n(self):
        return self.carrier.n

    @property
    def names(self):
        return self.carrier.names

    def __eq__(self, other):
        return (isinstance(other, Quantale) and self.carrier == other.carrier
                and self.mult.tobytes() == other.mult.tobytes())

    def __hash__(self):
        return hash((self.carrier, self.mult.tobytes()))

    def __repr__(self):
        return f"Quantale(n={self.n})"


def check_quantale(q: Quantale):
    'Verdict on associativity, distributivity over joins, and annihilation.'
    m, j = q.mult, q.carrier.join
    names = q.names
    bot = q.carrier.bottom

    lhs, rhs = m[m, :], m[:, m]
    bad = np.argwhere(lhs != rhs)
    if len(bad):
        a, b, c = map(int, bad[0])
        return failure("associative", (names[a], names[b], names[c]),
                       f"(ab)c = {names[lhs[a, b, c]]} but a(bc) = {names[rhs[a, b, c]]}")

    lhs, rhs = m[:, j], j[m[:, :, None], m[:, None, :]]
    bad = np.argwhere(lhs != rhs)
    if len(bad):
        a, b, c = map(int, bad[0])
        return failure("left-distributive", (names[a], names[b], names[c]),
                       f"a(b v c) = {names[lhs[a, b, c]]} but ab v ac = {names[rhs[a, b, c]]}")

    lhs, rhs = m[j, :], j[m[:, None, :], m[None, :, :]]
    bad = np.argwhere(lhs != rhs)
    if len(bad):
        a, b, c = map(int, bad[0])
        return failure("right-distributive", (names[a], names[b], names[c]),
                       f"(a v b)c = {names[lhs[a, b, c]]} but ac v bc = {names[rhs[a, b, c]]}")

    bad = np.flatnonzero(m[:, bot] != bot)
    if len(bad):
        a = int(bad[0])
        return failure("right-annihilation", (names[a],),
                       f"a.0 = {names[m[a, bot]]}")
    bad = np.flatnonzero(m[bot, :] != bot)
    if len(bad):
        a = int(bad[0])
        return failure("left-annihilation", (names[a],),
                       f"0.a = {names[m[bot, a]]}")
    return PASS


def as_quantale(carrier, mult, unit=None) -> Quantale:
    q = Quantale(carrier, mult, unit)
    v = check_quantale(q)
    if not v:
        raise MoritaError(f"not a quantale: {v}")
    return q


# --- endomorphism quantales --------------------------------------------------------

class OperatorQuantale(Quantale):
    """Q(X): all sup-maps X -> X, ordered pointwise, multiplied by composition.

    ``op_values[i]`` is the value table of operator i; ``index`` inverts it.
    The identity is recorded as the unit but nothing downstream relies on it.
    """

    __slots__ = ("base", "op_values", "index")

    def __init__(self, base, carrier, mult, op_values, unit):
        super().__init__(carrier, mult, unit)
        self.base = base
        self.op_values = tuple(op_values)
        self.index = {v: i for i, v in enumerate(self.op_values)}

    def apply(self, i, x):
        'Apply operator i to the base element x.'
        return self.op_values[i][x]

    def as_sup_map(self, i):
        return SupMap(self.base, self.base, self.op_values[i])


def _operator_name(base, values):
    return "[" + " ".join(base.names[v] for v in values) + "]"


def endo_quantale(x: FiniteSupLattice) -> OperatorQuantale:
    'Build Q(x) by enumerating every sup-map x -> x.'
    ops = sorted(f.values for f in enumerate_sup_maps(x, x))
    n = len(ops)
    vals = np.array(ops, dtype=np.int64)
    leq = x.leq[vals[:, None, :], vals[None, :, :]].all(axis=2)
    names = [_operator_name(x, v) for v in ops]
    carrier = validate_lattice(leq, names)
    index = {v: i for i, v in enumerate(ops)}
    mult = np.empty((n, n), dtype=np.int64)
    for i, f in enumerate(ops):
        for k, g in enumerate(ops):
            mult[i, k] = index[tuple(f[v] for v in g)]
    unit = index[tuple(range(x.n))]
    return OperatorQuantale(x, carrier, mult, ops, unit)


def image_subquantale(q: Quantale, family: SupMap):
    """Restrict a quantale to the image of a sup-map into its carrier.

    The image is join-closed automatically; composition closure is a real
    condition and failures raise NotCompositionClosed with a witness pair.
    Returns the image quantale and the corestricted index map.
    """
    if family.cod != q.carrier:
        raise DomainMismatch("family does not land in the quantale carrier")
    v = is_sup_map(family)
    if not v:
        raise NotSupMap(str(v))
    img = sorted(set(family.values))
    pos = {e: i for i, e in enumerate(img)}
    for a in img:
        for b in img:
            if int(q.carrier.join[a, b]) not in pos:
                raise MoritaError("internal: image of a sup-map not join-closed")
            c = int(q.mult[a, b])
            if c not in pos:
                raise NotCompositionClosed(
                    f"product {q.names[a]} . {q.names[b]} = {q.names[c]} "
                    "escapes the image", witness=(q.names[a], q.names[b]))
    sel = np.asarray(img)
    leq = q.carrier.leq[np.ix_(sel, sel)]
    carrier = validate_lattice(leq, [q.names[e] for e in img])
    mult = np.array([[pos[int(q.mult[a, b])] for b in img] for a in img])
    unit = pos.get(q.unit) if q.unit is not None else None
    sub = Quantale(carrier, mult, unit)
    if isinstance(q, OperatorQuantale):
        sub = OperatorQuantale(q.base, carrier, mult,
                               [q.op_values[e] for e in img], unit)
    corestriction = SupMap(family.dom, carrier,
                           tuple(pos[e] for e in family.values))
    check = is_sup_map(corestriction)
    if not check:
        raise MoritaError(f"internal: corestriction broke joins: {check}")
    return sub, corestriction


# --- involutions ---------------------------------------------------------------------

class InvolutiveQuantale:
    __slots__ = ("quantale", "star")

    def __init__(self, quantale, star):
        self.quantale = quantale
        self.star = tuple(int(s) for s in star)

    @property
    def carrier(self):
        return self.quantale.carrier

    def __repr__(self):
        return f"InvolutiveQuantale(n={self.quantale.n})"


def is_quantale_involution(q: Quantale, star):
    'Verdict: period two, join-preserving, and an antihomomorphism.'
    star = tuple(int(s) for s in star)
    if len(star) != q.n or not all(0 <= s < q.n for s in star):
        raise DomainMismatch("star table does not match the carrier")
    names = q.names
    for i in range(q.n):
        if star[star[i]] != i:
            return failure("period-two", (names[i],),
                           f"{names[i]}** = {names[star[star[i]]]}")
    v = is_sup_map(SupMap(q.carrier, q.carrier, star))
    if not v:
        return v
    st = np.asarray(star)
    lhs = st[q.mult]
    rhs = q.mult[np.ix_(st, st)].T   # (b*, a*) product at position (a, b)
    bad = np.argwhere(lhs != rhs)
    if len(bad):
        a, b = map(int, bad[0])
        return failure("antihomomorphism", (names[a], names[b]),
                       f"(ab)* = {names[lhs[a, b]]} but b*a* = {names[rhs[a, b]]}")
    return PASS


def as_involutive_quantale(q: Quantale, star) -> InvolutiveQuantale:
    if star is None:
        raise MissingInvolution("a star table is required")
    v = is_quantale_involution(q, star)
    if not v:
        raise MissingInvolution(f"not an involution: {v}")
    return InvolutiveQuantale(q, star)
