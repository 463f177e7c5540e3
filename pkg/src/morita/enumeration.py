"""Enumeration of finite lattices up to isomorphism.

Two independent generators:

* :func:`enumerate_lattices` - incremental backtracking. Elements are added
  one at a time in a topological order; each new element picks the downset
  it sits above, with pruning rules that keep every completion a lattice.
  Isomorphs are rejected by canonical form.
* :func:`enumerate_lattices_bruteforce` - filters every upper-triangular
  relation on n points and dedupes by explicit isomorphism search. Slow and
  simple; exists to cross-check the first.
"""

from itertools import combinations, permutations, product

import numpy as np

from .errors import MissingJoin, MoritaError, NoBottom, NotAPartialOrder, \
    NoTop, ResourceLimit
from .lattice import FiniteSupLattice, validate_lattice

MAX_ENUM_N = 7


# --- canonical form -------------------------------------------------------------

def _refine_classes(leq):
    """Partition elements by iterated order-invariants.

    Returns a list of index lists; any isomorphism must respect the
    partition, which keeps the permutation search small.
    """
    n = leq.shape[0]
    # downset size first, so canonical labellings run bottom-up
    sig = [(int(leq[:, i].sum()), int(leq[i].sum())) for i in range(n)]
    for _ in range(3):
        ranked = {s: r for r, s in enumerate(sorted(set(sig)))}
        rank = [ranked[s] for s in sig]
        sig = [(rank[i],
                tuple(sorted(rank[j] for j in range(n) if j != i and leq[i, j])),
                tuple(sorted(rank[j] for j in range(n) if j != i and leq[j, i])))
               for i in range(n)]
    ranked = {s: r for r, s in enumerate(sorted(set(sig)))}
    classes = {}
    for i in range(n):
        classes.setdefault(ranked[sig[i]], []).append(i)
    return [classes[r] for r in sorted(classes)]


def _class_permutations(classes):
    'All permutations that map each invariant class onto itself.'
    n = sum(len(c) for c in classes)
    for parts in product(*(permutations(c) for c in classes)):
        perm = [0] * n
        for orig, imgs in zip(classes, parts):
            for o, m in zip(orig, imgs):
                perm[o] = m
        yield perm


def _class_orderings(classes):
    'Element orderings listing the classes contiguously in rank order.'
    for parts in product(*(permutations(c) for c in classes)):
        yield [e for part in parts for e in part]


def _as_leq(lat_or_leq):
    return lat_or_leq.leq if isinstance(lat_or_leq, FiniteSupLattice) \
        else np.asarray(lat_or_leq, dtype=bool)


def canonical_key(lat_or_leq) -> bytes:
    """Lexicographically minimal order matrix over isomorphisms, as bytes.

    Isomorphisms respect the invariant classes, and the class ranks are
    themselves invariant, so minimising over class-ordered relabellings
    minimises over all of them.
    """
    leq = _as_leq(lat_or_leq)
    classes = _refine_classes(leq)
    best = None
    for order in _class_orderings(classes):
        p = np.asarray(order)
        key = leq[np.ix_(p, p)].tobytes()
        if best is None or key < best:
            best = key
    return best


def automorphisms(lat):
    'All order automorphisms, as index tuples perm with perm[i] the image of i.'
    leq = lat.leq
    out = []
    for perm in _class_permutations(_refine_classes(leq)):
        p = np.asarray(perm)
        if (leq[np.ix_(p, p)] == leq).all():
            out.append(tuple(int(v) for v in p))
    return out


def _ordering_achieving(leq, key):
    for order in _class_orderings(_refine_classes(leq)):
        p = np.asarray(order)
        if leq[np.ix_(p, p)].tobytes() == key:
            return order
    raise MoritaError("internal: canonical key not reproduced")


def find_isomorphism(a, b):
    'An order isomorphism a -> b as an index tuple, or None.'
    if a.n != b.n:
        return None
    ka, kb = canonical_key(a), canonical_key(b)
    if ka != kb:
        return None
    pa = _ordering_achieving(_as_leq(a), ka)
    pb = _ordering_achieving(_as_leq(b), kb)
    perm = [0] * a.n
    for k in range(a.n):
        perm[pa[k]] = pb[k]
    return tuple(perm)


# --- generator A: incremental backtracking ---------------------------------------

def _downsets(down, upto):
    'Downward-closed subsets of {0..upto-1} containing the bottom, as masks.'
    if upto == 0:
        return [0]
    out = []
    for mask in range(1, 1 << upto, 2):  # odd: bottom always in
        ok = True
        m = mask
        while m:
            j = (m & -m).bit_length() - 1
            if down[j] & ~mask & ((1 << upto) - 1):
                ok = False
                break
            m &= m - 1
        if ok:
            out.append(mask)
    return out


def _has_max(mask, down):
    'Does the nonempty element set have a greatest member?'
    m = mask
    while m:
        c = (m & -m).bit_length() - 1
        if mask & ~down[c] == 0:
            return True
        m &= m - 1
    return False


def enumerate_lattices(n, max_n=MAX_ENUM_N):
    """All lattices on n elements up to isomorphism, canonically ordered.

    Elements are inserted bottom-up; index order is a linear extension, so a
    new element is never below an old one. Pruning invariants:

    * the strict downset of a new element is downward closed;
    * meets of existing pairs are already settled, so every pair below the
      new element must keep a greatest common lower bound;
    * once a pair has common upper bounds, their least member must already
      exist (later elements can never slip below the current ones).
    """
    if n < 1:
        raise MoritaError("n must be at least 1")
    if n > max_n:
        raise ResourceLimit(f"lattice enumeration capped at n={max_n}")
    if n == 1:
        return [validate_lattice(np.eye(1, dtype=bool))]

    seen = set()
    reps = []
    down = [0] * n   # down[i]: mask of j <= i, including i
    up = [0] * n

    def insert(i):
        if i == n:
            leq = np.zeros((n, n), dtype=bool)
            for j in range(n):
                m = down[j]
                while m:
                    k = (m & -m).bit_length() - 1
                    leq[k, j] = True
                    m &= m - 1
            key = canonical_key(leq)
            if key not in seen:
                seen.add(key)
                reps.append(np.frombuffer(key, dtype=bool).reshape(n, n).copy())
            return
        last = i == n - 1
        for dmask in _downsets(down, i):
            if last and dmask != (1 << i) - 1:
                continue
            ok = True
            for j in range(i):
                if not _has_max(dmask & down[j], down):
                    ok = False  # meet of i and j would be missing
                    break
            if ok and not last:
                # pairs under the new element gain it as an upper bound; a
                # least upper bound must survive (it can only be an element
                # that already exists and sits under the new one, or the new
                # element itself when the pair had no upper bound before)
                m = dmask
                pairs = []
                while m:
                    a = (m & -m).bit_length() - 1
                    mm = m & (m - 1)
                    while mm:
                        b = (mm & -mm).bit_length() - 1
                        pairs.append((a, b))
                        mm &= mm - 1
                    m &= m - 1
                for a, b in pairs:
                    ub_old = up[a] & up[b]
                    if not ub_old:
                        continue
                    found = False
                    mm = ub_old
                    while mm:
                        c = (mm & -mm).bit_length() - 1
                        if ub_old & ~up[c] == 0 and (dmask >> c) & 1:
                            found = True
                            break
                        mm &= mm - 1
                    if not found:
                        ok = False
                        break
            if not ok:
                continue
            down[i] = dmask | (1 << i)
            up[i] = 1 << i
            touched = []
            m = dmask
            while m:
                j = (m & -m).bit_length() - 1
                up[j] |= 1 << i
                touched.append(j)
                m &= m - 1
            insert(i + 1)
            for j in touched:
                up[j] &= ~(1 << i)
            down[i] = up[i] = 0

    # bottom is element 0, below everything by construction
    down[0] = 1
    up[0] = 1
    insert(1)
    lats = [validate_lattice(leq) for leq in reps]
    lats.sort(key=lambda l: l.leq.tobytes())
    return lats


# --- generator B: naive filter ----------------------------------------------------

def _is_lattice_matrix(leq):
    try:
        validate_lattice(leq)
        return True
    except (NotAPartialOrder, NoBottom, MissingJoin, NoTop):
        return False


def _isomorphic_brute(la, lb):
    n = la.shape[0]
    degs_a = sorted((int(la[i].sum()), int(la[:, i].sum())) for i in range(n))
    degs_b = sorted((int(lb[i].sum()), int(lb[:, i].sum())) for i in range(n))
    if degs_a != degs_b:
        return False
    for perm in permutations(range(n)):
        p = np.asarray(perm)
        if (la == lb[np.ix_(p, p)]).all():
            return True
    return False


def enumerate_lattices_bruteforce(n, max_n=6):
    """Filter all upper-triangular relations; dedupe by permutation search.

    Shares nothing with :func:`enumerate_lattices` beyond validate_lattice.
    Any topological labelling is upper-triangular, so nothing is missed.
    """
    if n > max_n:
        raise ResourceLimit(f"naive enumeration capped at n={max_n}")
    if n == 1:
        return [validate_lattice(np.eye(1, dtype=bool))]
    cells = list(combinations(range(n), 2))
    reps = []
    for bits in product((False, True), repeat=len(cells)):
        leq = np.eye(n, dtype=bool)
        for (i, j), b in zip(cells, bits):
            leq[i, j] = b
        sq = (leq.astype(np.uint8) @ leq.astype(np.uint8)) > 0
        if (sq & ~leq).any():
            continue
        if not _is_lattice_matrix(leq):
            continue
        if not any(_isomorphic_brute(leq, r) for r in reps):
            reps.append(leq)
    return [validate_lattice(r) for r in reps]
