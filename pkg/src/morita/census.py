"""Exhaustive search for Morita pair witnesses over small lattices.

Candidate maps are enumerated by assigning values on tuples of
join-irreducibles and extending by joins; the extension is verified
slotwise afterwards, because on non-distributive factors a monotone
assignment need not extend to a multimorphism. Surviving candidates are
filtered through the pair conditions, deduplicated by witness isomorphism
(automorphism orbits of the canonical lattice representatives), re-verified
end to end, and emitted in a deterministic sorted order independent of the
worker count.
"""

import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .engine import (InvolutiveWitness, MoritaPairWitness, _distinct_slices,
                     build_context_from_pair, build_involutive_context,
                     check_imprimitivity, check_morita_context,
                     check_pair_conditions, conditions_from_tables,
                     extract_pair_from_context,
                     involutive_conditions_from_tables)
from .enumeration import automorphisms, enumerate_lattices
from .errors import DomainMismatch, MoritaError, ResourceLimit
from .lattice import conjugate_lattice, join_closure, validate_lattice
from .tensor import Multimorphism, is_multimorphism, tensor_product


# --- candidate enumeration ----------------------------------------------------------

def enumerate_multimorphisms(factors, target, cap=None):
    """Yield every slotwise-join-preserving map factors -> target, once each.

    Walks monotone assignments on tuples of join-irreducibles in a linear
    extension of the product order (join_irreducibles is sorted by downset
    size, so lex order over position tuples works), extends to full tables
    by joins, and keeps the extensions that verify.
    """
    factors = tuple(factors)
    irrs = [f.join_irreducibles() for f in factors]
    cells = list(itertools.product(*[range(len(ir)) for ir in irrs]))
    cell_index = {c: i for i, c in enumerate(cells)}
    cell_below = []
    for t, c in enumerate(cells):
        cell_below.append([s for s in range(t) if all(
            factors[i].leq[irrs[i][cells[s][i]], irrs[i][c[i]]]
            for i in range(len(factors)))])

    below_pos = []
    for f, ir in zip(factors, irrs):
        pos = {v: i for i, v in enumerate(ir)}
        below_pos.append([[pos[j] for j in js] for js in f.irreducibles_below()])

    shape = tuple(f.n for f in factors)
    join = target.join
    bottom = target.bottom
    assign = [bottom] * len(cells)
    found = 0

    def extend():
        table = np.empty(shape, dtype=np.int64)
        for t in itertools.product(*[range(s) for s in shape]):
            v = bottom
            for cell in itertools.product(*[below_pos[i][t[i]]
                                            for i in range(len(factors))]):
                v = join[v, assign[cell_index[cell]]]
            table[t] = v
        return table

    def rec(t):
        nonlocal found
        if t == len(cells):
            f = Multimorphism(factors, target, extend())
            if is_multimorphism(f):
                if cap is not None and found >= cap:
                    raise ResourceLimit(
                        f"more than {cap} multimorphisms in one space")
                found += 1
                yield f
            return
        lb = bottom
        for s in cell_below[t]:
            lb = join[lb, assign[s]]
        for v in range(target.n):
            if target.leq[lb, v]:
                assign[t] = v
                yield from rec(t + 1)

    yield from rec(0)


def enumerate_trimorphisms(x1, x2, x3, z, *, surjective=False, cap=None):
    'Three-slot multimorphisms, optionally filtered by lift surjectivity.'
    for f in enumerate_multimorphisms((x1, x2, x3), z, cap=cap):
        if surjective:
            vals = {int(v) for v in np.asarray(f.values).reshape(-1)}
            if len(join_closure(z, vals)) != z.n:
                continue
        yield f


def enumerate_multimorphisms_bruteforce(factors, target, limit=2_000_000):
    'Filter every raw function table; independent oracle for tiny shapes.'
    shape = tuple(int(f.n) for f in factors)
    cells = int(np.prod(shape))
    if target.n ** cells > limit:
        raise ResourceLimit(f"{target.n ** cells} function tables")
    out = []
    for vals in itertools.product(range(target.n), repeat=cells):
        f = Multimorphism(factors, target,
                          np.asarray(vals, dtype=np.int64).reshape(shape))
        if is_multimorphism(f):
            out.append(f)
    return out


# --- tasks and records --------------------------------------------------------------

@dataclass(frozen=True)
class CensusTask:
    'Size bounds, mode, caps, worker count, and output path for one run.'

    max_x: int
    max_y: int = None
    min_x: int = 1
    min_y: int = 1
    involutive: bool = False
    jobs: int = 1
    tri_cap: int = 200_000
    tensor_cap: int = None
    out: str = None

    def __post_init__(self):
        if self.max_y is None:
            object.__setattr__(self, "max_y", self.max_x)
        for name in ("min_x", "max_x", "min_y", "max_y"):
            if getattr(self, name) < 1:
                raise DomainMismatch(f"{name} must be at least 1")
        if self.max_x < self.min_x or self.max_y < self.min_y:
            raise DomainMismatch("size bounds are empty")
        if self.jobs < 1 or self.tri_cap < 1 or (
                self.tensor_cap is not None and self.tensor_cap < 1):
            raise DomainMismatch("caps and worker count must be positive")


@dataclass(frozen=True)
class CensusRecord:
    """One isomorphism class of witnesses, with its verification digests.

    Lattices are identified by their canonical order matrices (rows of
    '0'/'1'); tables are nested lists over canonical element indices.
    """

    mode: str
    x_leq: tuple
    p: tuple
    l_size: int
    r_size: int
    digests: dict = field(compare=False)
    y_leq: tuple = None
    q: tuple = None
    star_a: tuple = None
    star_b: tuple = None

    def sort_key(self):
        return (len(self.x_leq), self.x_leq,
                len(self.y_leq) if self.y_leq else 0, self.y_leq or (),
                self.p, self.q or ())

    def as_dict(self):
        d = {"mode": self.mode, "x_leq": list(self.x_leq),
             "p": _listify(self.p), "l_size": self.l_size,
             "r_size": self.r_size, "digests": self.digests}
        if self.mode == "general":
            d["y_leq"] = list(self.y_leq)
            d["q"] = _listify(self.q)
        else:
            d["star_a"] = list(self.star_a)
            d["star_b"] = list(self.star_b)
        return d

    def json_line(self):
        return json.dumps(self.as_dict(), sort_keys=True,
                          separators=(",", ":"))


def _listify(t):
    return [_listify(v) for v in t] if isinstance(t, tuple) else t


def _tuplify(a):
    return tuple(_tuplify(v) for v in a) if isinstance(a, (list, np.ndarray)) \
        else int(a)


def _leq_rows(lat):
    return tuple("".join("1" if v else "0" for v in row) for row in lat.leq)


def _lat_from_rows(rows):
    leq = np.array([[c == "1" for c in row] for row in rows], dtype=bool)
    return validate_lattice(leq)


# --- per-space search ---------------------------------------------------------------

def _surjective_tables(f1, f2, f3, z, cap):
    out = []
    for f in enumerate_trimorphisms(f1, f2, f3, z, surjective=True, cap=cap):
        out.append(np.asarray(f.values, dtype=np.int64))
    return out


def _orbit_min(tables, transforms):
    'Minimal transformed table tuple over a group, as flat byte key + tables.'
    best = None
    for tr in transforms:
        moved = tr(tables)
        key = b"".join(m.tobytes() for m in moved)
        if best is None or key < best[0]:
            best = (key, moved)
    return best


def _general_space(x, y, tri_cap, tensor_cap):
    txyx = tensor_product(x, y, x, cap=tensor_cap)
    tyxy = tensor_product(y, x, y, cap=tensor_cap)

    p_cands = [t for t in _surjective_tables(x, y, x, x, tri_cap)
               if _distinct_slices(t, 2, x, "c3") and
               _distinct_slices(t, 0, x, "c4")]
    q_cands = [t for t in _surjective_tables(y, x, y, y, tri_cap)
               if _distinct_slices(t, 2, y, "c5") and
               _distinct_slices(t, 0, y, "c6")]

    candidates = 0
    witnesses = []
    for pt in p_cands:
        for qt in q_cands:
            candidates += 1
            if conditions_from_tables(x, y, pt, qt).ok:
                witnesses.append((pt, qt))

    auts_x = [(np.asarray(a), np.argsort(a)) for a in automorphisms(x)]
    auts_y = [(np.asarray(a), np.argsort(a)) for a in automorphisms(y)]
    transforms = [
        (lambda ts, ax=ax, axi=axi, ay=ay, ayi=ayi:
         (ax[ts[0][np.ix_(axi, ayi, axi)]], ay[ts[1][np.ix_(ayi, axi, ayi)]]))
        for ax, axi in auts_x for ay, ayi in auts_y]

    orbit_reps = {}
    for pt, qt in witnesses:
        key, moved = _orbit_min((pt, qt), transforms)
        orbit_reps.setdefault(key, moved)

    records = []
    for key in sorted(orbit_reps):
        pt, qt = orbit_reps[key]
        w = MoritaPairWitness.from_generators(x, y, pt, qt,
                                              txyx=txyx, tyxy=tyxy)
        rep = check_pair_conditions(w)
        if not rep.ok:
            raise MoritaError("census integrity: a deduplicated witness "
                              "failed re-verification")
        ctx = build_context_from_pair(w)
        back = extract_pair_from_context(ctx)
        if not (np.array_equal(back.p_gen, w.p_gen)
                and np.array_equal(back.q_gen, w.q_gen)):
            raise MoritaError("census integrity: witness round-trip changed "
                              "the tables")
        records.append(CensusRecord(
            mode="general", x_leq=_leq_rows(x), y_leq=_leq_rows(y),
            p=_tuplify(pt), q=_tuplify(qt),
            l_size=ctx.a.n, r_size=ctx.b.n,
            digests={"conditions": rep.digest(),
                     "context": check_morita_context(ctx).digest()}))
    return records, candidates, len(witnesses)


def _involutive_space(x, tri_cap, tensor_cap):
    xstar = conjugate_lattice(x)
    txxx = tensor_product(x, xstar, x, cap=tensor_cap)

    candidates = 0
    passing = []
    for t in _surjective_tables(x, xstar, x, x, tri_cap):
        candidates += 1
        if involutive_conditions_from_tables(x, t).ok:
            passing.append(t)

    auts = [(np.asarray(a), np.argsort(a)) for a in automorphisms(x)]
    transforms = [(lambda ts, ax=ax, axi=axi:
                   (ax[ts[0][np.ix_(axi, axi, axi)]],))
                  for ax, axi in auts]

    orbit_reps = {}
    for t in passing:
        key, moved = _orbit_min((t,), transforms)
        orbit_reps.setdefault(key, moved)

    records = []
    for key in sorted(orbit_reps):
        (pt,) = orbit_reps[key]
        iw = InvolutiveWitness.from_generators(x, pt, txxx=txxx)
        rep = involutive_conditions_from_tables(x, iw.p_gen)
        if not rep.ok:
            raise MoritaError("census integrity: a deduplicated involutive "
                              "witness failed re-verification")
        ctx, (inv_a, inv_b), imp = build_involutive_context(iw)
        records.append(CensusRecord(
            mode="involutive", x_leq=_leq_rows(x), p=_tuplify(pt),
            l_size=ctx.a.n, r_size=ctx.b.n,
            star_a=tuple(int(s) for s in inv_a.star),
            star_b=tuple(int(s) for s in inv_b.star),
            digests={"conditions": rep.digest(),
                     "context": check_morita_context(ctx).digest(),
                     "imprimitivity": check_imprimitivity(imp).digest()}))
    return records, candidates, len(passing)


def _space_worker(args):
    'One lattice pair (or single lattice): returns records, stats, skip info.'
    x_rows, y_rows, involutive, tri_cap, tensor_cap = args
    x = _lat_from_rows(x_rows)
    try:
        if involutive:
            records, candidates, witnesses = _involutive_space(
                x, tri_cap, tensor_cap)
        else:
            y = _lat_from_rows(y_rows)
            records, candidates, witnesses = _general_space(
                x, y, tri_cap, tensor_cap)
    except ResourceLimit as e:
        skip = {"x_leq": list(x_rows), "reason": str(e)}
        if y_rows is not None:
            skip["y_leq"] = list(y_rows)
        return [], {"candidates": 0, "witnesses": 0}, skip
    return records, {"candidates": candidates, "witnesses": witnesses}, None


# --- the runner ---------------------------------------------------------------------

def run_census(task: CensusTask):
    """All witness isomorphism classes within the task bounds.

    Returns (records, summary). Output is independent of the worker count:
    spaces are searched in isolation and the record list is globally sorted
    before anything is written. When task.out is set the records are also
    written there, one JSON object per line.
    """
    xs = [lat for n in range(task.min_x, task.max_x + 1)
          for lat in enumerate_lattices(n)]
    if task.involutive:
        spaces = [(_leq_rows(x), None) for x in xs]
    else:
        ys = [lat for n in range(task.min_y, task.max_y + 1)
              for lat in enumerate_lattices(n)]
        spaces = [(_leq_rows(x), _leq_rows(y)) for x in xs for y in ys]
    args = [(xr, yr, task.involutive, task.tri_cap, task.tensor_cap)
            for xr, yr in spaces]

    if task.jobs <= 1 or len(args) <= 1:
        results = [_space_worker(a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=task.jobs) as pool:
            results = list(pool.map(_space_worker, args))

    records, skipped = [], []
    candidates = witnesses = 0
    for recs, stats, skip in results:
        records.extend(recs)
        candidates += stats["candidates"]
        witnesses += stats["witnesses"]
        if skip is not None:
            skipped.append(skip)
    records.sort(key=CensusRecord.sort_key)
    skipped.sort(key=lambda s: (s["x_leq"], s.get("y_leq", [])))

    summary = {"mode": "involutive" if task.involutive else "general",
               "spaces": len(args), "candidates": candidates,
               "witnesses": witnesses, "records": len(records),
               "skipped": skipped}
    if task.out:
        with open(task.out, "w", encoding="utf-8", newline="\n") as fh:
            for rec in records:
                fh.write(rec.json_line() + "\n")
    return records, summary
