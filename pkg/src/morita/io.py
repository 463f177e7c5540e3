"""Text formats for lattices, quantales, actions, generator maps, tensors.

All files are UTF-8 with '#' starting a comment. `key=value` lines carry
structured fields; `.map` and `.elem` files additionally hold table lines
of the shape `i,j,k -> m` over element indices. File references inside
`.act` and `.map` files are resolved relative to the referencing file.

Reading is structural: shapes, ranges, and cross-references are enforced
here (FormatError), while order axioms and algebraic laws are the business
of validate_lattice and the check_* functions downstream.
"""

import os

import numpy as np

from .engine import MoritaContext
from .errors import FormatError, MissingInvolution
from .lattice import FiniteSupLattice, validate_lattice
from .modules import Bimodule, ModuleAction
from .quantale import InvolutiveQuantale, Quantale, as_involutive_quantale
from .tensor import Multimorphism, MultiTensorLattice, as_multimorphism

_FORBIDDEN_IN_NAMES = set(",;#=\n\r")


# --- low-level parsing ---------------------------------------------------------------

def _read_text(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise FormatError(f"{path}: {e}") from None


def _parse(path, text):
    fields, arrows = {}, []
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        eq = line.find("=")
        arrow = line.find("->")
        if arrow != -1 and (eq == -1 or arrow < eq):
            arrows.append((ln, line))
        elif eq != -1:
            key = line[:eq].strip()
            if key in fields:
                raise FormatError(f"{path}:{ln}: duplicate field '{key}'")
            fields[key] = (ln, line[eq + 1:].strip())
        else:
            raise FormatError(f"{path}:{ln}: expected 'key=value' or "
                              "'indices -> index'")
    return fields, arrows


def _field(fields, key, path):
    if key not in fields:
        raise FormatError(f"{path}: missing field '{key}'")
    return fields[key]


def _int(val, path, ln, what):
    try:
        return int(val)
    except ValueError:
        raise FormatError(f"{path}:{ln}: {what} is not an integer: "
                          f"'{val}'") from None


def _index_rows(fields, key, path, rows, cols, limit):
    ln, val = _field(fields, key, path)
    parts = val.split(";")
    if len(parts) != rows:
        raise FormatError(f"{path}:{ln}: {key} needs {rows} rows, "
                          f"got {len(parts)}")
    table = np.empty((rows, cols), dtype=np.int64)
    for i, part in enumerate(parts):
        entries = part.split(",")
        if len(entries) != cols:
            raise FormatError(f"{path}:{ln}: {key} row {i} needs {cols} "
                              f"entries, got {len(entries)}")
        for j, e in enumerate(entries):
            v = _int(e.strip(), path, ln, f"{key}[{i},{j}]")
            if not 0 <= v < limit:
                raise FormatError(f"{path}:{ln}: {key}[{i},{j}] = {v} out of "
                                  f"range 0..{limit - 1}")
            table[i, j] = v
    return table


def _resolve(path, ref):
    return os.path.normpath(os.path.join(os.path.dirname(path), ref))


def _check_names(names):
    for nm in names:
        if not nm or _FORBIDDEN_IN_NAMES & set(nm):
            raise FormatError(f"unserializable element name: '{nm}'")


# --- .lat ----------------------------------------------------------------------------

def _parse_lat(fields, path):
    ln, val = _field(fields, "n", path)
    n = _int(val, path, ln, "n")
    if n < 1:
        raise FormatError(f"{path}:{ln}: n must be at least 1")
    ln, val = _field(fields, "names", path)
    names = [s.strip() for s in val.split(",")]
    if len(names) != n:
        raise FormatError(f"{path}:{ln}: expected {n} names, got {len(names)}")
    if any(not nm for nm in names):
        raise FormatError(f"{path}:{ln}: empty element name")
    ln, val = _field(fields, "leq", path)
    rows = val.split(";")
    if len(rows) != n:
        raise FormatError(f"{path}:{ln}: leq needs {n} rows, got {len(rows)}")
    leq = np.zeros((n, n), dtype=bool)
    for i, row in enumerate(rows):
        row = row.strip()
        if len(row) != n or set(row) - {"0", "1"}:
            raise FormatError(f"{path}:{ln}: leq row {i} must be {n} "
                              "characters of 0/1")
        leq[i] = [c == "1" for c in row]
    return leq, names


def read_lattice_raw(path):
    'Parse only: the order matrix and names, with no axiom checks.'
    fields, _ = _parse(path, _read_text(path))
    return _parse_lat(fields, path)


def read_lattice(path) -> FiniteSupLattice:
    leq, names = read_lattice_raw(path)
    return validate_lattice(leq, names)


def _lat_lines(lat):
    _check_names(lat.names)
    rows = ";".join("".join("1" if v else "0" for v in row) for row in lat.leq)
    return [f"n={lat.n}",
            "names=" + ",".join(lat.names),
            "leq=" + rows]


def write_lattice(path, lat):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(_lat_lines(lat)) + "\n")


# --- .qnt ----------------------------------------------------------------------------

def read_quantale(path):
    'A Quantale, or an InvolutiveQuantale when a star line is present.'
    fields, _ = _parse(path, _read_text(path))
    leq, names = _parse_lat(fields, path)
    carrier = validate_lattice(leq, names)
    mult = _index_rows(fields, "mult", path, carrier.n, carrier.n, carrier.n)
    q = Quantale(carrier, mult)
    if "star" in fields:
        ln, val = fields["star"]
        star = [_int(s.strip(), path, ln, "star entry")
                for s in val.split(",")]
        if len(star) != carrier.n or not all(0 <= s < carrier.n for s in star):
            raise FormatError(f"{path}:{ln}: star must list all "
                              f"{carrier.n} element indices")
        return as_involutive_quantale(q, star)
    return q


def write_quantale(path, q):
    'Accepts a Quantale or an InvolutiveQuantale (which adds a star line).'
    star = None
    if isinstance(q, InvolutiveQuantale):
        star, q = q.star, q.quantale
    lines = _lat_lines(q.carrier)
    lines.append("mult=" + ";".join(
        ",".join(str(int(v)) for v in row) for row in q.mult))
    if star is not None:
        lines.append("star=" + ",".join(str(int(s)) for s in star))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _plain_quantale(path):
    q = read_quantale(path)
    return q.quantale if isinstance(q, InvolutiveQuantale) else q


# --- .act ----------------------------------------------------------------------------

def read_action(path):
    'A one-sided ModuleAction, or a Bimodule in the two-quantale form.'
    fields, _ = _parse(path, _read_text(path))
    _, ref = _field(fields, "carrier", path)
    carrier = read_lattice(_resolve(path, ref))
    if "quantale" in fields:
        _, qref = fields["quantale"]
        quant = _plain_quantale(_resolve(path, qref))
        ln, side = _field(fields, "side", path)
        if side not in ("left", "right"):
            raise FormatError(f"{path}:{ln}: side must be left or right")
        act = _index_rows(fields, "act", path, carrier.n, quant.n, carrier.n)
        return ModuleAction(side, quant, carrier, act)
    _, lref = _field(fields, "left_quantale", path)
    _, rref = _field(fields, "right_quantale", path)
    left_q = _plain_quantale(_resolve(path, lref))
    right_q = _plain_quantale(_resolve(path, rref))
    left = _index_rows(fields, "left_act", path, carrier.n, left_q.n,
                       carrier.n)
    right = _index_rows(fields, "right_act", path, carrier.n, right_q.n,
                        carrier.n)
    return Bimodule(ModuleAction("left", left_q, carrier, left),
                    ModuleAction("right", right_q, carrier, right))


def _act_rows(act):
    return ";".join(",".join(str(int(v)) for v in row) for row in act)


def write_action(path, target, refs):
    """Write a ModuleAction with refs {carrier, quantale}, or a Bimodule
    with refs {carrier, left_quantale, right_quantale}. Referenced files
    are the caller's responsibility."""
    lines = [f"carrier={refs['carrier']}"]
    if isinstance(target, ModuleAction):
        lines += [f"quantale={refs['quantale']}",
                  f"side={target.side}",
                  "act=" + _act_rows(target.act)]
    elif isinstance(target, Bimodule):
        lines += [f"left_quantale={refs['left_quantale']}",
                  f"right_quantale={refs['right_quantale']}",
                  "left_act=" + _act_rows(target.left.act),
                  "right_act=" + _act_rows(target.right.act)]
    else:
        raise FormatError(f"cannot serialize {type(target).__name__} as .act")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


# --- .map ----------------------------------------------------------------------------

def _parse_arrow(path, ln, line, arity):
    lhs, _, rhs = line.partition("->")
    coords = [s.strip() for s in lhs.split(",")]
    if len(coords) != arity:
        raise FormatError(f"{path}:{ln}: expected {arity} indices before ->")
    t = tuple(_int(c, path, ln, "index") for c in coords)
    return t, _int(rhs.strip(), path, ln, "value")


def read_map(path) -> Multimorphism:
    'A generator table over the referenced factors, validated slotwise.'
    fields, arrows = _parse(path, _read_text(path))
    _, val = _field(fields, "factors", path)
    factors = tuple(read_lattice(_resolve(path, ref.strip()))
                    for ref in val.split(","))
    _, cref = _field(fields, "codomain", path)
    codomain = read_lattice(_resolve(path, cref.strip()))
    shape = tuple(f.n for f in factors)
    table = np.full(shape, -1, dtype=np.int64)
    for ln, line in arrows:
        t, v = _parse_arrow(path, ln, line, len(factors))
        if not all(0 <= c < s for c, s in zip(t, shape)):
            raise FormatError(f"{path}:{ln}: tuple {t} out of range")
        if not 0 <= v < codomain.n:
            raise FormatError(f"{path}:{ln}: value {v} out of range")
        if table[t] != -1:
            raise FormatError(f"{path}:{ln}: duplicate entry for {t}")
        table[t] = v
    if (table == -1).any():
        missing = tuple(int(c) for c in np.argwhere(table == -1)[0])
        raise FormatError(f"{path}: no entry for tuple {missing}")
    return as_multimorphism(factors, codomain, table)


def write_map(path, f: Multimorphism, factor_refs, codomain_ref):
    lines = ["factors=" + ",".join(factor_refs),
             f"codomain={codomain_ref}"]
    for t in np.ndindex(*(fac.n for fac in f.factors)):
        lines.append(",".join(str(c) for c in t) +
                     f" -> {int(f.values[t])}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


# --- .elem sidecar -------------------------------------------------------------------

def write_elem(path, tensor: MultiTensorLattice):
    'Tuple -> element-index table accompanying a tensor written as .lat.'
    lines = []
    for t in np.ndindex(*(f.n for f in tensor.factors)):
        lines.append(",".join(str(c) for c in t) +
                     f" -> {int(tensor.elem_table[t])}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_elem(path, arity):
    'The tuple -> element-index mapping from a sidecar file.'
    _, arrows = _parse(path, _read_text(path))
    out = {}
    for ln, line in arrows:
        t, v = _parse_arrow(path, ln, line, arity)
        if t in out:
            raise FormatError(f"{path}:{ln}: duplicate entry for {t}")
        out[t] = v
    return out


# --- context bundles -----------------------------------------------------------------

CONTEXT_FILES = ("A.qnt", "B.qnt", "X.lat", "Y.lat", "X.act", "Y.act",
                 "pairXY.map", "pairYX.map")


def write_context(dirpath, ctx: MoritaContext, stars=None):
    """A directory bundle for one Morita context.

    ``stars`` is an optional pair of involutions written into A.qnt and
    B.qnt. Quantales are serialized as plain tables; operator provenance
    survives only in element names.
    """
    os.makedirs(dirpath, exist_ok=True)
    a, b = ctx.a, ctx.b
    if stars is not None:
        star_a, star_b = stars
        a = star_a if isinstance(star_a, InvolutiveQuantale) \
            else as_involutive_quantale(a, star_a)
        b = star_b if isinstance(star_b, InvolutiveQuantale) \
            else as_involutive_quantale(b, star_b)
    j = lambda name: os.path.join(dirpath, name)
    write_quantale(j("A.qnt"), a)
    write_quantale(j("B.qnt"), b)
    write_lattice(j("X.lat"), ctx.x.carrier)
    write_lattice(j("Y.lat"), ctx.y.carrier)
    write_action(j("X.act"), ctx.x, {"carrier": "X.lat",
                                     "left_quantale": "A.qnt",
                                     "right_quantale": "B.qnt"})
    write_action(j("Y.act"), ctx.y, {"carrier": "Y.lat",
                                     "left_quantale": "B.qnt",
                                     "right_quantale": "A.qnt"})
    write_map(j("pairXY.map"), ctx.pair_xy, ("X.lat", "Y.lat"), "A.qnt")
    write_map(j("pairYX.map"), ctx.pair_yx, ("Y.lat", "X.lat"), "B.qnt")


def read_context(dirpath) -> MoritaContext:
    """Load a bundle back into a MoritaContext.

    Wiring mismatches between the files surface as DomainMismatch from the
    context constructor; algebraic laws are left to check_morita_context.
    """
    j = lambda name: os.path.join(dirpath, name)
    for name in CONTEXT_FILES:
        if not os.path.exists(j(name)):
            raise FormatError(f"{dirpath}: bundle is missing {name}")
    a = _plain_quantale(j("A.qnt"))
    b = _plain_quantale(j("B.qnt"))
    x = read_action(j("X.act"))
    y = read_action(j("Y.act"))
    if not isinstance(x, Bimodule) or not isinstance(y, Bimodule):
        raise FormatError(f"{dirpath}: X.act and Y.act must be bimodules")
    pair_xy = read_map(j("pairXY.map"))
    pair_yx = read_map(j("pairYX.map"))
    return MoritaContext(a, b, x, y, pair_xy, pair_yx)
