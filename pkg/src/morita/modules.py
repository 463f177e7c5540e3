"""Module actions of quantales on sup-lattices.

Actions are stored as full tables ``act[m, a]``; for a left action the table
entry is the product a.m written with the module element first. The laws:

* M1  associativity with the quantale product (sided),
* M2  join preservation in the module slot, bottom included,
* M3  join preservation in the quantale slot, bottom included.

A module is essential when the products join-generate the carrier,
separated when distinct elements act distinctly, m-regular when both.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (DomainMismatch, MissingInvolution, MoritaError, PASS,
                     ShapeMismatch, failure)
from .lattice import FiniteSupLattice, conjugate_lattice, join_closure
from .quantale import (InvolutiveQuantale, Quantale, is_quantale_involution)


def _freeze(arr):
    arr.flags.writeable = False
    return arr


class ModuleAction:
    __slots__ = ("side", "quantale", "carrier", "act")

    def __init__(self, side, quantale: Quantale, carrier: FiniteSupLattice, act):
        if side not in ("left", "right"):
            raise DomainMismatch(f"side must be left or right, not {side!r}")
        self.side = side
        self.quantale = quantale
        self.carrier = carrier
        arr = np.array(act, dtype=np.int64)
        if arr.shape != (carrier.n, quantale.n):
            raise ShapeMismatch(
                f"action table {arr.shape}, expected {(carrier.n, quantale.n)}")
        if arr.size and (int(arr.min()) < 0 or int(arr.max()) >= carrier.n):
            raise DomainMismatch("action value outside the carrier")
        self.act = _freeze(arr)

    def __call__(self, m, a):
        return int(self.act[m, a])

    def __eq__(self, other):
        return (isinstance(other, ModuleAction) and self.side == other.side
                and self.quantale == other.quantale
                and self.carrier == other.carrier
                and self.act.tobytes() == other.act.tobytes())

    def __hash__(self):
        return hash((self.side, self.act.tobytes()))

    def __repr__(self):
        return f"ModuleAction({self.side}, |M|={self.carrier.n}, |A|={self.quantale.n})"


def check_module(mod: ModuleAction):
    'Verdict on M1-M3 with a named counterexample.'
    act = mod.act
    a_names, m_names = mod.quantale.names, mod.carrier.names
    mult, jq = mod.quantale.mult, mod.quantale.carrier.join
    jm = mod.carrier.join
    bot_m, bot_a = mod.carrier.bottom, mod.quantale.carrier.bottom

    if mod.side == "right":
        lhs, rhs = act[:, mult], act[act]          # m.(ab) vs (m.a).b
        law = "M1: m.(ab) = (m.a).b"
    else:
        lhs, rhs = act[:, mult], act[act].transpose(0, 2, 1)   # (ab).m vs a.(b.m)
        law = "M1: (ab).m = a.(b.m)"
    bad = np.argwhere(lhs != rhs)
    if len(bad):
        m, a, b = map(int, bad[0])
        return failure(law, (m_names[m], a_names[a], a_names[b]),
                       f"{m_names[lhs[m, a, b]]} vs {m_names[rhs[m, a, b]]}")

    lhs, rhs = act[jm], jm[act[:, None, :], act[None, :, :]]
    bad = np.argwhere(lhs != rhs)
    if len(bad):
        m, k, a = map(int, bad[0])
        return failure("M2: (m v n).a = m.a v n.a",
                       (m_names[m], m_names[k], a_names[a]),
                       f"{m_names[lhs[m, k, a]]} vs {m_names[rhs[m, k, a]]}")
    bad = np.flatnonzero(act[bot_m] != bot_m)
    if len(bad):
        a = int(bad[0])
        return failure("M2: 0.a = 0", (a_names[a],),
                       f"bottom acts to {m_names[act[bot_m, a]]}")

    lhs = act[:, jq]
    rhs = jm[act[:, :, None], act[:, None, :]]
    bad = np.argwhere(lhs != rhs)
    if len(bad):
        m, a, b = map(int, bad[0])
        return failure("M3: m.(a v b) = m.a v m.b",
                       (m_names[m], a_names[a], a_names[b]),
                       f"{m_names[lhs[m, a, b]]} vs {m_names[rhs[m, a, b]]}")
    bad = np.flatnonzero(act[:, bot_a] != bot_m)
    if len(bad):
        m = int(bad[0])
        return failure("M3: m.0 = 0", (m_names[m],),
                       f"{m_names[m]}.0 = {m_names[act[m, bot_a]]}")
    return PASS


class Bimodule:
    __slots__ = ("left", "right")

    def __init__(self, left: ModuleAction, right: ModuleAction):
        if left.side != "left" or right.side != "right":
            raise DomainMismatch("a bimodule needs one left and one right action")
        if left.carrier != right.carrier:
            raise DomainMismatch("bimodule actions live on different carriers")
        self.left = left
        self.right = right

    @property
    def carrier(self):
        return self.left.carrier

    def __eq__(self, other):
        return (isinstance(other, Bimodule) and self.left == other.left
                and self.right == other.right)

    def __hash__(self):
        return hash((self.left, self.right))

    def __repr__(self):
        return (f"Bimodule(|M|={self.carrier.n}, |A|={self.left.quantale.n}, "
                f"|B|={self.right.quantale.n})")


def check_bimodule(bim: Bimodule):
    'Verdict: both module laws plus commutation (a.m).b = a.(m.b).'
    v = check_module(bim.left)
    if not v:
        return v
    v = check_module(bim.right)
    if not v:
        return v
    la, ra = bim.left.act, bim.right.act
    lhs = ra[la]                          # (a.m).b at [m, a, b]
    rhs = la[ra].transpose(0, 2, 1)       # a.(m.b)
    bad = np.argwhere(lhs != rhs)
    if len(bad):
        m, a, b = map(int, bad[0])
        names = bim.carrier.names
        return failure("commute: (a.m).b = a.(m.b)",
                       (names[m], bim.left.quantale.names[a],
                        bim.right.quantale.names[b]),
                       f"{names[lhs[m, a, b]]} vs {names[rhs[m, a, b]]}")
    return PASS


# --- regularity -------------------------------------------------------------------

def essential_part(mod: ModuleAction):
    """Join-closure of all products m.a, as a sorted element tuple.

    This is the submodule generated by the products: the product set is
    action-absorbing by M1 and joins of products stay reachable by M2/M3.
    Submodule-ness is re-verified as a safety assertion.
    """
    ess = join_closure(mod.carrier, {int(v) for v in mod.act.reshape(-1)})
    inside = set(ess)
    for m in ess:
        for a in range(mod.quantale.n):
            if int(mod.act[m, a]) not in inside:
                raise MoritaError("internal: essential part is not action-closed")
    return ess


def is_separated(mod: ModuleAction):
    'Verdict: distinct elements have distinct curried action maps.'
    rows = {}
    for m in range(mod.carrier.n):
        key = mod.act[m].tobytes()
        if key in rows:
            other = rows[key]
            names = mod.carrier.names
            return failure("separated", (names[other], names[m]),
                           "both act identically on every quantale element")
        rows[key] = m
    return PASS


@dataclass
class RegularityReport:
    essential: bool
    essential_part: tuple
    separated: bool
    separation_witness: Optional[tuple]
    m_regular: bool
    left: "Optional[RegularityReport]" = field(default=None, repr=False)
    right: "Optional[RegularityReport]" = field(default=None, repr=False)


def _action_report(mod):
    ess = essential_part(mod)
    essential = len(ess) == mod.carrier.n
    sep = is_separated(mod)
    return RegularityReport(
        essential=essential, essential_part=ess,
        separated=bool(sep), separation_witness=None if sep else sep.witness,
        m_regular=essential and bool(sep))


def _combined_report(left_rep, right_rep):
    essential = left_rep.essential and right_rep.essential
    separated = left_rep.separated and right_rep.separated
    part = left_rep.essential_part if not left_rep.essential else right_rep.essential_part
    witness = left_rep.separation_witness or right_rep.separation_witness
    return RegularityReport(
        essential=essential, essential_part=part,
        separated=separated, separation_witness=witness,
        m_regular=essential and separated, left=left_rep, right=right_rep)


def regular_bimodule(q: Quantale) -> Bimodule:
    'The quantale acting on itself on both sides by its multiplication.'
    left = ModuleAction("left", q, q.carrier, q.mult.T)
    right = ModuleAction("right", q, q.carrier, q.mult)
    return Bimodule(left, right)


def is_m_regular(target) -> RegularityReport:
    """Essential-and-separated report for an action, bimodule, or quantale.

    A quantale is judged as a bimodule over itself. When that comes out
    m-regular the stated consequences (top.top = top, two-sided cancellation
    of curried multiplication) are asserted; they cannot fail independently.
    """
    if isinstance(target, ModuleAction):
        return _action_report(target)
    if isinstance(target, Bimodule):
        return _combined_report(_action_report(target.left),
                                _action_report(target.right))
    if isinstance(target, Quantale):
        rep = is_m_regular(regular_bimodule(target))
        if rep.m_regular:
            top = target.carrier.top
            if int(target.mult[top, top]) != top:
                raise MoritaError("internal: m-regular quantale with 1.1 != 1")
            rows = {target.mult[a].tobytes() for a in range(target.n)}
            cols = {target.mult[:, a].tobytes() for a in range(target.n)}
            if len(rows) != target.n or len(cols) != target.n:
                raise MoritaError(
                    "internal: m-regular quantale without cancellation")
        return rep
    raise DomainMismatch(f"cannot judge regularity of {type(target).__name__}")


# --- conjugates -------------------------------------------------------------------

def _star_table(q: Quantale, star):
    if star is None:
        raise MissingInvolution("conjugation needs involutions on both quantales")
    if isinstance(star, InvolutiveQuantale):
        if star.quantale != q:
            raise DomainMismatch("involution belongs to a different quantale")
        return np.asarray(star.star)
    v = is_quantale_involution(q, star)
    if not v:
        raise MissingInvolution(f"not an involution: {v}")
    return np.asarray(tuple(int(s) for s in star))


def conjugate_bimodule(bim: Bimodule, star_a, star_b) -> Bimodule:
    """The bimodule X* over (B, A): b.x* = (x.b*)* and x*.a = (a*.x)*.

    The carrier is the conjugate lattice (same order, starred names); the
    element-level star is the identity map. Module laws for the conjugate
    follow from the originals and are re-verified.
    """
    a, b = bim.left.quantale, bim.right.quantale
    sa, sb = _star_table(a, star_a), _star_table(b, star_b)
    xstar = conjugate_lattice(bim.carrier)
    left = ModuleAction("left", b, xstar, bim.right.act[:, sb])
    right = ModuleAction("right", a, xstar, bim.left.act[:, sa])
    conj = Bimodule(left, right)
    v = check_bimodule(conj)
    if not v:
        raise MoritaError(f"internal: conjugate bimodule broke a law: {v}")
    return conj
