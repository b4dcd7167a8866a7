"""Finite measured groupoids given by explicit tables.

A groupoid here is a finite set of units carrying probability weights,
a finite set of arrows with source and target, a composition defined
exactly on the composable pairs (src of the left factor equals tgt of the
right factor; ``compose(h, g)`` means "g then h"), an involutive inverse,
and one identity arrow per unit.  Construction validates every axiom
exhaustively and reports the first failing triple.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .errors import (
    EmptyRestriction,
    InvalidAction,
    InvalidGroupoid,
    UnknownUnit,
    ZeroMassRestriction,
)

# Probability weights must sum to one within this slack.
MU_SUM_TOL = 1e-9


@dataclass(frozen=True)
class Arrow:
    id: str
    src: str
    tgt: str


class FiniteMeasuredGroupoid:
    """Explicit-table groupoid with probability weights on its units.

    Parameters
    ----------
    units : iterable of str
    mu : iterable of float
        Probability weights per unit (nonnegative, summing to one).
    arrows : iterable of Arrow
    inverse : dict str -> str
    composition : dict (str, str) -> str
        Keyed by (left, right); defined exactly when src(left) == tgt(right).
    unit_arrows : dict str -> str, optional
        Identity arrow per unit; derived from the tables when omitted.
    """

    def __init__(self, units, mu, arrows, inverse, composition, unit_arrows=None):
        self.units = tuple(units)
        self.mu = np.asarray(tuple(mu), dtype=float)
        self.arrows = tuple(arrows)
        self.inverse = dict(inverse)
        self.composition = dict(composition)

        if len(set(self.units)) != len(self.units):
            raise InvalidGroupoid("duplicate unit ids")
        if any(not isinstance(x, str) or not x for x in self.units):
            raise InvalidGroupoid("unit ids must be nonempty strings")
        if self.mu.shape != (len(self.units),):
            raise InvalidGroupoid("mu must assign one weight per unit")
        if not np.all(np.isfinite(self.mu)) or np.any(self.mu < 0.0):
            raise InvalidGroupoid("mu weights must be finite and nonnegative")
        if abs(math.fsum(self.mu) - 1.0) > MU_SUM_TOL:
            raise InvalidGroupoid(f"mu sums to {math.fsum(self.mu)!r}, expected 1")

        self._unit_index = {x: i for i, x in enumerate(self.units)}
        self._by_id = {}
        for a in self.arrows:
            if not isinstance(a.id, str) or not a.id:
                raise InvalidGroupoid(f"arrow id {a.id!r} must be a nonempty string")
            if a.id in self._by_id:
                raise InvalidGroupoid(f"duplicate arrow id {a.id!r}")
            if a.src not in self._unit_index or a.tgt not in self._unit_index:
                raise InvalidGroupoid(f"arrow {a.id!r} references unknown units")
            self._by_id[a.id] = a
        self._by_src = {x: [] for x in self.units}
        self._by_tgt = {x: [] for x in self.units}
        for a in self.arrows:
            self._by_src[a.src].append(a.id)
            self._by_tgt[a.tgt].append(a.id)
        for x in self.units:
            self._by_src[x].sort()
            self._by_tgt[x].sort()

        if unit_arrows is None:
            unit_arrows = self._derive_unit_arrows()
        self.unit_arrows = dict(unit_arrows)
        self._validate()

    # -- basic accessors ------------------------------------------------

    def arrow(self, g: str) -> Arrow:
        try:
            return self._by_id[g]
        except KeyError:
            raise InvalidGroupoid(f"unknown arrow id {g!r}") from None

    def src(self, g: str) -> str:
        return self.arrow(g).src

    def tgt(self, g: str) -> str:
        return self.arrow(g).tgt

    def inv(self, g: str) -> str:
        self.arrow(g)
        return self.inverse[g]

    def compose(self, h: str, g: str) -> str:
        """Composite "g then h"; defined when src(h) == tgt(g)."""
        try:
            return self.composition[(h, g)]
        except KeyError:
            raise InvalidGroupoid(f"arrows {h!r} after {g!r} are not composable") from None

    def unit_weight(self, x: str) -> float:
        try:
            return float(self.mu[self._unit_index[x]])
        except KeyError:
            raise UnknownUnit(f"unknown unit {x!r}") from None

    @property
    def positive_units(self) -> tuple:
        return tuple(x for i, x in enumerate(self.units) if self.mu[i] > 0.0)

    def source_fiber(self, x: str) -> tuple:
        if x not in self._unit_index:
            raise UnknownUnit(f"unknown unit {x!r}")
        return tuple(self._by_src[x])

    def target_fiber(self, x: str) -> tuple:
        if x not in self._unit_index:
            raise UnknownUnit(f"unknown unit {x!r}")
        return tuple(self._by_tgt[x])

    # -- validation ------------------------------------------------------

    def _derive_unit_arrows(self):
        found = {}
        for x in self.units:
            for e in self._by_src[x]:
                a = self._by_id[e]
                if a.tgt != x:
                    continue
                ok = all(
                    self.composition.get((g, e)) == g for g in self._by_src[x]
                ) and all(
                    self.composition.get((e, g)) == g for g in self._by_tgt[x]
                )
                if ok:
                    found[x] = e
                    break
            if x not in found:
                raise InvalidGroupoid(f"no identity arrow found at unit {x!r}")
        return found

    def _validate(self):
        comp = self.composition
        inv = self.inverse
        by_id = self._by_id

        if set(inv) != set(by_id):
            raise InvalidGroupoid("inverse table must cover exactly the arrow ids")
        for g, gi in inv.items():
            if gi not in by_id:
                raise InvalidGroupoid(f"inverse of {g!r} is an unknown arrow {gi!r}")
            if inv[gi] != g:
                raise InvalidGroupoid(f"inverse is not an involution at {g!r}")
            a, b = by_id[g], by_id[gi]
            if a.src != b.tgt or a.tgt != b.src:
                raise InvalidGroupoid(f"inverse of {g!r} does not swap src and tgt")

        if set(self.unit_arrows) != set(self.units):
            raise InvalidGroupoid("unit arrow table must cover exactly the units")
        for x, e in self.unit_arrows.items():
            if e not in by_id or by_id[e].src != x or by_id[e].tgt != x:
                raise InvalidGroupoid(f"unit arrow {e!r} at {x!r} is not a loop at {x!r}")

        for (h, g), c in comp.items():
            if h not in by_id or g not in by_id:
                raise InvalidGroupoid(f"composition ({h!r}, {g!r}) references unknown arrows")
            if by_id[h].src != by_id[g].tgt:
                raise InvalidGroupoid(f"composition defined on non-composable pair ({h!r}, {g!r})")
            if c not in by_id:
                raise InvalidGroupoid(f"composite of ({h!r}, {g!r}) is an unknown arrow {c!r}")
            if by_id[c].src != by_id[g].src or by_id[c].tgt != by_id[h].tgt:
                raise InvalidGroupoid(
                    f"composite {c!r} of ({h!r}, {g!r}) has wrong endpoints"
                )
        for g, a in by_id.items():
            for h in self._by_src[a.tgt]:
                if (h, g) not in comp:
                    raise InvalidGroupoid(f"composable pair ({h!r}, {g!r}) is missing")

        for g, a in by_id.items():
            if comp[(g, self.unit_arrows[a.src])] != g:
                raise InvalidGroupoid(f"right identity fails at {g!r}")
            if comp[(self.unit_arrows[a.tgt], g)] != g:
                raise InvalidGroupoid(f"left identity fails at {g!r}")
            if comp[(inv[g], g)] != self.unit_arrows[a.src]:
                raise InvalidGroupoid(f"inverse law fails at {g!r}: inv(g) . g != 1_src")
            if comp[(g, inv[g])] != self.unit_arrows[a.tgt]:
                raise InvalidGroupoid(f"inverse law fails at {g!r}: g . inv(g) != 1_tgt")

        by_src = self._by_src
        for b, ab in by_id.items():
            lefts = by_src[ab.tgt]
            for c in self._by_tgt[ab.src]:
                bc = comp[(b, c)]
                for a in lefts:
                    if comp[(comp[(a, b)], c)] != comp[(a, bc)]:
                        raise InvalidGroupoid(
                            f"associativity fails on triple ({a!r}, {b!r}, {c!r})"
                        )


def check_axioms(G: FiniteMeasuredGroupoid) -> bool:
    """Re-run the exhaustive axiom validation; True when it passes."""
    G._validate()
    return True


# -- measures ------------------------------------------------------------


def arrow_measure(G: FiniteMeasuredGroupoid) -> dict:
    """The measure nu(g) = mu(tgt(g)) on arrows, as a dict."""
    return {a.id: G.unit_weight(a.tgt) for a in G.arrows}


def nu_of(G: FiniteMeasuredGroupoid, arrow_ids) -> float:
    """nu(E) = sum of mu(tgt(g)) over the arrow subset E."""
    return math.fsum(G.unit_weight(G.tgt(g)) for g in arrow_ids)


def nu_by_fiber_count(G: FiniteMeasuredGroupoid, arrow_ids) -> float:
    """nu(E) recomputed as sum_x |target fiber of x meets E| * mu(x).

    The count-times-weight products are accumulated as repeated exact
    addends so the result agrees bit-for-bit with :func:`nu_of` (fsum
    returns the correctly rounded sum either way; a rounded
    multiplication would not).
    """
    E = set(arrow_ids)
    return math.fsum(
        w
        for x in G.units
        for w in [G.unit_weight(x)] * len(E.intersection(G.target_fiber(x)))
    )


def check_invariance(G: FiniteMeasuredGroupoid) -> str:
    """Classify mu as ``invariant``, ``quasi_invariant`` or ``neither``.

    Invariant means nu(g) == nu(inv(g)) for every arrow (exact float
    comparison; weights are carried around unchanged).  Quasi-invariant
    means inversion preserves which arrows carry positive measure.
    """
    invariant = True
    quasi = True
    for a in G.arrows:
        nu_g = G.unit_weight(a.tgt)
        nu_gi = G.unit_weight(G.tgt(G.inv(a.id)))
        if nu_g != nu_gi:
            invariant = False
        if (nu_g > 0.0) != (nu_gi > 0.0):
            quasi = False
    if invariant:
        return "invariant"
    if quasi:
        return "quasi_invariant"
    return "neither"


def check_ergodic(G: FiniteMeasuredGroupoid) -> bool:
    """True when all positive-mass units lie in one arrow component.

    Saturated unions of components are the invariant unit sets of a finite
    groupoid, so this is exactly ergodicity up to null sets.
    """
    parent = list(range(len(G.units)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for a in G.arrows:
        ri = find(G._unit_index[a.src])
        rj = find(G._unit_index[a.tgt])
        if ri != rj:
            parent[ri] = rj
    roots = {find(i) for i, x in enumerate(G.units) if G.mu[i] > 0.0}
    return len(roots) <= 1


def restrict(G: FiniteMeasuredGroupoid, units) -> FiniteMeasuredGroupoid:
    """Restriction to a unit subset, with weights renormalized."""
    U = list(dict.fromkeys(units))
    if not U:
        raise EmptyRestriction("restriction to an empty unit set")
    for x in U:
        if x not in G._unit_index:
            raise UnknownUnit(f"unknown unit {x!r}")
    keep = set(U)
    mass = math.fsum(G.unit_weight(x) for x in U)
    if mass == 0.0:
        raise ZeroMassRestriction("restriction carries zero total weight")
    order = [x for x in G.units if x in keep]
    mu = [G.unit_weight(x) / mass for x in order]
    arrows = [a for a in G.arrows if a.src in keep and a.tgt in keep]
    ids = {a.id for a in arrows}
    inverse = {g: G.inverse[g] for g in ids}
    composition = {
        (h, g): c for (h, g), c in G.composition.items() if h in ids and g in ids
    }
    unit_arrows = {x: G.unit_arrows[x] for x in order}
    return FiniteMeasuredGroupoid(order, mu, arrows, inverse, composition, unit_arrows)


def fibers(G: FiniteMeasuredGroupoid, x: str):
    """Source fiber and target fiber at ``x``, each sorted by arrow id."""
    return G.source_fiber(x), G.target_fiber(x)


# -- groups, actions and the groupoids they generate ----------------------


@dataclass(frozen=True)
class FiniteGroup:
    """A finite group as an explicit multiplication table."""

    elements: tuple
    mult: dict
    identity: str
    inverses: dict


def _validate_group(group: FiniteGroup):
    elems = group.elements
    eset = set(elems)
    if len(eset) != len(elems):
        raise InvalidAction("duplicate group elements")
    if group.identity not in eset:
        raise InvalidAction("group identity is not an element")
    for a in elems:
        for b in elems:
            if group.mult.get((a, b)) not in eset:
                raise InvalidAction(f"multiplication table incomplete at ({a!r}, {b!r})")
    for a in elems:
        if group.mult[(group.identity, a)] != a or group.mult[(a, group.identity)] != a:
            raise InvalidAction(f"identity law fails at {a!r}")
        ai = group.inverses.get(a)
        if ai not in eset:
            raise InvalidAction(f"missing inverse for {a!r}")
        if (
            group.mult[(a, ai)] != group.identity
            or group.mult[(ai, a)] != group.identity
        ):
            raise InvalidAction(f"inverse law fails at {a!r}")
    for a in elems:
        for b in elems:
            ab = group.mult[(a, b)]
            for c in elems:
                if group.mult[(ab, c)] != group.mult[(a, group.mult[(b, c)])]:
                    raise InvalidAction(
                        f"associativity fails on triple ({a!r}, {b!r}, {c!r})"
                    )


@dataclass(frozen=True)
class ActionGroupoidSpec:
    """A finite group acting on weighted units."""

    group: FiniteGroup
    units: tuple
    mu: tuple
    action: dict  # (element, unit) -> unit


def build_action_groupoid(spec: ActionGroupoidSpec) -> FiniteMeasuredGroupoid:
    """Groupoid of the action: one arrow (gamma, x) from x to gamma . x.

    Composition follows (delta, gamma . x) after (gamma, x) =
    (delta gamma, x); arrow ids are rendered as ``"gamma@x"``.
    """
    _validate_group(spec.group)
    group = spec.group
    units = tuple(spec.units)
    if any("@" in str(s) for s in list(group.elements) + list(units)):
        raise InvalidAction("element and unit names must not contain '@'")
    act = spec.action
    uset = set(units)
    for g in group.elements:
        for x in units:
            if act.get((g, x)) not in uset:
                raise InvalidAction(f"action incomplete at ({g!r}, {x!r})")
    for x in units:
        if act[(group.identity, x)] != x:
            raise InvalidAction(f"identity does not fix unit {x!r}")
    for a in group.elements:
        for b in group.elements:
            ab = group.mult[(a, b)]
            for x in units:
                if act[(ab, x)] != act[(a, act[(b, x)])]:
                    raise InvalidAction(
                        f"action is not compatible on ({a!r}, {b!r}, {x!r})"
                    )

    def aid(g, x):
        return f"{g}@{x}"

    arrows = [Arrow(aid(g, x), x, act[(g, x)]) for g in group.elements for x in units]
    inverse = {
        aid(g, x): aid(group.inverses[g], act[(g, x)])
        for g in group.elements
        for x in units
    }
    composition = {}
    for g in group.elements:
        for x in units:
            gx = act[(g, x)]
            for h in group.elements:
                composition[(aid(h, gx), aid(g, x))] = aid(group.mult[(h, g)], x)
    unit_arrows = {x: aid(group.identity, x) for x in units}
    return FiniteMeasuredGroupoid(units, spec.mu, arrows, inverse, composition, unit_arrows)


def cyclic_group(n: int) -> FiniteGroup:
    """Z/n with elements r0 .. r{n-1} and rk * rj = r{(k+j) mod n}."""
    if n < 1:
        raise InvalidAction("cyclic group order must be positive")
    elems = tuple(f"r{i}" for i in range(n))
    mult = {
        (f"r{i}", f"r{j}"): f"r{(i + j) % n}" for i in range(n) for j in range(n)
    }
    inverses = {f"r{i}": f"r{(n - i) % n}" for i in range(n)}
    return FiniteGroup(elems, mult, "r0", inverses)


def _perm_name(p) -> str:
    return "".join(str(i) for i in p)


def symmetric_group(n: int) -> FiniteGroup:
    """S_n on {0, .., n-1}; an element named "q0..q{n-1}" maps i to q_i."""
    if not 1 <= n <= 9:
        raise InvalidAction("symmetric group supported for 1 <= n <= 9")
    perms = list(permutations(range(n)))
    elems = tuple(_perm_name(p) for p in perms)
    mult = {}
    for p in perms:
        for r in perms:
            pr = tuple(p[r[i]] for i in range(n))  # p after r
            mult[(_perm_name(p), _perm_name(r))] = _perm_name(pr)
    identity = _perm_name(range(n))
    inverses = {}
    for p in perms:
        ip = [0] * n
        for i, pi in enumerate(p):
            ip[pi] = i
        inverses[_perm_name(p)] = _perm_name(ip)
    return FiniteGroup(elems, mult, identity, inverses)


def uniform_mu(k: int) -> tuple:
    return tuple(1.0 / k for _ in range(k))


def left_translation_action(group: FiniteGroup, mu=None) -> ActionGroupoidSpec:
    """The group acting on itself by left multiplication."""
    units = tuple(f"u{e}" for e in group.elements)
    action = {
        (g, f"u{x}"): f"u{group.mult[(g, x)]}"
        for g in group.elements
        for x in group.elements
    }
    if mu is None:
        mu = uniform_mu(len(units))
    return ActionGroupoidSpec(group, units, tuple(mu), action)


def natural_permutation_action(n: int, mu=None) -> ActionGroupoidSpec:
    """S_n acting on the n units x0 .. x{n-1}."""
    group = symmetric_group(n)
    units = tuple(f"x{i}" for i in range(n))
    action = {
        (p, f"x{i}"): f"x{int(p[i])}" for p in group.elements for i in range(n)
    }
    if mu is None:
        mu = uniform_mu(n)
    return ActionGroupoidSpec(group, units, tuple(mu), action)


def ordered_pair_action(n: int, mu=None) -> ActionGroupoidSpec:
    """S_n acting on ordered pairs of distinct points (n*(n-1) units)."""
    group = symmetric_group(n)
    units = tuple(f"x{i}{j}" for i in range(n) for j in range(n) if i != j)
    action = {}
    for p in group.elements:
        for x in units:
            i, j = int(x[1]), int(x[2])
            action[(p, x)] = f"x{int(p[i])}{int(p[j])}"
    if mu is None:
        mu = uniform_mu(len(units))
    return ActionGroupoidSpec(group, units, tuple(mu), action)


def cyclic_shift_action(n: int, copies: int = 1, mu=None) -> ActionGroupoidSpec:
    """Z/n shifting ``copies`` disjoint cycles of n units each."""
    group = cyclic_group(n)
    units = tuple(f"x{b}_{i}" for b in range(copies) for i in range(n))
    action = {}
    for k in range(n):
        for b in range(copies):
            for i in range(n):
                action[(f"r{k}", f"x{b}_{i}")] = f"x{b}_{(i + k) % n}"
    if mu is None:
        mu = uniform_mu(len(units))
    return ActionGroupoidSpec(group, units, tuple(mu), action)


def trivial_action(group: FiniteGroup, units, mu) -> ActionGroupoidSpec:
    """Every group element fixes every unit."""
    units = tuple(units)
    action = {(g, x): x for g in group.elements for x in units}
    return ActionGroupoidSpec(group, units, tuple(mu), action)
