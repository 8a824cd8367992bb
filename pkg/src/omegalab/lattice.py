"""Finite polarities, Galois connections, concept lattices, Heyting frames,
MacNeille completions and finite Heyting algebras.

Subsets of the left carrier are bitmasks throughout; the public galois()
entry point speaks frozensets of indices.  Closed sets are enumerated as
intersections of attribute extents, which is the seed-closure strategy that
stays feasible past a dozen objects (brute-force closure of all subsets is
kept in the tests as the oracle).
"""

from dataclasses import dataclass, field
from itertools import permutations
import random

from .errors import (
    IndexOutOfRange,
    NotAHeytingFrame,
    NotAPartialOrder,
    NotHeyting,
    SizeBound,
)


def _bits(mask):
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


def _popcount(mask):
    return bin(mask).count("1")


# ---------------------------------------------------------------------------
# Polarities and Galois connections


@dataclass(frozen=True)
class Polarity:
    n_left: int
    n_right: int
    rel: tuple  # rel[i] = bitmask over right elements related to left i
    left_labels: tuple = None
    right_labels: tuple = None

    def __post_init__(self):
        if len(self.rel) != self.n_left:
            raise IndexOutOfRange("relation rows must match |W|")
        full = (1 << self.n_right) - 1
        for row in self.rel:
            if row & ~full:
                raise IndexOutOfRange("relation entry outside |W'|")
        cols = []
        for j in range(self.n_right):
            m = 0
            for i in range(self.n_left):
                if self.rel[i] >> j & 1:
                    m |= 1 << i
            cols.append(m)
        object.__setattr__(self, "_cols", tuple(cols))

    def up(self, mask):
        """Common image of a left subset: S^> as a right mask."""
        out = (1 << self.n_right) - 1
        for i in _bits(mask):
            out &= self.rel[i]
        return out

    def down(self, mask):
        """Z^< as a left mask."""
        out = (1 << self.n_left) - 1
        for j in _bits(mask):
            out &= self._cols[j]
        return out

    def closure(self, mask):
        return self.down(self.up(mask))


def _as_mask(subset, size, side):
    if isinstance(subset, int):
        mask = subset
    else:
        mask = 0
        for i in subset:
            if not 0 <= i < size:
                raise IndexOutOfRange(f"{side} index {i} out of range 0..{size - 1}")
            mask |= 1 << i
    if mask >> size:
        raise IndexOutOfRange(f"{side} subset out of range")
    return mask


def galois(p, side, subset):
    """S^> (side="up"), Z^< (side="down") or the closure S^><."""
    if side == "up":
        return frozenset(_bits(p.up(_as_mask(subset, p.n_left, "left"))))
    if side == "down":
        return frozenset(_bits(p.down(_as_mask(subset, p.n_right, "right"))))
    if side == "closure":
        return frozenset(_bits(p.closure(_as_mask(subset, p.n_left, "left"))))
    raise ValueError(f"side must be up/down/closure, got {side!r}")


@dataclass(frozen=True)
class ClosedSetLattice:
    """The complete lattice of Galois-closed subsets of W."""

    polarity: Polarity
    elements: tuple  # masks, sorted

    def __post_init__(self):
        object.__setattr__(self, "_index", {m: i for i, m in enumerate(self.elements)})

    def index(self, mask):
        return self._index[mask]

    @property
    def top(self):
        return (1 << self.polarity.n_left) - 1

    @property
    def bot(self):
        return self.polarity.closure(0)

    def meet(self, a, b):
        return a & b

    def join(self, a, b):
        return self.polarity.closure(a | b)

    def leq(self, a, b):
        return a & ~b == 0


def concept_lattice(p, max_size=16):
    """All Galois-closed subsets of W, as intersections of attribute
    extents."""
    if p.n_left > max_size:
        raise SizeBound(f"|W| = {p.n_left} exceeds the enumeration bound {max_size}")
    full = (1 << p.n_left) - 1
    sets = {full}
    for j in range(p.n_right):
        col = p._cols[j]
        sets |= {s & col for s in sets}
    lat = ClosedSetLattice(p, tuple(sorted(sets)))
    assert all(p.closure(m) == m for m in lat.elements)
    return lat


# ---------------------------------------------------------------------------
# Finite lattices and Heyting algebras from order matrices


def _validate_order(leq):
    n = len(leq)
    for a in range(n):
        if not leq[a] >> a & 1:
            raise NotAPartialOrder(f"not reflexive at {a}")
        for b in range(n):
            if a != b and leq[a] >> b & 1 and leq[b] >> a & 1:
                raise NotAPartialOrder(f"not antisymmetric at {a},{b}")
            if leq[a] >> b & 1:
                if leq[b] & ~leq[a]:
                    raise NotAPartialOrder(f"not transitive at {a},{b}")


def rows_from_bool(matrix):
    """Bitmask rows from a matrix of truthy entries; row a has bit b iff
    a <= b."""
    rows = []
    for row in matrix:
        m = 0
        for b, v in enumerate(row):
            if v:
                m |= 1 << b
        rows.append(m)
    return tuple(rows)


@dataclass(frozen=True)
class FiniteLattice:
    leq: tuple  # bitmask rows: leq[a] bit b iff a <= b
    names: tuple = None

    def __post_init__(self):
        _validate_order(self.leq)
        n = len(self.leq)
        geq = []
        for a in range(n):
            m = 0
            for b in range(n):
                if self.leq[b] >> a & 1:
                    m |= 1 << b
            geq.append(m)
        object.__setattr__(self, "_geq", tuple(geq))
        meet = [[None] * n for _ in range(n)]
        join = [[None] * n for _ in range(n)]
        for a in range(n):
            for b in range(n):
                meet[a][b] = self._extremum(self._geq[a] & self._geq[b], lower=False)
                join[a][b] = self._extremum(self.leq[a] & self.leq[b], lower=True)
                if meet[a][b] is None or join[a][b] is None:
                    raise NotHeyting(f"missing meet or join of {a},{b}")
        object.__setattr__(self, "meet_table", tuple(map(tuple, meet)))
        object.__setattr__(self, "join_table", tuple(map(tuple, join)))
        bots = [a for a in range(n) if self.leq[a] == (1 << n) - 1]
        tops = [a for a in range(n) if self._geq[a] == (1 << n) - 1]
        if len(bots) != 1 or len(tops) != 1:
            raise NotHeyting("lattice must have bottom and top")
        object.__setattr__(self, "bot", bots[0])
        object.__setattr__(self, "top", tops[0])

    def _extremum(self, candidates, lower):
        """Least element of an up-set of candidates (lower=True) or greatest
        of a down-set (lower=False); None when it does not exist."""
        best = None
        for c in _bits(candidates):
            if best is None:
                best = c
            elif lower and self.leq[c] >> best & 1:
                best = c
            elif not lower and self.leq[best] >> c & 1:
                best = c
        if best is None:
            return None
        for c in _bits(candidates):
            if lower and not (self.leq[best] >> c & 1):
                return None
            if not lower and not (self.leq[c] >> best & 1):
                return None
        return best

    @property
    def size(self):
        return len(self.leq)

    def le(self, a, b):
        return bool(self.leq[a] >> b & 1)

    def meet(self, a, b):
        return self.meet_table[a][b]

    def join(self, a, b):
        return self.join_table[a][b]

    def meet_all(self, xs):
        out = self.top
        for x in xs:
            out = self.meet(out, x)
        return out

    def join_all(self, xs):
        out = self.bot
        for x in xs:
            out = self.join(out, x)
        return out

    def name(self, a):
        return self.names[a] if self.names else str(a)

    def is_distributive(self):
        n = self.size
        return all(
            self.meet(a, self.join(b, c))
            == self.join(self.meet(a, b), self.meet(a, c))
            for a in range(n)
            for b in range(n)
            for c in range(n)
        )

    def hasse_edges(self):
        """Covering pairs (a, b) with a < b and nothing strictly between."""
        out = []
        n = self.size
        for a in range(n):
            for b in range(n):
                if a == b or not self.le(a, b):
                    continue
                strict_between = any(
                    c not in (a, b) and self.le(a, c) and self.le(c, b)
                    for c in range(n)
                )
                if not strict_between:
                    out.append((a, b))
        return out


@dataclass(frozen=True)
class FiniteHeytingAlgebra:
    lattice: FiniteLattice

    def __post_init__(self):
        lat = self.lattice
        n = lat.size
        imp = [[None] * n for _ in range(n)]
        for a in range(n):
            for b in range(n):
                best = lat.bot
                ok = False
                for c in range(n):
                    if lat.le(lat.meet(a, c), b):
                        best = lat.join(best, c)
                        ok = True
                if not ok or not lat.le(lat.meet(a, best), b):
                    raise NotHeyting(f"no relative pseudocomplement for {a},{b}")
                imp[a][b] = best
        object.__setattr__(self, "imp_table", tuple(map(tuple, imp)))
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    if lat.le(lat.meet(a, b), c) != lat.le(b, imp[a][c]):
                        raise NotHeyting(f"residuation fails at {a},{b},{c}")

    @property
    def size(self):
        return self.lattice.size

    @property
    def top(self):
        return self.lattice.top

    @property
    def bot(self):
        return self.lattice.bot

    def le(self, a, b):
        return self.lattice.le(a, b)

    def meet(self, a, b):
        return self.lattice.meet(a, b)

    def join(self, a, b):
        return self.lattice.join(a, b)

    def imp(self, a, b):
        return self.imp_table[a][b]

    def meet_all(self, xs):
        return self.lattice.meet_all(xs)

    def join_all(self, xs):
        return self.lattice.join_all(xs)

    def name(self, a):
        return self.lattice.name(a)


def lattice_from_order(matrix, names=None):
    return FiniteLattice(rows_from_bool(matrix), tuple(names) if names else None)


def heyting_from_order(matrix, names=None):
    return FiniteHeytingAlgebra(lattice_from_order(matrix, names))


def chain(n, names=None):
    rows = [[a <= b for b in range(n)] for a in range(n)]
    return heyting_from_order(rows, names)


def three_chain():
    return chain(3, ("0", "0.5", "1"))


def two_chain():
    return chain(2, ("0", "1"))


def boolean_algebra(k):
    """Powerset algebra on k atoms."""
    n = 1 << k
    rows = [[a & ~b == 0 for b in range(n)] for a in range(n)]
    names = [("{" + ",".join(str(i) for i in _bits(a)) + "}") for a in range(n)]
    return heyting_from_order(rows, names)


# ---------------------------------------------------------------------------
# Heyting frames


@dataclass(frozen=True)
class HeytingFrame:
    polarity: Polarity
    mul: tuple  # mul[x][y] in W
    unit: int
    residual: tuple  # residual[x][z] in W'

    def validate(self):
        """Raise NotAHeytingFrame naming the first violated law."""
        p = self.polarity
        n, m = p.n_left, p.n_right
        for x in range(n):
            if self.mul[x][self.unit] != x or self.mul[self.unit][x] != x:
                raise NotAHeytingFrame("unit", f"at {x}")
        for x in range(n):
            for y in range(n):
                for z in range(n):
                    if self.mul[self.mul[x][y]][z] != self.mul[x][self.mul[y][z]]:
                        raise NotAHeytingFrame("associativity", f"at {x},{y},{z}")
        for x in range(n):
            for y in range(n):
                for z in range(m):
                    lhs = bool(p.rel[self.mul[x][y]] >> z & 1)
                    rhs = bool(p.rel[y] >> self.residual[x][z] & 1)
                    if lhs != rhs:
                        raise NotAHeytingFrame("residuation", f"at {x},{y},{z}")
        for x in range(n):
            for y in range(n):
                for z in range(m):
                    if p.rel[self.mul[x][y]] >> z & 1 and not p.rel[self.mul[y][x]] >> z & 1:
                        raise NotAHeytingFrame("exchange", f"at {x},{y},{z}")
        for z in range(m):
            if p.rel[self.unit] >> z & 1:
                for x in range(n):
                    if not p.rel[x] >> z & 1:
                        raise NotAHeytingFrame("weakening", f"at {x},{z}")
        for x in range(n):
            for z in range(m):
                if p.rel[self.mul[x][x]] >> z & 1 and not p.rel[x] >> z & 1:
                    raise NotAHeytingFrame("contraction", f"at {x},{z}")


@dataclass(frozen=True)
class FramePlus:
    """The complete Heyting algebra of closed sets of a Heyting frame."""

    frame: HeytingFrame
    closed: ClosedSetLattice
    algebra: FiniteHeytingAlgebra

    def mask_of(self, idx):
        return self.closed.elements[idx]

    def index_of(self, mask):
        return self.closed.index(mask)


def _frame_imp_mask(f, xmask, ymask):
    """X -> Y := { y : x*y in Y for every x in X }."""
    p = f.polarity
    out = 0
    for y in range(p.n_left):
        if all(ymask >> f.mul[x][y] & 1 for x in _bits(xmask)):
            out |= 1 << y
    return out


def frame_plus(f, max_size=16):
    """Closed sets of a valid Heyting frame as a finite Heyting algebra.

    Verifies the closed-set identity X -> Y = (X -| Y^>)^< and the
    residuation law on all closed triples; both are theorems for valid
    frames, so a failure means the frame validation is wrong.
    """
    f.validate()
    p = f.polarity
    lat = concept_lattice(p, max_size)
    elems = lat.elements
    for xm in elems:
        for ym in elems:
            im = _frame_imp_mask(f, xm, ym)
            resid = 0
            up_y = p.up(ym)
            for x in _bits(xm):
                for z in _bits(up_y):
                    resid |= 1 << f.residual[x][z]
            assert im == p.down(resid), "closed-set implication identity fails"
            assert im in lat._index, "implication not a closed set"
    for xm in elems:
        for ym in elems:
            for zm in elems:
                if (xm & ym & ~zm == 0) != (xm & ~_frame_imp_mask(f, ym, zm) == 0):
                    raise AssertionError("residuation fails on closed sets")
    n = len(elems)
    rows = [[elems[a] & ~elems[b] == 0 for b in range(n)] for a in range(n)]
    algebra = heyting_from_order(rows)
    # the order-derived implication must agree with the frame implication
    for a in range(n):
        for b in range(n):
            assert elems[algebra.imp(a, b)] == _frame_imp_mask(f, elems[a], elems[b])
    return FramePlus(f, lat, algebra)


def frame_from_heyting(alg):
    """W_A = (A, A, <=, meet, top, ->): the frame whose closed sets are the
    MacNeille completion of A."""
    n = alg.size
    rel = tuple(alg.lattice.leq)
    p = Polarity(n, n, rel)
    mul = tuple(tuple(alg.meet(x, y) for y in range(n)) for x in range(n))
    residual = tuple(tuple(alg.imp(x, z) for z in range(n)) for x in range(n))
    return HeytingFrame(p, mul, alg.top, residual)


# ---------------------------------------------------------------------------
# MacNeille completion


@dataclass(frozen=True)
class Embedding:
    """An order-embedding of a finite poset into a finite lattice."""

    source_leq: tuple  # bitmask rows
    target: FiniteLattice  # or the lattice of a FiniteHeytingAlgebra
    mapping: tuple  # source index -> target index

    @property
    def n_source(self):
        return len(self.source_leq)


@dataclass(frozen=True)
class Completion:
    polarity: Polarity
    closed: ClosedSetLattice
    lattice: FiniteLattice
    embedding: Embedding
    algebra: FiniteHeytingAlgebra = None  # present for as-heyting


def macneille(order, flag="as-lattice", names=None):
    """MacNeille completion of a finite poset given as an order matrix (or
    of a finite Heyting algebra), via the polarity (A, A, <=).

    Returns the closed-set lattice together with the embedding
    a |-> gamma({a}).  With flag="as-heyting" the input must be a Heyting
    algebra; the completion is returned as one as well and the embedding is
    checked to preserve meet, join, implication and bottom exhaustively.
    """
    if isinstance(order, FiniteHeytingAlgebra):
        leq = order.lattice.leq
        names = names or order.lattice.names
    else:
        leq = rows_from_bool(order)
    _validate_order(leq)
    n = len(leq)
    p = Polarity(n, n, leq, left_labels=tuple(names) if names else None)
    lat = concept_lattice(p)
    m = len(lat.elements)
    rows = [[lat.elements[a] & ~lat.elements[b] == 0 for b in range(m)] for a in range(m)]
    mapping = tuple(lat.index(p.closure(1 << a)) for a in range(n))
    if flag == "as-lattice":
        target = lattice_from_order(rows)
        emb = Embedding(leq, target, mapping)
        for a in range(n):
            for b in range(n):
                assert (leq[a] >> b & 1) == target.le(mapping[a], mapping[b]), (
                    "completion map is not an order embedding"
                )
        return Completion(p, lat, target, emb)
    if flag == "as-heyting":
        if isinstance(order, FiniteHeytingAlgebra):
            source = order
        else:
            source = heyting_from_order(order, names)  # raises NotHeyting
        algebra = FiniteHeytingAlgebra(lattice_from_order(rows))
        emb = Embedding(leq, algebra.lattice, mapping)
        for a in range(n):
            for b in range(n):
                assert algebra.meet(mapping[a], mapping[b]) == mapping[source.meet(a, b)]
                assert algebra.join(mapping[a], mapping[b]) == mapping[source.join(a, b)]
                assert algebra.imp(mapping[a], mapping[b]) == mapping[source.imp(a, b)]
        assert algebra.bot == mapping[source.bot]
        return Completion(p, lat, algebra.lattice, emb, algebra)
    raise ValueError(f"flag must be as-lattice or as-heyting, got {flag!r}")


def density_direct(emb, x):
    """(join_dense, meet_dense) at target element x, by computing the join
    of the images below and the meet of the images above."""
    tgt = emb.target
    below = [emb.mapping[a] for a in range(emb.n_source) if tgt.le(emb.mapping[a], x)]
    above = [emb.mapping[a] for a in range(emb.n_source) if tgt.le(x, emb.mapping[a])]
    return tgt.join_all(below) == x, tgt.meet_all(above) == x


def density_by_rules(emb, x):
    """The same infinitary rules read as validity statements: x <= y follows
    from all image premises below x (dually above x)."""
    tgt = emb.target
    n = tgt.size
    below = [emb.mapping[a] for a in range(emb.n_source) if tgt.le(emb.mapping[a], x)]
    above = [emb.mapping[a] for a in range(emb.n_source) if tgt.le(x, emb.mapping[a])]
    join_rule = all(
        tgt.le(x, y) or not all(tgt.le(e, y) for e in below) for y in range(n)
    )
    meet_rule = all(
        tgt.le(y, x) or not all(tgt.le(y, e) for e in above) for y in range(n)
    )
    return join_rule, meet_rule


def density_check(emb, at="all"):
    """Join- and meet-density of the embedding, computed independently by
    the direct suprema and by the validity of the two infinitary rules; the
    two formulations are compared on every element."""
    elements = range(emb.target.size) if at == "all" else [at]
    jd = md = True
    for x in elements:
        d = density_direct(emb, x)
        r = density_by_rules(emb, x)
        assert d == r, f"density formulations disagree at {x}"
        jd &= d[0]
        md &= d[1]
    return {"join_dense": jd, "meet_dense": md}


def regularity_check(emb):
    """Existing joins and meets of the source are preserved by the
    embedding (checked over every subset of the source)."""
    src = emb.source_leq
    n = emb.n_source
    tgt = emb.target

    def src_lub(mask):
        ubs = [b for b in range(n) if all(src[a] >> b & 1 for a in _bits(mask))]
        for b in ubs:
            if all(src[b] >> c & 1 for c in ubs):
                return b
        return None

    def src_glb(mask):
        lbs = [b for b in range(n) if all(src[b] >> a & 1 for a in _bits(mask))]
        for b in lbs:
            if all(src[c] >> b & 1 for c in lbs):
                return b
        return None

    for mask in range(1 << n):
        imgs = [emb.mapping[a] for a in _bits(mask)]
        lub = src_lub(mask)
        if lub is not None:
            want = emb.mapping[lub]
            got_ubs = [
                y for y in range(tgt.size) if all(tgt.le(i, y) for i in imgs)
            ]
            least = [y for y in got_ubs if all(tgt.le(y, z) for z in got_ubs)]
            if least != [want]:
                return False
        glb = src_glb(mask)
        if glb is not None:
            want = emb.mapping[glb]
            got_lbs = [
                y for y in range(tgt.size) if all(tgt.le(y, i) for i in imgs)
            ]
            greatest = [y for y in got_lbs if all(tgt.le(z, y) for z in got_lbs)]
            if greatest != [want]:
                return False
    return True


# ---------------------------------------------------------------------------
# Catalogues: posets, lattices and Heyting algebras up to isomorphism


def _canonical_order(leq):
    n = len(leq)
    best = None
    for perm in permutations(range(n)):
        rows = []
        for a in range(n):
            m = 0
            for b in range(n):
                if leq[perm[a]] >> perm[b] & 1:
                    m |= 1 << b
            rows.append(m)
        key = tuple(rows)
        if best is None or key < best:
            best = key
    return best


def enumerate_posets(n):
    """All partial orders on n elements up to isomorphism (bitmask rows)."""
    if n == 0:
        return [()]
    smaller = enumerate_posets(n - 1)
    seen = {}
    v = n - 1
    for base in smaller:
        # mask is a down-set iff b in mask and a <= b implies a in mask
        down_sets = [
            mask
            for mask in range(1 << (n - 1))
            if all(
                not (mask >> b & 1) or all(
                    mask >> a & 1 for a in range(n - 1) if base[a] >> b & 1
                )
                for b in range(n - 1)
            )
        ]
        up_sets = [
            mask
            for mask in range(1 << (n - 1))
            if all(
                not (mask >> a & 1) or all(
                    mask >> b & 1 for b in range(n - 1) if base[a] >> b & 1
                )
                for a in range(n - 1)
            )
        ]
        for below in down_sets:
            for above in up_sets:
                if below & above:
                    continue
                # transitivity through the new element
                if any(
                    not (base[a] >> b & 1)
                    for a in _bits(below)
                    for b in _bits(above)
                ):
                    continue
                rows = []
                for a in range(n - 1):
                    m = base[a]
                    if below >> a & 1:
                        m |= 1 << v
                    rows.append(m)
                newrow = 1 << v
                for b in _bits(above):
                    newrow |= 1 << b
                rows.append(newrow)
                key = _canonical_order(tuple(rows))
                seen[key] = tuple(rows)
    return list(seen.values())


def enumerate_lattices(n):
    out = []
    for leq in enumerate_posets(n):
        try:
            out.append(FiniteLattice(leq))
        except (NotHeyting, NotAPartialOrder):
            continue
    return out


def heyting_catalogue(max_size):
    """All finite Heyting algebras (= finite distributive lattices) with at
    most max_size elements, up to isomorphism."""
    out = []
    for n in range(1, max_size + 1):
        for lat in enumerate_lattices(n):
            if lat.is_distributive():
                out.append(FiniteHeytingAlgebra(lat))
    return out


def lattices_isomorphic(l1, l2):
    if l1.size != l2.size:
        return False
    n = l1.size
    for perm in permutations(range(n)):
        if all(
            l1.le(a, b) == l2.le(perm[a], perm[b]) for a in range(n) for b in range(n)
        ):
            return True
    return False


# ---------------------------------------------------------------------------
# Random valid Heyting frames (for the property suites)


def random_frames(count, seed=0, max_w=4, max_wp=5):
    """Valid Heyting frames sampled by restricting W_A of a small Heyting
    algebra A to a sub-meet-semilattice containing top; W' stays all of A.
    Validity is by construction and re-checked."""
    rng = random.Random(seed)
    algebras = [a for a in heyting_catalogue(max_wp)]
    frames = []
    while len(frames) < count:
        alg = rng.choice(algebras)
        n = alg.size
        base = {alg.top}
        extras = [x for x in range(n) if x != alg.top]
        rng.shuffle(extras)
        for x in extras[: rng.randint(0, min(3, len(extras)))]:
            base.add(x)
        # close under meet
        changed = True
        while changed:
            changed = False
            for a in list(base):
                for b in list(base):
                    m = alg.meet(a, b)
                    if m not in base:
                        base.add(m)
                        changed = True
        if len(base) > max_w:
            continue
        w = sorted(base)
        pos = {x: i for i, x in enumerate(w)}
        rel = tuple(
            sum(1 << z for z in range(n) if alg.le(x, z)) for x in w
        )
        p = Polarity(len(w), n, rel)
        mul = tuple(tuple(pos[alg.meet(x, y)] for y in w) for x in w)
        residual = tuple(tuple(alg.imp(x, z) for z in range(n)) for x in w)
        f = HeytingFrame(p, mul, pos[alg.top], residual)
        f.validate()
        frames.append(f)
    return frames
