"""Core data model: typed constants, tid-annotated databases, value cells,
equivalence relations, and set-valued extended databases.

Everything here is immutable after construction, so instances can be shared
freely across threads; closure and extension are pure functions.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable


class EngineError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(EngineError):
    """An element lies outside the universe it is supposed to belong to."""


class Sort(enum.Enum):
    OBJ = "obj"
    VAL = "val"
    TID = "tid"
    NULL = "null"


@dataclass(frozen=True, slots=True)
class Constant:
    """A constant with exactly one sort, compared by (sort, text)."""

    sort: Sort
    text: str
    _key: tuple = field(default=(), compare=False, repr=False)
    _h: int = field(default=0, compare=False, repr=False)

    def __post_init__(self):
        key = ("const", self.sort.value, self.text)
        object.__setattr__(self, "_key", key)
        object.__setattr__(self, "_h", hash(key))

    def __hash__(self):
        return self._h

    def __repr__(self):
        if self.sort is Sort.NULL:
            return "<null>"
        return f"{self.sort.value}:{self.text}"


#: The single shared null constant.  It may sit in value cells but never
#: takes part in object merges, similarity scores, or value overlap.
NULL = Constant(Sort.NULL, "")


def obj(text: str) -> Constant:
    return Constant(Sort.OBJ, text)


def val(text: str) -> Constant:
    return Constant(Sort.VAL, text)


def tid(text: str) -> Constant:
    return Constant(Sort.TID, text)


def is_null(c: Constant) -> bool:
    return c.sort is Sort.NULL


@dataclass(frozen=True, slots=True)
class RelationDecl:
    """Relation symbol with arity k and a type vector over positions 1..k.

    Position 0 is implicitly the tid position and is not part of the
    type vector.  `attr_names`, when given, is cosmetic (diagnostics and
    file headers only).
    """

    name: str
    type_vec: tuple[Sort, ...]
    attr_names: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.type_vec) < 1:
            raise DomainError(f"relation {self.name} must have arity >= 1")
        for s in self.type_vec:
            if s not in (Sort.OBJ, Sort.VAL):
                raise DomainError(f"relation {self.name}: positions are obj or val")
        if self.attr_names and len(self.attr_names) != len(self.type_vec):
            raise DomainError(f"relation {self.name}: attribute names do not match arity")

    @property
    def arity(self) -> int:
        return len(self.type_vec)

    def is_value_position(self, pos: int) -> bool:
        """1-based argument position check."""
        return 1 <= pos <= self.arity and self.type_vec[pos - 1] is Sort.VAL

    def value_positions(self) -> tuple[int, ...]:
        return tuple(i + 1 for i, s in enumerate(self.type_vec) if s is Sort.VAL)


@dataclass(frozen=True, slots=True)
class Fact:
    rel: RelationDecl
    tid: Constant
    args: tuple[Constant, ...]

    def __post_init__(self):
        if self.tid.sort is not Sort.TID:
            raise DomainError(f"fact of {self.rel.name}: tid has sort {self.tid.sort}")
        if len(self.args) != self.rel.arity:
            raise DomainError(
                f"fact {self.tid.text} of {self.rel.name}: got {len(self.args)} args, "
                f"arity is {self.rel.arity}"
            )
        for i, (a, s) in enumerate(zip(self.args, self.rel.type_vec), start=1):
            if s is Sort.OBJ and a.sort is not Sort.OBJ:
                raise DomainError(f"fact {self.tid.text}: position {i} needs an object")
            if s is Sort.VAL and a.sort not in (Sort.VAL, Sort.NULL):
                raise DomainError(f"fact {self.tid.text}: position {i} needs a value")


@dataclass(frozen=True, slots=True)
class Cell:
    """A (tid, value-position) pair: the unit of local value merging."""

    tid: Constant
    pos: int
    _key: tuple = field(default=(), compare=False, repr=False)
    _h: int = field(default=0, compare=False, repr=False)

    def __post_init__(self):
        key = ("cell", self.tid.text, self.pos)
        object.__setattr__(self, "_key", key)
        object.__setattr__(self, "_h", hash(key))

    def __hash__(self):
        return self._h

    def __repr__(self):
        return f"{self.tid.text}.{self.pos}"


Element = Constant | Cell


def element_key(e: Element) -> tuple:
    return e._key


def norm_pair(a: Element, b: Element) -> tuple[Element, Element]:
    """Canonical unordered form of a merge pair."""
    if element_key(a) <= element_key(b):
        return (a, b)
    return (b, a)


def pair_key(p: tuple[Element, Element]) -> tuple:
    return element_key(p[0]) + element_key(p[1])


class Database:
    """A schema plus a finite set of tid-annotated facts.

    Each tid occurs at most once.  Obj(D) is the set of object constants in
    facts; Cells(D) is the set of (tid, value-position) pairs.
    """

    __slots__ = ("schema", "facts", "_by_tid", "_by_rel", "_objects", "_cells")

    def __init__(self, schema: Iterable[RelationDecl], facts: Iterable[Fact]):
        self.schema: dict[str, RelationDecl] = {}
        for decl in schema:
            if decl.name in self.schema:
                raise DomainError(f"duplicate relation declaration {decl.name}")
            self.schema[decl.name] = decl
        self.facts = tuple(sorted(facts, key=lambda f: f.tid.text))
        self._by_tid: dict[Constant, Fact] = {}
        by_rel: dict[str, list[Fact]] = {name: [] for name in self.schema}
        for f in self.facts:
            if f.rel.name not in self.schema or self.schema[f.rel.name] != f.rel:
                raise DomainError(f"fact {f.tid.text}: relation {f.rel.name} not declared")
            if f.tid in self._by_tid:
                raise DomainError(f"tid {f.tid.text} occurs more than once")
            self._by_tid[f.tid] = f
            by_rel[f.rel.name].append(f)
        self._by_rel = {name: tuple(fs) for name, fs in by_rel.items()}
        objects = set()
        cells = set()
        for f in self.facts:
            for i, a in enumerate(f.args, start=1):
                if a.sort is Sort.OBJ:
                    objects.add(a)
                elif f.rel.type_vec[i - 1] is Sort.VAL:
                    cells.add(Cell(f.tid, i))
        self._objects = frozenset(objects)
        self._cells = frozenset(cells)

    def objects(self) -> frozenset[Constant]:
        return self._objects

    def cells(self) -> frozenset[Cell]:
        return self._cells

    def fact(self, t: Constant) -> Fact:
        return self._by_tid[t]

    def facts_of(self, rel_name: str) -> tuple[Fact, ...]:
        return self._by_rel.get(rel_name, ())

    def value_at(self, cell: Cell) -> Constant:
        f = self._by_tid.get(cell.tid)
        if f is None or not f.rel.is_value_position(cell.pos):
            raise DomainError(f"no value cell {cell!r}")
        return f.args[cell.pos - 1]

    def value_constants(self) -> frozenset[Constant]:
        return frozenset(
            v for f in self.facts for v in f.args if v.sort is Sort.VAL
        )


class EquivRel:
    """An equivalence relation over a fixed finite universe.

    Built as the reflexive-symmetric-transitive closure of a generator pair
    set.  Only non-singleton classes are stored; every other element is its
    own class.  Equality and hashing are by partition, not by generators.
    """

    __slots__ = ("universe", "generators", "_class_of", "_merged_classes", "_hash")

    def __init__(self, universe: frozenset, generators: frozenset,
                 class_of: dict, merged_classes: tuple):
        self.universe = universe
        self.generators = generators
        self._class_of = class_of
        self._merged_classes = merged_classes
        self._hash = hash((self.universe, frozenset(self._merged_classes)))

    @classmethod
    def close(cls, pairs: Iterable[tuple[Element, Element]], universe: Iterable[Element]) -> "EquivRel":
        """Smallest equivalence relation on `universe` extending `pairs`."""
        uni = universe if isinstance(universe, frozenset) else frozenset(universe)
        gens = frozenset(tuple(p) for p in pairs)
        parent: dict[Element, Element] = {}

        def find(x):
            root = x
            while parent[root] != root:
                root = parent[root]
            while parent[x] != root:
                parent[x], x = root, parent[x]
            return root

        for a, b in gens:
            for e in (a, b):
                if e not in uni:
                    raise DomainError(f"pair member {e!r} not in universe")
                parent.setdefault(e, e)
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[rb] = ra
        groups: dict[Element, set] = {}
        for e in parent:
            groups.setdefault(find(e), set()).add(e)
        class_of: dict[Element, frozenset] = {}
        merged = []
        for members in groups.values():
            if len(members) < 2:
                continue
            fs = frozenset(members)
            merged.append(fs)
            for e in members:
                class_of[e] = fs
        merged.sort(key=lambda c: min(element_key(e) for e in c))
        return cls(uni, gens, class_of, tuple(merged))

    @classmethod
    def identity(cls, universe: Iterable[Element]) -> "EquivRel":
        return cls.close((), universe)

    def same(self, a: Element, b: Element) -> bool:
        if a == b:
            return True
        ca = self._class_of.get(a)
        return ca is not None and b in ca

    def class_of(self, a: Element) -> frozenset:
        if a not in self.universe:
            raise DomainError(f"{a!r} not in universe")
        return self._class_of.get(a, frozenset((a,)))

    def merged_classes(self) -> tuple[frozenset, ...]:
        """The non-singleton classes, in canonical order."""
        return self._merged_classes

    def classes(self) -> tuple[frozenset, ...]:
        singles = tuple(
            frozenset((e,))
            for e in sorted(self.universe - set(self._class_of), key=element_key)
        )
        return self._merged_classes + singles

    def pair_count(self) -> int:
        """Number of ordered pairs in the relation, reflexive included."""
        n = len(self.universe)
        return n + sum(len(c) * len(c) - len(c) for c in self._merged_classes)

    def merged_pairs(self) -> frozenset[tuple[Element, Element]]:
        """All non-reflexive pairs, in canonical unordered form."""
        out = set()
        for c in self._merged_classes:
            members = sorted(c, key=element_key)
            out.update(itertools.combinations(members, 2))
        return frozenset(out)

    def extend(self, pairs: Iterable[tuple[Element, Element]]) -> "EquivRel":
        """The closure extended by more pairs; incremental, same result as
        re-closing all generators together."""
        new = frozenset(tuple(p) for p in pairs)
        fresh = [(a, b) for a, b in new if not self.same(a, b)]
        if not fresh:
            return self
        groups = [set(c) for c in self._merged_classes]
        index = {e: i for i, c in enumerate(groups) for e in c}
        for a, b in fresh:
            for e in (a, b):
                if e not in self.universe:
                    raise DomainError(f"pair member {e!r} not in universe")
                if e not in index:
                    groups.append({e})
                    index[e] = len(groups) - 1
            ia, ib = index[a], index[b]
            if ia == ib:
                continue
            if len(groups[ia]) < len(groups[ib]):
                ia, ib = ib, ia
            for e in groups[ib]:
                index[e] = ia
            groups[ia] |= groups[ib]
            groups[ib].clear()
        merged = sorted(
            (frozenset(g) for g in groups if len(g) >= 2),
            key=lambda c: min(element_key(e) for e in c),
        )
        class_of = {e: c for c in merged for e in c}
        return EquivRel(self.universe, self.generators | new, class_of, tuple(merged))

    def is_identity(self) -> bool:
        return not self._merged_classes

    def __eq__(self, other):
        if not isinstance(other, EquivRel):
            return NotImplemented
        return (self.universe == other.universe
                and self._merged_classes == other._merged_classes)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        body = ", ".join("{" + ", ".join(repr(e) for e in sorted(c, key=element_key)) + "}"
                         for c in self._merged_classes)
        return f"EquivRel([{body}] over {len(self.universe)} elements)"


def eqrel_close(pairs: Iterable[tuple[Element, Element]], universe: Iterable[Element]) -> EquivRel:
    return EquivRel.close(pairs, universe)


def pair_count(e: EquivRel) -> int:
    return e.pair_count()


@dataclass(frozen=True, slots=True)
class ExtFact:
    """An original fact with each argument blown up to a set of constants."""

    rel: RelationDecl
    tid: Constant
    argsets: tuple[frozenset[Constant], ...]
    orig: Fact
    _tid_set: frozenset = field(default=frozenset(), compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_tid_set", frozenset((self.tid,)))

    def set_at(self, pos: int) -> frozenset[Constant]:
        """Constant set at tid position 0 or argument position 1..k."""
        if pos == 0:
            return self._tid_set
        return self.argsets[pos - 1]


class ExtendedDatabase:
    """The database induced by an object merge E and a cell merge V.

    An object occurrence is replaced by its E-class; the value in cell (t,i)
    is replaced by the set of values stored in all V-merged cells.  Tid
    positions stay singletons.
    """

    __slots__ = ("db", "obj_merge", "cell_merge", "facts", "_by_rel")

    def __init__(self, db: Database, obj_merge: EquivRel, cell_merge: EquivRel,
                 facts: tuple[ExtFact, ...]):
        self.db = db
        self.obj_merge = obj_merge
        self.cell_merge = cell_merge
        self.facts = facts
        by_rel: dict[str, list[ExtFact]] = {}
        for f in facts:
            by_rel.setdefault(f.rel.name, []).append(f)
        self._by_rel = {name: tuple(fs) for name, fs in by_rel.items()}

    def facts_of(self, rel_name: str) -> tuple[ExtFact, ...]:
        return self._by_rel.get(rel_name, ())


def extend(db: Database, obj_merge: EquivRel, cell_merge: EquivRel) -> ExtendedDatabase:
    """Build the extended database induced by the pair of merge relations.

    Memoised on (database identity, partitions): the result is immutable and
    rebuilt frequently during search.
    """
    if obj_merge.universe != db.objects():
        raise DomainError("object merge universe does not match Obj(D)")
    if cell_merge.universe != db.cells():
        raise DomainError("cell merge universe does not match Cells(D)")
    return _extend_cached(db, obj_merge, cell_merge)


@lru_cache(maxsize=16384)
def _extend_cached(db: Database, obj_merge: EquivRel, cell_merge: EquivRel) -> ExtendedDatabase:
    ext_facts = []
    for f in db.facts:
        sets = []
        for i, a in enumerate(f.args, start=1):
            if a.sort is Sort.OBJ:
                sets.append(obj_merge.class_of(a))
            else:
                cell = Cell(f.tid, i)
                sets.append(frozenset(db.value_at(c) for c in cell_merge.class_of(cell)))
        ext_facts.append(ExtFact(f.rel, f.tid, tuple(sets), f))
    return ExtendedDatabase(db, obj_merge, cell_merge, tuple(ext_facts))
