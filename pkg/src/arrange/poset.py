"""Intersection posets of arrangements.

A flat is an irreducible stratum cut out by members of the arrangement.
Flats are ordered by reverse inclusion of supports: the ambient space is
the unique bottom element and deeper strata sit higher.  The poset carries
member incidence, the Mobius function, and the surgery operations
(deletion, restriction, localization) that drive every stalk computation
downstream.

Linear builds enumerate flats by breadth-first closure: intersect each
known flat with each member, canonicalize the defining system by reduced
row echelon form, and deduplicate on that canonical key.  This visits only
actual flats instead of all 2^s index subsets.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ArrangeError
from .linalg import reduce_against, rref


class DuplicateMember(ArrangeError):
    pass


class EmptyInput(ArrangeError):
    pass


class InvalidForm(ArrangeError):
    pass


class LastMember(ArrangeError):
    pass


class EmptyRestriction(ArrangeError):
    pass


@dataclass(frozen=True)
class Member:
    """A member of the arrangement; ``atom`` is the flat index of its stratum."""
    label: object
    display: str
    atom: int


@dataclass(frozen=True)
class Flat:
    index: int
    codim: int
    key: object
    display: str


@dataclass
class AdmissibilityReport:
    ok: bool
    violations: list
    note: str = ""


def _bits(mask):
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


class IntersectionPoset:
    """Flats of an arrangement ordered by reverse inclusion of supports."""

    def __init__(self, ambient_dim, codim_c, mode, flats, down, member_data,
                 forms=None, check=True):
        self.ambient_dim = ambient_dim
        self.codim_c = codim_c
        self.mode = mode
        self.flats = list(flats)
        self.down = list(down)          # down[i] = bitmask of {j : j <= i}
        self.forms = forms
        bottoms = [f.index for f in self.flats if f.codim == 0]
        if len(bottoms) != 1:
            raise ArrangeError(f"poset needs a unique bottom, found {len(bottoms)}")
        self.bottom = bottoms[0]
        self.members = tuple(Member(label, display, atom)
                             for (label, display, atom) in member_data)
        self._member_mask = self._compute_member_masks()
        self.mobius = self._compute_mobius()
        if check:
            self._validate()

    # ----- construction ---------------------------------------------------

    @classmethod
    def from_linear_forms(cls, forms, ambient_dim, mode="affine"):
        """Build from hyperplane members given as (covector, constant) pairs."""
        systems = [[form] for form in forms]
        return cls.from_linear_systems(systems, ambient_dim, mode, codim_c=1)

    @classmethod
    def from_linear_systems(cls, systems, ambient_dim, mode="affine", codim_c=None):
        """Build from members each defined by a system of (covector, constant) rows.

        In projective mode the covectors are homogeneous coordinates on the
        cone over P^ambient_dim; the poset is the central one with the cone
        apex dropped.
        """
        if not systems:
            raise EmptyInput("no members given")
        ncoords = ambient_dim + 1 if mode == "projective" else ambient_dim
        member_rrefs = []
        for rows in systems:
            aug = []
            for cov, const in rows:
                cov = [Fraction(x) for x in cov]
                if len(cov) != ncoords:
                    raise InvalidForm(
                        f"covector length {len(cov)} != {ncoords} coordinates")
                if not any(cov):
                    raise InvalidForm("zero covector")
                if mode in ("central", "projective") and Fraction(const):
                    raise InvalidForm(f"{mode} mode requires zero constants")
                aug.append(tuple(cov) + (Fraction(const),))
            reduced, pivots = rref(aug)
            if pivots and pivots[-1] == ncoords:
                raise InvalidForm("member system is inconsistent")
            member_rrefs.append(reduced)
        if codim_c is None:
            codim_c = len(member_rrefs[0])
        for reduced in member_rrefs:
            if len(reduced) != codim_c:
                raise InvalidForm(
                    f"member codimension {len(reduced)} != c = {codim_c}")
        if len(set(member_rrefs)) != len(member_rrefs):
            raise DuplicateMember("two members define the same subspace")

        max_codim = ncoords - 1 if mode == "projective" else ncoords

        # breadth-first closure over canonical systems
        bottom_key = ()
        discovered = {bottom_key: 0}
        systems_by_key = {bottom_key: ()}
        order_list = [bottom_key]
        frontier = [bottom_key]
        while frontier:
            new_frontier = []
            for key in frontier:
                base = systems_by_key[key]
                for mrows in member_rrefs:
                    reduced, pivots = rref(list(base) + list(mrows))
                    if pivots and pivots[-1] == ncoords:
                        continue  # inconsistent: empty intersection
                    if len(reduced) > max_codim:
                        continue  # projective: drop the cone apex
                    if reduced not in discovered:
                        discovered[reduced] = len(order_list)
                        systems_by_key[reduced] = reduced
                        order_list.append(reduced)
                        new_frontier.append(reduced)
            frontier = new_frontier

        flats = []
        for idx, key in enumerate(order_list):
            codim = len(key)
            flats.append(Flat(idx, codim, ("lin", key), _linear_display(idx, codim)))

        # member containment: every row of the member reduces to zero
        containment = []
        for key in order_list:
            mask = 0
            for m, mrows in enumerate(member_rrefs):
                if all(not any(reduce_against(row, key)) for row in mrows):
                    mask |= 1 << m
            containment.append(mask)

        # a linear flat equals the intersection of the members containing it,
        # so the order is containment of member sets
        down = []
        for i in range(len(order_list)):
            mask = 0
            for j in range(len(order_list)):
                if containment[j] & containment[i] == containment[j]:
                    mask |= 1 << j
            down.append(mask)

        member_data = []
        for m, mrows in enumerate(member_rrefs):
            atom = discovered.get(mrows)
            if atom is None or containment[atom] != 1 << m:
                raise DuplicateMember("nested or repeated members")
            member_data.append((m, f"Z{m + 1}", atom))

        kept_forms = list(systems) if codim_c == 1 else None
        return cls(ambient_dim, codim_c, mode, flats, down, member_data,
                   forms=kept_forms)

    @classmethod
    def partition_lattice(cls, n):
        """Lattice of set partitions of {1..n}; bottom is the discrete partition.

        Codimension is stored in block-deficiency units (n - #blocks); a
        geometric model scales it by the codimension of its diagonal.
        """
        if n < 2:
            raise EmptyInput("partition lattice needs n >= 2")
        partitions = _set_partitions(n)
        partitions.sort(key=lambda p: (n - len(p), p))
        flats = []
        pair_sets = []
        for idx, blocks in enumerate(partitions):
            codim = n - len(blocks)
            display = "|".join("".join(str(x) for x in b) for b in blocks)
            flats.append(Flat(idx, codim, ("part", blocks), display))
            pairs = set()
            for b in blocks:
                for i in range(len(b)):
                    for j in range(i + 1, len(b)):
                        pairs.add((b[i], b[j]))
            pair_sets.append(frozenset(pairs))
        down = []
        for i in range(len(partitions)):
            mask = 0
            for j in range(len(partitions)):
                if pair_sets[j] <= pair_sets[i]:
                    mask |= 1 << j
            down.append(mask)
        atoms = {}
        for idx in range(len(partitions)):
            if len(pair_sets[idx]) == 1:
                atoms[next(iter(pair_sets[idx]))] = idx
        member_data = [(("pair", i, j), f"D{i}{j}", atoms[(i, j)])
                       for (i, j) in sorted(atoms)]
        return cls(n, 1, "partition", flats, down, member_data)

    @classmethod
    def from_abstract(cls, flat_specs, order_pairs, codim_c, ambient_dim=None):
        """Build from user-supplied combinatorics.

        ``flat_specs`` is a list of (key, codim) for the proper flats; the
        bottom is added automatically.  ``order_pairs`` lists (a, b) meaning
        flat a's support contains flat b's (a below b); the transitive
        closure is taken here.
        """
        if not flat_specs:
            raise EmptyInput("no flats given")
        keys = [key for key, _ in flat_specs]
        if len(set(keys)) != len(keys):
            raise ArrangeError("duplicate abstract flat keys")
        if ambient_dim is None:
            ambient_dim = max(codim for _, codim in flat_specs)
        flats = [Flat(0, 0, ("abs", "bottom"), "ambient")]
        index_of = {}
        for key, codim in flat_specs:
            if codim <= 0:
                raise ArrangeError(f"abstract flat {key!r} must have codim >= 1")
            idx = len(flats)
            index_of[key] = idx
            flats.append(Flat(idx, int(codim), ("abs", str(key)), str(key)))
        n = len(flats)
        down = [(1 << i) | 1 for i in range(n)]  # reflexive + bottom below all
        down[0] = 1
        for a, b in order_pairs:
            if a not in index_of or b not in index_of:
                raise ArrangeError(f"order pair ({a!r}, {b!r}) names unknown flats")
            down[index_of[b]] |= 1 << index_of[a]
        # transitive closure
        changed = True
        while changed:
            changed = False
            for i in range(n):
                acc = down[i]
                for j in _bits(down[i]):
                    acc |= down[j]
                if acc != down[i]:
                    down[i] = acc
                    changed = True
        for i in range(n):
            for j in _bits(down[i]):
                if j != i and flats[j].codim >= flats[i].codim:
                    raise ArrangeError(
                        f"order violates grading: {flats[j].display} <= {flats[i].display}")
        member_data = []
        for f in flats:
            if f.codim == codim_c:
                member_data.append((f.key[1], f.display, f.index))
        if not member_data:
            raise ArrangeError(f"no members: no flats of codim {codim_c}")
        for f in flats:
            if f.index == 0:
                continue
            if not any(down[f.index] >> atom & 1 for _, _, atom in member_data):
                raise ArrangeError(
                    f"flat {f.display} lies on no member of codim {codim_c}")
        return cls(ambient_dim, codim_c, "abstract", flats, down, member_data)

    # ----- invariants ------------------------------------------------------

    def _compute_member_masks(self):
        masks = []
        for f in self.flats:
            mask = 0
            for m, mem in enumerate(self.members):
                if self.down[f.index] >> mem.atom & 1:
                    mask |= 1 << m
            masks.append(mask)
        return masks

    def _compute_mobius(self):
        mob = [0] * len(self.flats)
        for idx in sorted(range(len(self.flats)), key=lambda i: self.flats[i].codim):
            if idx == self.bottom:
                mob[idx] = 1
            else:
                mob[idx] = -sum(mob[j] for j in _bits(self.down[idx]) if j != idx)
        return mob

    def _validate(self):
        n = len(self.flats)
        for i, f in enumerate(self.flats):
            if f.index != i:
                raise ArrangeError("flat indices out of order")
            if not self.down[i] >> i & 1:
                raise ArrangeError("order not reflexive")
            if not self.down[i] & (1 << self.bottom):
                raise ArrangeError("bottom not below all flats")
            for j in _bits(self.down[i]):
                if j != i and self.flats[j].codim >= f.codim:
                    raise ArrangeError("order not graded by codimension")
                if self.down[j] & ~self.down[i]:
                    raise ArrangeError("order not transitive")
        keys = {f.key for f in self.flats}
        if len(keys) != n:
            raise ArrangeError("duplicate canonical keys")
        for mem in self.members:
            if self.flats[mem.atom].codim != self.codim_c:
                raise ArrangeError(
                    f"member {mem.display} stratum has codim "
                    f"{self.flats[mem.atom].codim}, expected {self.codim_c}")

    # ----- queries ----------------------------------------------------------

    def __len__(self):
        return len(self.flats)

    def le(self, i, j):
        """True when flat i's support contains flat j's (i at most as deep)."""
        return bool(self.down[j] >> i & 1)

    def member_mask(self, i):
        return self._member_mask[i]

    def members_of(self, i):
        """Labels of the members whose subvariety contains flat i."""
        return frozenset(self.members[m].label for m in _bits(self._member_mask[i]))

    def mu(self, i):
        return self.mobius[i]

    def atoms(self):
        return [mem.atom for mem in self.members]

    def proper_flats(self):
        return [f for f in self.flats if f.index != self.bottom]

    def by_codim(self, k):
        return [f for f in self.flats if f.codim == k]

    def content_key(self):
        """Canonical identity of this poset inside its parent model.

        Flat keys are globally unique per model, so the key set plus the
        bottom and member labels pin the induced sub-poset exactly.  Used to
        memoize the stalk recursion.
        """
        return (tuple(sorted(repr(f.key) for f in self.flats)),
                repr(self.flats[self.bottom].key),
                tuple(sorted(repr(m.label) for m in self.members)))

    def check_admissible(self):
        violations = [f.index for f in self.flats if f.codim % self.codim_c]
        note = ""
        if self.mode == "abstract":
            note = ("abstract input: smoothness and irreducibility of the "
                    "declared strata are trusted, not verified")
        return AdmissibilityReport(not violations, violations, note)

    # ----- surgery ----------------------------------------------------------

    def _sub_poset(self, keep, member_data, codim_shift=0, ambient_shift=0,
                   forms=None):
        keep = sorted(keep)
        remap = {old: new for new, old in enumerate(keep)}
        flats = []
        for old in keep:
            f = self.flats[old]
            flats.append(Flat(remap[old], f.codim - codim_shift, f.key, f.display))
        down = []
        for old in keep:
            mask = 0
            for j in _bits(self.down[old]):
                if j in remap:
                    mask |= 1 << remap[j]
            down.append(mask)
        members = [(label, display, remap[atom])
                   for (label, display, atom) in member_data]
        return IntersectionPoset(
            self.ambient_dim - ambient_shift, self.codim_c, self.mode,
            flats, down, members, forms=forms, check=False)

    def localize(self, x):
        """Sub-poset of flats containing flat x: the local picture at a
        generic point of x."""
        keep = list(_bits(self.down[x]))
        mask = self._member_mask[x]
        member_data = [(m.label, m.display, m.atom)
                       for pos, m in enumerate(self.members) if mask >> pos & 1]
        return self._sub_poset(keep, member_data)

    def deletion(self, member_pos):
        """Poset of the arrangement with one member removed.

        A flat survives iff it is still an intersection of the remaining
        members, i.e. no strictly shallower flat already contains all its
        other members.
        """
        if len(self.members) <= 1:
            raise LastMember("cannot delete the only member")
        if not 0 <= member_pos < len(self.members):
            raise ArrangeError(f"no member at position {member_pos}")
        bit = 1 << member_pos
        keep = []
        for f in self.flats:
            target = self._member_mask[f.index] & ~bit
            survives = True
            for j in _bits(self.down[f.index]):
                if j != f.index and self._member_mask[j] & target == target:
                    survives = False
                    break
            if survives:
                keep.append(f.index)
        member_data = [(m.label, m.display, m.atom)
                       for pos, m in enumerate(self.members) if pos != member_pos]
        forms = None
        if self.forms is not None:
            forms = [rows for pos, rows in enumerate(self.forms) if pos != member_pos]
        return self._sub_poset(keep, member_data, forms=forms)

    def restriction(self, member_pos):
        """Arrangement traced on one member, with coincident traces merged.

        The flats are exactly the flats lying inside the chosen member; the
        new members are the minimal ones among them (the deduplicated
        components of the pairwise intersections), and codimensions are
        measured inside the member.
        """
        if not 0 <= member_pos < len(self.members):
            raise ArrangeError(f"no member at position {member_pos}")
        a = self.members[member_pos].atom
        keep = [i for i in range(len(self.flats)) if self.down[i] >> a & 1]
        proper = [i for i in keep if i != a]
        if not proper:
            raise EmptyRestriction(
                f"no other member meets {self.members[member_pos].display}")
        new_atoms = []
        for i in proper:
            if not any(j != i and j != a and self.down[i] >> j & 1 for j in proper):
                new_atoms.append(i)
        member_data = [(self.flats[t].key, self.flats[t].display, t)
                       for t in sorted(new_atoms)]
        shift = self.flats[a].codim
        return self._sub_poset(keep, member_data, codim_shift=shift,
                               ambient_shift=shift)

    def scale_codims(self, factor):
        """Multiply every codimension by a constant (diagonal models)."""
        if factor < 1:
            raise ArrangeError("scale factor must be >= 1")
        flats = [Flat(f.index, f.codim * factor, f.key, f.display)
                 for f in self.flats]
        member_data = [(m.label, m.display, m.atom) for m in self.members]
        return IntersectionPoset(
            self.ambient_dim * factor, self.codim_c * factor, self.mode,
            flats, self.down, member_data, forms=self.forms, check=False)

    # ----- serialization ----------------------------------------------------

    def to_dict(self):
        return {
            "ambient_dim": self.ambient_dim,
            "codim_c": self.codim_c,
            "mode": self.mode,
            "flats": [{"codim": f.codim, "key": _obj_to_json(f.key),
                       "display": f.display} for f in self.flats],
            "down": [str(m) for m in self.down],
            "members": [{"label": _obj_to_json(m.label), "display": m.display,
                         "atom": m.atom} for m in self.members],
            "forms": None if self.forms is None else [
                [[_obj_to_json(tuple(Fraction(x) for x in cov)),
                  _obj_to_json(Fraction(const))] for cov, const in rows]
                for rows in self.forms],
        }

    @classmethod
    def from_dict(cls, data):
        flats = [Flat(i, fd["codim"], _obj_from_json(fd["key"]), fd["display"])
                 for i, fd in enumerate(data["flats"])]
        down = [int(m) for m in data["down"]]
        member_data = [(_obj_from_json(md["label"]), md["display"], md["atom"])
                       for md in data["members"]]
        forms = None
        if data.get("forms") is not None:
            forms = [[(list(_obj_from_json(cov)), _obj_from_json(const))
                      for cov, const in rows] for rows in data["forms"]]
        return cls(data["ambient_dim"], data["codim_c"], data["mode"],
                   flats, down, member_data, forms=forms)

    def __repr__(self):
        return (f"IntersectionPoset({self.mode}, dim={self.ambient_dim}, "
                f"c={self.codim_c}, flats={len(self.flats)}, "
                f"members={len(self.members)})")


def _linear_display(idx, codim):
    return "ambient" if codim == 0 else f"F{idx}"


def _set_partitions(n):
    """All set partitions of {1..n} as sorted tuples of sorted tuples."""
    out = []

    def rec(k, blocks):
        if k > n:
            out.append(tuple(sorted(tuple(b) for b in blocks)))
            return
        for b in blocks:
            b.append(k)
            rec(k + 1, blocks)
            b.pop()
        blocks.append([k])
        rec(k + 1, blocks)
        blocks.pop()

    rec(1, [])
    return out


# JSON codecs for the heterogeneous keys/labels used above.

def _obj_to_json(obj):
    if isinstance(obj, Fraction):
        return {"frac": str(obj)}
    if isinstance(obj, tuple):
        return {"tuple": [_obj_to_json(x) for x in obj]}
    if isinstance(obj, (str, int, bool)) or obj is None:
        return obj
    raise ArrangeError(f"cannot serialize {type(obj).__name__}")


def _obj_from_json(data):
    if isinstance(data, dict):
        if "frac" in data:
            return Fraction(data["frac"])
        if "tuple" in data:
            return tuple(_obj_from_json(x) for x in data["tuple"])
        raise ArrangeError(f"cannot deserialize {data!r}")
    return data
