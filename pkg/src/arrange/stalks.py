"""Boundary stalks of the derived pushforward and their constant-sheaf split.

Near a generic point of a flat the complement is governed by the local
arrangement of members through that flat.  Stalk dimensions obey a
deletion/restriction recursion: split off one member, recurse on the rest
and on the traced arrangement inside the split member, and glue with a
degree shift of 2c-1.  The recursion automatically concentrates output in
degrees divisible by 2c-1, carrying weight 2c*l in degree (2c-1)*l.

Multiplicity of a stratum in the degree-(2c-1)l constant-sheaf summand is
the stalk dimension at its generic point; the pointwise check compares the
resulting sum of multiplicities against the raw recursion at every flat.

The per-model memo is the only shared state; inserts are idempotent
(values are pure functions of the key), so evaluations at distinct flats
may run concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ArrangeError, NotAdmissible

_DEPTH_LIMIT = 200


class RecursionDepthExceeded(ArrangeError):
    pass


class InconsistentDecomposition(ArrangeError):
    """Pointwise check failed: stalk dims are not sums of multiplicities.

    Carries the attempted decomposition and the mismatch report; this can
    only happen for declared (abstract) combinatorics that no actual
    arrangement realizes.
    """

    def __init__(self, message, dec=None, report=None):
        super().__init__(message)
        self.dec = dec
        self.report = report


@dataclass
class StalkTable:
    """Stalk dimensions and weights at a generic point of one flat."""
    flat: int
    dims: dict
    weights: dict


@dataclass(frozen=True)
class Summand:
    """One constant-sheaf summand: multiplicity copies of the constant sheaf
    on the closure of ``support``, sitting in degree (2c-1)*level."""
    support: int
    level: int
    degree: int
    multiplicity: int
    weight: int


@dataclass
class SheafDecomposition:
    c: int
    summands: tuple

    def at_degree(self, k):
        return [s for s in self.summands if s.degree == k]

    def degrees(self):
        return sorted({s.degree for s in self.summands})


@dataclass
class PointwiseReport:
    ok: bool
    mismatches: list = field(default_factory=list)


def _require_admissible(model):
    report = model.poset.check_admissible()
    if not report.ok:
        raise NotAdmissible(
            f"{len(report.violations)} flats violate the codimension pattern",
            report=report)


def _recurse(local, c, memo, depth=0):
    """Stalk dimensions of the local arrangement ``local`` (all members pass
    through the point), as a dict degree -> dim."""
    if depth > _DEPTH_LIMIT:
        raise RecursionDepthExceeded(
            "stalk recursion exceeded the depth guard; malformed poset?")
    key = local.content_key()
    hit = memo.get(key)
    if hit is not None:
        return hit
    s = len(local.members)
    if s == 0:
        dims = {0: 1}
    elif s == 1:
        dims = {0: 1, 2 * c - 1: 1}
    else:
        deleted = _recurse(local.deletion(0), c, memo, depth + 1)
        traced = _recurse(local.restriction(0), c, memo, depth + 1)
        top = max(2 * c - 1, max(deleted), max(traced) + 2 * c - 1)
        dims = {0: 1}
        for k in range(1, top + 1):
            v = (1 if k == 2 * c - 1 else 0) + deleted.get(k, 0)
            if k + 1 > 2 * c:
                v += traced.get(k + 1 - 2 * c, 0)
            if v:
                dims[k] = v
    memo[key] = dims
    return dims


def stalk_dims(model, flat) -> StalkTable:
    """Stalk table at a generic point of ``flat`` (poset index)."""
    _require_admissible(model)
    local = model.poset.localize(flat)
    dims = _recurse(local, model.c, model._stalk_memo)
    weights = {}
    for k in dims:
        if k % (2 * model.c - 1):
            raise ArrangeError(
                f"stalk recursion produced degree {k} with c={model.c}")
        weights[k] = 2 * model.c * k // (2 * model.c - 1)
    return StalkTable(flat, dict(dims), weights)


def stalk_tables(model) -> dict:
    return {f.index: stalk_dims(model, f.index) for f in model.poset.flats}


def decompose(model, tables=None) -> SheafDecomposition:
    """Constant-sheaf decomposition: one summand per flat with nonzero
    generic stalk in its own level degree.  Level 0 (the constant sheaf on
    the ambient space) is left implicit."""
    _require_admissible(model)
    c = model.c
    if tables is None:
        tables = stalk_tables(model)
    summands = []
    for f in model.poset.flats:
        if f.index == model.poset.bottom:
            continue
        level = f.codim // c
        degree = (2 * c - 1) * level
        mult = tables[f.index].dims.get(degree, 0)
        if mult:
            summands.append(Summand(f.index, level, degree, mult, 2 * c * level))
    dec = SheafDecomposition(c, tuple(summands))
    report = verify_pointwise(model, dec, tables=tables)
    if not report.ok:
        raise InconsistentDecomposition(
            f"{len(report.mismatches)} stalk/multiplicity mismatches",
            dec=dec, report=report)
    return dec


def verify_pointwise(model, dec: SheafDecomposition, tables=None) -> PointwiseReport:
    """At every flat and degree, the stalk dimension must equal the sum of
    multiplicities of summands whose support closure contains the flat."""
    if tables is None:
        tables = stalk_tables(model)
    poset = model.poset
    by_degree = {}
    for s in dec.summands:
        by_degree.setdefault(s.degree, []).append(s)
    mismatches = []
    for f in poset.flats:
        table = tables[f.index]
        degrees = set(table.dims) | set(by_degree)
        for k in sorted(degrees):
            lhs = table.dims.get(k, 0)
            if k == 0:
                rhs = 1  # the implicit ambient constant sheaf
            else:
                rhs = sum(s.multiplicity for s in by_degree.get(k, ())
                          if poset.le(s.support, f.index))
            if lhs != rhs:
                mismatches.append({
                    "flat": f.index, "degree": k,
                    "stalk": lhs, "decomposition": rhs})
    return PointwiseReport(not mismatches, mismatches)
