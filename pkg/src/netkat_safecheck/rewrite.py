"""Normalization of dup-free, star-free policies to canonical sums of paths.

The rule set is the NetKAT axiomatisation without PA-MOD-MOD and
PA-FILTER-MOD, so every modification along a forwarding path survives
into the normal form.  Sequencing is never commuted globally; only
adjacent tokens on different fields are swapped, towards a total field
order.  Cancellation and contradiction rules work in context (with a
middle segment ``M``), guarded by side conditions on what ``M`` modifies.

Pipeline::

    eliminate_negation -> unfold -> to_union_free_sum -> reduce_path

:func:`normalize_staged` runs those steps literally and is exponential in
the unfolding bound.  :func:`normalize` computes the same sum but reduces
after every product and iterates repetitions semi-naively.
"""

from __future__ import annotations

import random
import time
from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import UndeclaredField
from .terms import (
    ONE,
    ZERO,
    Conj,
    Disj,
    DomainMap,
    Filter,
    Mod,
    Neg,
    One,
    Path,
    Rep,
    Seq,
    Test,
    Union,
    Zero,
    disj,
)
from .unfold import unfold

IDENTITY_PATH: Path = (ONE,)


class FieldOrder:
    """Strict total order on field names.

    Fields listed explicitly come first, in the given order; every other
    field follows in lexicographic order.
    """

    def __init__(self, fields: Sequence[str] = ()):
        self.explicit = tuple(dict.fromkeys(fields))
        self._rank = {f: i for i, f in enumerate(self.explicit)}

    def key(self, f: str):
        r = self._rank.get(f)
        return (0, r, "") if r is not None else (1, 0, f)

    def __repr__(self):
        return f"FieldOrder({list(self.explicit)!r})"

    def __eq__(self, other):
        return isinstance(other, FieldOrder) and self.explicit == other.explicit

    def __hash__(self):
        return hash(self.explicit)


DEFAULT_ORDER = FieldOrder()


# -- step I: negation, distribution ----------------------------------------


def _push_neg(a, negate: bool, domains: Optional[DomainMap]):
    if isinstance(a, One):
        return ZERO if negate else ONE  # NEG-ONE
    if isinstance(a, Zero):
        return ONE if negate else ZERO  # NEG-ZERO
    if isinstance(a, Test):
        if not negate:
            return a
        if domains is None or a.field not in domains:
            raise UndeclaredField(f"cannot eliminate negation of {a.field!r} without its domain")
        # NEG-ELIM
        return disj(*(Test(a.field, v) for v in domains[a.field] if v != a.value))
    if isinstance(a, Disj):
        l, r = _push_neg(a.left, negate, domains), _push_neg(a.right, negate, domains)
        return Conj(l, r) if negate else Disj(l, r)  # DIST-NEG-DISJ
    if isinstance(a, Conj):
        l, r = _push_neg(a.left, negate, domains), _push_neg(a.right, negate, domains)
        return Disj(l, r) if negate else Conj(l, r)  # DIST-NEG-CONJ
    if isinstance(a, Neg):
        return _push_neg(a.arg, not negate, domains)  # NEG-NEG
    raise TypeError(f"not a predicate: {a!r}")


def eliminate_negation(p, domains: Optional[DomainMap] = None):
    """Push negations down to tests and expand them over the field's domain."""
    if isinstance(p, (One, Zero, Test, Disj, Conj, Neg)):
        return _push_neg(p, False, domains)
    if isinstance(p, Filter):
        return Filter(_push_neg(p.pred, False, domains))
    if isinstance(p, Mod):
        return p
    if isinstance(p, Union):
        return Union(*(eliminate_negation(q, domains) for q in p.ops))
    if isinstance(p, Seq):
        return Seq(eliminate_negation(p.left, domains), eliminate_negation(p.right, domains))
    if isinstance(p, Rep):
        return Rep(eliminate_negation(p.body, domains), p.n)
    raise TypeError(f"not a policy: {p!r}")


def _pred_sum(a) -> frozenset:
    if isinstance(a, One):
        return frozenset({IDENTITY_PATH})
    if isinstance(a, Zero):
        return frozenset()
    if isinstance(a, Test):
        return frozenset({(a,)})
    if isinstance(a, Disj):
        return _pred_sum(a.left) | _pred_sum(a.right)
    if isinstance(a, Conj):
        return _raw_product(_pred_sum(a.left), _pred_sum(a.right))
    if isinstance(a, Neg):
        raise ValueError("to_union_free_sum needs a negation-free policy")
    raise TypeError(f"not a predicate: {a!r}")


def _raw_product(xs, ys) -> frozenset:
    return frozenset(x + y for x in xs for y in ys)


def to_union_free_sum(p) -> frozenset:
    """Distribute ``.`` over ``+`` (KA-SEQ-DIST-L/R); no path simplification.

    Only the drop policy disappears (KA-ZERO-SEQ, KA-PLUS-ZERO), since a
    sum of no paths is 0.
    """
    if isinstance(p, (One, Zero, Test, Disj, Conj, Neg)):
        return _pred_sum(p)
    if isinstance(p, Filter):
        return _pred_sum(p.pred)
    if isinstance(p, Mod):
        return frozenset({(p,)})
    if isinstance(p, Union):
        out = frozenset()
        for q in p.ops:
            out |= to_union_free_sum(q)
        return out
    if isinstance(p, Seq):
        return _raw_product(to_union_free_sum(p.left), to_union_free_sum(p.right))
    if isinstance(p, Rep):
        raise ValueError("to_union_free_sum needs a repetition-free policy; unfold first")
    raise TypeError(f"not a policy: {p!r}")


# -- step II: path reduction -----------------------------------------------

Observer = Callable[[str, Path, Optional[Path]], None]


def _sweep(toks: Sequence, order: FieldOrder) -> Optional[Path]:
    """Apply the rule set under one fixed batched schedule."""
    if any(isinstance(t, Zero) for t in toks):
        return None
    body = [t for t in toks if not isinstance(t, One)]
    if not body:
        return IDENTITY_PATH
    # A stable sort is exactly the fixpoint of adjacent different-field swaps.
    key = order.key
    body.sort(key=lambda t: key(t.field))
    out: List = []
    cur_field = None
    initial = last_mod = None
    modified = False
    for t in body:
        if t.field != cur_field:
            cur_field, initial, last_mod, modified = t.field, None, None, False
        if isinstance(t, Mod):
            modified, last_mod = True, t.value
            out.append(t)
        elif modified:
            if t.value != last_mod:
                return None  # PA-MOD-FILTER then PA-CONTRA
            # PA-MOD-FILTER: f<-n . M . f=n -> f<-n . M
        elif initial is None:
            initial = t.value
            out.append(t)
        elif initial != t.value:
            return None  # PA-CONTRA
        # else BA-SEQ-IDEM
    return tuple(out)


def _swap_rule(a, b) -> str:
    if isinstance(a, Mod) and isinstance(b, Mod):
        return "PA-MOD-MOD-COMM"
    if isinstance(a, Test) and isinstance(b, Test):
        return "BA-SEQ-COMM"
    return "PA-MOD-FILTER-COMM"


def iter_redexes(toks: Sequence, order: FieldOrder = DEFAULT_ORDER):
    """Yield every applicable rule instance as ``(rule, i, j)``.

    Rules ending in ``->0`` rewrite the whole path to 0; the others delete
    token ``j`` or, for swaps, exchange positions ``i`` and ``j = i + 1``.
    """
    n = len(toks)
    if n > 1:
        for i, t in enumerate(toks):
            if isinstance(t, Zero):
                yield ("KA-ZERO-SEQ->0", i, i)
    if n > 1:
        for i, t in enumerate(toks):
            if isinstance(t, One):
                yield ("KA-ONE-SEQ", i, i)
    key = order.key
    for i in range(n - 1):
        a, b = toks[i], toks[i + 1]
        if isinstance(a, (Test, Mod)) and isinstance(b, (Test, Mod)):
            if a.field != b.field and key(b.field) < key(a.field):
                yield (_swap_rule(a, b), i, i + 1)
    positions: Dict[str, List[int]] = defaultdict(list)
    for i, t in enumerate(toks):
        if isinstance(t, (Test, Mod)):
            positions[t.field].append(i)
    for idxs in positions.values():
        for a_pos, i in enumerate(idxs):
            ti = toks[i]
            mods_between: List = []
            for j in idxs[a_pos + 1:]:
                tj = toks[j]
                if isinstance(tj, Test):
                    if isinstance(ti, Test):
                        if ti.value != tj.value:
                            # occursInner side condition
                            if not any(m.value == tj.value for m in mods_between):
                                yield ("PA-CONTRA->0", i, j)
                        elif not mods_between:
                            yield ("BA-SEQ-IDEM", i, j)
                    elif not mods_between:
                        if ti.value == tj.value:
                            yield ("PA-MOD-FILTER", i, j)
                        else:
                            yield ("PA-MOD-CONTRA->0", i, j)
                else:
                    mods_between.append(tj)


def apply_redex(toks: Tuple, redex) -> Optional[Path]:
    rule, i, j = redex
    if rule.endswith("->0"):
        return None
    if rule == "KA-ONE-SEQ":
        return toks[:i] + toks[i + 1:]
    if rule.endswith("-COMM"):
        return toks[:i] + (toks[j], toks[i]) + toks[j + 1:]
    return toks[:j] + toks[j + 1:]


def inversions(toks: Sequence, order: FieldOrder = DEFAULT_ORDER) -> int:
    keys = [order.key(t.field) for t in toks if isinstance(t, (Test, Mod))]
    return sum(1 for a in range(len(keys)) for b in range(a + 1, len(keys)) if keys[b] < keys[a])


def termination_measure(toks: Optional[Sequence], order: FieldOrder = DEFAULT_ORDER) -> Tuple[int, int]:
    """Lexicographic measure (token count, field-order inversions).

    ``None`` stands for the one-token path ``0``.
    """
    if toks is None:
        return (1, 0)
    return (len(toks), inversions(toks, order))


def _stepwise(toks: Tuple, order: FieldOrder, rng, observer: Optional[Observer]) -> Optional[Path]:
    while True:
        if rng is None:
            redex = next(iter_redexes(toks, order), None)
        else:
            found = list(iter_redexes(toks, order))
            redex = rng.choice(found) if found else None
        if redex is None:
            if toks == (ZERO,):
                return None
            return toks if toks else IDENTITY_PATH
        after = apply_redex(toks, redex)
        if observer is not None:
            observer(redex[0], toks, after)
        if after is None:
            return None
        toks = after


def reduce_path(
    path: Iterable,
    domains: Optional[DomainMap] = None,
    order: Optional[FieldOrder] = None,
    *,
    rng: Optional[random.Random] = None,
    stepwise: bool = False,
    observer: Optional[Observer] = None,
) -> Optional[Path]:
    """Rewrite a negation-free path to its canonical form, or ``None`` if it is 0.

    The default runs the rules under a fixed batched schedule.  With
    ``stepwise=True`` (implied by ``rng`` or ``observer``) one rule
    instance is applied at a time, leftmost-first or chosen by ``rng``,
    and ``observer(rule, before, after)`` sees every application.
    """
    order = order or DEFAULT_ORDER
    toks = tuple(path)
    if domains is not None:
        for t in toks:
            if isinstance(t, (Test, Mod)):
                domains.check(t.field, t.value)
    if stepwise or rng is not None or observer is not None:
        return _stepwise(toks, order, rng, observer)
    return _sweep(toks, order)


def symbolic_zero_check(path: Iterable, domains: Optional[DomainMap] = None) -> bool:
    """True iff no packet survives the path.

    Tracks, per field, either the last written value or the value an
    earlier test pinned the input packet to.
    """
    known: Dict[str, object] = {}
    for t in path:
        if isinstance(t, Zero):
            return True
        if isinstance(t, Mod):
            known[t.field] = t.value
        elif isinstance(t, Test):
            if domains is not None and t.field in domains and t.field not in known:
                if t.value not in domains[t.field]:
                    return True
            if t.field in known:
                if known[t.field] != t.value:
                    return True
            else:
                known[t.field] = t.value
    return False


# -- full normalization -----------------------------------------------------


@dataclass
class NormalizeStats:
    summands_before_reduction: int = 0
    zero_paths: int = 0
    dedup_count: int = 0
    elapsed: float = 0.0

    def as_dict(self):
        return {
            "summands_before_reduction": self.summands_before_reduction,
            "zero_paths": self.zero_paths,
            "dedup_count": self.dedup_count,
            "elapsed": round(self.elapsed, 6),
        }


def _exit_values(path: Path) -> Dict[str, object]:
    out: Dict[str, object] = {}
    for t in path:
        if isinstance(t, Mod):
            out[t.field] = t.value
        elif isinstance(t, Test) and t.field not in out:
            out[t.field] = t.value
    return out


def _requirements(path: Path) -> Dict[str, object]:
    out: Dict[str, object] = {}
    written = set()
    for t in path:
        if isinstance(t, Mod):
            written.add(t.field)
        elif isinstance(t, Test) and t.field not in written and t.field not in out:
            out[t.field] = t.value
    return out


class _RightIndex:
    """Buckets right-hand paths by the value they test on one chosen field."""

    def __init__(self, paths: Iterable[Path]):
        self.entries = [(p, _requirements(p)) for p in paths]
        counts: Dict[str, set] = defaultdict(set)
        for _, req in self.entries:
            for f, v in req.items():
                counts[f].add(v)
        self.field = None
        if counts:
            self.field = max(sorted(counts), key=lambda f: len(counts[f]))
        self.buckets: Dict[object, list] = defaultdict(list)
        self.free: list = []
        for e in self.entries:
            req = e[1]
            if self.field is not None and self.field in req:
                self.buckets[req[self.field]].append(e)
            else:
                self.free.append(e)

    def candidates(self, exit_vals):
        if self.field is not None and self.field in exit_vals:
            return self.buckets.get(exit_vals[self.field], []) + self.free, len(self.entries)
        return self.entries, len(self.entries)


class Normalizer:
    """Reduced-sum algebra shared by one normalization run."""

    def __init__(self, order: FieldOrder, reducer=None, prune: bool = True):
        self.order = order
        self.reduce = reducer or (lambda path: _sweep(path, order))
        self.prune = prune
        self.stats = NormalizeStats()

    def product(self, left: Iterable[Path], right: Iterable[Path]) -> frozenset:
        st = self.stats
        out = set()
        right = list(right)
        if self.prune:
            index = _RightIndex(right)
            for a in left:
                ex = _exit_values(a)
                cands, total = index.candidates(ex)
                st.summands_before_reduction += total
                hits = 0
                for b, req in cands:
                    if any(f in ex and ex[f] != v for f, v in req.items()):
                        continue
                    hits += 1
                    r = self.reduce(a + b)
                    if r is None:
                        st.zero_paths += 1
                    elif r in out:
                        st.dedup_count += 1
                    else:
                        out.add(r)
                st.zero_paths += total - hits
        else:
            for a in left:
                for b in right:
                    st.summands_before_reduction += 1
                    r = self.reduce(a + b)
                    if r is None:
                        st.zero_paths += 1
                    elif r in out:
                        st.dedup_count += 1
                    else:
                        out.add(r)
        return frozenset(out)

    def leaf(self, paths: Iterable[Path]) -> frozenset:
        out = set()
        for p in paths:
            self.stats.summands_before_reduction += 1
            r = self.reduce(p)
            if r is None:
                self.stats.zero_paths += 1
            elif r in out:
                self.stats.dedup_count += 1
            else:
                out.add(r)
        return frozenset(out)

    def power(self, start: frozenset, body: frozenset, n: int) -> frozenset:
        """``start . body^n`` with early exit once the sum stops changing."""
        if IDENTITY_PATH in body:
            # start . (1 + q)^n: only paths new at step k need extending at k+1
            step = body - {IDENTITY_PATH}
            acc, frontier = set(start), start
            for _ in range(n):
                new = self.product(frontier, step) - acc
                if not new:
                    break
                acc |= new
                frontier = new
            return frozenset(acc)
        cur = start
        for _ in range(n):
            nxt = self.product(cur, body)
            if nxt == cur or not nxt:
                return nxt
            cur = nxt
        return cur

    def nf(self, p) -> frozenset:
        if isinstance(p, (Filter, Mod)):
            return self.leaf(to_union_free_sum(p))
        if isinstance(p, Union):
            out = frozenset()
            for q in p.ops:
                out |= self.nf(q)
            return out
        if isinstance(p, Seq):
            return self.nf_chain(_seq_factors(p), frozenset({IDENTITY_PATH}))
        if isinstance(p, Rep):
            return self.power(frozenset({IDENTITY_PATH}), self.nf(p.body), p.n)
        raise TypeError(f"not a policy: {p!r}")

    def nf_chain(self, factors, acc: frozenset) -> frozenset:
        for f in factors:
            if not acc:
                break
            if isinstance(f, Rep):
                acc = self.power(acc, self.nf(f.body), f.n)
            else:
                acc = self.product(acc, self.nf(f))
        return acc


def _seq_factors(p) -> list:
    if isinstance(p, Seq):
        return _seq_factors(p.left) + _seq_factors(p.right)
    return [p]


def normalize(
    p,
    domains: Optional[DomainMap] = None,
    order: Optional[FieldOrder] = None,
    *,
    reducer=None,
    prune: bool = True,
    stats: Optional[NormalizeStats] = None,
) -> frozenset:
    """Canonical sum of paths of ``p``; the empty set means ``p`` reduces to 0.

    ``reducer`` replaces the default fixed-schedule path reduction (for
    instance a stepwise, instrumented one).  ``prune`` skips products
    whose operands pin a field to different values; they are counted as
    zero paths.
    """
    t0 = time.perf_counter()
    order = order or DEFAULT_ORDER
    norm = Normalizer(order, reducer, prune)
    if domains is not None:
        domains.validate(p)
    result = norm.nf(eliminate_negation(p, domains))
    if stats is not None:
        for k in ("summands_before_reduction", "zero_paths", "dedup_count"):
            setattr(stats, k, getattr(stats, k) + getattr(norm.stats, k))
        stats.elapsed += time.perf_counter() - t0
    return result


def normalize_staged(p, domains: Optional[DomainMap] = None, order: Optional[FieldOrder] = None, **kw):
    """Literal three-step pipeline; exponential, meant for small inputs and cross-checks."""
    raw = to_union_free_sum(unfold(eliminate_negation(p, domains)))
    out = set()
    for path in raw:
        r = reduce_path(path, None, order, **kw)
        if r is not None:
            out.add(r)
    return frozenset(out)
