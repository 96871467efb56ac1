"""Verdicts and minimal safety-failure explanations."""

from __future__ import annotations

import enum
import json
import time
from dataclasses import dataclass, field
from typing import Iterable, List, Optional

from .parser import SafetyProblem
from .rewrite import FieldOrder, NormalizeStats, normalize
from .terms import Mod, One, Path, Test, Token, Zero, format_path, value_key
from .unfold import build_program, default_unfold_bound


class Verdict(str, enum.Enum):
    SAFE = "safe"
    UNSAFE = "unsafe"


def subsumes(p: Path, q: Path, strict: bool = False) -> bool:
    """``p`` is obtained from ``q`` by deleting zero or more tokens.

    With ``strict`` at least one token must be deleted.
    """
    if strict and len(p) >= len(q):
        return False
    if len(p) > len(q):
        return False
    it = iter(q)
    return all(any(t == u for u in it) for t in p)


def minimize(paths: Iterable[Path]) -> frozenset:
    """Drop every path that strictly contains another path of the sum as a subsequence."""
    by_len = sorted(set(paths), key=len)
    token_sets = {p: frozenset(p) for p in by_len}
    kept: List[Path] = []
    for q in by_len:
        tq = token_sets[q]
        if not any(len(p) < len(q) and token_sets[p] <= tq and subsumes(p, q) for p in kept):
            kept.append(q)
    return frozenset(kept)


def is_minimal(paths: Iterable[Path]) -> bool:
    ps = list(paths)
    return not any(subsumes(p, q, strict=True) for p in ps for q in ps)


def _path_sort_key(p: Path):
    return (len(p), [(type(t).__name__, getattr(t, "field", ""), value_key(getattr(t, "value", 0))) for t in p])


@dataclass
class Explanation:
    verdict: Verdict
    paths: frozenset
    unfold_n: int
    stats: dict = field(default_factory=dict)

    def sorted_paths(self) -> List[Path]:
        return sorted(self.paths, key=_path_sort_key)

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "unfold_n": self.unfold_n,
            "paths": [[token_to_json(t) for t in p] for p in self.sorted_paths()],
            "stats": dict(self.stats),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_json_dict(), **kw)

    @classmethod
    def from_json(cls, text: str) -> "Explanation":
        d = json.loads(text)
        paths = frozenset(tuple(token_from_json(t) for t in p) for p in d["paths"])
        return cls(Verdict(d["verdict"]), paths, d["unfold_n"], d.get("stats", {}))

    def to_text(self, with_stats: bool = False) -> str:
        lines = [f"verdict: {self.verdict.value.upper()} (unfold n = {self.unfold_n})"]
        if self.verdict is Verdict.UNSAFE:
            lines.append(f"{len(self.paths)} minimal explanation(s):" if self.stats.get("minimized", True)
                         else f"{len(self.paths)} explanation(s):")
            lines.extend(f"  {format_path(p)}" for p in self.sorted_paths())
        if with_stats:
            lines.append("stats:")
            lines.extend(f"  {k}: {v}" for k, v in self.stats.items())
        return "\n".join(lines)


def token_to_json(t: Token) -> dict:
    if isinstance(t, One):
        return {"kind": "one"}
    if isinstance(t, Zero):
        return {"kind": "zero"}
    kind = "test" if isinstance(t, Test) else "mod"
    return {"kind": kind, "field": t.field, "value": t.value}


def token_from_json(d: dict) -> Token:
    from .terms import ONE, ZERO

    kind = d["kind"]
    if kind == "one":
        return ONE
    if kind == "zero":
        return ZERO
    if kind == "test":
        return Test(d["field"], d["value"])
    if kind == "mod":
        return Mod(d["field"], d["value"])
    raise ValueError(f"unknown token kind {kind!r}")


def explain(
    problem: SafetyProblem,
    n: Optional[int] = None,
    order: Optional[FieldOrder] = None,
    *,
    minimized: bool = True,
) -> Explanation:
    """Normalize in . (1 + p.t)^n . out and keep the minimal failure paths."""
    t0 = time.perf_counter()
    if n is None:
        n = problem.unfold_n
    if n is None:
        n = default_unfold_bound(problem.topology, problem.domains)
    stats = NormalizeStats()
    nfs = normalize(build_program(problem, n), problem.domains, order, stats=stats)
    result = minimize(nfs) if minimized else nfs
    elapsed = time.perf_counter() - t0
    info = stats.as_dict()
    info.update(
        {
            "paths_before_minimization": len(nfs),
            "paths": len(result),
            "minimized": minimized,
            "elapsed": round(elapsed, 6),
        }
    )
    verdict = Verdict.SAFE if not result else Verdict.UNSAFE
    return Explanation(verdict, result, n, info)
