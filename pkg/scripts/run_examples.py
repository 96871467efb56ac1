"""Run the worked examples shipped in tests/fixtures and print each verdict."""

from __future__ import annotations

import time
from pathlib import Path

from netkat_safecheck.explain import explain
from netkat_safecheck.parser import parse_problem

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def main() -> int:
    for path in sorted(FIXTURES.glob("*.nk")):
        prob = parse_problem(path.read_text())
        t0 = time.perf_counter()
        r = explain(prob)
        dt = time.perf_counter() - t0
        print(f"== {path.name} ({dt * 1000:.1f} ms)")
        print(r.to_text())
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
