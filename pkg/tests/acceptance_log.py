"""Shared pass/fail record for the acceptance suite, printed at session end."""

from __future__ import annotations

TITLES = {
    1: "oracle equivalence on small instances",
    2: "witness integrity",
    3: "depth chain at n=300",
    4: "generic envelope at n=1000",
    5: "CMJ constants and height ratio",
    6: "weight identities",
    7: "forest and subgroup dominance",
    8: "PKC end to end",
    9: "determinism",
}

RESULTS: dict[int, list[tuple[bool, str]]] = {}


def record(criterion: int, ok: bool, detail: str) -> bool:
    RESULTS.setdefault(criterion, []).append((bool(ok), detail))
    return ok


def lines() -> list[str]:
    out = []
    for c in sorted(RESULTS):
        parts = RESULTS[c]
        ok = all(p for p, _ in parts)
        detail = "; ".join(d for _, d in parts)
        out.append(f"criterion {c} [{'PASS' if ok else 'FAIL'}] {TITLES[c]}: {detail}")
    return out
