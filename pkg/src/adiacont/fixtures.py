"""Regression fixtures: the first verified run is the reference forever after.

Fixture files are ordinary output CSVs copied aside; comparison is elementwise
with a numeric tolerance (default 1e-9), guarding against bit drift in any
derived value.
"""

from __future__ import annotations

import shutil
from pathlib import Path

from .errors import AdiacontError


class FixtureMismatch(AdiacontError):
    exit_code = 4


def _cells(path: Path) -> list[list[str]]:
    rows = []
    for line in path.read_text().splitlines():
        if not line or line.startswith("#"):
            continue
        rows.append(line.split(","))
    return rows


def write_fixture(current: Path, target: Path) -> None:
    target.parent.mkdir(parents=True, exist_ok=True)
    shutil.copyfile(current, target)


def compare_fixture(current: Path, reference: Path, tolerance: float = 1e-9) -> None:
    """Raise FixtureMismatch describing the worst offenders, if any."""
    if not reference.exists():
        raise FixtureMismatch(f"fixture missing: {reference}")
    got = _cells(current)
    want = _cells(reference)
    if len(got) != len(want):
        raise FixtureMismatch(
            f"{current.name}: row count {len(got)} != fixture {len(want)}"
        )
    offenders: list[tuple[float, str]] = []
    for i, (grow, wrow) in enumerate(zip(got, want)):
        if len(grow) != len(wrow):
            raise FixtureMismatch(f"{current.name} row {i}: column count differs")
        for j, (g, w) in enumerate(zip(grow, wrow)):
            try:
                gn, wn = float(g), float(w)
            except ValueError:
                if g != w:
                    offenders.append((float("inf"), f"row {i} col {j}: {g!r} != {w!r}"))
                continue
            diff = abs(gn - wn)
            if diff > tolerance:
                offenders.append((diff, f"row {i} col {j}: {gn!r} vs {wn!r} (diff {diff:.3e})"))
    if offenders:
        offenders.sort(reverse=True)
        worst = "; ".join(msg for _, msg in offenders[:3])
        raise FixtureMismatch(
            f"{current.name}: {len(offenders)} cells beyond {tolerance:g}: {worst}"
        )
