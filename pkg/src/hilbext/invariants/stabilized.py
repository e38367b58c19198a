"""Corona invariants as stable values over an annulus tower."""
from __future__ import annotations

from ..bundle import DEFAULT_CORONA_EPS
from ..errors import Unstable
from .stiefel import stiefel_class


def level_invariants(ext, tower, eps: float = DEFAULT_CORONA_EPS) -> list:
    """``stiefel_class`` of the Busby field at every tower level."""
    from ..extension import busby_fields

    return [stiefel_class(D) for D in busby_fields(ext, tower, eps)]


def stabilized_invariant(ext, tower, eps: float = DEFAULT_CORONA_EPS):
    """The common invariant record of all tower levels.

    Raises
    ------
    Unstable
        If two levels disagree; the per-level records are reported.
    """
    records = level_invariants(ext, tower, eps)
    if any(r != records[0] for r in records):
        listing = ", ".join(f"level {t}: {list(r.windings)}" for t, r in enumerate(records))
        raise Unstable(f"invariants disagree across the tower ({listing})")
    return records[0]
