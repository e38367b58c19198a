"""Winding numbers of sampled circle-valued loops."""
from __future__ import annotations

import numpy as np

from .._config import get_tol
from ..errors import LiftFailure

ROUNDING_RESIDUE = 0.01
# midpoint refinement must reproduce each step increment to this accuracy
_REFINE_TOL = 1e-6


def _check_unit(values, tol):
    dev = np.abs(np.abs(values) - 1.0)
    if values.size and dev.max() > tol:
        v = int(np.argmax(dev))
        raise LiftFailure(f"loop value at sample {v} is off the unit circle by {dev[v]:.3g}")


def principal_increments(values: np.ndarray) -> np.ndarray:
    """Principal arguments of ``values[j+1] / values[j]`` around the closed loop."""
    values = np.asarray(values, dtype=complex)
    return np.angle(np.roll(values, -1) * np.conj(values))


def sample_loop(func, n_samples: int) -> np.ndarray:
    """Sample ``func`` at ``2 pi j / n`` and certify each step by midpoint refinement.

    A step whose true argument change reaches ``pi`` aliases to a smaller
    principal increment; the two half-steps then disagree with the direct
    step and :class:`LiftFailure` is raised.
    """
    n = int(n_samples)
    if n < 2:
        raise LiftFailure("need at least two samples")
    theta = 2 * np.pi * np.arange(n) / n
    vals = np.asarray(func(theta), dtype=complex).reshape(n)
    mids = np.asarray(func(theta + np.pi / n), dtype=complex).reshape(n)
    nxt = np.roll(vals, -1)
    direct = np.angle(nxt * np.conj(vals))
    halves = np.angle(mids * np.conj(vals)) + np.angle(nxt * np.conj(mids))
    bad = np.flatnonzero(np.abs(direct - halves) > _REFINE_TOL)
    if bad.size:
        raise LiftFailure(
            f"loop is undersampled at step {int(bad[0])}: the argument change there "
            f"is {halves[bad[0]]:.3f} rad, at least pi"
        )
    return vals


def winding_number(loop, n_samples: int | None = None, tol=None) -> int:
    """Degree of a closed loop on the unit circle.

    Parameters
    ----------
    loop : array_like or callable
        Ordered unit-complex samples, or a function of the angle, in which
        case ``n_samples`` equispaced samples are taken and refined once to
        detect undersampling.
    n_samples : int, optional
        Required when ``loop`` is callable.

    Raises
    ------
    LiftFailure
        Off-circle samples, an argument increment of ``pi`` or more, or a
        rounding residue of the increment sum above 0.01.
    """
    tol = get_tol(tol)
    if callable(loop):
        if n_samples is None:
            raise TypeError("n_samples is required for a callable loop")
        values = sample_loop(loop, n_samples)
    else:
        values = np.asarray(loop, dtype=complex).reshape(-1)
    if values.size == 0:
        raise LiftFailure("empty loop")
    _check_unit(values, tol)
    inc = principal_increments(values)
    big = np.flatnonzero(np.abs(inc) >= np.pi * (1 - 1e-12))
    if big.size:
        raise LiftFailure(f"argument increment of pi at step {int(big[0])}")
    total = inc.sum() / (2 * np.pi)
    k = int(np.rint(total))
    if abs(total - k) >= ROUNDING_RESIDUE:
        raise LiftFailure(f"increment sum {total:.4f} is not close to an integer")
    return k
