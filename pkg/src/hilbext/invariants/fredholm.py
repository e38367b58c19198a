"""Essential isometries on Hardy space and their index classes.

An operator is modelled as a Toeplitz operator whose symbol is given by
equispaced samples on the circle, plus a finite matrix acting on the first
basis vectors, plus a flag for an infinite-dimensional defect ``1 - F F*``.
The symbol is read as the trigonometric polynomial interpolating its samples,
so the operator is banded and finite sections are exact restrictions.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .._config import get_tol
from ..errors import NonStabilizing, ValidationError
from .stiefel import InvariantRecord
from .winding import winding_number

KERNEL_THRESHOLD = 1e-7
TRUNCATION_CAP = 512
# Fourier coefficients below this are treated as zero
_COEFF_FLOOR = 1e-13


@dataclass(frozen=True, eq=False)
class StructuredOperator:
    """Toeplitz symbol + finite-rank block + infinite-defect flag.

    ``symbol[j]`` is the symbol at angle ``2 pi j / n``.  ``perturbation`` is
    a ``d x d`` matrix added on ``span(e_0, .., e_{d-1})``.
    """

    symbol: np.ndarray
    perturbation: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    infinite_defect: bool = False

    def __post_init__(self):
        sym = np.array(self.symbol, dtype=complex).reshape(-1)
        K = np.array(self.perturbation, dtype=complex)
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise ValidationError("perturbation must be a square matrix")
        if sym.size < 4:
            raise ValidationError("symbol needs at least four samples")
        sym.setflags(write=False)
        K.setflags(write=False)
        object.__setattr__(self, "symbol", sym)
        object.__setattr__(self, "perturbation", K)
        # also raises LiftFailure for off-circle or unliftable symbols
        winding_number(sym)

    @property
    def n_samples(self) -> int:
        return self.symbol.size

    @cached_property
    def coefficients(self) -> dict:
        """Nonzero Fourier coefficients ``{j: a_j}`` of the interpolating polynomial."""
        n = self.n_samples
        a = np.fft.fft(self.symbol) / n
        freqs = np.fft.fftfreq(n, 1.0 / n).astype(int)
        keep = np.abs(a) > _COEFF_FLOOR
        return {int(j): complex(c) for j, c in zip(freqs[keep], a[keep])}

    @cached_property
    def bandwidth(self) -> int:
        return max((abs(j) for j in self.coefficients), default=0)

    def unperturbed(self) -> StructuredOperator:
        return StructuredOperator(self.symbol, np.zeros((0, 0)), self.infinite_defect)


@dataclass(frozen=True)
class ExtensionClass:
    """``FiniteIndex(index)`` when ``index`` is an int, ``InfiniteDefect`` when ``None``."""

    index: int | None

    @property
    def is_infinite(self) -> bool:
        return self.index is None

    def to_record(self) -> InvariantRecord:
        if self.index is None:
            return InvariantRecord("infinite")
        return InvariantRecord("finite", (int(self.index),))

    def __str__(self):
        return "InfiniteDefect" if self.index is None else f"FiniteIndex({self.index})"


def FiniteIndex(k: int) -> ExtensionClass:
    return ExtensionClass(int(k))


InfiniteDefect = ExtensionClass(None)


def finite_section(op: StructuredOperator, N: int, adjoint: bool = False) -> np.ndarray:
    """The exact restriction of ``F`` (or ``F*``) to ``span(e_0 .. e_{N-1})``.

    Returned as an ``(N + b) x N`` matrix, ``b`` the bandwidth.
    """
    b = op.bandwidth
    K = op.perturbation
    d = K.shape[0]
    if d > N:
        raise ValidationError(f"truncation {N} is smaller than the perturbation block {d}")
    rows = N + b
    A = np.zeros((rows, N), dtype=complex)
    i = np.arange(rows)[:, None]
    j = np.arange(N)[None, :]
    for k, a in op.coefficients.items():
        # matrix entry (i, j) of T is a_{i-j}; of T* it is conj(a_{j-i})
        mask = (j - i == k) if adjoint else (i - j == k)
        A[mask] = np.conj(a) if adjoint else a
    A[:d, :d] += K.conj().T if adjoint else K
    return A


def _null_dim(A: np.ndarray) -> int:
    if A.shape[1] == 0:
        return 0
    sv = np.linalg.svd(A, compute_uv=False)
    return int(np.sum(sv < KERNEL_THRESHOLD))


def kernel_dimensions(op: StructuredOperator, cap: int = TRUNCATION_CAP) -> tuple:
    """``(dim ker F, dim ker F*, N)`` from growing finite sections.

    Sizes double from a start above the perturbation block and bandwidth
    until two consecutive sizes report the same pair.

    Raises
    ------
    NonStabilizing
        If no two consecutive sizes up to ``cap`` agree.
    """
    N = 16
    while N < 2 * (op.perturbation.shape[0] + op.bandwidth):
        N *= 2
    prev = None
    while N <= cap:
        dims = (_null_dim(finite_section(op, N)), _null_dim(finite_section(op, N, adjoint=True)))
        if dims == prev:
            return dims + (N,)
        prev = dims
        N *= 2
    raise NonStabilizing(f"kernel dimensions did not stabilize up to truncation {cap}")


def fredholm_index(F: StructuredOperator, cap: int = TRUNCATION_CAP) -> ExtensionClass:
    """Homotopy class of the essential isometry ``F``.

    Infinite defect gives :data:`InfiniteDefect`.  Otherwise the index is
    ``-winding(symbol)`` plus the change of ``dim ker - dim ker*`` that the
    finite-rank block causes on the stabilized sections.
    """
    if F.infinite_defect:
        return InfiniteDefect
    w = winding_number(F.symbol)
    kf, kfs, _ = kernel_dimensions(F, cap)
    if F.perturbation.size:
        kt, kts, _ = kernel_dimensions(F.unperturbed(), cap)
    else:
        kt, kts = kf, kfs
    correction = (kf - kfs) - (kt - kts)
    return FiniteIndex(-w + correction)


def compose(F: StructuredOperator, G: StructuredOperator) -> StructuredOperator:
    """The product ``F G`` in the same model.

    The symbol is the pointwise product.  ``F G - T(symbol)`` is supported on
    the top-left ``d x d`` block with ``d = max(d_G + b_F, d_F + b_G)``, and is
    computed exactly from finite sections.
    """
    if F.n_samples != G.n_samples:
        raise ValidationError("symbols are sampled on different grids")
    bF, bG = F.bandwidth, G.bandwidth
    if 2 * (bF + bG) >= F.n_samples:
        raise ValidationError("too few symbol samples to represent the product symbol")
    product = StructuredOperator(F.symbol * G.symbol)
    d = max(G.perturbation.shape[0] + bF, F.perturbation.shape[0] + bG)
    if d == 0:
        return StructuredOperator(product.symbol, np.zeros((0, 0)), F.infinite_defect or G.infinite_defect)
    inner = d + bG
    Fm = _square_section(F, inner)[:d, :inner]
    Gm = _square_section(G, inner)[:inner, :d]
    Tm = _square_section(product, d)
    block = Fm @ Gm - Tm
    block[np.abs(block) < get_tol()] = 0.0
    return StructuredOperator(product.symbol, block, F.infinite_defect or G.infinite_defect)


def _square_section(op: StructuredOperator, N: int) -> np.ndarray:
    N = max(N, op.perturbation.shape[0])
    return finite_section(op, N)[:N, :N]


def operator_equivalent(a: StructuredOperator, b: StructuredOperator) -> bool:
    return fredholm_index(a) == fredholm_index(b)
