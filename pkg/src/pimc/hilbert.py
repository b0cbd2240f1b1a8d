"""Hilbert space-filling curve over a square grid.

The curve is generated by a recursive quadrant construction in its
canonical base orientation, for which the 2x2 curve visits
(0,0), (0,1), (1,1), (1,0). Coordinates are (x, y) = (column, row).
"""

from __future__ import annotations

from .errors import DomainError


def _curve(order: int) -> list[tuple[int, int]]:
    """Hilbert curve of side 2**order via quadrant recursion."""
    if order == 1:
        return [(0, 0), (0, 1), (1, 1), (1, 0)]
    prev = _curve(order - 1)
    half = 1 << (order - 1)
    out = []
    # lower-left quadrant: transpose (enter along x)
    out.extend((y, x) for x, y in prev)
    # upper-left quadrant: shift up
    out.extend((x, y + half) for x, y in prev)
    # upper-right quadrant: shift up and right
    out.extend((x + half, y + half) for x, y in prev)
    # lower-right quadrant: anti-transpose
    out.extend((half - 1 - y + half, half - 1 - x) for x, y in prev)
    return out


def hilbert_order(ps: int) -> list[tuple[int, int]]:
    """Visit order of all cells of a ps x ps patch along the Hilbert curve.

    For power-of-two ``ps`` this is the exact curve (a bijection whose
    consecutive cells are unit grid steps). Otherwise the next-lower-order
    curve of side 2**ceil(log2(ps)) is generated and cells outside the
    patch are dropped, preserving the visit order.
    """
    if ps < 2:
        raise DomainError(f"patch side must be at least 2, got {ps}")
    order = 1
    while (1 << order) < ps:
        order += 1
    pts = _curve(order)
    if (1 << order) == ps:
        return pts
    return [(x, y) for x, y in pts if x < ps and y < ps]
