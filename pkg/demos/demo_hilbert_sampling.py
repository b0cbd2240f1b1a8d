"""Show the Hilbert visit order over a patch and the two sampling modes.

Run:  python demos/demo_hilbert_sampling.py
"""

import numpy as np

from pimc import hilbert_order, sample_pixels


def render(ps, marks, title):
    print(title)
    grid = [["."] * ps for _ in range(ps)]
    for i, (r, c) in enumerate(marks):
        grid[r][c] = str(i % 10)
    for row in grid:
        print(" ".join(row))
    print()


def main():
    ps = 8
    curve = hilbert_order(ps)
    print(f"hilbert curve over a {ps}x{ps} patch: {len(curve)} cells, "
          f"starts {curve[:4]}")
    steps = [abs(x0 - x1) + abs(y0 - y1) for (x0, y0), (x1, y1) in zip(curve, curve[1:])]
    print("every consecutive step is one grid unit:", set(steps) == {1})

    order = np.full((ps, ps), -1)
    for i, (x, y) in enumerate(curve):
        order[y, x] = i
    print("visit order (row = y):")
    for row in order:
        print(" ".join(f"{v:2d}" for v in row))
    print()

    ssl_pixels = sample_pixels(ps, "hilbert", 8)
    render(ps, ssl_pixels, "8 pretraining pixels (hilbert stride):")

    eval_pixels = sample_pixels(ps, "random", 12, seed=3, exclude=set(ssl_pixels))
    render(ps, eval_pixels, "12 evaluation pixels (random, disjoint from the 8):")
    assert not (set(eval_pixels) & set(ssl_pixels))


if __name__ == "__main__":
    main()
