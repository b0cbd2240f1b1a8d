"""Walk one pixel from reflectance series to its recurrence-plot image.

Run:  python demos/demo_recurrence_plots.py
Writes demo_out/rp_demo.svg with the three index channels of one pixel.
"""

import os

import numpy as np

from pimc import recurrence_plot, stack_channels, synth_cube
from pimc.patches import build_series
from pimc.svg import line_chart

OUT = os.path.join(os.path.dirname(__file__), "demo_out")


def main():
    os.makedirs(OUT, exist_ok=True)
    cube, labels = synth_cube(seed=42, classes=4, t=32, h=32, w=32)
    pixel = (10, 20)
    print(f"pixel {pixel} carries class {labels[pixel]}")

    sset = build_series(cube, [pixel])
    series = sset.series[0]  # (3, 32): ndvi, evi, savi
    print("index ranges:", {n: (round(float(s.min()), 3), round(float(s.max()), 3))
                            for n, s in zip(("ndvi", "evi", "savi"), series)})

    with open(os.path.join(OUT, "rp_series.svg"), "w", encoding="utf-8") as fh:
        fh.write(line_chart(
            {"ndvi": series[0].tolist(), "evi": series[1].tolist(), "savi": series[2].tolist()},
            "vegetation-index trajectories of one pixel",
        ))

    rp = recurrence_plot(series[0])
    print(f"recurrence plot is {rp.shape[0]}x{rp.shape[1]}, symmetric:",
          bool(np.array_equal(rp, rp.T)), "zero diagonal:", bool(np.all(np.diag(rp) == 0)))

    img = stack_channels(series, pixel=pixel)
    print("stacked plot image:", img.data.shape, "value range",
          (float(img.data.min()), float(img.data.max())))

    # crude ASCII rendering of the ndvi channel
    glyphs = " .:-=+*#%@"
    step = max(1, rp.shape[0] // 16)
    for row in img.data[0][::step]:
        print("".join(glyphs[int(v * (len(glyphs) - 1))] for v in row[::step]))


if __name__ == "__main__":
    main()
