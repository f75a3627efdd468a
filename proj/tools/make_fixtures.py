#!/usr/bin/env python3
"""Regenerate the occupancy-grid fixtures and scenario files under tests/fixtures."""

import argparse
from pathlib import Path

import numpy as np
from PIL import Image

RES = 0.5


class Canvas:
    def __init__(self, width_m, height_m, res=RES):
        self.res = res
        self.free = np.ones((int(round(height_m / res)), int(round(width_m / res))), dtype=bool)
        self.border()

    def box(self, x0, y0, x1, y1):
        # World rectangle in metres, y up.
        h = self.free.shape[0]
        i0, i1 = int(round(x0 / self.res)), int(round(x1 / self.res))
        j0, j1 = int(round(y0 / self.res)), int(round(y1 / self.res))
        self.free[h - j1:h - j0, i0:i1] = False

    def border(self, t=1.0):
        w = self.free.shape[1] * self.res
        h = self.free.shape[0] * self.res
        self.box(0, 0, w, t)
        self.box(0, h - t, w, h)
        self.box(0, 0, t, h)
        self.box(w - t, 0, w, h)

    def save(self, path):
        Image.fromarray(np.where(self.free, 255, 0).astype(np.uint8), mode="L").save(path)


def scenario(path, **kv):
    lines = [f"{k} = {v}" for k, v in kv.items()]
    path.write_text("\n".join(lines) + "\n")


def build(out):
    out.mkdir(parents=True, exist_ok=True)
    common = dict(resolution=RES, origin_x=0.0, origin_y=0.0, seed=1)

    c = Canvas(90, 20)
    c.save(out / "corridor.pgm")
    scenario(out / "corridor.scn", id="corridor", map="corridor.pgm", **common,
             start_x=5, start_y=10, start_theta=0, goal_x=70, goal_y=10, goal_theta=0)

    c = Canvas(110, 40)
    for k, x in enumerate(range(25, 100, 25)):
        if k % 2 == 0:
            c.box(x, 0, x + 2, 24)
        else:
            c.box(x, 16, x + 2, 40)
    c.save(out / "slalom.pgm")
    scenario(out / "slalom.scn", id="slalom", map="slalom.pgm", **common,
             start_x=6, start_y=20, start_theta=0, goal_x=102, goal_y=20)

    c = Canvas(100, 100)
    for bx in (14, 56):
        for by in (14, 56):
            c.box(bx, by, bx + 30, by + 30)
    c.box(44, 47, 47, 53)
    c.box(74, 47, 77, 53)
    c.box(20, 44.5, 24, 46)
    c.save(out / "street.pgm")
    scenario(out / "street.scn", id="street", map="street.pgm", **common,
             start_x=7, start_y=7, start_theta=0, goal_x=93, goal_y=93)

    c = Canvas(80, 80)
    for x0, y0 in ((20, 25), (45, 50), (30, 60), (55, 20)):
        c.box(x0, y0, x0 + 4, y0 + 4)
    c.save(out / "open.pgm")
    scenario(out / "open.scn", id="open", map="open.pgm", **common,
             start_x=8, start_y=8, start_theta=0.785398163397448, goal_x=70, goal_y=70)

    c = Canvas(80, 60)
    c.box(38, 0, 42, 38)
    c.save(out / "wall.pgm")
    scenario(out / "wall.scn", id="wall", map="wall.pgm", **common,
             start_x=10, start_y=10, start_theta=0, goal_x=70, goal_y=10)

    c = Canvas(60, 40)
    c.box(40, 10, 56, 12)
    c.box(40, 28, 56, 30)
    c.box(40, 10, 42, 30)
    c.box(54, 10, 56, 30)
    c.save(out / "walled.pgm")
    scenario(out / "walled.scn", id="walled", map="walled.pgm", **common,
             start_x=8, start_y=20, start_theta=0, goal_x=48, goal_y=20, max_expansions=300)

    c = Canvas(50, 50)
    c.box(0, 15, 50, 20)
    c.box(0, 30, 50, 35)
    c.save(out / "grid100.pgm")
    count = int((~c.free).sum())
    (out / "grid100.count").write_text(f"{count}\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "tests" / "fixtures")
    build(ap.parse_args().out)


if __name__ == "__main__":
    main()
