#!/usr/bin/env python3
"""Writes the bundled synthetic pen recordings into data/.

Each recording is {"boundary": 180, "strokes": [[[x, y], ...], ...]} with
points sampled densely along simple shapes plus a little hand jitter.
"""
import json
import math
import pathlib

import numpy as np

BOUNDARY = 180.0
OUT = pathlib.Path(__file__).resolve().parent.parent / "data"


def jitter(rng, pts, amount=0.4):
    pts = np.asarray(pts, dtype=float)
    return pts + rng.normal(0.0, amount, pts.shape)


def polyline(corners, step=2.0):
    out = []
    for a, b in zip(corners[:-1], corners[1:]):
        a, b = np.asarray(a, float), np.asarray(b, float)
        n = max(1, int(np.linalg.norm(b - a) / step))
        out.extend(a + (b - a) * t for t in np.linspace(0.0, 1.0, n, endpoint=False))
    out.append(np.asarray(corners[-1], float))
    return np.array(out)


def boxes(rng):
    strokes = []
    for cx, cy, s in [(40, 40, 36), (100, 35, 28), (145, 60, 30), (50, 110, 30), (110, 105, 40), (150, 145, 24)]:
        h = s / 2
        c = [(cx - h, cy - h), (cx + h, cy - h), (cx + h, cy + h), (cx - h, cy + h), (cx - h, cy - h + 2)]
        strokes.append(jitter(rng, polyline(c)))
    return strokes


def curles(rng):
    strokes = []
    for cx, cy in [(50, 50), (125, 55), (60, 125), (130, 130)]:
        t = np.linspace(0.0, 4.0 * math.pi, 140)
        r = 4.0 + 3.2 * t
        strokes.append(jitter(rng, np.c_[cx + r * np.cos(t), cy + r * np.sin(t)]))
    return strokes


def spikes(rng):
    strokes = []
    for row, y in enumerate([45, 95, 145]):
        corners = [(20 + 14 * i, y + (-22 if i % 2 else 12) + 3 * row) for i in range(11)]
        strokes.append(jitter(rng, polyline(corners)))
    return strokes


def circles(rng):
    strokes = []
    for cx, cy, r in [(45, 45, 25), (120, 50, 30), (60, 125, 30), (135, 130, 22), (95, 90, 12)]:
        t = np.linspace(0.0, 2.0 * math.pi, max(24, int(r * 3)))
        strokes.append(jitter(rng, np.c_[cx + r * np.cos(t), cy + r * np.sin(t)]))
    return strokes


def main():
    OUT.mkdir(exist_ok=True)
    for seed, (name, make) in enumerate(
        [("boxes", boxes), ("curles", curles), ("spikes", spikes), ("circles", circles)]
    ):
        rng = np.random.default_rng(1000 + seed)
        strokes = [np.clip(s, 1.0, BOUNDARY - 1.0).round(3).tolist() for s in make(rng)]
        doc = {"boundary": BOUNDARY, "strokes": strokes}
        (OUT / f"{name}.json").write_text(json.dumps(doc, separators=(",", ":")) + "\n")


if __name__ == "__main__":
    main()
