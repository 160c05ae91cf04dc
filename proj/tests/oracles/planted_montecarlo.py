#!/usr/bin/env python3
"""Monte-Carlo estimate of S20 and per-image accuracy on a planted dataset.

Row model (mirrors the stub scorer's documented distribution, drawn here with
numpy's generator instead of the engine's keyed hash):
  winner = true class with probability p, else uniform over the other classes
  draw C values ~ Exp(1) and sort them descending
  the largest gets + concentration * (0.25 + Exp(1)) and goes to the winner
  on a miss the true class takes the second largest value
  the remaining classes take the remaining values in ascending class order
  row = values / sum(values)

    python3 tests/oracles/planted_montecarlo.py > tests/fixtures/planted_expected.json
"""
import json
import sys

import numpy as np

SITES, CLASSES, IMAGES, P, CONCENTRATION = 500, 4, 20, 0.6, 0.5
REPLICATES = 400


def simulate(rng):
    truth = np.arange(SITES) % CLASSES
    hit = rng.random((SITES, IMAGES)) < P
    other = rng.integers(0, CLASSES - 1, (SITES, IMAGES))
    # map 0..C-2 onto the classes that are not the true class
    other = other + (other >= truth[:, None])
    winner = np.where(hit, truth[:, None], other)
    values = -np.sort(-rng.exponential(1.0, (SITES, IMAGES, CLASSES)), axis=2)
    values[:, :, 0] += CONCENTRATION * (0.25 + rng.exponential(1.0, (SITES, IMAGES)))

    cls = np.arange(CLASSES)[None, None, :]
    w = winner[:, :, None]
    t = np.broadcast_to(truth[:, None, None], w.shape)
    is_w = cls == w
    is_t = (cls == t) & ~is_w
    rest = ~is_w & ~is_t
    # slot of each remaining class: after winner (and true class on a miss)
    base = np.where(hit[:, :, None], 1, 2)
    before = np.cumsum(rest, axis=2) - rest
    slot = np.where(is_w, 0, np.where(is_t, 1, base + before))
    rows = np.take_along_axis(values, slot, axis=2)
    rows = rows / rows.sum(axis=2, keepdims=True)

    s20 = rows.sum(axis=1).argmax(axis=1)
    per_image = rows.argmax(axis=2)
    return (s20 == truth).mean(), (per_image == truth[:, None]).mean()


def main():
    rng = np.random.default_rng(12345)
    s20, per = zip(*(simulate(rng) for _ in range(REPLICATES)))
    s20, per = np.array(s20), np.array(per)
    out = {
        "sites": SITES, "classes": CLASSES, "images": IMAGES, "p": P,
        "concentration": CONCENTRATION, "replicates": REPLICATES,
        "s20_mean": float(s20.mean()), "s20_min": float(s20.min()),
        "s20_fraction_below_0_99": float((s20 < 0.99).mean()),
        "per_image_mean": float(per.mean()), "per_image_std": float(per.std()),
        "per_image_min": float(per.min()), "per_image_max": float(per.max()),
    }
    json.dump(out, sys.stdout, indent=1)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
