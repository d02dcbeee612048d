"""
Histogram equalization
======================

Normalizes image contrast by remapping each intensity through the
cumulative intensity distribution. A dim, low-contrast phantom ends up
spanning the full 0-255 range; equal inputs keep equal outputs, and the
pixel ordering never changes.
"""

import numpy as np

from ctrkit import GrayImage, equalize_histogram

rng = np.random.default_rng(0)

# a murky image: everything packed into a narrow intensity band
murky = GrayImage(np.clip(rng.normal(90, 12, size=(64, 64)), 60, 120).astype(np.uint8))
bright = equalize_histogram(murky)

print("before: min/max =", murky.pixels.min(), murky.pixels.max())
print("after : min/max =", bright.pixels.min(), bright.pixels.max())

# the tiny worked example: [0, 0, 128, 255] -> [127, 127, 191, 255]
tiny = GrayImage(np.array([[0, 0], [128, 255]], dtype=np.uint8))
print("worked example:", equalize_histogram(tiny).pixels.ravel().tolist())

# a constant image has cumulative weight 1 at its only intensity: all white
flat = GrayImage(np.full((8, 8), 42, dtype=np.uint8))
print("constant image maps to:", set(equalize_histogram(flat).pixels.ravel().tolist()))

# ordering is preserved: sort pixels by input intensity, outputs never decrease
f = murky.pixels.ravel().astype(int)
g = bright.pixels.ravel().astype(int)
order = np.argsort(f, kind="stable")
print("order preserved:", bool((np.diff(g[order]) >= 0).all()))
