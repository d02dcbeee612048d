"""
Mask post-processing and CTR measurement
========================================

Takes a noisy pair of organ masks, fills holes by closing, labels the
4-connected components, applies the selection rules (two largest blobs
for the lungs, the big central blob for the heart), and measures
MRD/MLD/ID from the mask extents.
"""

import numpy as np

from ctrkit import (
    BitMask,
    StructuringElement,
    close,
    connected_components,
    measure_ctr,
    select_heart_component,
    select_lung_components,
)

size = 128
ys, xs = np.mgrid[0:size, 0:size]


def ellipse(cx, cy, a, b):
    return (((xs - cx) / a) ** 2 + ((ys - cy) / b) ** 2 <= 1).astype(np.uint8)


rng = np.random.default_rng(1)

# lungs: two lobes, plus salt noise and some punched-out holes
lungs = ellipse(34, 64, 20, 38) | ellipse(94, 64, 20, 38)
lungs |= (rng.random((size, size)) < 0.002).astype(np.uint8)   # speckle
holes = rng.random((size, size)) < 0.08
lungs = np.where(holes, 0, lungs).astype(np.uint8)

heart = ellipse(64, 72, 26, 20)
heart = np.where(rng.random((size, size)) < 0.05, 0, heart).astype(np.uint8)

se = StructuringElement(3)
lung_mask = close(BitMask(lungs), se, iterations=2)
heart_mask = close(BitMask(heart), se, iterations=2)

lung_comps = connected_components(lung_mask)
print(f"lung components after closing: {len(lung_comps)}, "
      f"areas {[c.area for c in lung_comps[:4]]}...")
left, right = select_lung_components(lung_comps)
print(f"left lung centroid x = {left.centroid[0]:.1f}, "
      f"right lung centroid x = {right.centroid[0]:.1f}")

heart_comp = select_heart_component(
    connected_components(heart_mask), size, size, min_area_frac=0.01
)
print(f"heart component: area {heart_comp.area}, centroid {heart_comp.centroid}")

m = measure_ctr(heart_comp, left, right)
print(f"MRD = {m.mrd_len:.0f} px, MLD = {m.mld_len:.0f} px, ID = {m.id_len:.0f} px")
print(f"CTR = {m.ctr:.3f} -> {m.category} (detection {'positive' if m.detection else 'negative'})")
