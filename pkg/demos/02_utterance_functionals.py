#!/usr/bin/env python3
"""Utterance-level functionals: pitch statistics, contour slopes, and
voicing-segment rhythm, plus the two symmetry laws they obey."""

import numpy as np

from pronassess import FrameFeatures, compute_functionals, pitch_slopes, segment_voicing
from pronassess.functionals import FUNCTIONAL_NAMES


def frame_features(voiced, semitones):
    voiced = np.asarray(voiced, dtype=bool)
    st = np.where(voiced, np.asarray(semitones, dtype=np.float64), 0.0)
    n = len(voiced)
    return FrameFeatures(np.ones(n), np.zeros(n), st, np.zeros(n), voiced)


# a contour that rises 2 st, falls 2 st, with a pause in the middle
voiced = [1] * 20 + [0] * 15 + [1] * 20
contour = list(30 + 0.1 * np.arange(20)) + [0] * 15 + list(34 - 0.1 * np.arange(20))
ff = frame_features(voiced, contour)

print("=== voicing segments (voiced?, start, end) ===")
for seg in segment_voicing(ff):
    print("  ", seg)

rising, falling = pitch_slopes(ff)
print("\n=== monotone contour pieces ===")
print(f"  rising slopes  {rising} st/s")
print(f"  falling slopes {falling} st/s")
print("  (0.1 st per 10 ms frame = 10 st/s)")

print("\n=== the 13 functionals ===")
uf = compute_functionals(ff)
for name, value in zip(FUNCTIONAL_NAMES, uf.to_vector()):
    print(f"  {name:22s} {value:10.4f}")

print("\n=== pitch-shift equivariance ===")
shifted = frame_features(voiced, np.asarray(contour) + 5.0)
a, b = uf.to_vector(), compute_functionals(shifted).to_vector()
print(f"  +5 st shift moves the mean by {b[0] - a[0]:+.4f} st "
      f"and the std by {b[1] - a[1]:+.1e}")

print("\n=== time reversal swaps rise and fall ===")
rev = frame_features(voiced[::-1], contour[::-1])
r2, f2 = pitch_slopes(rev)
print(f"  reversed rising  {r2} (was falling {falling})")
print(f"  reversed falling {f2} (was rising {rising})")
