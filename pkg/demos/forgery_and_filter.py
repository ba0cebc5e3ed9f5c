"""
Forging fake stereo from a mono clip
====================================

Two forgeries: channel copy, and the Haas-style forgery where one channel
is a one-pole high-pass copy of the other. Prints the filter's response
and shows why a copy fake is trivial to spot.
"""

import numpy as np

from fakestereo import (FakedSide, FilterSpec, MonoClip, fake_stereo_copy,
                        fake_stereo_haas, high_pass_filter, is_channel_copy)

rate = 44100
rng = np.random.default_rng(0)

# a second of mono: a low tone plus some noise
t = np.arange(rate) / rate
x = MonoClip(0.5 * np.sin(2 * np.pi * 110 * t) + 0.1 * rng.standard_normal(rate), rate)

# the high-pass filter at 200 Hz
spec = FilterSpec.for_rate(200.0, rate)
print(f"alpha at 200 Hz / {rate} Hz: {spec.alpha:.6f}")

# its magnitude response, read off the FFT of the impulse response
impulse = np.zeros(8192)
impulse[0] = 1.0
H = np.abs(np.fft.rfft(high_pass_filter(MonoClip(impulse, rate), spec).samples))
freqs = np.fft.rfftfreq(8192, 1 / rate)
for f in (0, 50, 100, 200, 400, 1000, 5000):
    k = int(np.argmin(np.abs(freqs - f)))
    print(f"  |H({freqs[k]:7.1f} Hz)| = {H[k]:.4f}")

# channel copy: both channels identical
copy = fake_stereo_copy(x)
print("copy fake detected by channel comparison:", is_channel_copy(copy))

# Haas forgery, right channel faked: the 110 Hz tone loses most of its energy
haas = fake_stereo_haas(x, spec, FakedSide.RIGHT)
print("haas fake detected by channel comparison:", is_channel_copy(haas))
print(f"left rms {np.sqrt(np.mean(haas.left ** 2)):.4f}, "
      f"right rms {np.sqrt(np.mean(haas.right ** 2)):.4f}")

# a higher cut-off removes more of the low band
for cut in (200, 400, 1000):
    y = fake_stereo_haas(x, FilterSpec.for_rate(cut, rate))
    print(f"cut-off {cut:4d} Hz: right/left energy ratio "
          f"{np.sum(y.right ** 2) / np.sum(y.left ** 2):.3f}")
