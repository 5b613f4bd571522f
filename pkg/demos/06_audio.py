"""Cut periodic segments from a recording and fit one of them."""

import tempfile
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from padua import PaduaConfig, extract_periodic_segments, fit, noisy_oracle, segment_to_function, wav_load
from padua.bench import sup_error

# a synthetic two-tone recording stands in for a real file
rate = 44100
t = np.arange(rate) / rate
tone = 0.4 * np.sin(2 * np.pi * 60 * t) + 0.2 * np.sin(2 * np.pi * 180 * t)
path = Path(tempfile.mkdtemp()) / "tone.wav"
wavfile.write(path, rate, (tone * 32767).astype(np.int16))

samples, rate = wav_load(path)
segs = extract_periodic_segments(samples, sample_rate=rate)
print(f"{len(segs)} segments; first at sample {segs[0].source_offset}, length {len(segs[0])}")

g = segment_to_function(segs[0])
res = fit(noisy_oracle(g, 0.01), PaduaConfig(n=20_000, nu=2.0, sigma=0.01))
print(f"N={res.N}  sup error {sup_error(g, res, 0):.4f}  (signal peak {np.abs(segs[0].samples).max():.3f})")
