"""Frame-level low-level descriptors: loudness, alpha ratio, pitch, jitter.

All descriptors share one frame grid (25 ms Hann window, 10 ms hop at
16 kHz) so that frames line up 1:1 with 10 ms aligner posteriors.

Conventions fixed here:

* loudness   -- 26 triangular mel-spaced bands (20-8000 Hz) of the windowed
  power spectrum, summed after 0.3 power-law compression. Scaling the
  waveform by c scales loudness by exactly c**0.6.
* alpha ratio -- 10*log10 of low-band (50-1000 Hz) over high-band
  (1-5 kHz) power, each floored by eps=1e-10; silence gives exactly 0 dB.
* pitch      -- normalized autocorrelation over lags for 55-500 Hz,
  voiced when the peak exceeds 0.45, lag refined by parabolic
  interpolation. Among near-tied peaks the shortest lag wins, which keeps
  pure tones off their octave-down alias.
* jitter     -- cycle-to-cycle period variability from waveform peaks
  tracked at the detected period inside a 3-window neighborhood;
  unvoiced frames and frames with fewer than 3 periods report 0.
"""

from dataclasses import dataclass

import numpy as np

from .audio_io import SAMPLE_RATE, AudioBuffer
from .errors import TooShortError, ValidationError

WINDOW_MS = 25
HOP_MS = 10
HOP_S = HOP_MS / 1000.0
WINDOW_SAMPLES = SAMPLE_RATE * WINDOW_MS // 1000  # 400
HOP_SAMPLES = SAMPLE_RATE * HOP_MS // 1000  # 160

N_FFT = 512
N_MEL_BANDS = 26
MEL_FMIN = 20.0
MEL_FMAX = 8000.0
ALPHA_EPS = 1e-10

F0_MIN_HZ = 55.0
F0_MAX_HZ = 500.0
VOICING_THRESHOLD = 0.45
# Near-tied autocorrelation peaks within this fraction of the best count as
# equivalent; the shortest such lag is taken.
PEAK_TIE_RATIO = 0.95

_LAG_MIN = int(np.floor(SAMPLE_RATE / F0_MAX_HZ))  # 32
_LAG_MAX = int(np.ceil(SAMPLE_RATE / F0_MIN_HZ))  # 291


@dataclass
class FrameGrid:
    """Frame layout of a signal: floor((len_ms - 25) / 10) + 1 frames."""

    num_frames: int

    @classmethod
    def for_signal(cls, n_samples: int) -> "FrameGrid":
        if n_samples < WINDOW_SAMPLES:
            raise TooShortError(
                f"signal of {n_samples} samples is shorter than one "
                f"{WINDOW_SAMPLES}-sample window"
            )
        return cls((n_samples - WINDOW_SAMPLES) // HOP_SAMPLES + 1)

    def frame_start(self, k: int) -> int:
        return k * HOP_SAMPLES


@dataclass
class FrameFeatures:
    """Per-frame descriptor matrix plus voicing flags.

    Unvoiced frames carry exact zeros for f0_semitones and jitter_local so
    downstream pooling needs no missing-value handling.
    """

    loudness: np.ndarray
    alpha_ratio_db: np.ndarray
    f0_semitones: np.ndarray
    jitter_local: np.ndarray
    voiced: np.ndarray

    def __post_init__(self):
        n = len(self.loudness)
        for name in ("alpha_ratio_db", "f0_semitones", "jitter_local", "voiced"):
            if len(getattr(self, name)) != n:
                raise ValidationError(f"{name} length differs from loudness length {n}")
        if n == 0:
            raise ValidationError("at least one frame required")
        unvoiced = ~self.voiced
        if np.any(self.f0_semitones[unvoiced] != 0.0) or np.any(self.jitter_local[unvoiced] != 0.0):
            raise ValidationError("f0 and jitter must be exactly 0 on unvoiced frames")
        for name in ("loudness", "alpha_ratio_db", "f0_semitones", "jitter_local"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValidationError(f"{name} contains non-finite values")

    @property
    def num_frames(self) -> int:
        return len(self.loudness)

    def to_matrix(self) -> np.ndarray:
        """5-column layout: loudness, alpha_db, f0_st, jitter, voiced as 0/1."""
        return np.column_stack(
            [self.loudness, self.alpha_ratio_db, self.f0_semitones,
             self.jitter_local, self.voiced.astype(np.float64)]
        )

    @classmethod
    def from_matrix(cls, mat: np.ndarray) -> "FrameFeatures":
        mat = np.asarray(mat, dtype=np.float64)
        if mat.ndim != 2 or mat.shape[1] != 5:
            raise ValidationError(f"frame-feature matrix must be T x 5, got {mat.shape}")
        return cls(mat[:, 0].copy(), mat[:, 1].copy(), mat[:, 2].copy(),
                   mat[:, 3].copy(), mat[:, 4] != 0.0)


def _frames(x: np.ndarray, grid: FrameGrid) -> np.ndarray:
    view = np.lib.stride_tricks.sliding_window_view(x, WINDOW_SAMPLES)
    return view[:: HOP_SAMPLES][: grid.num_frames]


_hann = np.hanning(WINDOW_SAMPLES)
_fft_freqs = np.fft.rfftfreq(N_FFT, d=1.0 / SAMPLE_RATE)


def _power_spectra(buf: AudioBuffer, grid: FrameGrid) -> np.ndarray:
    frames = _frames(buf.samples, grid) * _hann
    spec = np.fft.rfft(frames, N_FFT, axis=1)
    return spec.real**2 + spec.imag**2


def _mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f) / 700.0)


def _build_mel_filterbank() -> np.ndarray:
    edges_mel = np.linspace(_mel(MEL_FMIN), _mel(MEL_FMAX), N_MEL_BANDS + 2)
    edges_hz = 700.0 * (10.0 ** (edges_mel / 2595.0) - 1.0)
    fb = np.zeros((N_MEL_BANDS, _fft_freqs.size))
    for b in range(N_MEL_BANDS):
        lo, mid, hi = edges_hz[b], edges_hz[b + 1], edges_hz[b + 2]
        up = (_fft_freqs - lo) / (mid - lo)
        down = (hi - _fft_freqs) / (hi - mid)
        fb[b] = np.clip(np.minimum(up, down), 0.0, 1.0)
    return fb


_mel_fb = _build_mel_filterbank()
_low_band = (_fft_freqs >= 50.0) & (_fft_freqs <= 1000.0)
_high_band = (_fft_freqs > 1000.0) & (_fft_freqs <= 5000.0)


def compute_loudness(buf: AudioBuffer, grid: FrameGrid) -> np.ndarray:
    power = _power_spectra(buf, grid)
    band_power = power @ _mel_fb.T
    return (band_power**0.3).sum(axis=1)


def compute_alpha_ratio(buf: AudioBuffer, grid: FrameGrid) -> np.ndarray:
    power = _power_spectra(buf, grid)
    low = power[:, _low_band].sum(axis=1)
    high = power[:, _high_band].sum(axis=1)
    return 10.0 * np.log10((low + ALPHA_EPS) / (high + ALPHA_EPS))


def hz_to_semitones(f0_hz):
    """Semitones above 27.5 Hz: 12 * log2(f / 27.5). Requires f > 0."""
    f0_hz = np.asarray(f0_hz, dtype=np.float64)
    if np.any(f0_hz <= 0.0):
        raise ValueError("hz_to_semitones requires strictly positive frequencies")
    out = 12.0 * np.log2(f0_hz / 27.5)
    return float(out) if out.ndim == 0 else out


def estimate_f0(buf: AudioBuffer, grid: FrameGrid) -> tuple[np.ndarray, np.ndarray]:
    """Per-frame (f0_hz, voiced). Unvoiced frames report f0_hz = 0."""
    frames = _frames(buf.samples, grid)
    centered = frames - frames.mean(axis=1, keepdims=True)

    n_corr = 1024  # >= 2 * window, keeps the circular autocorrelation linear
    spec = np.fft.rfft(centered, n_corr, axis=1)
    autocorr = np.fft.irfft(spec.real**2 + spec.imag**2, n_corr, axis=1)

    sq = centered**2
    cum = np.concatenate([np.zeros((len(frames), 1)), np.cumsum(sq, axis=1)], axis=1)
    total = cum[:, -1]

    lags = np.arange(_LAG_MIN - 1, _LAG_MAX + 2)
    head = cum[:, WINDOW_SAMPLES - lags]  # energy of x[0 : W-lag]
    tail = total[:, None] - cum[:, lags]  # energy of x[lag : W]
    denom = np.sqrt(head * tail)
    with np.errstate(invalid="ignore", divide="ignore"):
        ncc = np.where(denom > 1e-12, autocorr[:, lags] / np.maximum(denom, 1e-300), 0.0)

    f0 = np.zeros(grid.num_frames)
    voiced = np.zeros(grid.num_frames, dtype=bool)
    lo = 1  # index of _LAG_MIN within the padded lag axis
    hi = ncc.shape[1] - 1  # exclusive bound of the true lag range
    for k in range(grid.num_frames):
        row = ncc[k]
        search = row[lo:hi]
        best = float(search.max())
        if best <= VOICING_THRESHOLD or total[k] <= 1e-18:
            continue
        is_peak = (search >= np.roll(row, -1)[lo:hi]) & (search > np.roll(row, 1)[lo:hi])
        tied = np.flatnonzero(is_peak & (search >= PEAK_TIE_RATIO * best))
        j = int(tied[0]) if tied.size else int(search.argmax())
        lag = lags[lo + j]
        y0, y1, y2 = row[lo + j - 1], row[lo + j], row[lo + j + 1]
        den = y0 - 2.0 * y1 + y2
        delta = 0.5 * (y0 - y2) / den if abs(den) > 1e-12 else 0.0
        delta = float(np.clip(delta, -0.5, 0.5))
        f0[k] = SAMPLE_RATE / (lag + delta)
        voiced[k] = True
    return f0, voiced


def _parabolic_peak(y: np.ndarray, p: int) -> float:
    if p <= 0 or p >= len(y) - 1:
        return float(p)
    den = y[p - 1] - 2.0 * y[p] + y[p + 1]
    if abs(den) < 1e-300:
        return float(p)
    return p + float(np.clip(0.5 * (y[p - 1] - y[p + 1]) / den, -0.5, 0.5))


def _is_local_max(seg: np.ndarray, p: int) -> bool:
    return 0 < p < len(seg) - 1 and seg[p] >= seg[p - 1] and seg[p] >= seg[p + 1]


def _track_peaks(seg: np.ndarray, period: float, anchor: int, min_height: float) -> list[int]:
    """Integer positions of waveform peaks spaced ~period around the anchor.

    A candidate must be an interior local maximum; an argmax sitting on the
    edge of a clipped search window is a cut-off cycle, not a peak.
    """
    positions = [anchor]
    for direction in (1, -1):
        prev = anchor
        while True:
            if direction == 1:
                a = int(np.ceil(prev + 0.75 * period))
                b = int(np.floor(prev + 1.25 * period))
            else:
                a = int(np.ceil(prev - 1.25 * period))
                b = int(np.floor(prev - 0.75 * period))
            a = max(a, 0)
            b = min(b, len(seg) - 1)
            if a > b:
                break
            p = a + int(seg[a : b + 1].argmax())
            if seg[p] < min_height or not _is_local_max(seg, p):
                break
            positions.append(p)
            prev = p
    return sorted(positions)


def compute_jitter(
    buf: AudioBuffer, grid: FrameGrid, f0_hz: np.ndarray, voiced: np.ndarray
) -> np.ndarray:
    """Mean absolute consecutive-period difference over mean period, per voiced
    frame, measured on sub-sample-refined waveform peaks."""
    x = buf.samples
    jitter = np.zeros(grid.num_frames)
    for k in range(grid.num_frames):
        if not voiced[k]:
            continue
        period = SAMPLE_RATE / f0_hz[k]
        start = grid.frame_start(k)
        seg = x[max(0, start - WINDOW_SAMPLES) : min(len(x), start + 2 * WINDOW_SAMPLES)]
        anchor = int(seg.argmax())
        if not _is_local_max(seg, anchor):
            interior = np.flatnonzero(
                (seg[1:-1] >= seg[:-2]) & (seg[1:-1] >= seg[2:])
            )
            if interior.size == 0:
                continue
            anchor = 1 + int(interior[seg[1 + interior].argmax()])
        if seg[anchor] <= 0.0:
            continue
        ints = _track_peaks(seg, period, anchor, 0.3 * seg[anchor])
        refined = np.array([_parabolic_peak(seg, p) for p in ints])
        periods = np.diff(refined)
        if len(periods) < 3:
            continue
        jitter[k] = min(1.0, float(np.abs(np.diff(periods)).mean() / periods.mean()))
    return jitter


def extract_frame_features(buf: AudioBuffer) -> FrameFeatures:
    """All four descriptors plus voicing on the shared frame grid."""
    grid = FrameGrid.for_signal(len(buf.samples))
    loudness = compute_loudness(buf, grid)
    alpha = compute_alpha_ratio(buf, grid)
    f0_hz, voiced = estimate_f0(buf, grid)
    jitter = compute_jitter(buf, grid, f0_hz, voiced)
    semis = np.zeros(grid.num_frames)
    if voiced.any():
        semis[voiced] = hz_to_semitones(f0_hz[voiced])
    return FrameFeatures(loudness, alpha, semis, jitter, voiced)
