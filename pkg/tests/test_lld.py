"""Frame-level descriptor behaviour on analytically known signals."""

import numpy as np
import pytest

from pronassess import (
    AudioBuffer,
    FrameFeatures,
    FrameGrid,
    compute_alpha_ratio,
    compute_jitter,
    compute_loudness,
    estimate_f0,
    extract_frame_features,
    hz_to_semitones,
)
from pronassess.errors import TooShortError, ValidationError
from signals import SR, pulse_train, tone


class TestFrameGrid:
    def test_one_second_gives_98_frames(self):
        assert FrameGrid.for_signal(16000).num_frames == 98

    def test_count_formula_across_lengths(self):
        for n in range(400, 20000, 997):
            grid = FrameGrid.for_signal(n)
            len_ms = n / 16
            assert grid.num_frames == int((len_ms - 25) // 10) + 1

    def test_too_short(self):
        with pytest.raises(TooShortError):
            FrameGrid.for_signal(399)


class TestLoudness:
    def test_zero_signal(self):
        buf = AudioBuffer(np.zeros(16000))
        assert np.all(compute_loudness(buf, FrameGrid.for_signal(16000)) == 0.0)

    def test_power_law_homogeneity(self):
        rng = np.random.default_rng(3)
        x = rng.uniform(-0.5, 0.5, 8000)
        grid = FrameGrid.for_signal(8000)
        base = compute_loudness(AudioBuffer(x), grid)
        half = compute_loudness(AudioBuffer(0.5 * x), grid)
        np.testing.assert_allclose(half, base * 0.25**0.3, rtol=1e-9)

    def test_stationary_tone(self):
        loud = compute_loudness(tone(220), FrameGrid.for_signal(16000))
        interior = loud[2:-2]
        assert interior.std() / interior.mean() < 0.01


class TestAlphaRatio:
    def test_low_tone_positive(self):
        a = compute_alpha_ratio(tone(200), FrameGrid.for_signal(16000))
        assert np.all(a[2:-2] >= 20.0)

    def test_high_tone_negative(self):
        a = compute_alpha_ratio(tone(3000), FrameGrid.for_signal(16000))
        assert np.all(a[2:-2] <= -20.0)

    def test_zero_signal_is_exactly_zero(self):
        a = compute_alpha_ratio(AudioBuffer(np.zeros(16000)), FrameGrid.for_signal(16000))
        assert np.all(a == 0.0)


class TestF0:
    def test_220_tone(self):
        f0, voiced = estimate_f0(tone(220), FrameGrid.for_signal(16000))
        assert voiced[2:-2].all()
        assert abs(np.median(f0[voiced]) - 220.0) <= 2.0

    def test_white_noise_mostly_unvoiced(self):
        rng = np.random.default_rng(7)
        buf = AudioBuffer(rng.uniform(-0.5, 0.5, 16000))
        _, voiced = estimate_f0(buf, FrameGrid.for_signal(16000))
        assert (~voiced).mean() >= 0.9

    def test_silence_unvoiced(self):
        _, voiced = estimate_f0(AudioBuffer(np.zeros(16000)), FrameGrid.for_signal(16000))
        assert not voiced.any()


class TestSemitones:
    def test_reference_points(self):
        assert hz_to_semitones(27.5) == 0.0
        assert hz_to_semitones(55.0) == pytest.approx(12.0, abs=1e-12)
        assert hz_to_semitones(220.0) == pytest.approx(36.0, abs=1e-12)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            hz_to_semitones(0.0)
        with pytest.raises(ValueError):
            hz_to_semitones(-10.0)


class TestJitter:
    def test_pure_tone_negligible(self):
        buf = tone(220)
        grid = FrameGrid.for_signal(16000)
        f0, voiced = estimate_f0(buf, grid)
        jitter = compute_jitter(buf, grid, f0, voiced)
        assert np.all(jitter[voiced] <= 0.005)

    def test_injected_perturbation_recovered(self):
        # alternating +-2.5% period perturbation -> 5% consecutive-period jitter
        buf = pulse_train(1 / 150.0, 0.025, 16000)
        grid = FrameGrid.for_signal(16000)
        f0, voiced = estimate_f0(buf, grid)
        jitter = compute_jitter(buf, grid, f0, voiced)
        measured = np.median(jitter[voiced])
        assert abs(measured - 0.05) <= 0.2 * 0.05

    def test_unvoiced_frames_zero(self):
        buf = tone(220, seconds=0.5)
        grid = FrameGrid.for_signal(len(buf.samples))
        f0, voiced = estimate_f0(buf, grid)
        voiced = voiced.copy()
        voiced[::2] = False  # force some frames unvoiced
        jitter = compute_jitter(buf, grid, f0, voiced)
        assert np.all(jitter[~voiced] == 0.0)


class TestExtract:
    def test_tone_frame_count(self):
        ff = extract_frame_features(tone(220))
        assert ff.num_frames == 98

    def test_all_zero_signal(self):
        ff = extract_frame_features(AudioBuffer(np.zeros(16000)))
        assert np.all(ff.loudness == 0) and np.all(ff.alpha_ratio_db == 0)
        assert np.all(ff.f0_semitones == 0) and np.all(ff.jitter_local == 0)
        assert not ff.voiced.any()

    def test_silence_then_tone_single_transition(self):
        t = np.arange(8000) / SR
        x = np.concatenate([np.zeros(8000), 0.8 * np.sin(2 * np.pi * 220 * t)])
        ff = extract_frame_features(AudioBuffer(x))
        # ignore 2 frames on each side of the junction (~frame 50)
        junction = 8000 // 160
        flags = ff.voiced.astype(int)
        keep = np.ones(ff.num_frames, dtype=bool)
        keep[junction - 2 : junction + 3] = False
        transitions = np.abs(np.diff(flags[keep])).sum()
        assert transitions == 1
        assert not flags[: junction - 2].any()
        assert flags[junction + 3 :].all()

    def test_scale_invariance_of_shape_features(self):
        # energy in both alpha bands keeps the eps floor negligible
        t = np.arange(16000) / SR
        base = AudioBuffer(0.25 * np.sin(2 * np.pi * 200 * t) + 0.2 * np.sin(2 * np.pi * 3000 * t))
        ff1 = extract_frame_features(base)
        for c in (0.25, 2.0):
            ff2 = extract_frame_features(AudioBuffer(base.samples * c))
            assert np.array_equal(ff1.voiced, ff2.voiced)
            np.testing.assert_allclose(ff2.alpha_ratio_db, ff1.alpha_ratio_db, atol=1e-6)
            np.testing.assert_allclose(ff2.f0_semitones, ff1.f0_semitones, atol=1e-6)
            np.testing.assert_allclose(ff2.jitter_local, ff1.jitter_local, atol=1e-6)
            np.testing.assert_allclose(ff2.loudness, ff1.loudness * c**0.6, rtol=1e-9)

    def test_determinism(self):
        a = extract_frame_features(tone(173, seconds=0.4)).to_matrix()
        b = extract_frame_features(tone(173, seconds=0.4)).to_matrix()
        assert a.tobytes() == b.tobytes()

    def test_matrix_round_trip(self):
        ff = extract_frame_features(tone(220, seconds=0.3))
        back = FrameFeatures.from_matrix(ff.to_matrix())
        assert np.array_equal(back.to_matrix(), ff.to_matrix())

    def test_invariant_enforcement(self):
        with pytest.raises(ValidationError):
            FrameFeatures(
                loudness=np.zeros(2), alpha_ratio_db=np.zeros(2),
                f0_semitones=np.array([30.0, 0.0]), jitter_local=np.zeros(2),
                voiced=np.array([False, False]),
            )
