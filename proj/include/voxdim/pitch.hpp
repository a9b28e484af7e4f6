#pragma once

#include "voxdim/audio.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace voxdim {

struct PitchSettings {
    double floor = 75.0;    // Hz
    double ceiling = 600.0; // Hz
    double time_step = 0.01;
    double voicing_threshold = 0.45;
    /// Frames whose absolute peak is below this fraction of the global peak are unvoiced.
    double silence_threshold = 0.03;
    /// Bias towards shorter lags, per octave (suppresses octave-down errors).
    double octave_cost = 0.01;
};

/// Frame-wise F0 estimates. Frames are 3/floor seconds long; `times` holds
/// frame centres.
struct PitchTrack {
    std::vector<double> times;
    std::vector<std::optional<double>> f0;
    /// Interpolated peak of the normalized autocorrelation (0 for silent frames).
    std::vector<double> strength;
    double frame_period = 0.0;
    double frame_length = 0.0;
    double pitch_floor = 0.0;
    double pitch_ceiling = 0.0;

    std::size_t voiced_count() const;
    /// Mean F0 over voiced frames, nullopt if none.
    std::optional<double> mean_f0() const;
};

/// Normalized-autocorrelation pitch tracker (Hann window, window-autocorrelation
/// correction, parabolic peak refinement).
///
/// Throws Errc::invalid_argument for bad ranges, Errc::too_short if the audio
/// cannot hold one frame, and Errc::no_voiced_frames when no frame passes the
/// voicing test.
PitchTrack compute_pitch_track(const AudioBuffer& audio, const PitchSettings& settings = {});

/// Same analysis but returns the (possibly all-unvoiced) track instead of
/// throwing when nothing is voiced.
PitchTrack analyze_pitch(const AudioBuffer& audio, const PitchSettings& settings = {});

}  // namespace voxdim
