#pragma once

#include "voxdim/audio.hpp"
#include "voxdim/pitch.hpp"

#include <vector>

namespace voxdim {

/// A located glottal cycle: time of the waveform peak and its amplitude.
struct PeriodMark {
    double time;
    double amplitude;
};

/// Period marks per contiguous voiced region, found by peak picking guided by
/// the pitch track.
std::vector<std::vector<PeriodMark>> find_period_marks(const AudioBuffer& audio, const PitchTrack& pitch);

struct Perturbation {
    double jitter_local;  // %
    double shimmer_local; // %
};

/// Local jitter and shimmer from consecutive period marks.
/// Errc::insufficient_periodicity when fewer than three periods are found.
Perturbation compute_jitter_shimmer(const AudioBuffer& audio, const PitchTrack& pitch);

/// Frame HNR in dB from a normalized autocorrelation peak value, clamped to [-20, 40].
double hnr_from_correlation(double r);

/// Mean frame HNR over voiced frames. Errc::no_voiced_frames if there are none.
double compute_hnr(const AudioBuffer& audio, const PitchTrack& pitch);

}  // namespace voxdim
