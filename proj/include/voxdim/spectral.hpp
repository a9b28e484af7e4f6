#pragma once

#include "voxdim/audio.hpp"

namespace voxdim {

inline constexpr double kIntensityFloorDb = -100.0;

struct Intensity {
    double db;
    /// Every frame hit the floor (silent input).
    bool at_floor;
};

/// Mean over 32 ms frames of 10*log10(mean square / (2e-5)^2), each frame
/// floored at -100 dB.
Intensity compute_intensity(const AudioBuffer& audio);

/// Mean fraction of sign changes per 25 ms frame; zero counts as positive.
double compute_zcr(const AudioBuffer& audio);

/// Mean over 25 ms frames of the lowest bin frequency at which cumulative
/// spectral energy reaches `fraction` of the frame total. Silent frames are
/// skipped; Errc::silent_audio if all are.
double compute_spectral_rolloff(const AudioBuffer& audio, double fraction = 0.5);

}  // namespace voxdim
