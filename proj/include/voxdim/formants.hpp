#pragma once

#include "voxdim/audio.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace voxdim {

struct Formant {
    double frequency; // Hz
    double bandwidth; // Hz
};

struct FormantSettings {
    double max_formant = 5500.0;
    int n_formants = 5;
    double window_length = 0.025;
    double time_step = 0.01;
    double pre_emphasis_from = 50.0;
    double min_frequency = 50.0;
    double max_bandwidth = 400.0;
};

struct FormantTrack {
    std::vector<double> times;
    /// Accepted resonances per analysed frame, ascending in frequency.
    std::vector<std::vector<Formant>> frames;

    /// Mean frequency of formant `index` (0-based) over frames that have it.
    std::optional<double> mean_frequency(std::size_t index) const;
};

/// Burg LPC formant analysis. The signal is resampled to 2*max_formant,
/// pre-emphasized, and fitted with an order 2*n_formants predictor per
/// Gaussian-windowed frame.
///
/// Frames with unstable or non-finite predictors are skipped; if every frame
/// is skipped, or none yields three formants, Errc::extraction_failed.
FormantTrack compute_formant_track(const AudioBuffer& audio, const FormantSettings& settings = {});

/// Burg's method. Returns predictor coefficients a[1..p] of
/// A(z) = 1 + sum a_k z^-k (index 0 holds a_1), with p = order unless the
/// frame is predictable to within 1e-6 relative error at a lower order, in
/// which case the recursion stops there.
std::vector<double> burg_lpc(const std::vector<double>& frame, int order);

/// Band-limited (windowed-sinc) resampling.
std::vector<double> resample(const std::vector<double>& samples, double from_rate, double to_rate);

}  // namespace voxdim
