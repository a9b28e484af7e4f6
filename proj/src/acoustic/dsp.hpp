#pragma once

// Shared signal-processing helpers for the acoustic measurements.

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace voxdim::dsp {

/// Hann window sampled at half-sample offsets, w[n] = 0.5 - 0.5 cos(2 pi (n + 0.5) / L).
/// Symmetric under n -> L-1-n, and its DFT is a three-bin kernel.
std::vector<double> hann(std::size_t length);

std::size_t next_pow2(std::size_t n);

struct Peak {
    double offset; // fractional position relative to the centre sample, in [-0.5, 0.5]
    double value;
};

/// Vertex of the parabola through (-1, left), (0, centre), (1, right).
Peak parabolic_peak(double left, double centre, double right);

/// Band-limited (windowed-sinc) interpolation of x at fractional index t.
double sinc_interpolate(std::span<const double> x, double t);

/// Maximum of the sinc-interpolated signal on [i-1, i+1], found by
/// golden-section search. Returns the fractional index and value.
Peak refine_peak(std::span<const double> x, std::size_t i);

/// Autocorrelation of a Hann-windowed, mean-removed frame, normalized to 1
/// at lag zero and divided by the normalized window autocorrelation.
class NormalizedAutocorrelation {
public:
    NormalizedAutocorrelation(std::size_t frame_length, std::size_t max_lag);

    /// Returns r[0..max_lag]; all zeros when the frame has no energy.
    std::vector<double> operator()(std::span<const double> frame) const;

    std::size_t max_lag() const noexcept { return max_lag_; }

private:
    std::size_t length_;
    std::size_t max_lag_;
    std::size_t nfft_;
    std::vector<double> window_;
    std::vector<double> window_acf_;
    mutable Eigen::FFT<double> fft_;
};

/// Frame start offsets for frames of `length` with `hop`, centred in a
/// signal of `n` samples. When the leftover is odd both the floor and ceil
/// alignments are returned, so the frame set is mirror-symmetric.
std::vector<std::vector<std::size_t>> centred_frame_starts(std::size_t n, std::size_t length, std::size_t hop);

/// Pools `per_frame` over every centred frame (see above). Signals shorter
/// than one frame are treated as a single frame of the whole signal.
/// Returns nullopt if no frame produced a value.
std::optional<double> mean_over_frames(std::span<const double> x, std::size_t length, std::size_t hop,
                                       const std::function<std::optional<double>(std::span<const double>)>& per_frame);

}  // namespace voxdim::dsp
