#include "voxdim/spectral.hpp"

#include "dsp.hpp"
#include "voxdim/error.hpp"

#include <cmath>

namespace voxdim {

namespace {

std::size_t frame_samples(const AudioBuffer& audio, double seconds) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(seconds * audio.sample_rate())));
}

constexpr double kReferenceSquared = 2e-5 * 2e-5;
// Cumulative-energy ties within this relative margin resolve to the lower bin.
constexpr double kRolloffTieTolerance = 1e-9;

}  // namespace

Intensity compute_intensity(const AudioBuffer& audio) {
    const auto length = frame_samples(audio, 0.032);
    const auto hop = frame_samples(audio, 0.01);
    bool all_floor = true;
    const auto mean = dsp::mean_over_frames(audio.samples(), length, hop, [&](std::span<const double> frame) {
        double ms = 0.0;
        for (double s : frame) ms += s * s;
        ms /= static_cast<double>(frame.size());
        double db = ms > 0.0 ? 10.0 * std::log10(ms / kReferenceSquared) : kIntensityFloorDb;
        if (db <= kIntensityFloorDb) {
            db = kIntensityFloorDb;
        } else {
            all_floor = false;
        }
        return std::optional<double>(db);
    });
    return {*mean, all_floor};
}

double compute_zcr(const AudioBuffer& audio) {
    if (audio.size() < 2) fail(Errc::invalid_argument, "zero-crossing rate needs at least two samples");
    const auto length = frame_samples(audio, 0.025);
    const auto hop = frame_samples(audio, 0.01);
    const auto mean = dsp::mean_over_frames(audio.samples(), length, hop, [](std::span<const double> frame) {
        std::size_t crossings = 0;
        for (std::size_t i = 1; i < frame.size(); ++i) {
            if ((frame[i - 1] >= 0.0) != (frame[i] >= 0.0)) ++crossings;
        }
        return std::optional<double>(static_cast<double>(crossings) / static_cast<double>(frame.size()));
    });
    return *mean;
}

double compute_spectral_rolloff(const AudioBuffer& audio, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0)) fail(Errc::invalid_argument, "rolloff fraction must lie in (0, 1)");
    const auto length = frame_samples(audio, 0.025);
    const auto hop = frame_samples(audio, 0.01);
    if (audio.size() < length) fail(Errc::too_short, "spectral rolloff needs at least one 25 ms frame");

    const auto window = dsp::hann(length);
    const double bin_hz = static_cast<double>(audio.sample_rate()) / static_cast<double>(length);
    Eigen::FFT<double> fft;
    std::vector<double> buffer(length);
    std::vector<std::complex<double>> spectrum;
    std::vector<double> power(length / 2 + 1);

    const auto mean = dsp::mean_over_frames(audio.samples(), length, hop, [&](std::span<const double> frame) {
        for (std::size_t i = 0; i < length; ++i) buffer[i] = frame[i] * window[i];
        fft.fwd(spectrum, buffer);
        double total = 0.0;
        for (std::size_t k = 0; k < power.size(); ++k) {
            power[k] = std::norm(spectrum[k]);
            total += power[k];
        }
        if (!(total > 0.0)) return std::optional<double>();
        const double threshold = fraction * total * (1.0 - kRolloffTieTolerance);
        double cumulative = 0.0;
        for (std::size_t k = 0; k < power.size(); ++k) {
            cumulative += power[k];
            if (cumulative >= threshold) return std::optional<double>(static_cast<double>(k) * bin_hz);
        }
        return std::optional<double>(static_cast<double>(power.size() - 1) * bin_hz);
    });
    if (!mean) fail(Errc::silent_audio, "spectral rolloff is undefined for silent audio");
    return *mean;
}

}  // namespace voxdim
