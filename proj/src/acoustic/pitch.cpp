#include "voxdim/pitch.hpp"

#include "dsp.hpp"
#include "voxdim/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace voxdim {

std::size_t PitchTrack::voiced_count() const {
    return static_cast<std::size_t>(std::count_if(f0.begin(), f0.end(), [](const auto& v) { return v.has_value(); }));
}

std::optional<double> PitchTrack::mean_f0() const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& v : f0) {
        if (v) {
            sum += *v;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

PitchTrack analyze_pitch(const AudioBuffer& audio, const PitchSettings& settings) {
    const double fs = audio.sample_rate();
    if (!(settings.floor > 0.0) || !(settings.floor < settings.ceiling) || !(settings.ceiling < fs / 2.0)) {
        fail(Errc::invalid_argument, "pitch range must satisfy 0 < floor < ceiling < sample_rate/2");
    }
    const auto length = static_cast<std::size_t>(std::lround(3.0 / settings.floor * fs));
    const auto hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(settings.time_step * fs)));
    if (audio.size() < length) {
        fail(Errc::too_short, "audio of " + std::to_string(audio.duration()) + " s is shorter than one " +
                                  std::to_string(3.0 / settings.floor) + " s pitch frame");
    }

    const double min_lag = fs / settings.ceiling;
    const double max_lag = fs / settings.floor;
    const auto first_lag = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(min_lag)));
    const auto last_lag = static_cast<std::size_t>(std::floor(max_lag));
    const dsp::NormalizedAutocorrelation acf(length, last_lag + 1);

    const auto x = audio.samples();
    double global_peak = 0.0;
    for (double s : x) global_peak = std::max(global_peak, std::abs(s));

    PitchTrack track;
    track.frame_period = static_cast<double>(hop) / fs;
    track.frame_length = static_cast<double>(length) / fs;
    track.pitch_floor = settings.floor;
    track.pitch_ceiling = settings.ceiling;

    const auto starts = dsp::centred_frame_starts(audio.size(), length, hop).front();
    for (std::size_t start : starts) {
        const auto frame = x.subspan(start, length);
        track.times.push_back((static_cast<double>(start) + 0.5 * static_cast<double>(length)) / fs);

        double local_peak = 0.0;
        for (double s : frame) local_peak = std::max(local_peak, std::abs(s));
        if (global_peak <= 0.0 || local_peak < settings.silence_threshold * global_peak) {
            track.f0.emplace_back();
            track.strength.push_back(0.0);
            continue;
        }

        const auto r = acf(frame);
        double best_score = -std::numeric_limits<double>::infinity();
        double best_lag = 0.0;
        double best_r = 0.0;
        for (std::size_t lag = first_lag; lag <= last_lag; ++lag) {
            if (!(r[lag] >= r[lag - 1] && r[lag] > r[lag + 1])) continue;
            const auto peak = dsp::parabolic_peak(r[lag - 1], r[lag], r[lag + 1]);
            const double refined = std::clamp(static_cast<double>(lag) + peak.offset, min_lag, max_lag);
            const double score = peak.value - settings.octave_cost * std::log2(settings.floor * refined / fs);
            if (score > best_score) {
                best_score = score;
                best_lag = refined;
                best_r = peak.value;
            }
        }
        track.strength.push_back(std::max(best_r, 0.0));
        if (best_lag > 0.0 && best_r >= settings.voicing_threshold) {
            track.f0.emplace_back(std::clamp(fs / best_lag, settings.floor, settings.ceiling));
        } else {
            track.f0.emplace_back();
        }
    }
    return track;
}

PitchTrack compute_pitch_track(const AudioBuffer& audio, const PitchSettings& settings) {
    auto track = analyze_pitch(audio, settings);
    if (track.voiced_count() == 0) fail(Errc::no_voiced_frames, "no voiced frame found");
    return track;
}

}  // namespace voxdim
