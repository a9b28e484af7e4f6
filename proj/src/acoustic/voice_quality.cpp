#include "voxdim/voice_quality.hpp"

#include "dsp.hpp"
#include "voxdim/error.hpp"

#include <algorithm>
#include <cmath>

namespace voxdim {

namespace {

constexpr double kMaxPeriodFactor = 1.3;

struct VoicedRegion {
    std::size_t first_frame;
    std::size_t last_frame;
};

std::vector<VoicedRegion> voiced_regions(const PitchTrack& pitch) {
    std::vector<VoicedRegion> regions;
    for (std::size_t i = 0; i < pitch.f0.size(); ++i) {
        if (!pitch.f0[i]) continue;
        if (!regions.empty() && regions.back().last_frame + 1 == i) {
            regions.back().last_frame = i;
        } else {
            regions.push_back({i, i});
        }
    }
    return regions;
}

// Frame index nearest to time t within [first, last].
std::size_t nearest_frame(const PitchTrack& pitch, const VoicedRegion& region, double t) {
    const double step = pitch.frame_period;
    const double rel = (t - pitch.times[region.first_frame]) / step;
    const auto idx = static_cast<std::ptrdiff_t>(std::lround(rel)) + static_cast<std::ptrdiff_t>(region.first_frame);
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(idx, static_cast<std::ptrdiff_t>(region.first_frame),
                                                               static_cast<std::ptrdiff_t>(region.last_frame)));
}

// Largest sample in [lo, hi], refined on the band-limited waveform.
std::optional<PeriodMark> pick_peak(std::span<const double> x, double fs, std::ptrdiff_t lo, std::ptrdiff_t hi) {
    lo = std::max<std::ptrdiff_t>(lo, 1);
    hi = std::min<std::ptrdiff_t>(hi, static_cast<std::ptrdiff_t>(x.size()) - 2);
    if (hi < lo) return std::nullopt;
    auto best = lo;
    for (auto i = lo; i <= hi; ++i) {
        if (x[static_cast<std::size_t>(i)] > x[static_cast<std::size_t>(best)]) best = i;
    }
    const auto b = static_cast<std::size_t>(best);
    const auto peak = dsp::refine_peak(x, b);
    return PeriodMark{(static_cast<double>(best) + peak.offset) / fs, peak.value};
}

}  // namespace

std::vector<std::vector<PeriodMark>> find_period_marks(const AudioBuffer& audio, const PitchTrack& pitch) {
    const double fs = audio.sample_rate();
    const auto x = audio.samples();
    std::vector<std::vector<PeriodMark>> result;

    for (const auto& region : voiced_regions(pitch)) {
        const double begin = std::max(0.0, pitch.times[region.first_frame] - 0.5 * pitch.frame_period);
        const double end = std::min(audio.duration(), pitch.times[region.last_frame] + 0.5 * pitch.frame_period);
        const auto end_sample = static_cast<std::ptrdiff_t>(std::floor(end * fs));

        std::vector<PeriodMark> marks;
        double period = 1.0 / *pitch.f0[region.first_frame];
        auto first = pick_peak(x, fs, static_cast<std::ptrdiff_t>(std::ceil(begin * fs)),
                               static_cast<std::ptrdiff_t>(std::floor((begin + period) * fs)));
        if (!first) continue;
        marks.push_back(*first);
        while (true) {
            const double prev = marks.back().time;
            period = 1.0 / *pitch.f0[nearest_frame(pitch, region, prev)];
            const auto lo = static_cast<std::ptrdiff_t>(std::ceil((prev + 0.8 * period) * fs));
            const auto hi = static_cast<std::ptrdiff_t>(std::floor((prev + 1.2 * period) * fs));
            if (hi > end_sample) break;
            auto mark = pick_peak(x, fs, lo, hi);
            if (!mark) break;
            marks.push_back(*mark);
        }
        result.push_back(std::move(marks));
    }
    return result;
}

Perturbation compute_jitter_shimmer(const AudioBuffer& audio, const PitchTrack& pitch) {
    std::size_t run = 0, longest = 0;
    for (const auto& f : pitch.f0) {
        run = f ? run + 1 : 0;
        longest = std::max(longest, run);
    }
    if (longest < 3) fail(Errc::insufficient_periodicity, "fewer than three consecutive voiced frames");

    const double min_period = 1.0 / pitch.pitch_ceiling / kMaxPeriodFactor;
    const double max_period = kMaxPeriodFactor / pitch.pitch_floor;

    double period_sum = 0.0, period_diff_sum = 0.0;
    double amp_sum = 0.0, amp_diff_sum = 0.0;
    std::size_t n_periods = 0, n_period_pairs = 0, n_amps = 0, n_amp_pairs = 0;

    for (const auto& marks : find_period_marks(audio, pitch)) {
        for (const auto& m : marks) {
            amp_sum += std::abs(m.amplitude);
            ++n_amps;
        }
        for (std::size_t k = 1; k < marks.size(); ++k) {
            amp_diff_sum += std::abs(std::abs(marks[k].amplitude) - std::abs(marks[k - 1].amplitude));
            ++n_amp_pairs;
        }
        std::optional<double> last;
        for (std::size_t k = 1; k < marks.size(); ++k) {
            const double period = marks[k].time - marks[k - 1].time;
            if (period < min_period || period > max_period) {
                last.reset();
                continue;
            }
            period_sum += period;
            ++n_periods;
            if (last && std::max(period, *last) / std::min(period, *last) <= kMaxPeriodFactor) {
                period_diff_sum += std::abs(period - *last);
                ++n_period_pairs;
            }
            last = period;
        }
    }
    if (n_periods < 3 || n_period_pairs == 0 || n_amp_pairs == 0 || amp_sum <= 0.0) {
        fail(Errc::insufficient_periodicity, "fewer than three glottal periods found");
    }

    Perturbation out{};
    out.jitter_local = 100.0 * (period_diff_sum / static_cast<double>(n_period_pairs)) /
                       (period_sum / static_cast<double>(n_periods));
    out.shimmer_local = 100.0 * (amp_diff_sum / static_cast<double>(n_amp_pairs)) /
                        (amp_sum / static_cast<double>(n_amps));
    return out;
}

double hnr_from_correlation(double r) {
    constexpr double kLow = -20.0, kHigh = 40.0;
    if (!(r > 0.0)) return kLow;
    if (r >= 1.0) return kHigh;
    return std::clamp(10.0 * std::log10(r / (1.0 - r)), kLow, kHigh);
}

double compute_hnr(const AudioBuffer& audio, const PitchTrack& pitch) {
    const double fs = audio.sample_rate();
    const auto length = static_cast<std::size_t>(std::lround(pitch.frame_length * fs));
    const auto max_lag = static_cast<std::size_t>(std::ceil(fs / pitch.pitch_floor)) + 2;
    const dsp::NormalizedAutocorrelation acf(length, max_lag);
    const auto x = audio.samples();

    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < pitch.f0.size(); ++i) {
        if (!pitch.f0[i]) continue;
        const auto centre = static_cast<std::ptrdiff_t>(std::lround(pitch.times[i] * fs));
        const auto start = std::clamp<std::ptrdiff_t>(centre - static_cast<std::ptrdiff_t>(length / 2), 0,
                                                      static_cast<std::ptrdiff_t>(x.size()) -
                                                          static_cast<std::ptrdiff_t>(length));
        if (start < 0) continue;
        const auto r = acf(x.subspan(static_cast<std::size_t>(start), length));

        const double lag = fs / *pitch.f0[i];
        auto best = static_cast<std::size_t>(std::lround(lag));
        best = std::clamp<std::size_t>(best, 2, max_lag - 1);
        for (std::size_t cand : {best - 1, best + 1}) {
            if (cand >= 1 && cand + 1 <= max_lag && r[cand] > r[best]) best = cand;
        }
        const double value = dsp::parabolic_peak(r[best - 1], r[best], r[best + 1]).value;
        sum += hnr_from_correlation(value);
        ++n;
    }
    if (n == 0) fail(Errc::no_voiced_frames, "HNR is undefined without voiced frames");
    return sum / static_cast<double>(n);
}

}  // namespace voxdim
