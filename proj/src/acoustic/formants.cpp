#include "voxdim/formants.hpp"

#include "dsp.hpp"
#include "voxdim/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace voxdim {

std::optional<double> FormantTrack::mean_frequency(std::size_t index) const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& frame : frames) {
        if (frame.size() > index) {
            sum += frame[index].frequency;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

std::vector<double> resample(const std::vector<double>& samples, double from_rate, double to_rate) {
    if (from_rate == to_rate) return samples;
    constexpr double kZeroCrossings = 32.0;
    const double ratio = to_rate / from_rate;
    const double cutoff = std::min(1.0, ratio);
    const double half_width = kZeroCrossings / cutoff;
    const auto n_in = static_cast<std::ptrdiff_t>(samples.size());
    const auto n_out = static_cast<std::size_t>(std::floor(static_cast<double>(samples.size()) * ratio));

    auto kernel = [&](double d) {
        if (std::abs(d) >= half_width) return 0.0;
        const double arg = std::numbers::pi * cutoff * d;
        const double sinc = arg == 0.0 ? 1.0 : std::sin(arg) / arg;
        const double phase = std::numbers::pi * d / half_width;  // in (-pi, pi)
        const double blackman = 0.42 + 0.5 * std::cos(phase) + 0.08 * std::cos(2.0 * phase);
        return cutoff * sinc * blackman;
    };

    std::vector<double> out(n_out);
    for (std::size_t m = 0; m < n_out; ++m) {
        const double pos = static_cast<double>(m) / ratio;
        const auto lo = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::ceil(pos - half_width)));
        const auto hi = std::min<std::ptrdiff_t>(n_in - 1, static_cast<std::ptrdiff_t>(std::floor(pos + half_width)));
        double acc = 0.0;
        for (std::ptrdiff_t k = lo; k <= hi; ++k) acc += samples[static_cast<std::size_t>(k)] * kernel(pos - static_cast<double>(k));
        out[m] = acc;
    }
    return out;
}

// Relative prediction error below which the Burg recursion stops early.
constexpr double kMinRelativeResidual = 1e-6;

std::vector<double> burg_lpc(const std::vector<double>& x, int order) {
    const auto n = x.size();
    const auto m = static_cast<std::size_t>(order);
    if (order < 1 || n <= m + 1) fail(Errc::invalid_argument, "frame too short for the requested LPC order");

    // Forward/backward prediction errors, updated in place per stage.
    std::vector<double> forward(x.begin(), x.end() - 1);
    std::vector<double> backward(x.begin() + 1, x.end());
    std::vector<double> d(m, 0.0);     // predictor: x[n] ~ sum d_k x[n-k]
    std::vector<double> prev(m, 0.0);
    double residual = 1.0;

    for (std::size_t k = 1; k <= m; ++k) {
        double num = 0.0, den = 0.0;
        for (std::size_t j = 0; j + k < n; ++j) {
            num += forward[j] * backward[j];
            den += forward[j] * forward[j] + backward[j] * backward[j];
        }
        if (!(den > 0.0)) return std::vector<double>(m, std::numeric_limits<double>::quiet_NaN());
        d[k - 1] = 2.0 * num / den;
        for (std::size_t i = 0; i + 1 < k; ++i) d[i] = prev[i] - d[k - 1] * prev[k - 2 - i];
        residual *= 1.0 - d[k - 1] * d[k - 1];
        if (residual < kMinRelativeResidual) {
            d.resize(k);  // fully predictable at this order; higher stages would fit round-off
            break;
        }
        if (k == m) break;
        for (std::size_t i = 0; i < k; ++i) prev[i] = d[i];
        for (std::size_t j = 0; j + k + 1 < n; ++j) {
            forward[j] -= prev[k - 1] * backward[j];
            backward[j] = backward[j + 1] - prev[k - 1] * forward[j + 1];
        }
    }
    std::vector<double> a(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) a[i] = -d[i];
    return a;
}

namespace {

// Praat-style Gaussian window over `length` samples, edges at zero.
std::vector<double> gaussian_window(std::size_t length) {
    const double edge = std::exp(-12.0);
    const double mid = 0.5 * (static_cast<double>(length) + 1.0);
    const double width = static_cast<double>(length) + 1.0;
    std::vector<double> w(length);
    for (std::size_t i = 0; i < length; ++i) {
        const double t = static_cast<double>(i + 1) - mid;
        w[i] = (std::exp(-48.0 * t * t / (width * width)) - edge) / (1.0 - edge);
    }
    return w;
}

std::vector<Formant> roots_to_formants(const std::vector<double>& a, double fs, const FormantSettings& settings) {
    const auto p = static_cast<Eigen::Index>(a.size());
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index j = 0; j < p; ++j) companion(0, j) = -a[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 1; i < p; ++i) companion(i, i - 1) = 1.0;

    const Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    std::vector<Formant> formants;
    const double nyquist = fs / 2.0;
    for (const std::complex<double>& root : solver.eigenvalues()) {
        if (root.imag() <= 0.0) continue;
        std::complex<double> z = root;
        if (std::abs(z) > 1.0) z = 1.0 / std::conj(z);
        const double frequency = std::arg(z) * fs / (2.0 * std::numbers::pi);
        const double bandwidth = -std::log(std::abs(z)) * fs / std::numbers::pi;
        if (frequency <= settings.min_frequency || frequency >= nyquist - settings.min_frequency) continue;
        if (!(bandwidth < settings.max_bandwidth)) continue;
        formants.push_back({frequency, bandwidth});
    }
    std::sort(formants.begin(), formants.end(),
              [](const Formant& l, const Formant& r) { return l.frequency < r.frequency; });
    if (formants.size() > static_cast<std::size_t>(settings.n_formants)) {
        formants.resize(static_cast<std::size_t>(settings.n_formants));
    }
    return formants;
}

}  // namespace

FormantTrack compute_formant_track(const AudioBuffer& audio, const FormantSettings& settings) {
    if (settings.n_formants < 3) fail(Errc::invalid_argument, "at least three formants must be computed");
    if (!(settings.max_formant > 0.0) || settings.max_formant > audio.sample_rate() / 2.0) {
        fail(Errc::invalid_argument, "max_formant must lie in (0, sample_rate/2]");
    }

    const double fs = 2.0 * settings.max_formant;
    auto x = resample(std::vector<double>(audio.samples().begin(), audio.samples().end()), audio.sample_rate(), fs);

    const double emphasis = std::exp(-2.0 * std::numbers::pi * settings.pre_emphasis_from / fs);
    for (std::size_t i = x.size(); i-- > 1;) x[i] -= emphasis * x[i - 1];

    // The physical window is twice the effective length of the Gaussian.
    const auto length = static_cast<std::size_t>(std::lround(2.0 * settings.window_length * fs));
    const auto hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(settings.time_step * fs)));
    const int order = 2 * settings.n_formants;
    if (x.size() < length) fail(Errc::too_short, "audio is shorter than one formant analysis window");
    const auto window = gaussian_window(length);

    FormantTrack track;
    std::size_t with_three = 0;
    const auto starts = dsp::centred_frame_starts(x.size(), length, hop).front();
    for (std::size_t start : starts) {
        std::vector<double> frame(length);
        double energy = 0.0;
        for (std::size_t i = 0; i < length; ++i) {
            frame[i] = x[start + i] * window[i];
            energy += frame[i] * frame[i];
        }
        if (!(energy > 0.0)) continue;
        const auto a = burg_lpc(frame, order);
        if (!std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); })) continue;
        auto formants = roots_to_formants(a, fs, settings);
        if (formants.size() >= 3) ++with_three;
        track.times.push_back((static_cast<double>(start) + 0.5 * static_cast<double>(length)) / fs);
        track.frames.push_back(std::move(formants));
    }
    if (track.frames.empty()) fail(Errc::extraction_failed, "every formant analysis frame was rejected");
    if (with_three == 0) fail(Errc::extraction_failed, "no frame yielded three formants");
    return track;
}

}  // namespace voxdim
