#include "dsp.hpp"

#include <cmath>
#include <numbers>

namespace voxdim::dsp {

std::vector<double> hann(std::size_t length) {
    std::vector<double> w(length);
    for (std::size_t n = 0; n < length; ++n) {
        w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (static_cast<double>(n) + 0.5) / length);
    }
    return w;
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

Peak parabolic_peak(double left, double centre, double right) {
    const double denom = left - 2.0 * centre + right;
    if (denom >= 0.0) return {0.0, centre};
    double offset = 0.5 * (left - right) / denom;
    if (offset > 0.5) offset = 0.5;
    if (offset < -0.5) offset = -0.5;
    return {offset, centre - 0.25 * (left - right) * offset};
}

namespace {

constexpr std::ptrdiff_t kSincDepth = 24;

}  // namespace

double sinc_interpolate(std::span<const double> x, double t) {
    const auto centre = static_cast<std::ptrdiff_t>(std::floor(t));
    const auto n = static_cast<std::ptrdiff_t>(x.size());
    const double half_width = static_cast<double>(kSincDepth) + 1.0;
    double acc = 0.0;
    for (auto k = std::max<std::ptrdiff_t>(0, centre - kSincDepth); k <= std::min(n - 1, centre + kSincDepth + 1); ++k) {
        const double d = t - static_cast<double>(k);
        if (std::abs(d) >= half_width) continue;
        const double arg = std::numbers::pi * d;
        const double sinc = std::abs(arg) < 1e-12 ? 1.0 : std::sin(arg) / arg;
        const double window = 0.5 + 0.5 * std::cos(std::numbers::pi * d / half_width);
        acc += x[static_cast<std::size_t>(k)] * sinc * window;
    }
    return acc;
}

Peak refine_peak(std::span<const double> x, std::size_t i) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    const double base = static_cast<double>(i);
    double a = base - 1.0, b = base + 1.0;
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    double fc = sinc_interpolate(x, c), fd = sinc_interpolate(x, d);
    for (int iter = 0; iter < 48; ++iter) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = sinc_interpolate(x, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = sinc_interpolate(x, d);
        }
    }
    const double t = 0.5 * (a + b);
    const double value = sinc_interpolate(x, t);
    if (value < x[i]) return {0.0, x[i]};
    return {t - base, value};
}

namespace {

std::vector<double> raw_autocorrelation(Eigen::FFT<double>& fft, const std::vector<double>& padded,
                                        std::size_t max_lag) {
    std::vector<std::complex<double>> spectrum;
    fft.fwd(spectrum, padded);
    for (auto& c : spectrum) c = std::norm(c);
    std::vector<double> acf;
    fft.inv(acf, spectrum);
    acf.resize(max_lag + 1);
    return acf;
}

}  // namespace

NormalizedAutocorrelation::NormalizedAutocorrelation(std::size_t frame_length, std::size_t max_lag)
    : length_(frame_length),
      max_lag_(max_lag),
      nfft_(next_pow2(frame_length + max_lag + 1)),
      window_(hann(frame_length)) {
    std::vector<double> padded(nfft_, 0.0);
    std::copy(window_.begin(), window_.end(), padded.begin());
    window_acf_ = raw_autocorrelation(fft_, padded, max_lag_);
    const double zero = window_acf_[0];
    for (auto& v : window_acf_) v /= zero;
}

std::vector<double> NormalizedAutocorrelation::operator()(std::span<const double> frame) const {
    double mean = 0.0;
    for (double s : frame) mean += s;
    mean /= static_cast<double>(frame.size());

    std::vector<double> padded(nfft_, 0.0);
    double energy = 0.0;
    for (std::size_t n = 0; n < length_ && n < frame.size(); ++n) {
        padded[n] = (frame[n] - mean) * window_[n];
        energy += padded[n] * padded[n];
    }
    std::vector<double> r(max_lag_ + 1, 0.0);
    if (energy <= 0.0) return r;

    const auto acf = raw_autocorrelation(fft_, padded, max_lag_);
    for (std::size_t lag = 0; lag <= max_lag_; ++lag) {
        const double w = window_acf_[lag];
        r[lag] = w > 1e-12 ? (acf[lag] / acf[0]) / w : 0.0;
    }
    r[0] = 1.0;
    return r;
}

std::vector<std::vector<std::size_t>> centred_frame_starts(std::size_t n, std::size_t length, std::size_t hop) {
    if (n < length) return {};
    const std::size_t count = (n - length) / hop + 1;
    const std::size_t leftover = n - length - (count - 1) * hop;
    std::vector<std::vector<std::size_t>> alignments;
    for (std::size_t offset : {leftover / 2, leftover - leftover / 2}) {
        if (!alignments.empty() && alignments.front().front() == offset) break;
        std::vector<std::size_t> starts(count);
        for (std::size_t k = 0; k < count; ++k) starts[k] = offset + k * hop;
        alignments.push_back(std::move(starts));
    }
    return alignments;
}

std::optional<double> mean_over_frames(std::span<const double> x, std::size_t length, std::size_t hop,
                                       const std::function<std::optional<double>(std::span<const double>)>& per_frame) {
    double sum = 0.0;
    std::size_t count = 0;
    auto accumulate = [&](std::span<const double> frame) {
        if (auto v = per_frame(frame)) {
            sum += *v;
            ++count;
        }
    };
    if (x.size() < length) {
        accumulate(x);
    } else {
        for (const auto& starts : centred_frame_starts(x.size(), length, hop)) {
            for (std::size_t s : starts) accumulate(x.subspan(s, length));
        }
    }
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
}

}  // namespace voxdim::dsp
