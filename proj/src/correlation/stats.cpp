#include "voxdim/stats.hpp"

#include "voxdim/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>

namespace voxdim {

namespace {

void require_finite(std::span<const double> v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) fail(Errc::non_finite, std::string(what) + " contains non-finite values");
    }
}

double mean(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

bool constant(std::span<const double> v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *lo == *hi;
}

}  // namespace

LinearFit ols_r_squared(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) fail(Errc::invalid_argument, "x and y lengths differ");
    if (x.size() < 3) fail(Errc::insufficient_data, "regression needs at least 3 observations");
    require_finite(x, "x");
    require_finite(y, "y");
    if (constant(y)) fail(Errc::degenerate_target, "target has zero variance");

    const double my = mean(y);
    double syy = 0.0;
    for (double v : y) syy += (v - my) * (v - my);

    LinearFit fit;
    if (constant(x)) {
        fit.intercept = my;
        return fit;
    }
    const double mx = mean(x);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.slope * (x[i] - mx) + my);
        ss_res += r * r;
    }
    fit.r_squared = 1.0 - ss_res / syy;
    return fit;
}

ThresholdFit fit_threshold_classifier(std::span<const double> x, std::span<const int> labels) {
    if (x.size() != labels.size()) fail(Errc::invalid_argument, "x and label lengths differ");
    if (x.empty()) fail(Errc::invalid_argument, "no observations");
    require_finite(x, "x");
    std::size_t ones = 0;
    for (int l : labels) {
        if (l != 0 && l != 1) fail(Errc::invalid_argument, "labels must be 0 or 1");
        ones += static_cast<std::size_t>(l);
    }
    const std::size_t n = x.size();
    if (ones == 0 || ones == n) fail(Errc::single_class, "classifier needs both classes present");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    const double median = n % 2 == 1 ? x[order[n / 2]] : 0.5 * (x[order[n / 2 - 1]] + x[order[n / 2]]);

    ThresholdFit best{x[order[0]], 1, static_cast<double>(n - ones) / static_cast<double>(n)};
    std::size_t best_correct = 0;
    bool found = false;

    // Sweep thresholds upward; ones_below counts label-1 samples with x <= t.
    std::size_t ones_below = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        ones_below += static_cast<std::size_t>(labels[order[i]]);
        const double lo = x[order[i]];
        const double hi = x[order[i + 1]];
        if (lo == hi) continue;
        const double t = lo + (hi - lo) / 2.0;
        const std::size_t below = i + 1;
        const std::size_t zeros_below = below - ones_below;
        // polarity +1: above -> 1. Correct = zeros below + ones above.
        const std::size_t plus = zeros_below + (ones - ones_below);
        const std::size_t minus = n - plus;
        for (const auto& [correct, polarity] : {std::pair{plus, 1}, std::pair{minus, -1}}) {
            bool better = !found || correct > best_correct;
            if (found && correct == best_correct) {
                const double d_new = std::abs(t - median);
                const double d_old = std::abs(best.threshold - median);
                better = d_new < d_old || (d_new == d_old && (t < best.threshold ||
                                                              (t == best.threshold && polarity > best.polarity)));
            }
            if (better) {
                found = true;
                best_correct = correct;
                best.threshold = t;
                best.polarity = polarity;
            }
        }
    }
    if (found) best.agreement = static_cast<double>(best_correct) / static_cast<double>(n);
    return best;
}

Kappa cohens_kappa(std::span<const int> pred, std::span<const int> truth) {
    if (pred.size() != truth.size()) fail(Errc::invalid_argument, "label sequences differ in length");
    if (pred.size() < 2) fail(Errc::invalid_argument, "kappa needs at least 2 observations");

    std::map<int, std::pair<std::int64_t, std::int64_t>> marginals;
    std::int64_t agree = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        ++marginals[pred[i]].first;
        ++marginals[truth[i]].second;
        agree += pred[i] == truth[i] ? 1 : 0;
    }
    const auto n = static_cast<std::int64_t>(pred.size());
    std::int64_t chance = 0;  // n^2 * p_e
    std::size_t pred_classes = 0;
    std::size_t truth_classes = 0;
    for (const auto& [label, counts] : marginals) {
        chance += counts.first * counts.second;
        pred_classes += counts.first > 0 ? 1 : 0;
        truth_classes += counts.second > 0 ? 1 : 0;
    }
    Kappa k;
    k.degenerate = pred_classes == 1 || truth_classes == 1;
    if (chance == n * n) {
        k.value = 1.0;
        return k;
    }
    k.value = static_cast<double>(n * agree - chance) / static_cast<double>(n * n - chance);
    return k;
}

}  // namespace voxdim
