#include "voxdim/csv.hpp"
#include "voxdim/error.hpp"
#include "voxdim/manipulation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <utility>

namespace voxdim {

const ResponseCell& ResponseCurve::cell(double alpha, Characteristic c) const {
    for (const auto& cur : cells) {
        if (cur.alpha == alpha && cur.characteristic == c) return cur;
    }
    fail(Errc::out_of_range, "no response cell for alpha " + format_alpha(alpha));
}

const CharacteristicSpan& ResponseCurve::span(Characteristic c) const {
    for (const auto& s : spans) {
        if (s.characteristic == c) return s;
    }
    fail(Errc::out_of_range, "no span for '" + std::string(to_string(c)) + "'");
}

namespace {

// Onset of the flat region on each side of alpha = 0.
void find_plateaus(const std::vector<std::pair<double, double>>& pts, CharacteristicSpan& span) {
    if (pts.size() < 3) return;
    // Central slope from the points bracketing alpha = 0.
    std::size_t hi = 0;
    while (hi < pts.size() && pts[hi].first <= 0.0) ++hi;
    std::size_t lo = hi;
    while (lo > 0 && pts[lo - 1].first >= 0.0) --lo;
    if (lo == 0 || hi == pts.size()) return;
    const auto& a = pts[lo - 1];
    const auto& b = pts[hi];
    const double central = (b.second - a.second) / (b.first - a.first);
    if (central == 0.0) return;
    const double limit = 0.1 * std::abs(central);
    auto slope = [&](std::size_t i) { return (pts[i + 1].second - pts[i].second) / (pts[i + 1].first - pts[i].first); };

    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (pts[i].first >= 0.0 && std::abs(slope(i)) < limit) {
            span.plateau_high = pts[i].first;
            break;
        }
    }
    for (std::size_t i = pts.size() - 1; i > 0; --i) {
        if (pts[i].first <= 0.0 && std::abs(slope(i - 1)) < limit) {
            span.plateau_low = pts[i].first;
            break;
        }
    }
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(Errc::io_error, "cannot open '" + path.string() + "' for writing");
    return out;
}

}  // namespace

ResponseCurve aggregate_response(std::span<const Measurement> measurements, Characteristic target,
                                 std::span<const double> alphas) {
    ResponseCurve curve;
    curve.target = target;
    if (alphas.empty()) {
        std::set<double> distinct;
        for (const auto& m : measurements) distinct.insert(m.alpha);
        curve.alphas.assign(distinct.begin(), distinct.end());
    } else {
        curve.alphas.assign(alphas.begin(), alphas.end());
        std::sort(curve.alphas.begin(), curve.alphas.end());
    }

    std::set<std::pair<std::string_view, double>> seen;
    std::vector<std::vector<const Measurement*>> by_alpha(curve.alphas.size());
    for (const auto& m : measurements) {
        if (!seen.emplace(m.utterance_id, m.alpha).second) {
            fail(Errc::validation_error, "duplicate measurement for '" + m.utterance_id + "' at alpha " +
                                             format_alpha(m.alpha));
        }
        const auto it = std::lower_bound(curve.alphas.begin(), curve.alphas.end(), m.alpha);
        if (it == curve.alphas.end() || *it != m.alpha) {
            fail(Errc::validation_error, "measurement alpha " + format_alpha(m.alpha) + " is not in the sweep grid");
        }
        by_alpha[static_cast<std::size_t>(it - curve.alphas.begin())].push_back(&m);
    }

    for (std::size_t a = 0; a < curve.alphas.size(); ++a) {
        for (Characteristic c : kAllCharacteristics) {
            ResponseCell cell{curve.alphas[a], c, 0, std::nullopt, std::nullopt};
            std::vector<double> values;
            for (const auto* m : by_alpha[a]) {
                if (const auto v = m->values.value(c)) values.push_back(*v);
            }
            cell.n = values.size();
            if (!values.empty()) {
                double sum = 0.0;
                for (double v : values) sum += v;
                const double mean = sum / static_cast<double>(values.size());
                cell.mean = mean;
                if (values.size() >= 2) {
                    double ss = 0.0;
                    for (double v : values) ss += (v - mean) * (v - mean);
                    cell.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
                }
            }
            curve.cells.push_back(cell);
        }
    }

    for (Characteristic c : kAllCharacteristics) {
        CharacteristicSpan span;
        span.characteristic = c;
        span.is_target = c == target;
        std::vector<std::pair<double, double>> pts;
        for (double alpha : curve.alphas) {
            const auto& cell = curve.cell(alpha, c);
            if (cell.mean) pts.emplace_back(alpha, *cell.mean);
        }
        if (!pts.empty()) {
            const auto [lo, hi] = std::minmax_element(pts.begin(), pts.end(),
                                                      [](const auto& x, const auto& y) { return x.second < y.second; });
            span.min_mean = lo->second;
            span.max_mean = hi->second;
            span.range = hi->second - lo->second;
        }
        if (span.is_target) find_plateaus(pts, span);
        curve.spans.push_back(span);
    }
    return curve;
}

void write_response_csv(const std::filesystem::path& path, const ResponseCurve& curve) {
    auto out = open_out(path);
    csv::write_row(out, {"alpha", "characteristic", "mean", "std", "n"});
    for (const auto& c : curve.cells) {
        csv::write_row(out, {format_alpha(c.alpha), std::string(to_string(c.characteristic)),
                             csv::format_optional(c.mean), csv::format_optional(c.std), std::to_string(c.n)});
    }
}

void write_leakage_csv(const std::filesystem::path& path, const ResponseCurve& curve) {
    auto out = open_out(path);
    csv::write_row(out, {"characteristic", "is_target", "min_mean", "max_mean", "range", "plateau_low", "plateau_high"});
    for (const auto& s : curve.spans) {
        csv::write_row(out, {std::string(to_string(s.characteristic)), s.is_target ? "1" : "0",
                             csv::format_optional(s.min_mean), csv::format_optional(s.max_mean),
                             csv::format_optional(s.range), csv::format_optional(s.plateau_low),
                             csv::format_optional(s.plateau_high)});
    }
}

void write_plot_data(const std::filesystem::path& path, const ResponseCurve& curve) {
    auto out = open_out(path);
    out << "# characteristic alpha mean lower upper\n";
    for (Characteristic c : kAllCharacteristics) {
        for (double alpha : curve.alphas) {
            const auto& cell = curve.cell(alpha, c);
            if (!cell.mean) continue;
            const double sd = cell.std.value_or(0.0);
            out << to_string(c) << ' ' << format_alpha(alpha) << ' ' << csv::format_double(*cell.mean) << ' '
                << csv::format_double(*cell.mean - sd) << ' ' << csv::format_double(*cell.mean + sd) << '\n';
        }
    }
}

}  // namespace voxdim
