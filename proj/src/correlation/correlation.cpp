#include "voxdim/correlation.hpp"

#include "voxdim/csv.hpp"
#include "voxdim/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>

namespace voxdim {

std::string_view to_string(ScoreKind kind) noexcept {
    return kind == ScoreKind::kappa ? "kappa" : "r_squared";
}

ScoreKind score_kind_for(Characteristic c) noexcept {
    return c == Characteristic::gender ? ScoreKind::kappa : ScoreKind::r_squared;
}

const ScoredCell& CorrelationMatrix::cell(int dimension, Characteristic c) const {
    const auto col = std::find(characteristics.begin(), characteristics.end(), c);
    if (dimension < 1 || dimension > dimensions || col == characteristics.end()) {
        fail(Errc::out_of_range, "no cell for dimension " + std::to_string(dimension) + " and '" +
                                     std::string(to_string(c)) + "'");
    }
    const auto stride = characteristics.size();
    return cells[static_cast<std::size_t>(dimension - 1) * stride +
                 static_cast<std::size_t>(col - characteristics.begin())];
}

const ScoredCell* CorrelationMatrix::best(Characteristic c) const {
    const ScoredCell* top = nullptr;
    for (int d = 1; d <= dimensions; ++d) {
        const auto& cur = cell(d, c);
        if (cur.available() && (!top || *cur.score > *top->score)) top = &cur;
    }
    return top;
}

namespace {

ScoredCell score_column(const Eigen::Ref<const Eigen::VectorXd>& x_all,
                        const std::vector<const CharacteristicVector*>& rows, Characteristic c, int dimension) {
    ScoredCell cell;
    cell.dimension = dimension;
    cell.characteristic = c;
    cell.kind = score_kind_for(c);

    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (const auto v = rows[i]->value(c)) {
            x.push_back(x_all(static_cast<Eigen::Index>(i)));
            y.push_back(*v);
        }
    }
    cell.n = x.size();
    if (x.size() < 3) {
        cell.unavailable_reason = "fewer than 3 observations (" + std::to_string(x.size()) + ")";
        return cell;
    }
    try {
        if (cell.kind == ScoreKind::r_squared) {
            const auto fit = ols_r_squared(x, y);
            cell.score = fit.r_squared;
            cell.fit = fit;
        } else {
            std::vector<int> labels(y.size());
            std::transform(y.begin(), y.end(), labels.begin(), [](double v) { return static_cast<int>(v); });
            const auto fit = fit_threshold_classifier(x, labels);
            std::vector<int> pred(x.size());
            std::transform(x.begin(), x.end(), pred.begin(), [&](double v) { return fit.predict(v); });
            cell.score = cohens_kappa(pred, labels).value;
            cell.fit = fit;
        }
    } catch (const Error& e) {
        if (e.code() != Errc::degenerate_target && e.code() != Errc::single_class) throw;
        cell.unavailable_reason = e.what();
    }
    return cell;
}

std::vector<int> selected(const CorrelationMatrix& m, std::span<const int> dimensions) {
    if (!dimensions.empty()) return {dimensions.begin(), dimensions.end()};
    std::vector<int> all(static_cast<std::size_t>(m.dimensions));
    std::iota(all.begin(), all.end(), 1);
    return all;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(Errc::io_error, "cannot open '" + path.string() + "' for writing");
    return out;
}

}  // namespace

CorrelationMatrix correlation_matrix(std::span<const std::string> ids, const RowMatrix& coords,
                                     std::span<const CharacteristicRow> chars,
                                     std::span<const Characteristic> which, const MatrixLabel& label) {
    if (static_cast<Eigen::Index>(ids.size()) != coords.rows()) {
        fail(Errc::invalid_argument, "coordinate rows and ids differ in count");
    }
    std::map<std::string_view, const CharacteristicVector*> by_id;
    for (const auto& row : chars) {
        if (!by_id.emplace(row.utterance_id, &row.values).second) {
            fail(Errc::validation_error, "duplicate characteristics for '" + row.utterance_id + "'");
        }
    }
    std::map<std::string_view, Eigen::Index> order;
    std::vector<std::string> missing;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (!order.emplace(ids[i], static_cast<Eigen::Index>(i)).second) {
            fail(Errc::validation_error, "duplicate utterance id '" + ids[i] + "'");
        }
        if (!by_id.contains(ids[i])) missing.push_back(ids[i]);
    }
    if (!missing.empty()) {
        std::string msg = std::to_string(missing.size()) + " utterance(s) have no characteristics:";
        for (std::size_t i = 0; i < std::min<std::size_t>(missing.size(), 5); ++i) msg += " '" + missing[i] + "'";
        fail(Errc::validation_error, msg);
    }
    if (ids.size() < 3) fail(Errc::insufficient_data, "correlation needs at least 3 utterances");

    RowMatrix x(coords.rows(), coords.cols());
    std::vector<const CharacteristicVector*> rows;
    for (const auto& [id, src] : order) {
        x.row(static_cast<Eigen::Index>(rows.size())) = coords.row(src);
        rows.push_back(by_id.at(id));
    }

    CorrelationMatrix m;
    m.layer = label.layer;
    m.model_name = label.model_name;
    m.split = label.split;
    m.dimensions = static_cast<int>(coords.cols());
    m.characteristics.assign(which.begin(), which.end());
    for (int d = 1; d <= m.dimensions; ++d) {
        const Eigen::VectorXd col = x.col(d - 1);
        for (Characteristic c : which) m.cells.push_back(score_column(col, rows, c, d));
    }
    return m;
}

std::vector<int> top_dimensions(const CorrelationMatrix& matrix, std::size_t m) {
    std::vector<std::pair<double, int>> ranked;
    for (int d = 1; d <= matrix.dimensions; ++d) {
        double top = -std::numeric_limits<double>::infinity();
        for (Characteristic c : matrix.characteristics) {
            const auto& cell = matrix.cell(d, c);
            if (cell.available()) top = std::max(top, *cell.score);
        }
        ranked.emplace_back(top, d);
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    ranked.resize(std::min(m, ranked.size()));
    std::vector<int> dims;
    for (const auto& r : ranked) dims.push_back(r.second);
    std::sort(dims.begin(), dims.end());
    return dims;
}

void write_matrix_csv(const std::filesystem::path& path, std::span<const CorrelationMatrix> matrices,
                      std::span<const int> dimensions) {
    auto out = open_out(path);
    csv::write_row(out, {"layer", "model_name", "split", "dimension", "characteristic", "score_kind", "score", "n",
                         "slope", "intercept", "threshold", "polarity", "status"});
    for (const auto& m : matrices) {
        for (int d : selected(m, dimensions)) {
            for (Characteristic c : m.characteristics) {
                const auto& cell = m.cell(d, c);
                std::vector<std::string> row{std::to_string(m.layer), m.model_name, m.split, std::to_string(d),
                                             std::string(to_string(c)), std::string(to_string(cell.kind)),
                                             csv::format_optional(cell.score), std::to_string(cell.n)};
                if (const auto* lin = std::get_if<LinearFit>(&cell.fit)) {
                    row.insert(row.end(), {csv::format_double(lin->slope), csv::format_double(lin->intercept), "", ""});
                } else if (const auto* thr = std::get_if<ThresholdFit>(&cell.fit)) {
                    row.insert(row.end(), {"", "", csv::format_double(thr->threshold), std::to_string(thr->polarity)});
                } else {
                    row.insert(row.end(), {"", "", "", ""});
                }
                row.push_back(cell.available() ? "ok" : cell.unavailable_reason);
                csv::write_row(out, row);
            }
        }
    }
}

void write_matrix_json(const std::filesystem::path& path, const CorrelationMatrix& matrix,
                       std::span<const int> dimensions) {
    nlohmann::ordered_json doc;
    doc["layer"] = matrix.layer;
    doc["model_name"] = matrix.model_name;
    doc["split"] = matrix.split;
    doc["dimensions"] = selected(matrix, dimensions);
    auto& names = doc["characteristics"] = nlohmann::ordered_json::array();
    for (Characteristic c : matrix.characteristics) names.push_back(std::string(to_string(c)));
    auto& cells = doc["cells"] = nlohmann::ordered_json::array();
    for (int d : selected(matrix, dimensions)) {
        for (Characteristic c : matrix.characteristics) {
            const auto& cell = matrix.cell(d, c);
            nlohmann::ordered_json j;
            j["dimension"] = d;
            j["characteristic"] = std::string(to_string(c));
            j["score_kind"] = std::string(to_string(cell.kind));
            j["score"] = cell.score ? nlohmann::ordered_json(*cell.score) : nlohmann::ordered_json(nullptr);
            j["n"] = cell.n;
            if (const auto* lin = std::get_if<LinearFit>(&cell.fit)) {
                j["fit"] = {{"slope", lin->slope}, {"intercept", lin->intercept}};
            } else if (const auto* thr = std::get_if<ThresholdFit>(&cell.fit)) {
                j["fit"] = {{"threshold", thr->threshold}, {"polarity", thr->polarity}};
            }
            if (!cell.available()) j["unavailable_reason"] = cell.unavailable_reason;
            cells.push_back(std::move(j));
        }
    }
    auto out = open_out(path);
    out << doc.dump(2) << '\n';
}

void write_pivot_csv(const std::filesystem::path& path, const CorrelationMatrix& matrix,
                     std::span<const int> dimensions) {
    auto out = open_out(path);
    std::vector<std::string> header{"dimension"};
    for (Characteristic c : matrix.characteristics) header.emplace_back(to_string(c));
    csv::write_row(out, header);
    for (int d : selected(matrix, dimensions)) {
        std::vector<std::string> row{std::to_string(d)};
        for (Characteristic c : matrix.characteristics) row.push_back(csv::format_optional(matrix.cell(d, c).score));
        csv::write_row(out, row);
    }
}

const LayerBest* LayerSweepResult::winner(Characteristic c) const {
    const LayerBest* top = nullptr;
    for (const auto& e : entries) {
        if (e.characteristic == c && e.score && (!top || *e.score > *top->score)) top = &e;
    }
    return top;
}

LayerSweepResult layer_sweep(std::span<const CorrelationMatrix> matrices) {
    if (matrices.empty()) fail(Errc::invalid_argument, "layer sweep needs at least one layer");
    LayerSweepResult result;
    for (const auto& m : matrices) {
        for (Characteristic c : m.characteristics) {
            LayerBest entry{m.model_name, m.layer, c, score_kind_for(c), std::nullopt, 0};
            if (const auto* top = m.best(c)) {
                entry.score = top->score;
                entry.dimension = top->dimension;
            }
            result.entries.push_back(std::move(entry));
        }
    }
    return result;
}

void write_layer_sweep_csv(const std::filesystem::path& path, const LayerSweepResult& sweep) {
    auto out = open_out(path);
    csv::write_row(out, {"model_name", "layer", "characteristic", "score_kind", "best_score", "dimension"});
    for (const auto& e : sweep.entries) {
        csv::write_row(out, {e.model_name, std::to_string(e.layer), std::string(to_string(e.characteristic)),
                             std::string(to_string(e.kind)), csv::format_optional(e.score),
                             e.dimension > 0 ? std::to_string(e.dimension) : ""});
    }
}

}  // namespace voxdim
