#pragma once

#include "voxdim/characteristics.hpp"
#include "voxdim/npy.hpp"
#include "voxdim/stats.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace voxdim {

enum class ScoreKind { r_squared, kappa };

std::string_view to_string(ScoreKind kind) noexcept;

/// Gender cells are scored with kappa, everything else with R^2.
ScoreKind score_kind_for(Characteristic c) noexcept;

/// Score of one principal dimension against one characteristic.
struct ScoredCell {
    int dimension = 1;  // 1-based
    Characteristic characteristic = Characteristic::f0_mean;
    ScoreKind kind = ScoreKind::r_squared;
    std::optional<double> score;  // empty when unavailable
    std::size_t n = 0;            // observations used
    std::variant<std::monostate, LinearFit, ThresholdFit> fit;
    std::string unavailable_reason;

    bool available() const noexcept { return score.has_value(); }
};

struct CorrelationMatrix {
    int layer = 0;
    std::string model_name;
    std::string split;
    int dimensions = 0;
    std::vector<Characteristic> characteristics;
    std::vector<ScoredCell> cells;  // dimension-major

    const ScoredCell& cell(int dimension, Characteristic c) const;
    /// Highest available score for `c` (lowest dimension on ties), or nullptr.
    const ScoredCell* best(Characteristic c) const;
};

struct MatrixLabel {
    int layer = 0;
    std::string model_name;
    std::string split;
};

/// Scores every (dimension, characteristic) pair.
///
/// `coords` holds one row of projection coordinates per entry of `ids`.
/// Rows are joined to `chars` by utterance id and processed in id order, so
/// the result does not depend on input order. Utterances lacking a value for
/// a characteristic are dropped for that column only. Columns with fewer than
/// 3 observations, a constant target or a single gender are marked
/// unavailable with a reason.
///
/// Errors: invalid_argument (ids/coords size mismatch), validation_error
/// (duplicate ids, ids without characteristics), insufficient_data (< 3 rows).
CorrelationMatrix correlation_matrix(std::span<const std::string> ids, const RowMatrix& coords,
                                     std::span<const CharacteristicRow> chars,
                                     std::span<const Characteristic> which = kAllCharacteristics,
                                     const MatrixLabel& label = {});

/// The m dimensions with the highest best-cell score, in ascending order.
std::vector<int> top_dimensions(const CorrelationMatrix& matrix, std::size_t m);

/// Long format, one row per cell. An empty `dimensions` means all.
void write_matrix_csv(const std::filesystem::path& path, std::span<const CorrelationMatrix> matrices,
                      std::span<const int> dimensions = {});
void write_matrix_json(const std::filesystem::path& path, const CorrelationMatrix& matrix,
                       std::span<const int> dimensions = {});
/// Heatmap grid: one row per dimension, one column per characteristic.
void write_pivot_csv(const std::filesystem::path& path, const CorrelationMatrix& matrix,
                     std::span<const int> dimensions = {});

struct LayerBest {
    std::string model_name;
    int layer = 0;
    Characteristic characteristic = Characteristic::f0_mean;
    ScoreKind kind = ScoreKind::r_squared;
    std::optional<double> score;
    int dimension = 0;  // 0 when no cell was available
};

struct LayerSweepResult {
    std::vector<LayerBest> entries;  // input layer order, then characteristic order

    /// Entry with the highest score for `c` across layers (first on ties).
    const LayerBest* winner(Characteristic c) const;
};

/// Errors: invalid_argument when `matrices` is empty.
LayerSweepResult layer_sweep(std::span<const CorrelationMatrix> matrices);
void write_layer_sweep_csv(const std::filesystem::path& path, const LayerSweepResult& sweep);

}  // namespace voxdim
