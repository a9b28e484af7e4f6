#pragma once

#include "voxdim/features.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <span>

namespace voxdim {

/// Fitted principal component model. Immutable once built.
///
/// `directions` holds one unit-length principal direction per row (K x D),
/// ordered by decreasing standard deviation.
struct PcaModel {
    Eigen::VectorXd mean;
    RowMatrix directions;
    Eigen::VectorXd stddevs;
    Eigen::VectorXd explained_variance_ratio;
    std::uint64_t n_train = 0;

    Eigen::Index dim() const noexcept { return directions.cols(); }
    Eigen::Index components() const noexcept { return directions.rows(); }
};

/// Fits k components to the rows of `data` (one embedding per row).
///
/// The data are centred but not scaled. Each direction is flipped so that its
/// largest-magnitude entry is positive.
///
/// Errors: invalid_argument (k < 1 or k > D), insufficient_data (n <= k),
/// non_finite, rank_deficient (numerical rank below k; message names the rank).
PcaModel fit_pca(const RowMatrix& data, Eigen::Index k);

/// Same as above over utterance embeddings. Throws dimension_mismatch if the
/// embeddings disagree on D.
PcaModel fit_pca(std::span<const UtteranceEmbedding> embeddings, Eigen::Index k);

/// Coordinates of `x` along each principal direction, after centring.
Eigen::VectorXd project(const PcaModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Projects every row of `rows`; returns N x K.
RowMatrix project_rows(const PcaModel& model, const RowMatrix& rows);

/// mean + sum_i coords_i * v_i
Eigen::VectorXd reconstruct(const PcaModel& model, const Eigen::Ref<const Eigen::VectorXd>& coords);

inline constexpr std::uint32_t kModelFormatVersion = 1;

/// Binary model container; layout in docs/model_format.md.
void save_model(const PcaModel& model, const std::filesystem::path& path);

/// Errors: io_error, version_mismatch, corrupt (bad magic, truncation,
/// checksum mismatch or inconsistent sizes).
PcaModel load_model(const std::filesystem::path& path);

}  // namespace voxdim
