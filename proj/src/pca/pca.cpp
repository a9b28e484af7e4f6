#include "voxdim/pca.hpp"

#include "voxdim/error.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <string>

namespace voxdim {

namespace {

void orient(RowMatrix& directions) {
    for (Eigen::Index r = 0; r < directions.rows(); ++r) {
        Eigen::Index arg = 0;
        directions.row(r).cwiseAbs().maxCoeff(&arg);
        if (directions(r, arg) < 0) directions.row(r) *= -1.0;
    }
}

}  // namespace

PcaModel fit_pca(const RowMatrix& data, Eigen::Index k) {
    const Eigen::Index n = data.rows();
    const Eigen::Index d = data.cols();
    if (k < 1 || k > d) {
        fail(Errc::invalid_argument,
             "component count " + std::to_string(k) + " must be in [1, " + std::to_string(d) + "]");
    }
    if (n <= k) {
        fail(Errc::insufficient_data, "need more than " + std::to_string(k) + " embeddings to fit " +
                                          std::to_string(k) + " components, got " + std::to_string(n));
    }
    if (!data.allFinite()) fail(Errc::non_finite, "training data contains non-finite values");

    PcaModel model;
    model.n_train = static_cast<std::uint64_t>(n);
    model.mean = data.colwise().mean().transpose();
    const Eigen::MatrixXd centred = data.rowwise() - model.mean.transpose();

    Eigen::BDCSVD<Eigen::MatrixXd> svd(centred, Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();

    const double tol = (s.size() > 0 ? s(0) : 0.0) * static_cast<double>(std::max(n, d)) *
                       std::numeric_limits<double>::epsilon();
    Eigen::Index rank = 0;
    while (rank < s.size() && s(rank) > tol) ++rank;
    if (rank < k) {
        fail(Errc::rank_deficient, "data has numerical rank " + std::to_string(rank) + ", cannot fit " +
                                       std::to_string(k) + " components (achievable: " +
                                       std::to_string(rank) + ")");
    }

    model.directions = svd.matrixV().leftCols(k).transpose();
    orient(model.directions);
    model.stddevs = s.head(k) / std::sqrt(static_cast<double>(n - 1));
    model.explained_variance_ratio = s.head(k).array().square() / s.squaredNorm();
    return model;
}

PcaModel fit_pca(std::span<const UtteranceEmbedding> embeddings, Eigen::Index k) {
    if (embeddings.empty()) fail(Errc::insufficient_data, "no embeddings to fit");
    const Eigen::Index d = embeddings.front().vector.size();
    RowMatrix data(static_cast<Eigen::Index>(embeddings.size()), d);
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
        const auto& e = embeddings[i];
        if (e.vector.size() != d) {
            fail(Errc::dimension_mismatch, "embedding '" + e.meta.utterance_id + "' has dimension " +
                                               std::to_string(e.vector.size()) + ", expected " +
                                               std::to_string(d));
        }
        data.row(static_cast<Eigen::Index>(i)) = e.vector.transpose();
    }
    return fit_pca(data, k);
}

Eigen::VectorXd project(const PcaModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
    if (x.size() != model.dim()) {
        fail(Errc::dimension_mismatch, "embedding dimension " + std::to_string(x.size()) +
                                           " does not match model dimension " + std::to_string(model.dim()));
    }
    return model.directions * (x - model.mean);
}

RowMatrix project_rows(const PcaModel& model, const RowMatrix& rows) {
    if (rows.cols() != model.dim()) {
        fail(Errc::dimension_mismatch, "embedding dimension " + std::to_string(rows.cols()) +
                                           " does not match model dimension " + std::to_string(model.dim()));
    }
    return (rows.rowwise() - model.mean.transpose()) * model.directions.transpose();
}

Eigen::VectorXd reconstruct(const PcaModel& model, const Eigen::Ref<const Eigen::VectorXd>& coords) {
    if (coords.size() != model.components()) {
        fail(Errc::dimension_mismatch, "expected " + std::to_string(model.components()) +
                                           " coordinates, got " + std::to_string(coords.size()));
    }
    return model.mean + model.directions.transpose() * coords;
}

}  // namespace voxdim
