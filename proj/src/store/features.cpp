#include "voxdim/features.hpp"

#include "voxdim/error.hpp"

namespace voxdim {

FeatureSequence read_feature_matrix(const std::filesystem::path& path, FeatureMetadata meta) {
    FeatureSequence seq{read_npy_matrix(path), std::move(meta)};
    if (seq.length() < 1 || seq.dim() < 1) {
        fail(Errc::parse_error, path.string() + ": feature matrix must have at least one frame and one dimension");
    }
    return seq;
}

void write_feature_matrix(const std::filesystem::path& path, const FeatureSequence& seq) {
    write_npy_matrix(path, seq.frames);
}

namespace {

// Pairwise summation split at the midpoint, so a sequence concatenated with
// itself sums to exactly twice the original.
Eigen::VectorXd pairwise_sum(const RowMatrix& m, Eigen::Index begin, Eigen::Index end) {
    if (end - begin == 1) return m.row(begin).transpose();
    const Eigen::Index mid = begin + (end - begin) / 2;
    return pairwise_sum(m, begin, mid) + pairwise_sum(m, mid, end);
}

}  // namespace

UtteranceEmbedding average_utterance(const FeatureSequence& seq) {
    if (seq.length() < 1) fail(Errc::invalid_argument, "cannot average an empty feature sequence");
    Eigen::VectorXd sum = pairwise_sum(seq.frames, 0, seq.length());
    return {sum / static_cast<double>(seq.length()), seq.meta};
}

}  // namespace voxdim
