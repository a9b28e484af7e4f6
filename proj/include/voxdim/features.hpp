#pragma once

#include "voxdim/npy.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <span>
#include <string>

namespace voxdim {

struct FeatureMetadata {
    std::string utterance_id;
    int layer = 0;
    std::string model_name;
};

/// T x D per-frame features of one utterance (one row per frame).
struct FeatureSequence {
    RowMatrix frames;
    FeatureMetadata meta;

    Eigen::Index length() const noexcept { return frames.rows(); }
    Eigen::Index dim() const noexcept { return frames.cols(); }
};

/// Time average of a feature sequence.
struct UtteranceEmbedding {
    Eigen::VectorXd vector;
    FeatureMetadata meta;
};

/// Reads a T x D NPY feature file (T, D >= 1). Values are held as doubles.
FeatureSequence read_feature_matrix(const std::filesystem::path& path, FeatureMetadata meta = {});

/// Writes frames as float32 NPY.
void write_feature_matrix(const std::filesystem::path& path, const FeatureSequence& seq);

/// Arithmetic mean over frames.
UtteranceEmbedding average_utterance(const FeatureSequence& seq);

}  // namespace voxdim
