#pragma once

#include "voxdim/characteristics.hpp"
#include "voxdim/features.hpp"
#include "voxdim/pca.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace voxdim {

/// Move along principal dimension `dimension` (1-based) by `alpha` standard
/// deviations.
struct ShiftSpec {
    int dimension = 1;
    double alpha = 0.0;
};

/// Adds alpha * sigma_i * v_i to every frame. The model mean is not touched:
/// centring cancels in an additive edit.
///
/// Errors: dimension_mismatch, out_of_range (dimension), invalid_argument
/// (non-finite alpha).
FeatureSequence shift_dimension(const FeatureSequence& seq, const PcaModel& model, const ShiftSpec& spec);

/// Alternative edit: project each frame, add alpha * sigma_i to coordinate i
/// and reconstruct. Components outside the model subspace are discarded, so
/// this agrees with shift_dimension only when K = D.
FeatureSequence shift_by_reconstruction(const FeatureSequence& seq, const PcaModel& model, const ShiftSpec& spec);

struct SweepSpec {
    int dimension = 1;
    std::vector<double> alphas;
};

/// -6, -5.5, ..., 6
std::vector<double> default_alpha_grid();

/// Alphas must be finite, strictly increasing and include 0; the dimension
/// must exist in the model. Throws invalid_argument / out_of_range.
void validate_sweep(const SweepSpec& spec, const PcaModel& model);

/// Shortest round-trip text for alpha, with -0 written as 0.
std::string format_alpha(double alpha);

/// "<utterance_id>__dim<i>__a<alpha>"
std::string sweep_item_stem(std::string_view utterance_id, int dimension, double alpha);

struct SweepInput {
    std::string utterance_id;
    std::filesystem::path feature_path;
};

/// One row of the vocoder job manifest.
struct SweepJob {
    std::string utterance_id;
    int dimension = 1;
    double alpha = 0.0;
    std::filesystem::path feature_path;
    std::filesystem::path output_wav_path;
};

struct SweepFailure {
    std::string utterance_id;
    std::optional<double> alpha;  // empty when the input itself failed
    std::string message;
};

struct SweepOutcome {
    std::vector<SweepJob> jobs;  // input order, then alpha order
    std::vector<SweepFailure> failures;
};

enum class ShiftMode { additive, reconstruct };

struct SweepOptions {
    std::filesystem::path feature_dir;
    std::filesystem::path wav_dir;
    unsigned jobs = 1;
    ShiftMode mode = ShiftMode::additive;
};

/// Writes one shifted feature file per (utterance, alpha) into
/// options.feature_dir. Failures are collected per item; completed items are
/// kept. Output is identical for any thread count.
SweepOutcome run_sweep(const SweepSpec& spec, const PcaModel& model, std::span<const SweepInput> inputs,
                       const SweepOptions& options);

std::vector<std::string> job_manifest_header();
void write_job_manifest(const std::filesystem::path& path, std::span<const SweepJob> jobs);
/// Relative paths are resolved against the manifest's directory.
std::vector<SweepJob> read_job_manifest(const std::filesystem::path& path);

/// Characteristics measured on one resynthesized sweep item.
struct Measurement {
    std::string utterance_id;
    double alpha = 0.0;
    CharacteristicVector values;
};

struct ResponseCell {
    double alpha = 0.0;
    Characteristic characteristic = Characteristic::f0_mean;
    std::size_t n = 0;
    std::optional<double> mean;  // empty when n == 0
    std::optional<double> std;   // sample standard deviation, empty when n < 2
};

struct CharacteristicSpan {
    Characteristic characteristic = Characteristic::f0_mean;
    bool is_target = false;
    std::optional<double> min_mean;
    std::optional<double> max_mean;
    std::optional<double> range;
    /// First alpha on each side of 0 from which the mean response slope stays
    /// below 10% of the slope around alpha = 0. Computed for the target only.
    std::optional<double> plateau_low;
    std::optional<double> plateau_high;
};

struct ResponseCurve {
    Characteristic target = Characteristic::f0_mean;
    std::vector<double> alphas;
    std::vector<ResponseCell> cells;          // alpha-major, characteristic order
    std::vector<CharacteristicSpan> spans;    // one per characteristic

    const ResponseCell& cell(double alpha, Characteristic c) const;
    const CharacteristicSpan& span(Characteristic c) const;
};

/// Per-alpha mean and standard deviation over utterances for every
/// characteristic. `alphas` lists the expected grid; alphas without any
/// measurement produce empty cells. When empty, the grid is taken from the
/// measurements.
///
/// Errors: validation_error (duplicate utterance/alpha pair, measurement alpha
/// outside the grid).
ResponseCurve aggregate_response(std::span<const Measurement> measurements, Characteristic target,
                                 std::span<const double> alphas = {});

/// Long format: alpha, characteristic, mean, std, n.
void write_response_csv(const std::filesystem::path& path, const ResponseCurve& curve);
/// characteristic, is_target, min_mean, max_mean, range, plateau_low, plateau_high.
void write_leakage_csv(const std::filesystem::path& path, const ResponseCurve& curve);
/// Whitespace separated columns for plotting the mean with a one-std band:
/// characteristic alpha mean lower upper.
void write_plot_data(const std::filesystem::path& path, const ResponseCurve& curve);

}  // namespace voxdim
