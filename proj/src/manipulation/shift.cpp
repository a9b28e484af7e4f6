#include "voxdim/manipulation.hpp"

#include "voxdim/csv.hpp"
#include "voxdim/error.hpp"
#include "voxdim/parallel.hpp"

#include <cmath>
#include <fstream>

namespace voxdim {

namespace {

void check_shift(const FeatureSequence& seq, const PcaModel& model, const ShiftSpec& spec) {
    if (seq.dim() != model.dim()) {
        fail(Errc::dimension_mismatch, "features of '" + seq.meta.utterance_id + "' have dimension " +
                                           std::to_string(seq.dim()) + ", model expects " +
                                           std::to_string(model.dim()));
    }
    if (spec.dimension < 1 || spec.dimension > model.components()) {
        fail(Errc::out_of_range, "dimension " + std::to_string(spec.dimension) + " is outside 1.." +
                                     std::to_string(model.components()));
    }
    if (!std::isfinite(spec.alpha)) fail(Errc::invalid_argument, "alpha must be finite");
}

}  // namespace

FeatureSequence shift_dimension(const FeatureSequence& seq, const PcaModel& model, const ShiftSpec& spec) {
    check_shift(seq, model, spec);
    FeatureSequence out = seq;
    if (spec.alpha == 0.0) return out;
    const auto i = spec.dimension - 1;
    const Eigen::RowVectorXd delta = spec.alpha * model.stddevs(i) * model.directions.row(i);
    out.frames.rowwise() += delta;
    return out;
}

FeatureSequence shift_by_reconstruction(const FeatureSequence& seq, const PcaModel& model, const ShiftSpec& spec) {
    check_shift(seq, model, spec);
    RowMatrix coords = project_rows(model, seq.frames);
    coords.col(spec.dimension - 1).array() += spec.alpha * model.stddevs(spec.dimension - 1);
    FeatureSequence out;
    out.meta = seq.meta;
    out.frames = coords * model.directions;
    out.frames.rowwise() += model.mean.transpose();
    return out;
}

std::vector<double> default_alpha_grid() {
    std::vector<double> grid;
    for (int step = -12; step <= 12; ++step) grid.push_back(0.5 * step);
    return grid;
}

void validate_sweep(const SweepSpec& spec, const PcaModel& model) {
    if (spec.dimension < 1 || spec.dimension > model.components()) {
        fail(Errc::out_of_range, "dimension " + std::to_string(spec.dimension) + " is outside 1.." +
                                     std::to_string(model.components()));
    }
    if (spec.alphas.empty()) fail(Errc::invalid_argument, "alpha grid is empty");
    bool has_zero = false;
    for (std::size_t i = 0; i < spec.alphas.size(); ++i) {
        const double a = spec.alphas[i];
        if (!std::isfinite(a)) fail(Errc::invalid_argument, "alpha values must be finite");
        if (i > 0 && !(a > spec.alphas[i - 1])) fail(Errc::invalid_argument, "alpha grid must be strictly increasing");
        has_zero = has_zero || a == 0.0;
    }
    if (!has_zero) fail(Errc::invalid_argument, "alpha grid must contain 0");
}

std::string format_alpha(double alpha) { return csv::format_double(alpha); }

std::string sweep_item_stem(std::string_view utterance_id, int dimension, double alpha) {
    return std::string(utterance_id) + "__dim" + std::to_string(dimension) + "__a" + format_alpha(alpha);
}

SweepOutcome run_sweep(const SweepSpec& spec, const PcaModel& model, std::span<const SweepInput> inputs,
                       const SweepOptions& options) {
    validate_sweep(spec, model);
    std::error_code ec;
    std::filesystem::create_directories(options.feature_dir, ec);
    if (ec) fail(Errc::io_error, "cannot create '" + options.feature_dir.string() + "': " + ec.message());

    std::vector<SweepOutcome> per_input(inputs.size());
    parallel_for(inputs.size(), options.jobs, [&](std::size_t idx) {
        const auto& in = inputs[idx];
        auto& out = per_input[idx];
        FeatureSequence seq;
        try {
            seq = read_feature_matrix(in.feature_path, {in.utterance_id, 0, {}});
            if (seq.dim() != model.dim()) {
                fail(Errc::dimension_mismatch, "dimension " + std::to_string(seq.dim()) + " does not match model " +
                                                   std::to_string(model.dim()));
            }
        } catch (const Error& e) {
            out.failures.push_back({in.utterance_id, std::nullopt, e.what()});
            return;
        }
        for (double alpha : spec.alphas) {
            const std::string stem = sweep_item_stem(in.utterance_id, spec.dimension, alpha);
            SweepJob job{in.utterance_id, spec.dimension, alpha, options.feature_dir / (stem + ".npy"),
                         options.wav_dir / (stem + ".wav")};
            try {
                const ShiftSpec shift{spec.dimension, alpha};
                const auto shifted = options.mode == ShiftMode::additive ? shift_dimension(seq, model, shift)
                                                                         : shift_by_reconstruction(seq, model, shift);
                write_feature_matrix(job.feature_path, shifted);
                out.jobs.push_back(std::move(job));
            } catch (const Error& e) {
                out.failures.push_back({in.utterance_id, alpha, e.what()});
            }
        }
    });

    SweepOutcome all;
    for (auto& o : per_input) {
        std::move(o.jobs.begin(), o.jobs.end(), std::back_inserter(all.jobs));
        std::move(o.failures.begin(), o.failures.end(), std::back_inserter(all.failures));
    }
    return all;
}

std::vector<std::string> job_manifest_header() {
    return {"utterance_id", "dimension", "alpha", "feature_path", "output_wav_path"};
}

void write_job_manifest(const std::filesystem::path& path, std::span<const SweepJob> jobs) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(Errc::io_error, "cannot open '" + path.string() + "' for writing");
    csv::write_row(out, job_manifest_header());
    for (const auto& j : jobs) {
        csv::write_row(out, {j.utterance_id, std::to_string(j.dimension), format_alpha(j.alpha),
                             j.feature_path.generic_string(), j.output_wav_path.generic_string()});
    }
    if (!out) fail(Errc::io_error, "failed writing '" + path.string() + "'");
}

std::vector<SweepJob> read_job_manifest(const std::filesystem::path& path) {
    const auto table = csv::read_file(path, job_manifest_header());
    const auto base = path.parent_path();
    auto resolve = [&](const std::string& p) {
        const std::filesystem::path fp(p);
        return fp.is_absolute() || p.empty() ? fp : base / fp;
    };
    std::vector<SweepJob> jobs;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto dim = csv::parse_double(row[1]);
        const auto alpha = csv::parse_double(row[2]);
        if (!dim || *dim != std::floor(*dim) || !alpha) {
            fail(Errc::parse_error, path.string() + ": row " + std::to_string(r + 1) + " has a malformed dimension or alpha");
        }
        jobs.push_back({row[0], static_cast<int>(*dim), *alpha, resolve(row[3]), resolve(row[4])});
    }
    return jobs;
}

}  // namespace voxdim
