#include "cli.hpp"

#include "voxdim/characteristics.hpp"
#include "voxdim/correlation.hpp"
#include "voxdim/csv.hpp"
#include "voxdim/error.hpp"
#include "voxdim/manifest.hpp"
#include "voxdim/manipulation.hpp"
#include "voxdim/parallel.hpp"
#include "voxdim/pca.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

namespace fs = std::filesystem;

namespace voxdim::cli {

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void setup_logging() {
    auto logger = spdlog::get("voxdim");
    if (!logger) {
        logger = spdlog::stderr_color_mt("voxdim");
        logger->set_pattern("[%l] %v");
    }
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::info);
    if (const char* env = std::getenv("VOXDIM_LOG")) {
        const auto level = spdlog::level::from_str(env);
        // from_str maps unknown names to "off"; only honour it when asked for.
        if (level != spdlog::level::off || std::string_view(env) == "off") {
            spdlog::set_level(level);
        } else {
            spdlog::warn("ignoring unknown VOXDIM_LOG level '{}'", env);
        }
    }
}

std::optional<Split> split_filter(const std::string& name) {
    if (name.empty() || name == "all") return std::nullopt;
    const auto s = parse_split(name);
    if (!s) throw UsageError("unknown split '" + name + "' (expected train, dev, test or all)");
    return s;
}

std::vector<ManifestEntry> select(const DatasetManifest& manifest, std::optional<Split> split) {
    return split ? manifest.split(*split) : manifest.entries();
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(Errc::io_error, "cannot create output directory '" + dir.string() + "': " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(Errc::io_error, "cannot open '" + path.string() + "' for writing");
    return out;
}

struct ItemFailure {
    std::string item;
    std::string code;
    std::string message;
};

/// Sidecar listing per-item failures; always written so reruns are comparable.
void write_failures(const fs::path& path, const std::vector<ItemFailure>& failures) {
    auto out = open_out(path);
    csv::write_row(out, {"item", "error", "message"});
    for (const auto& f : failures) {
        csv::write_row(out, {f.item, f.code, f.message});
        spdlog::warn("{}: {}", f.item, f.message);
    }
    if (!failures.empty()) spdlog::warn("{} item(s) failed; see {}", failures.size(), path.string());
}

std::vector<Characteristic> parse_characteristic_list(const std::vector<std::string>& names) {
    if (names.empty()) return {kAllCharacteristics.begin(), kAllCharacteristics.end()};
    std::vector<Characteristic> out;
    for (const auto& n : names) {
        const auto c = parse_characteristic(n);
        if (!c) throw UsageError("unknown characteristic '" + n + "'");
        if (std::find(out.begin(), out.end(), *c) == out.end()) out.push_back(*c);
    }
    return out;
}

std::vector<double> parse_alphas(const std::string& text) {
    if (text.empty() || text == "default") return default_alpha_grid();
    std::vector<double> alphas;
    for (const auto& field : csv::split_line(text)) {
        const auto v = csv::parse_double(field);
        if (!v) throw UsageError("invalid alpha '" + field + "'");
        alphas.push_back(*v);
    }
    return alphas;
}

/// Loads features for every entry and averages them (in parallel, results
/// kept in entry order). Entries without a feature path are an error.
std::vector<UtteranceEmbedding> load_embeddings(const std::vector<ManifestEntry>& entries, int layer,
                                                const std::string& model_name, unsigned jobs) {
    std::vector<UtteranceEmbedding> out(entries.size());
    for (const auto& e : entries) {
        if (e.feature_path.empty()) fail(Errc::validation_error, "'" + e.utterance_id + "' has no feature_path");
    }
    parallel_for(entries.size(), jobs, [&](std::size_t i) {
        const auto& e = entries[i];
        out[i] = average_utterance(read_feature_matrix(e.feature_path, {e.utterance_id, layer, model_name}));
    });
    return out;
}

// ---------------------------------------------------------------- extract

struct ExtractArgs {
    std::string manifest;
    std::string out;
    std::string alignments;
    std::string split;
    unsigned jobs = 0;
};

int cmd_extract(const ExtractArgs& a) {
    const auto manifest = load_manifest(a.manifest, {.check_files = false});
    const auto entries = select(manifest, split_filter(a.split));
    if (entries.empty()) throw UsageError("manifest '" + a.manifest + "' has no utterances to extract");

    std::map<std::string, PhoneAlignment> alignments;
    if (!a.alignments.empty()) alignments = read_alignments(a.alignments);
    ensure_dir(a.out);

    std::vector<std::optional<CharacteristicRow>> rows(entries.size());
    std::vector<std::optional<ItemFailure>> failures(entries.size());
    parallel_for(entries.size(), a.jobs, [&](std::size_t i) {
        const auto& e = entries[i];
        try {
            if (e.audio_path.empty()) fail(Errc::validation_error, "no audio_path in manifest");
            const PhoneAlignment* alignment = nullptr;
            if (e.alignment_id) {
                const auto it = alignments.find(*e.alignment_id);
                if (it == alignments.end()) {
                    spdlog::debug("{}: alignment '{}' not found, speaking rate left empty", e.utterance_id,
                                  *e.alignment_id);
                } else {
                    alignment = &it->second;
                }
            }
            const auto audio = read_wav(e.audio_path);
            rows[i] = CharacteristicRow{e.utterance_id,
                                        extract_characteristics(audio, alignment, e.gender, e.utterance_id)};
            spdlog::debug("extracted {}", e.utterance_id);
        } catch (const Error& err) {
            failures[i] = ItemFailure{e.utterance_id, std::string(to_string(err.code())), err.what()};
        }
    });

    std::vector<CharacteristicRow> ok;
    std::vector<ItemFailure> bad;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (rows[i]) ok.push_back(std::move(*rows[i]));
        if (failures[i]) bad.push_back(std::move(*failures[i]));
    }
    const fs::path out(a.out);
    write_characteristics_csv(out / "characteristics.csv", ok);
    write_failures(out / "extract_errors.csv", bad);
    spdlog::info("wrote {} of {} utterances to {}", ok.size(), entries.size(), (out / "characteristics.csv").string());
    return kOk;
}

// ---------------------------------------------------------------- pca-fit

struct PcaFitArgs {
    std::string manifest;
    std::string out;
    std::string model_file;
    std::string split = "train";
    std::string model_name;
    int layer = 0;
    int k = 50;
    unsigned jobs = 0;
};

int cmd_pca_fit(const PcaFitArgs& a) {
    const auto manifest = load_manifest(a.manifest);
    const auto entries = select(manifest, split_filter(a.split));
    if (entries.empty()) throw UsageError("no '" + a.split + "' utterances in '" + a.manifest + "'");
    const auto embeddings = load_embeddings(entries, a.layer, a.model_name, a.jobs);
    spdlog::info("fitting {} components to {} embeddings", a.k, embeddings.size());
    const auto model = fit_pca(embeddings, a.k);

    ensure_dir(a.out);
    const fs::path model_path = a.model_file.empty() ? fs::path(a.out) / "pca_model.bin" : fs::path(a.model_file);
    save_model(model, model_path);

    auto table = open_out(fs::path(a.out) / "explained_variance.csv");
    csv::write_row(table, {"dimension", "stddev", "explained_variance_ratio", "cumulative"});
    double cumulative = 0.0;
    std::cout << "dimension  stddev        ratio     cumulative\n";
    for (Eigen::Index i = 0; i < model.components(); ++i) {
        cumulative += model.explained_variance_ratio(i);
        csv::write_row(table, {std::to_string(i + 1), csv::format_double(model.stddevs(i)),
                               csv::format_double(model.explained_variance_ratio(i)), csv::format_double(cumulative)});
        std::cout << fmt::format("{:>9}  {:<12.6g}  {:<8.4f}  {:.4f}\n", i + 1, model.stddevs(i),
                                 model.explained_variance_ratio(i), cumulative);
    }
    spdlog::info("model written to {}", model_path.string());
    return kOk;
}

// ---------------------------------------------------------------- correlate

struct CorrelateArgs {
    std::string manifest;
    std::string characteristics;
    std::string model_file;
    std::string out;
    std::string split;
    std::string model_name;
    std::vector<std::string> which;
    int layer = 0;
    std::size_t top = 0;
    unsigned jobs = 0;
};

CorrelationMatrix correlate_layer(const std::string& manifest_path, const std::string& model_path,
                                  const std::vector<CharacteristicRow>& chars, const std::string& split,
                                  const std::vector<Characteristic>& which, int layer, const std::string& model_name,
                                  unsigned jobs) {
    const auto model = load_model(model_path);
    const auto manifest = load_manifest(manifest_path);
    const auto entries = select(manifest, split_filter(split));
    const auto embeddings = load_embeddings(entries, layer, model_name, jobs);

    std::vector<std::string> ids;
    RowMatrix coords(static_cast<Eigen::Index>(embeddings.size()), model.components());
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
        ids.push_back(embeddings[i].meta.utterance_id);
        coords.row(static_cast<Eigen::Index>(i)) = project(model, embeddings[i].vector).transpose();
    }
    return correlation_matrix(ids, coords, chars, which, {layer, model_name, split.empty() ? "all" : split});
}

void log_best(const CorrelationMatrix& m) {
    for (Characteristic c : m.characteristics) {
        if (const auto* best = m.best(c)) {
            std::cout << fmt::format("{:<17} dimension {:>3}  {} = {:.4f}\n", to_string(c), best->dimension,
                                     to_string(best->kind), *best->score);
        } else {
            std::cout << fmt::format("{:<17} unavailable\n", to_string(c));
        }
    }
}

int cmd_correlate(const CorrelateArgs& a) {
    const auto which = parse_characteristic_list(a.which);
    const auto chars = read_characteristics_csv(a.characteristics);
    const auto m = correlate_layer(a.manifest, a.model_file, chars, a.split, which, a.layer, a.model_name, a.jobs);

    std::vector<int> dims;
    if (a.top > 0) dims = top_dimensions(m, a.top);
    ensure_dir(a.out);
    const fs::path out(a.out);
    const std::vector<CorrelationMatrix> one{m};
    write_matrix_csv(out / "correlation_long.csv", one, dims);
    write_matrix_json(out / "correlation.json", m, dims);
    write_pivot_csv(out / "correlation_pivot.csv", m, dims);
    log_best(m);
    return kOk;
}

// ---------------------------------------------------------------- sweep-layers

struct SweepLayersArgs {
    std::vector<std::string> manifests;
    std::vector<std::string> models;
    std::vector<int> layers;
    std::string characteristics;
    std::string out;
    std::string split;
    std::string model_name;
    std::vector<std::string> which;
    unsigned jobs = 0;
};

int cmd_sweep_layers(const SweepLayersArgs& a) {
    if (a.layers.empty() || a.layers.size() != a.manifests.size() || a.layers.size() != a.models.size()) {
        fail(Errc::validation_error, "--layer, --manifest and --model-file must be given the same number of times (got " +
                                         std::to_string(a.layers.size()) + ", " + std::to_string(a.manifests.size()) +
                                         ", " + std::to_string(a.models.size()) + ")");
    }
    const auto which = parse_characteristic_list(a.which);
    const auto chars = read_characteristics_csv(a.characteristics);
    std::vector<CorrelationMatrix> matrices;
    for (std::size_t i = 0; i < a.layers.size(); ++i) {
        spdlog::info("layer {}: {}", a.layers[i], a.manifests[i]);
        matrices.push_back(correlate_layer(a.manifests[i], a.models[i], chars, a.split, which, a.layers[i],
                                           a.model_name, a.jobs));
    }
    const auto sweep = layer_sweep(matrices);
    ensure_dir(a.out);
    write_layer_sweep_csv(fs::path(a.out) / "layer_sweep.csv", sweep);
    write_matrix_csv(fs::path(a.out) / "correlation_long.csv", matrices);
    for (Characteristic c : which) {
        if (const auto* w = sweep.winner(c)) {
            std::cout << fmt::format("{:<17} layer {:>3}  dimension {:>3}  {:.4f}\n", to_string(c), w->layer,
                                     w->dimension, *w->score);
        }
    }
    return kOk;
}

// ---------------------------------------------------------------- manipulate

struct ManipulateArgs {
    std::string manifest;
    std::string model_file;
    std::string out;
    std::string wav_dir;
    std::string split;
    std::string alphas;
    std::string mode = "additive";
    int dim = 1;
    unsigned jobs = 0;
};

int cmd_manipulate(const ManipulateArgs& a) {
    const auto model = load_model(a.model_file);
    const SweepSpec spec{a.dim, parse_alphas(a.alphas)};
    try {
        validate_sweep(spec, model);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    const auto manifest = load_manifest(a.manifest, {.check_files = false});
    const auto entries = select(manifest, split_filter(a.split));
    if (entries.empty()) throw UsageError("manifest '" + a.manifest + "' has no utterances to manipulate");

    std::vector<SweepInput> inputs;
    for (const auto& e : entries) inputs.push_back({e.utterance_id, e.feature_path});
    const fs::path out(a.out);
    SweepOptions options;
    options.feature_dir = out / "features";
    options.wav_dir = a.wav_dir.empty() ? out / "wav" : fs::path(a.wav_dir);
    options.jobs = a.jobs;
    options.mode = a.mode == "reconstruct" ? ShiftMode::reconstruct : ShiftMode::additive;
    ensure_dir(out);
    const auto result = run_sweep(spec, model, inputs, options);

    write_job_manifest(out / "jobs.csv", result.jobs);

    // Dataset manifest for the vocoded outputs, so `extract` can measure them.
    std::vector<ManifestEntry> vocoded;
    for (const auto& job : result.jobs) {
        const auto* src = manifest.find(job.utterance_id);
        vocoded.push_back({job.output_wav_path.stem().string(), job.output_wav_path, job.feature_path, std::nullopt,
                           src->speaker_id, src->gender, src->split});
    }
    write_manifest(out / "vocoded_manifest.csv", DatasetManifest(std::move(vocoded)));

    std::vector<ItemFailure> failures;
    for (const auto& f : result.failures) {
        failures.push_back({f.alpha ? sweep_item_stem(f.utterance_id, a.dim, *f.alpha) : f.utterance_id, "sweep",
                            f.message});
    }
    write_failures(out / "manipulate_errors.csv", failures);
    spdlog::info("wrote {} feature files for {} utterance(s) x {} alpha(s)", result.jobs.size(), inputs.size(),
                 spec.alphas.size());
    return kOk;
}

// ---------------------------------------------------------------- report

struct ReportArgs {
    std::string job_manifest;
    std::string characteristics;
    std::string out;
    std::string target = "f0_mean";
    int dim = 0;
};

int cmd_report(const ReportArgs& a) {
    const auto target = parse_characteristic(a.target);
    if (!target) throw UsageError("unknown target characteristic '" + a.target + "'");
    auto jobs = read_job_manifest(a.job_manifest);
    if (a.dim > 0) std::erase_if(jobs, [&](const SweepJob& j) { return j.dimension != a.dim; });
    if (jobs.empty()) throw UsageError("no sweep jobs to report on");
    for (const auto& j : jobs) {
        if (j.dimension != jobs.front().dimension) {
            throw UsageError("job manifest mixes dimensions; choose one with --dim");
        }
    }

    std::map<std::string, CharacteristicVector> measured;
    for (auto& row : read_characteristics_csv(a.characteristics)) measured.emplace(row.utterance_id, row.values);

    std::vector<double> alphas;
    std::vector<Measurement> measurements;
    std::vector<ItemFailure> missing;
    for (const auto& j : jobs) {
        if (std::find(alphas.begin(), alphas.end(), j.alpha) == alphas.end()) alphas.push_back(j.alpha);
        const std::string id = j.output_wav_path.stem().string();
        const auto it = measured.find(id);
        if (it == measured.end()) {
            missing.push_back({id, "missing", "no measured characteristics for this sweep item"});
        } else {
            measurements.push_back({j.utterance_id, j.alpha, it->second});
        }
    }
    const auto curve = aggregate_response(measurements, *target, alphas);
    ensure_dir(a.out);
    const fs::path out(a.out);
    write_response_csv(out / "response.csv", curve);
    write_leakage_csv(out / "leakage.csv", curve);
    write_plot_data(out / "response_plot.dat", curve);
    write_failures(out / "report_missing.csv", missing);

    const auto& span = curve.span(*target);
    std::cout << fmt::format("target {}: mean range {}", to_string(*target), csv::format_optional(span.range));
    if (span.plateau_low || span.plateau_high) {
        std::cout << fmt::format(", plateau onsets {} / {}", csv::format_optional(span.plateau_low),
                                 csv::format_optional(span.plateau_high));
    }
    std::cout << '\n';
    for (const auto& s : curve.spans) {
        if (!s.is_target && s.range) std::cout << fmt::format("  {:<17} range {:.4g}\n", to_string(s.characteristic), *s.range);
    }
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    setup_logging();

    CLI::App app{"voxdim: speaker characteristics in principal dimensions of speech features", "voxdim"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "voxdim 0.1.0");

    unsigned jobs = 0;
    auto add_jobs = [&](CLI::App* sub) {
        sub->add_option("--jobs,-j", jobs, "Worker threads (default: all cores)");
    };
    const std::vector<std::string> split_names{"train", "dev", "test", "all"};

    ExtractArgs ex;
    auto* extract = app.add_subcommand("extract", "Measure speaker characteristics for every utterance");
    extract->add_option("--manifest", ex.manifest, "Dataset manifest CSV")->required();
    extract->add_option("--out", ex.out, "Output directory")->required();
    extract->add_option("--alignments", ex.alignments, "Phone alignment CSV (for speaking rate)");
    extract->add_option("--split", ex.split, "Only this split")->check(CLI::IsMember(split_names));
    add_jobs(extract);

    PcaFitArgs pf;
    auto* pca = app.add_subcommand("pca-fit", "Fit principal directions to averaged utterance features");
    pca->add_option("--manifest", pf.manifest, "Dataset manifest CSV")->required();
    pca->add_option("--out", pf.out, "Output directory")->required();
    pca->add_option("--model-file", pf.model_file, "Model path (default: <out>/pca_model.bin)");
    pca->add_option("--k", pf.k, "Number of components")->capture_default_str();
    pca->add_option("--split", pf.split, "Training split")->capture_default_str()->check(CLI::IsMember(split_names));
    pca->add_option("--layer", pf.layer, "Layer index (metadata)");
    pca->add_option("--model-name", pf.model_name, "Feature model name (metadata)");
    add_jobs(pca);

    CorrelateArgs co;
    auto* corr = app.add_subcommand("correlate", "Score every principal dimension against every characteristic");
    corr->add_option("--manifest", co.manifest, "Dataset manifest CSV")->required();
    corr->add_option("--characteristics", co.characteristics, "Characteristics CSV from extract")->required();
    corr->add_option("--model-file", co.model_file, "PCA model file")->required();
    corr->add_option("--out", co.out, "Output directory")->required();
    corr->add_option("--split", co.split, "Only this split")->check(CLI::IsMember(split_names));
    corr->add_option("--top", co.top, "Only emit the N highest-scoring dimensions");
    corr->add_option("--only", co.which, "Restrict to these characteristics")->delimiter(',');
    corr->add_option("--layer", co.layer, "Layer index (metadata)");
    corr->add_option("--model-name", co.model_name, "Feature model name (metadata)");
    add_jobs(corr);

    SweepLayersArgs sl;
    auto* sweep = app.add_subcommand("sweep-layers", "Best score per characteristic for each layer");
    sweep->add_option("--layer", sl.layers, "Layer index (repeat once per layer)")->required();
    sweep->add_option("--manifest", sl.manifests, "Manifest for each --layer")->required();
    sweep->add_option("--model-file", sl.models, "PCA model for each --layer")->required();
    sweep->add_option("--characteristics", sl.characteristics, "Characteristics CSV from extract")->required();
    sweep->add_option("--out", sl.out, "Output directory")->required();
    sweep->add_option("--split", sl.split, "Only this split")->check(CLI::IsMember(split_names));
    sweep->add_option("--only", sl.which, "Restrict to these characteristics")->delimiter(',');
    sweep->add_option("--model-name", sl.model_name, "Feature model name (metadata)");
    add_jobs(sweep);

    ManipulateArgs ma;
    auto* manip = app.add_subcommand("manipulate", "Shift one principal dimension over a grid of alphas");
    manip->add_option("--manifest", ma.manifest, "Dataset manifest CSV")->required();
    manip->add_option("--model-file", ma.model_file, "PCA model file")->required();
    manip->add_option("--out", ma.out, "Output directory")->required();
    manip->add_option("--dim", ma.dim, "Principal dimension (1-based)")->required();
    manip->add_option("--alphas", ma.alphas, "Comma-separated alphas, e.g. --alphas=-1,0,1 (default: -6..6 step 0.5)");
    manip->add_option("--split", ma.split, "Only this split")->check(CLI::IsMember(split_names));
    manip->add_option("--wav-dir", ma.wav_dir, "Where the vocoder should write (default: <out>/wav)");
    manip->add_option("--mode", ma.mode, "additive or reconstruct")->capture_default_str()
        ->check(CLI::IsMember({"additive", "reconstruct"}));
    add_jobs(manip);

    ReportArgs re;
    auto* report = app.add_subcommand("report", "Response curves from characteristics measured on vocoded sweeps");
    report->add_option("--job-manifest", re.job_manifest, "jobs.csv written by manipulate")->required();
    report->add_option("--characteristics", re.characteristics, "Characteristics CSV measured on the vocoded audio")
        ->required();
    report->add_option("--out", re.out, "Output directory")->required();
    report->add_option("--target", re.target, "Characteristic the sweep is meant to move")->capture_default_str();
    report->add_option("--dim", re.dim, "Dimension to report when the manifest holds several");

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    const unsigned workers = jobs == 0 ? default_jobs() : jobs;
    ex.jobs = pf.jobs = co.jobs = sl.jobs = ma.jobs = workers;
    try {
        if (*extract) return cmd_extract(ex);
        if (*pca) return cmd_pca_fit(pf);
        if (*corr) return cmd_correlate(co);
        if (*sweep) return cmd_sweep_layers(sl);
        if (*manip) return cmd_manipulate(ma);
        if (*report) return cmd_report(re);
    } catch (const UsageError& e) {
        spdlog::error("{}", e.what());
        return kUsage;
    } catch (const Error& e) {
        spdlog::error("{} ({})", e.what(), to_string(e.code()));
        return e.code() == Errc::validation_error ? kUsage : kFailure;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kFailure;
    }
    return kUsage;
}

}  // namespace voxdim::cli
