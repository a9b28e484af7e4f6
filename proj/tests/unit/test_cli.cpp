#include "support/planted.hpp"
#include "support/synth.hpp"
#include "support/temp_dir.hpp"

#include "cli.hpp"
#include "voxdim/csv.hpp"
#include "voxdim/manifest.hpp"
#include "voxdim/manipulation.hpp"
#include "voxdim/pca.hpp"

#include <gtest/gtest.h>

#include <fstream>

using namespace voxdim;
namespace fs = std::filesystem;

namespace {

std::string file_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run(std::initializer_list<std::string> args) { return cli::run(std::vector<std::string>(args)); }

// Planted embeddings stored as four-frame feature files whose frame average
// is the embedding.
class CliProject : public ::testing::Test {
protected:
    void SetUp() override {
        set_ = voxdim::testing::planted_set(60, 16, {8.0, 6.0, 4.0}, 71);
        std::mt19937_64 rng(72);
        std::normal_distribution<double> g(0.0, 0.3);
        std::vector<ManifestEntry> entries;
        for (std::size_t i = 0; i < set_.ids.size(); ++i) {
            const auto e = set_.embeddings.row(static_cast<Eigen::Index>(i));
            RowMatrix frames(4, e.size());
            Eigen::RowVectorXd d1(e.size()), d2(e.size());
            for (auto& v : d1) v = g(rng);
            for (auto& v : d2) v = g(rng);
            frames << e + d1, e - d1, e + d2, e - d2;
            const fs::path fp = dir_.path() / "feat" / (set_.ids[i] + ".npy");
            fs::create_directories(fp.parent_path());
            write_feature_matrix(fp, {frames, {set_.ids[i]}});
            entries.push_back({set_.ids[i], {}, fp, std::nullopt, "spk" + std::to_string(i),
                               set_.chars[i].values.gender, i < 40 ? Split::train : Split::dev});
        }
        write_manifest(manifest(), DatasetManifest(entries));
        write_characteristics_csv(chars(), set_.chars);
    }

    fs::path manifest() const { return dir_.path() / "manifest.csv"; }
    fs::path chars() const { return dir_.path() / "chars.csv"; }
    fs::path out(const std::string& name) const { return dir_.path() / name; }

    voxdim::testing::TempDir dir_;
    voxdim::testing::PlantedSet set_;
};

}  // namespace

TEST_F(CliProject, PcaFitWritesDeterministicModel) {
    ASSERT_EQ(run({"pca-fit", "--manifest", manifest(), "--split", "all", "--k", "8", "--out", out("a"), "--jobs", "3"}),
              0);
    ASSERT_EQ(run({"pca-fit", "--manifest", manifest(), "--split", "all", "--k", "8", "--out", out("b"), "--jobs", "1"}),
              0);
    const auto model = load_model(out("a") / "pca_model.bin");
    EXPECT_EQ(model.components(), 8);
    EXPECT_EQ(model.n_train, 60u);
    for (Eigen::Index i = 1; i < 8; ++i) EXPECT_GE(model.stddevs(i - 1), model.stddevs(i));
    EXPECT_EQ(file_bytes(out("a") / "pca_model.bin"), file_bytes(out("b") / "pca_model.bin"));
    EXPECT_EQ(csv::read_file(out("a") / "explained_variance.csv").rows.size(), 8u);
}

TEST_F(CliProject, PcaFitErrors) {
    EXPECT_EQ(run({"pca-fit", "--manifest", manifest(), "--k", "40", "--out", out("m")}), cli::kFailure);
    auto few = load_manifest(manifest()).entries();
    few.resize(10);
    write_manifest(out("few.csv"), DatasetManifest(few));
    EXPECT_EQ(run({"pca-fit", "--manifest", out("few.csv"), "--k", "12", "--out", out("m")}), cli::kFailure);
    EXPECT_EQ(run({"pca-fit", "--manifest", manifest(), "--k", "8", "--split", "bogus", "--out", out("m")}),
              cli::kUsage);
    EXPECT_EQ(run({"pca-fit", "--out", out("m")}), cli::kUsage);
    EXPECT_EQ(run({"frobnicate"}), cli::kUsage);
}

TEST_F(CliProject, CorrelateFindsPlantedDimensions) {
    ASSERT_EQ(run({"pca-fit", "--manifest", manifest(), "--split", "all", "--k", "8", "--out", out("pca")}), 0);
    const auto model_file = out("pca") / "pca_model.bin";
    ASSERT_EQ(run({"correlate", "--manifest", manifest(), "--characteristics", chars(), "--model-file", model_file,
                   "--out", out("corr"), "--layer", "6"}),
              0);
    const auto long_table = csv::read_file(out("corr") / "correlation_long.csv");
    EXPECT_EQ(long_table.rows.size(), 8u * kCharacteristicCount);
    EXPECT_TRUE(fs::exists(out("corr") / "correlation.json"));

    ASSERT_EQ(run({"correlate", "--manifest", manifest(), "--characteristics", chars(), "--model-file", model_file,
                   "--out", out("top"), "--top", "3"}),
              0);
    const auto pivot = csv::read_file(out("top") / "correlation_pivot.csv");
    ASSERT_EQ(pivot.rows.size(), 3u);
    // The three planted signals load on the three leading components.
    EXPECT_EQ(pivot.rows[0][0], "1");
    EXPECT_EQ(pivot.rows[1][0], "2");
    EXPECT_EQ(pivot.rows[2][0], "3");
    EXPECT_GE(*csv::parse_double(pivot.rows[0][1]), 0.9);

    EXPECT_NE(run({"correlate", "--manifest", manifest(), "--characteristics", chars(), "--model-file",
                   out("missing.bin"), "--out", out("x")}),
              0);
}

TEST_F(CliProject, SweepLayers) {
    ASSERT_EQ(run({"pca-fit", "--manifest", manifest(), "--split", "all", "--k", "8", "--out", out("pca")}), 0);
    const std::string model_file = out("pca") / "pca_model.bin";
    ASSERT_EQ(run({"sweep-layers", "--layer", "6", "--manifest", manifest(), "--model-file", model_file,
                   "--characteristics", chars(), "--out", out("sweep")}),
              0);
    const auto sweep = csv::read_file(out("sweep") / "layer_sweep.csv");
    ASSERT_EQ(sweep.rows.size(), kCharacteristicCount);
    EXPECT_EQ(sweep.rows[0][2], "f0_mean");
    EXPECT_EQ(sweep.rows[0][5], "1");

    EXPECT_EQ(run({"sweep-layers", "--layer", "6", "--layer", "7", "--manifest", manifest(), "--model-file",
                   model_file, "--characteristics", chars(), "--out", out("bad")}),
              cli::kUsage);
}

TEST_F(CliProject, ManipulateWritesSweepAndManifests) {
    ASSERT_EQ(run({"pca-fit", "--manifest", manifest(), "--split", "all", "--k", "8", "--out", out("pca")}), 0);
    const std::string model_file = out("pca") / "pca_model.bin";
    ASSERT_EQ(run({"manipulate", "--manifest", manifest(), "--model-file", model_file, "--dim", "1", "--alphas=0",
                   "--split", "dev", "--out", out("zero")}),
              0);
    const auto jobs = read_job_manifest(out("zero") / "jobs.csv");
    ASSERT_EQ(jobs.size(), 20u);
    const auto source = load_manifest(manifest());
    const auto* src = source.find(jobs[0].utterance_id);
    EXPECT_EQ(file_bytes(src->feature_path), file_bytes(jobs[0].feature_path));

    ASSERT_EQ(run({"manipulate", "--manifest", manifest(), "--model-file", model_file, "--dim", "2", "--split", "dev",
                   "--out", out("grid"), "--jobs", "4"}),
              0);
    ASSERT_EQ(run({"manipulate", "--manifest", manifest(), "--model-file", model_file, "--dim", "2", "--split", "dev",
                   "--out", out("grid"), "--jobs", "1"}),
              0);
    EXPECT_EQ(read_job_manifest(out("grid") / "jobs.csv").size(), 20u * 25u);
    const auto vocoded = load_manifest(out("grid") / "vocoded_manifest.csv", {.check_files = false});
    EXPECT_EQ(vocoded.entries().size(), 500u);
    EXPECT_NE(vocoded.find(set_.ids[40] + "__dim2__a-6"), nullptr);

    EXPECT_EQ(run({"manipulate", "--manifest", manifest(), "--model-file", model_file, "--dim", "9", "--out",
                   out("bad")}),
              cli::kUsage);
    EXPECT_EQ(run({"manipulate", "--manifest", manifest(), "--model-file", model_file, "--dim", "1",
                   "--alphas=1,2", "--out", out("bad")}),
              cli::kUsage);
}

TEST_F(CliProject, ReportAggregatesMeasuredSweep) {
    ASSERT_EQ(run({"pca-fit", "--manifest", manifest(), "--split", "all", "--k", "8", "--out", out("pca")}), 0);
    ASSERT_EQ(run({"manipulate", "--manifest", manifest(), "--model-file", out("pca") / "pca_model.bin", "--dim", "1",
                   "--alphas=-1,0,1", "--split", "dev", "--out", out("m")}),
              0);
    // Stand-in for vocoding plus extraction: pitch follows alpha.
    std::vector<CharacteristicRow> rows;
    for (const auto& j : read_job_manifest(out("m") / "jobs.csv")) {
        CharacteristicRow r{j.output_wav_path.stem().string(), {}};
        r.values.f0_mean = 150.0 + 30.0 * j.alpha;
        r.values.intensity_mean = 60.0;
        rows.push_back(r);
    }
    rows.pop_back();
    write_characteristics_csv(out("measured.csv"), rows);
    ASSERT_EQ(run({"report", "--job-manifest", out("m") / "jobs.csv", "--characteristics", out("measured.csv"),
                   "--out", out("rep")}),
              0);
    const auto response = csv::read_file(out("rep") / "response.csv");
    EXPECT_EQ(response.rows.size(), 3u * kCharacteristicCount);
    EXPECT_EQ(response.rows[0][0], "-1");
    EXPECT_EQ(response.rows[0][2], "120");
    EXPECT_EQ(csv::read_file(out("rep") / "report_missing.csv").rows.size(), 1u);
    const auto leak = csv::read_file(out("rep") / "leakage.csv");
    EXPECT_EQ(leak.rows[0][4], "60");
}

TEST(CliExtract, PerUtteranceFailuresGoToSidecar) {
    voxdim::testing::TempDir dir;
    std::string text = "utterance_id,audio_path,feature_path,alignment_id,speaker_id,gender,split\n";
    for (int i = 0; i < 3; ++i) {
        const std::string id = "v" + std::to_string(i);
        write_wav(dir.path() / (id + ".wav"),
                  AudioBuffer(voxdim::testing::voiced_vowel(120.0 + 40.0 * i, 0.6, 16000), 16000));
        text += id + "," + id + ".wav,,,s" + std::to_string(i) + ",female,dev\n";
    }
    std::ofstream(dir.path() / "broken.wav") << "not a wav";
    text += "broken,broken.wav,,,s9,male,dev\n";
    std::ofstream(dir.path() / "m.csv") << text;

    ASSERT_EQ(run({"extract", "--manifest", dir.path() / "m.csv", "--out", dir.path() / "out", "--jobs", "2"}), 0);
    const auto rows = read_characteristics_csv(dir.path() / "out" / "characteristics.csv");
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_NEAR(rows[2].values.f0_mean, 200.0, 2.0);
    const auto errors = csv::read_file(dir.path() / "out" / "extract_errors.csv");
    ASSERT_EQ(errors.rows.size(), 1u);
    EXPECT_EQ(errors.rows[0][0], "broken");

    std::ofstream(dir.path() / "empty.csv") << "utterance_id,audio_path,feature_path,alignment_id,speaker_id,gender,split\n";
    EXPECT_EQ(run({"extract", "--manifest", dir.path() / "empty.csv", "--out", dir.path() / "o2"}), cli::kUsage);
}
