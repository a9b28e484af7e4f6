#include "support/synth.hpp"
#include "support/temp_dir.hpp"

#include "voxdim/audio.hpp"
#include "voxdim/error.hpp"
#include "voxdim/features.hpp"
#include "voxdim/manifest.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

using namespace voxdim;
using voxdim::testing::TempDir;

namespace {

template <typename F>
Errc error_code(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected voxdim::Error";
    return Errc::invalid_argument;
}

// Hand-built NPY v1.0 file (independent of the writer under test).
void write_raw_npy(const std::filesystem::path& path, const std::string& dict, const std::string& payload) {
    std::string header = dict;
    while ((10 + header.size() + 1) % 64 != 0) header.push_back(' ');
    header.push_back('\n');
    std::ofstream out(path, std::ios::binary);
    out.write("\x93NUMPY\x01\x00", 8);
    const auto len = static_cast<std::uint16_t>(header.size());
    out.write(reinterpret_cast<const char*>(&len), 2);
    out << header << payload;
}

template <typename T>
std::string pack(std::initializer_list<T> values) {
    std::string out;
    for (T v : values) out.append(reinterpret_cast<const char*>(&v), sizeof(T));
    return out;
}

RowMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    RowMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
    return m;
}

std::string file_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

// ---------------------------------------------------------------- NPY

TEST(Npy, ReadsNumpyLayoutFloat64) {
    TempDir dir;
    write_raw_npy(dir.path() / "a.npy", "{'descr': '<f8', 'fortran_order': False, 'shape': (2, 2), }",
                  pack<double>({1, 2, 3, 4}));
    const auto seq = read_feature_matrix(dir.path() / "a.npy");
    ASSERT_EQ(seq.length(), 2);
    ASSERT_EQ(seq.dim(), 2);
    EXPECT_EQ(seq.frames(0, 0), 1.0);
    EXPECT_EQ(seq.frames(0, 1), 2.0);
    EXPECT_EQ(seq.frames(1, 0), 3.0);
    EXPECT_EQ(seq.frames(1, 1), 4.0);
}

TEST(Npy, ReadsFortranOrder) {
    TempDir dir;
    write_raw_npy(dir.path() / "f.npy", "{'descr': '<f4', 'fortran_order': True, 'shape': (2, 3), }",
                  pack<float>({1, 4, 2, 5, 3, 6}));
    const auto m = read_npy_matrix(dir.path() / "f.npy");
    RowMatrix expected(2, 3);
    expected << 1, 2, 3, 4, 5, 6;
    EXPECT_EQ(m, expected);
}

TEST(Npy, RejectsOneDimensionalArray) {
    TempDir dir;
    write_raw_npy(dir.path() / "v.npy", "{'descr': '<f4', 'fortran_order': False, 'shape': (3,), }",
                  pack<float>({1, 2, 3}));
    EXPECT_EQ(error_code([&] { read_feature_matrix(dir.path() / "v.npy"); }), Errc::rank_error);
}

TEST(Npy, DistinctParseErrors) {
    TempDir dir;
    write_raw_npy(dir.path() / "t.npy", "{'descr': '<f4', 'fortran_order': False, 'shape': (2, 2), }",
                  pack<float>({1, 2, 3}));
    EXPECT_EQ(error_code([&] { read_npy_matrix(dir.path() / "t.npy"); }), Errc::truncated);

    write_raw_npy(dir.path() / "n.npy", "{'descr': '<f4', 'fortran_order': False, 'shape': (1, 2), }",
                  pack<float>({1, std::numeric_limits<float>::quiet_NaN()}));
    EXPECT_EQ(error_code([&] { read_npy_matrix(dir.path() / "n.npy"); }), Errc::non_finite);

    write_raw_npy(dir.path() / "i.npy", "{'descr': '<i4', 'fortran_order': False, 'shape': (1, 1), }",
                  pack<std::int32_t>({1}));
    EXPECT_EQ(error_code([&] { read_npy_matrix(dir.path() / "i.npy"); }), Errc::parse_error);

    std::ofstream(dir.path() / "junk.npy") << "not numpy";
    EXPECT_EQ(error_code([&] { read_npy_matrix(dir.path() / "junk.npy"); }), Errc::parse_error);

    EXPECT_EQ(error_code([&] { read_npy_matrix(dir.path() / "absent.npy"); }), Errc::io_error);
}

TEST(Npy, WriterProducesNumpyHeader) {
    TempDir dir;
    RowMatrix m(3, 2);
    m << 1, 2, 3, 4, 5, 6;
    write_npy_matrix(dir.path() / "w.npy", m);
    const auto bytes = file_bytes(dir.path() / "w.npy");
    ASSERT_GE(bytes.size(), 64u + 24u);
    EXPECT_EQ(bytes.substr(0, 8), std::string("\x93NUMPY\x01\x00", 8));
    std::uint16_t len;
    std::memcpy(&len, bytes.data() + 8, 2);
    EXPECT_EQ((10 + len) % 64, 0);
    EXPECT_EQ(bytes[10 + len - 1], '\n');
    const std::string header = bytes.substr(10, len);
    EXPECT_NE(header.find("'descr': '<f4'"), std::string::npos);
    EXPECT_NE(header.find("'fortran_order': False"), std::string::npos);
    EXPECT_NE(header.find("'shape': (3, 2)"), std::string::npos);
    EXPECT_EQ(bytes.size(), 10u + len + 6 * 4);
    float first;
    std::memcpy(&first, bytes.data() + 10 + len, 4);
    EXPECT_EQ(first, 1.0f);
}

TEST(Npy, SingleCellRoundTrip) {
    TempDir dir;
    FeatureSequence seq{RowMatrix::Constant(1, 1, 0.5), {}};
    write_feature_matrix(dir.path() / "one.npy", seq);
    EXPECT_EQ(read_feature_matrix(dir.path() / "one.npy").frames, seq.frames);
}

TEST(Npy, Float32QuantizationBound) {
    TempDir dir;
    std::mt19937_64 rng(42);
    FeatureSequence seq{random_matrix(3, 1024, rng), {}};
    write_feature_matrix(dir.path() / "r.npy", seq);
    const auto back = read_feature_matrix(dir.path() / "r.npy");
    EXPECT_LE((back.frames - seq.frames).cwiseAbs().maxCoeff(), std::ldexp(1.0, -20));
}

TEST(Npy, RoundTripIsLosslessAt32Bits) {
    TempDir dir;
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> dim(1, 40);
    std::lognormal_distribution<double> magnitude(0.0, 4.0);
    for (int trial = 0; trial < 25; ++trial) {
        RowMatrix m = random_matrix(dim(rng), dim(rng), rng) * magnitude(rng);
        const RowMatrix as_float = m.cast<float>().cast<double>();
        write_npy_matrix(dir.path() / "p.npy", m);
        const auto once = read_npy_matrix(dir.path() / "p.npy");
        EXPECT_EQ(once, as_float);
        // A second pass through the writer is the identity.
        write_npy_matrix(dir.path() / "q.npy", once);
        EXPECT_EQ(file_bytes(dir.path() / "p.npy"), file_bytes(dir.path() / "q.npy"));
    }
}

TEST(Npy, UnwritablePath) {
    TempDir dir;
    FeatureSequence seq{RowMatrix::Zero(1, 1), {}};
    EXPECT_EQ(error_code([&] { write_feature_matrix(dir.path() / "no" / "such" / "dir.npy", seq); }), Errc::io_error);
}

// ---------------------------------------------------------------- averaging

TEST(Average, ConstantSequence) {
    Eigen::RowVector3d v(0.25, -1.5, 3.0);
    FeatureSequence seq{v.replicate(7, 1), {"u", 6, "m"}};
    const auto e = average_utterance(seq);
    EXPECT_EQ(e.vector, v.transpose());
    EXPECT_EQ(e.meta.utterance_id, "u");
    EXPECT_EQ(e.meta.layer, 6);
}

TEST(Average, SingleFrameAndTwoPoints) {
    RowMatrix one(1, 2);
    one << 0.1, 0.2;
    EXPECT_EQ(average_utterance({one, {}}).vector, one.row(0).transpose());
    RowMatrix two(2, 2);
    two << 1, 3, 3, 5;
    EXPECT_EQ(average_utterance({two, {}}).vector, Eigen::Vector2d(2, 4));
}

TEST(Average, CommutesWithFramePermutation) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const RowMatrix m = random_matrix(1 + trial * 7, 9, rng);
        std::vector<Eigen::Index> order(static_cast<std::size_t>(m.rows()));
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        RowMatrix p(m.rows(), m.cols());
        for (Eigen::Index i = 0; i < m.rows(); ++i) p.row(i) = m.row(order[static_cast<std::size_t>(i)]);
        EXPECT_LE((average_utterance({m, {}}).vector - average_utterance({p, {}}).vector).cwiseAbs().maxCoeff(), 1e-15);
    }
}

TEST(Average, SelfConcatenationIsExact) {
    std::mt19937_64 rng(5);
    for (Eigen::Index t : {1, 2, 3, 5, 17, 64, 101}) {
        const RowMatrix m = random_matrix(t, 13, rng) * 1e3;
        RowMatrix mm(2 * t, 13);
        mm << m, m;
        EXPECT_EQ(average_utterance({mm, {}}).vector, average_utterance({m, {}}).vector) << t;
    }
}

// ---------------------------------------------------------------- manifest

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

// 10 speakers (5 female, 5 male) with 10 utterances each.
std::string curated_manifest(const std::filesystem::path& dir) {
    std::string text = "utterance_id,audio_path,feature_path,alignment_id,speaker_id,gender,split\n";
    for (int s = 0; s < 10; ++s) {
        for (int u = 0; u < 10; ++u) {
            const std::string id = "spk" + std::to_string(s) + "_" + std::to_string(u);
            write_text(dir / (id + ".wav"), "x");
            text += id + "," + id + ".wav,,," + "spk" + std::to_string(s) + "," + (s < 5 ? "female" : "male") + ",dev\n";
        }
    }
    return text;
}

}  // namespace

TEST(Manifest, CuratedDevSetBalance) {
    TempDir dir;
    write_text(dir.path() / "m.csv", curated_manifest(dir.path()));
    const auto manifest = load_manifest(dir.path() / "m.csv");
    ASSERT_EQ(manifest.entries().size(), 100u);
    const auto balance = manifest.balance();
    ASSERT_TRUE(balance.contains(Split::dev));
    const auto& dev = balance.at(Split::dev);
    EXPECT_EQ(dev.utterances, 100u);
    EXPECT_EQ(dev.speakers, 10u);
    EXPECT_EQ(dev.female_speakers, 5u);
    EXPECT_EQ(dev.male_speakers, 5u);
    for (const auto& [speaker, count] : dev.utterances_per_speaker) EXPECT_EQ(count, 10u) << speaker;
    EXPECT_EQ(manifest.entries().front().audio_path, dir.path() / "spk0_0.wav");
    EXPECT_NE(manifest.find("spk9_9"), nullptr);
    EXPECT_EQ(manifest.find("nope"), nullptr);
}

TEST(Manifest, DuplicateIds) {
    TempDir dir;
    write_text(dir.path() / "m.csv",
               "utterance_id,audio_path,feature_path,alignment_id,speaker_id,gender,split\n"
               "a,,,,s1,female,train\na,,,,s1,female,dev\n");
    EXPECT_EQ(error_code([&] { load_manifest(dir.path() / "m.csv"); }), Errc::validation_error);
}

TEST(Manifest, UnknownGenderNamesRow) {
    TempDir dir;
    write_text(dir.path() / "m.csv",
               "utterance_id,audio_path,feature_path,alignment_id,speaker_id,gender,split\n"
               "a,,,,s1,female,train\nb,,,,s2,unknown,train\n");
    try {
        load_manifest(dir.path() / "m.csv");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::validation_error);
        EXPECT_NE(std::string(e.what()).find("row 2 ('b')"), std::string::npos) << e.what();
        EXPECT_NE(std::string(e.what()).find("unknown"), std::string::npos);
    }
}

TEST(Manifest, MissingFilesAreListed) {
    TempDir dir;
    write_text(dir.path() / "m.csv",
               "utterance_id,audio_path,feature_path,alignment_id,speaker_id,gender,split\n"
               "a,a.wav,a.npy,,s1,female,train\n");
    EXPECT_EQ(error_code([&] { load_manifest(dir.path() / "m.csv"); }), Errc::validation_error);
    EXPECT_NO_THROW(load_manifest(dir.path() / "m.csv", {.check_files = false}));
}

TEST(Manifest, ConflictingSpeakerGender) {
    TempDir dir;
    write_text(dir.path() / "m.csv",
               "utterance_id,audio_path,feature_path,alignment_id,speaker_id,gender,split\n"
               "a,,,,s1,female,train\nb,,,,s1,male,train\n");
    EXPECT_EQ(error_code([&] { load_manifest(dir.path() / "m.csv"); }), Errc::validation_error);
}

TEST(Manifest, BadHeader) {
    TempDir dir;
    write_text(dir.path() / "m.csv", "id,path\na,b\n");
    EXPECT_EQ(error_code([&] { load_manifest(dir.path() / "m.csv"); }), Errc::parse_error);
}

TEST(Manifest, WriteThenLoad) {
    TempDir dir;
    DatasetManifest m({{"u1", {}, dir.path() / "u1.npy", "u1", "s", Gender::male, Split::test}});
    write_manifest(dir.path() / "m.csv", m);
    const auto back = load_manifest(dir.path() / "m.csv", {.check_files = false});
    ASSERT_EQ(back.entries().size(), 1u);
    EXPECT_EQ(back.entries()[0].feature_path, dir.path() / "u1.npy");
    EXPECT_EQ(back.entries()[0].alignment_id, "u1");
    EXPECT_EQ(back.entries()[0].split, Split::test);
}

// ---------------------------------------------------------------- WAV

TEST(Wav, Pcm16RoundTrip) {
    TempDir dir;
    const auto x = voxdim::testing::sine(300.0, 0.1, 16000, 0.6);
    write_wav(dir.path() / "a.wav", AudioBuffer(x, 16000));
    const auto back = read_wav(dir.path() / "a.wav");
    EXPECT_EQ(back.sample_rate(), 16000);
    ASSERT_EQ(back.size(), x.size());
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(back.samples()[i], x[i], 1.0 / 32768.0);
}

TEST(Wav, Float32RoundTrip) {
    TempDir dir;
    const auto x = voxdim::testing::sine(300.0, 0.1, 22050, 0.9);
    write_wav(dir.path() / "f.wav", AudioBuffer(x, 22050), WavEncoding::float32);
    const auto back = read_wav(dir.path() / "f.wav");
    EXPECT_EQ(back.sample_rate(), 22050);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(back.samples()[i], static_cast<double>(static_cast<float>(x[i])));
}

TEST(Wav, RejectsStereo) {
    TempDir dir;
    std::string bytes = "RIFF";
    bytes += pack<std::uint32_t>({36 + 8});
    bytes += "WAVEfmt ";
    bytes += pack<std::uint32_t>({16});
    bytes += pack<std::uint16_t>({1, 2});
    bytes += pack<std::uint32_t>({16000, 64000});
    bytes += pack<std::uint16_t>({4, 16});
    bytes += "data";
    bytes += pack<std::uint32_t>({8});
    bytes += pack<std::int16_t>({1, 2, 3, 4});
    std::ofstream(dir.path() / "s.wav", std::ios::binary) << bytes;
    EXPECT_EQ(error_code([&] { read_wav(dir.path() / "s.wav"); }), Errc::invalid_argument);
}

TEST(Wav, RejectsGarbageAndBadBuffers) {
    TempDir dir;
    std::ofstream(dir.path() / "g.wav") << "hello";
    EXPECT_EQ(error_code([&] { read_wav(dir.path() / "g.wav"); }), Errc::parse_error);
    EXPECT_EQ(error_code([] { AudioBuffer({}, 16000); }), Errc::invalid_argument);
    EXPECT_EQ(error_code([] { AudioBuffer({0.0}, 4000); }), Errc::invalid_argument);
    EXPECT_EQ(error_code([] { AudioBuffer({std::numeric_limits<double>::infinity()}, 16000); }), Errc::non_finite);
}
