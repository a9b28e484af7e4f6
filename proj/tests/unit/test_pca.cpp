#include "support/temp_dir.hpp"

#include "voxdim/error.hpp"
#include "voxdim/pca.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
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

// Random data with a well separated spectrum: gaussian columns scaled
// geometrically, rotated by a random orthogonal matrix, plus an offset.
RowMatrix spread_data(Eigen::Index n, Eigen::Index d, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Eigen::MatrixXd z(n, d), q(d, d);
    for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = g(rng);
    for (Eigen::Index i = 0; i < q.size(); ++i) q.data()[i] = g(rng);
    const Eigen::MatrixXd rot = Eigen::HouseholderQR<Eigen::MatrixXd>(q).householderQ();
    for (Eigen::Index j = 0; j < d; ++j) z.col(j) *= std::pow(0.85, static_cast<double>(j)) * 3.0;
    RowMatrix x = z * rot.transpose();
    x.rowwise() += Eigen::RowVectorXd::LinSpaced(d, -2.0, 5.0);
    return x;
}

struct CovOracle {
    Eigen::VectorXd variances;  // descending
    Eigen::MatrixXd vectors;    // columns, matching order, oriented
};

CovOracle covariance_oracle(const RowMatrix& x) {
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Eigen::MatrixXd c = x.rowwise() - mean;
    const Eigen::MatrixXd cov = c.transpose() * c / static_cast<double>(x.rows() - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    CovOracle o;
    o.variances = es.eigenvalues().reverse();
    o.vectors = es.eigenvectors().rowwise().reverse();
    for (Eigen::Index j = 0; j < o.vectors.cols(); ++j) {
        Eigen::Index arg;
        o.vectors.col(j).cwiseAbs().maxCoeff(&arg);
        if (o.vectors(arg, j) < 0) o.vectors.col(j) *= -1.0;
    }
    return o;
}

double sample_std(const Eigen::VectorXd& v) {
    const double m = v.mean();
    return std::sqrt((v.array() - m).square().sum() / static_cast<double>(v.size() - 1));
}

}  // namespace

TEST(Pca, CollinearDataHasFullExplainedVariance) {
    RowMatrix x(5, 2);
    x << -2, -1, 0, 0, 1, 0.5, 3, 1.5, 8, 4;
    const auto m = fit_pca(x, 1);
    EXPECT_NEAR(m.explained_variance_ratio(0), 1.0, 1e-9);
    EXPECT_NEAR(std::abs(m.directions(0, 0)), 2.0 / std::sqrt(5.0), 1e-12);
    EXPECT_GT(m.directions(0, 0), 0.0);
}

TEST(Pca, MatchesCovarianceEigendecomposition) {
    std::mt19937_64 rng(11);
    const RowMatrix x = spread_data(200, 10, rng);
    const auto m = fit_pca(x, 10);
    const auto o = covariance_oracle(x);
    for (Eigen::Index i = 0; i < 10; ++i) {
        EXPECT_NEAR(m.stddevs(i), std::sqrt(o.variances(i)), 1e-9) << i;
        EXPECT_LE((m.directions.row(i).transpose() - o.vectors.col(i)).cwiseAbs().maxCoeff(), 1e-9) << i;
    }
}

TEST(Pca, PaperScaleShape) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    RowMatrix x(400, 1024);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
    const auto m = fit_pca(x, 50);
    EXPECT_EQ(m.components(), 50);
    EXPECT_EQ(m.dim(), 1024);
    EXPECT_EQ(m.n_train, 400u);
    for (Eigen::Index i = 1; i < 50; ++i) EXPECT_GE(m.stddevs(i - 1), m.stddevs(i));
}

TEST(Pca, Invariants) {
    std::mt19937_64 rng(2);
    const RowMatrix x = spread_data(150, 12, rng);
    const auto m = fit_pca(x, 7);
    const Eigen::MatrixXd gram = m.directions * m.directions.transpose();
    EXPECT_LE((gram - Eigen::MatrixXd::Identity(7, 7)).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE(m.explained_variance_ratio.sum(), 1.0 + 1e-9);

    const RowMatrix coords = project_rows(m, x);
    double total = 0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const Eigen::VectorXd col = x.col(j);
        total += std::pow(sample_std(col), 2) * static_cast<double>(x.rows() - 1);
    }
    for (Eigen::Index i = 0; i < 7; ++i) {
        EXPECT_NEAR(sample_std(coords.col(i)), m.stddevs(i), 1e-6 * m.stddevs(i));
        EXPECT_NEAR(m.explained_variance_ratio(i),
                    m.stddevs(i) * m.stddevs(i) * static_cast<double>(x.rows() - 1) / total, 1e-9);
        if (i > 0) {
            EXPECT_GE(m.explained_variance_ratio(i - 1), m.explained_variance_ratio(i));
            EXPECT_GT(m.stddevs(i), 0.0);
        }
    }
}

TEST(Pca, PermutationAndOffsetInvariance) {
    std::mt19937_64 rng(4);
    const RowMatrix x = spread_data(120, 8, rng);
    const auto base = fit_pca(x, 5);

    std::vector<Eigen::Index> order(120);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    RowMatrix p(120, 8);
    for (Eigen::Index i = 0; i < 120; ++i) p.row(i) = x.row(order[static_cast<std::size_t>(i)]);
    const auto permuted = fit_pca(p, 5);
    EXPECT_LE((permuted.directions - base.directions).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE((permuted.stddevs - base.stddevs).cwiseAbs().maxCoeff(), 1e-9);

    const Eigen::RowVectorXd offset = Eigen::RowVectorXd::Constant(8, 100.0);
    const RowMatrix shifted = x.rowwise() + offset;
    const auto moved = fit_pca(shifted, 5);
    EXPECT_LE((moved.directions - base.directions).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE((moved.stddevs - base.stddevs).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE((moved.mean - base.mean - offset.transpose()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Pca, Errors) {
    std::mt19937_64 rng(5);
    const RowMatrix x = spread_data(10, 6, rng);
    EXPECT_EQ(error_code([&] { fit_pca(x, 10); }), Errc::invalid_argument);
    EXPECT_EQ(error_code([&] { fit_pca(x.topRows(4), 4); }), Errc::insufficient_data);
    EXPECT_EQ(error_code([&] { fit_pca(x, 0); }), Errc::invalid_argument);

    RowMatrix flat(20, 3);
    for (Eigen::Index i = 0; i < 20; ++i) flat.row(i) << static_cast<double>(i), 2.0 * i, 1.0;
    try {
        fit_pca(flat, 2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::rank_deficient);
        EXPECT_NE(std::string(e.what()).find("rank 1"), std::string::npos) << e.what();
    }

    std::vector<UtteranceEmbedding> mixed{{Eigen::VectorXd::Zero(3), {"a"}}, {Eigen::VectorXd::Zero(4), {"b"}}};
    EXPECT_EQ(error_code([&] { fit_pca(mixed, 1); }), Errc::dimension_mismatch);
}

TEST(Projection, Examples) {
    std::mt19937_64 rng(6);
    const RowMatrix x = spread_data(80, 6, rng);
    const auto m = fit_pca(x, 4);
    EXPECT_LE(project(m, m.mean).cwiseAbs().maxCoeff(), 1e-12);

    const Eigen::VectorXd e1 = m.mean + m.stddevs(0) * m.directions.row(0).transpose();
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(4);
    expected(0) = m.stddevs(0);
    EXPECT_LE((project(m, e1) - expected).cwiseAbs().maxCoeff(), 1e-9);

    std::normal_distribution<double> g;
    Eigen::VectorXd r(6);
    for (auto& v : r) v = g(rng);
    const Eigen::VectorXd c = project(m, r);
    for (Eigen::Index i = 0; i < 4; ++i) {
        double dot = 0;
        for (Eigen::Index j = 0; j < 6; ++j) dot += m.directions(i, j) * (r(j) - m.mean(j));
        EXPECT_NEAR(c(i), dot, 1e-12);
    }
    EXPECT_EQ(error_code([&] { project(m, Eigen::VectorXd::Zero(5)); }), Errc::dimension_mismatch);
}

TEST(Projection, ReconstructRoundTrips) {
    std::mt19937_64 rng(7);
    const RowMatrix x = spread_data(90, 6, rng);
    const auto partial = fit_pca(x, 3);
    EXPECT_EQ(reconstruct(partial, Eigen::VectorXd::Zero(3)), partial.mean);
    const Eigen::Vector3d c(0.3, -1.2, 2.5);
    EXPECT_LE((project(partial, reconstruct(partial, c)) - c).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_EQ(error_code([&] { reconstruct(partial, Eigen::VectorXd::Zero(4)); }), Errc::dimension_mismatch);

    const auto full = fit_pca(x, 6);
    for (Eigen::Index i = 0; i < 10; ++i) {
        const Eigen::VectorXd row = x.row(i).transpose();
        EXPECT_LE((reconstruct(full, project(full, row)) - row).norm(), 1e-7 * row.norm());
    }
}

TEST(ModelFile, RoundTripIsBitIdentical) {
    TempDir dir;
    std::mt19937_64 rng(8);
    const auto m = fit_pca(spread_data(60, 9, rng), 4);
    save_model(m, dir.path() / "m.bin");
    const auto back = load_model(dir.path() / "m.bin");
    EXPECT_EQ(back.n_train, m.n_train);
    EXPECT_EQ(back.mean, m.mean);
    EXPECT_EQ(back.directions, m.directions);
    EXPECT_EQ(back.stddevs, m.stddevs);
    EXPECT_EQ(back.explained_variance_ratio, m.explained_variance_ratio);
}

TEST(ModelFile, DistinctErrors) {
    TempDir dir;
    std::mt19937_64 rng(9);
    const auto m = fit_pca(spread_data(60, 9, rng), 4);
    const auto path = dir.path() / "m.bin";
    save_model(m, path);
    std::string bytes;
    {
        std::ifstream in(path, std::ios::binary);
        bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    auto write = [&](const std::string& b) { std::ofstream(path, std::ios::binary | std::ios::trunc) << b; };

    write(bytes.substr(0, bytes.size() - 20));
    EXPECT_EQ(error_code([&] { load_model(path); }), Errc::corrupt);

    std::string v2 = bytes;
    const std::uint32_t two = 2;
    std::memcpy(v2.data() + 8, &two, 4);
    write(v2);
    EXPECT_EQ(error_code([&] { load_model(path); }), Errc::version_mismatch);

    std::string flipped = bytes;
    flipped[100] ^= 0x01;
    write(flipped);
    EXPECT_EQ(error_code([&] { load_model(path); }), Errc::corrupt);

    write("hello");
    EXPECT_EQ(error_code([&] { load_model(path); }), Errc::corrupt);
    EXPECT_EQ(error_code([&] { load_model(dir.path() / "absent.bin"); }), Errc::io_error);
}
