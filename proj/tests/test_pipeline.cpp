#include "men/model_io.hpp"
#include "men/pipeline.hpp"
#include "men/synthetic.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace men;

namespace {

pipeline::FitConfig raw_cfg(Index d, int k) {
    pipeline::FitConfig cfg;
    cfg.d = d;
    cfg.K = k;
    cfg.pca_retain = 0;
    return cfg;
}

}  // namespace

TEST(Pca, LosslessAtFullRank) {
    std::mt19937_64 rng(1);
    const Matrix x = oracle::random_matrix(8, 12, rng);
    const pca::PcaResult r = pca::pca_preprocess(x, 7);
    const Matrix back = (r.reduced * r.basis.transpose()).rowwise() + r.mean.transpose();
    EXPECT_LE((back - x).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE((r.basis.transpose() * r.basis - Matrix::Identity(7, 7)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Pca, ExactOnTwoDimensionalSubspace) {
    std::mt19937_64 rng(2);
    const Matrix x = oracle::random_matrix(15, 2, rng) * oracle::random_matrix(2, 6, rng);
    const pca::PcaResult r = pca::pca_preprocess(x, 2);
    const Matrix back = (r.reduced * r.basis.transpose()).rowwise() + r.mean.transpose();
    EXPECT_LE((back - x).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Pca, CapturedVarianceMatchesCovarianceEigenvalues) {
    std::mt19937_64 rng(3);
    const Matrix x = oracle::random_matrix(30, 9, rng);
    const pca::PcaResult r = pca::pca_preprocess(x, 5);
    const Matrix centered = x.rowwise() - x.colwise().mean();
    const Matrix cov = centered.transpose() * centered / 29.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
    const double top5 = es.eigenvalues().tail(5).sum();
    EXPECT_NEAR(r.variances.sum(), top5, 1e-10);
    EXPECT_NEAR(r.reduced.colwise().squaredNorm().sum() / 29.0, top5, 1e-10);
}

TEST(Pca, RetainOutOfRange) {
    std::mt19937_64 rng(4);
    const Matrix x = oracle::random_matrix(5, 10, rng);
    EXPECT_THROW(pca::pca_preprocess(x, 0), Error);
    EXPECT_THROW(pca::pca_preprocess(x, 5), Error);
    EXPECT_NO_THROW(pca::pca_preprocess(x, 4));
}

TEST(Fit, SelectsInformativeFeatures) {
    const SampleSet s = synthetic::sparse_signal_classes(2, 20, 10, 2, 0.3, 2.0, 11);
    const pipeline::FitResult fr = pipeline::fit(s, raw_cfg(1, 2));
    const Vector w = fr.model.w.col(0);
    EXPECT_EQ((w.array() != 0.0).count(), 2);
    for (Index j = 2; j < 10; ++j) EXPECT_EQ(w(j), 0.0);
    // per-feature class separation statistic agrees with the selection
    const Vector gap = (s.data().topRows(20).colwise().mean() - s.data().bottomRows(20).colwise().mean()).cwiseAbs();
    Index arg;
    gap.maxCoeff(&arg);
    EXPECT_LT(arg, 2);
}

TEST(Fit, NoPenaltiesGiveLeastSquaresPerColumn) {
    const SampleSet s = synthetic::sparse_signal_classes(3, 12, 6, 3, 0.5, 1.0, 12);
    pipeline::FitConfig cfg = raw_cfg(2, 6);
    cfg.men.alpha = 0.0;
    cfg.men.lambda2 = 0.0;
    const pipeline::FitResult fr = pipeline::fit(s, cfg);
    const indicator::IndicatorMatrix ind = indicator::build_indicator(s, 2);
    for (Index t = 0; t < 2; ++t) {
        const Vector ols = s.data().colPivHouseholderQr().solve(ind.values.col(t));
        EXPECT_LE((fr.model.w.col(t) - ols).cwiseAbs().maxCoeff(), 1e-8 * (1.0 + ols.cwiseAbs().maxCoeff()));
    }
}

TEST(Fit, DeterministicAcrossRunsAndThreads) {
    const SampleSet s = synthetic::sparse_signal_classes(4, 10, 30, 5, 0.3, 1.0, 13);
    pipeline::FitConfig cfg;
    cfg.d = 3;
    const pipeline::FitResult a = pipeline::fit(s, cfg);
    cfg.threads = 3;
    const pipeline::FitResult b = pipeline::fit(s, cfg);
    EXPECT_EQ(model_io::serialize(a.model), model_io::serialize(b.model));
    EXPECT_TRUE((a.model.w.array() == b.model.w.array()).all());
}

TEST(Fit, ColumnsRespectSparsityAndMonotoneObjective) {
    const SampleSet s = synthetic::sparse_signal_classes(3, 15, 40, 5, 0.3, 1.0, 14);
    pipeline::FitConfig cfg = raw_cfg(2, 7);
    const pipeline::FitResult fr = pipeline::fit(s, cfg);
    for (Index nnz : fr.model.sparsity()) EXPECT_LE(nnz, 7);
    EXPECT_TRUE(fr.model.w.allFinite());
    for (const auto& col : fr.report.columns)
        for (std::size_t k = 1; k < col.objective.size(); ++k) EXPECT_LT(col.objective[k], col.objective[k - 1] + 1e-12);
    EXPECT_EQ(fr.report.column_angles.rows(), 2);
    EXPECT_NEAR(fr.report.column_angles(0, 0), 0.0, 1e-6);
    std::vector<std::string> stages;
    for (const auto& [name, ms] : fr.report.stage_ms) stages.push_back(name);
    EXPECT_EQ(stages, (std::vector<std::string>{"pca", "alignment", "indicator", "transform", "lars"}));
}

TEST(Fit, StageIsNamedInErrors) {
    const SampleSet s = synthetic::sparse_signal_classes(2, 6, 5, 2, 0.3, 1.0, 15);
    try {
        pipeline::fit(s, raw_cfg(3, 2));
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_EQ(e.stage(), "indicator");
    }
    EXPECT_THROW(pipeline::fit(s, raw_cfg(1, 0)), Error);
}

TEST(Fit, ClampedPatchesAreReported) {
    const SampleSet s = synthetic::sparse_signal_classes(2, 3, 4, 2, 0.3, 1.0, 16);
    const pipeline::FitResult fr = pipeline::fit(s, raw_cfg(1, 2));
    bool clamped = false;
    for (const auto& w : fr.report.warnings) clamped |= w.find("clamped") != std::string::npos;
    EXPECT_TRUE(clamped);
}

TEST(Fit, PcaReducesWhenRequested) {
    const SampleSet s = synthetic::sparse_signal_classes(3, 5, 40, 4, 0.3, 1.0, 17);
    pipeline::FitConfig cfg;
    const pipeline::FitResult fr = pipeline::fit(s, cfg);
    EXPECT_TRUE(fr.model.has_pca());
    EXPECT_EQ(fr.model.w.rows(), 14);
    EXPECT_EQ(fr.model.input_features(), 40);
    EXPECT_EQ(fr.model.raw_space_w().rows(), 40);
}

TEST(Project, ZeroModelGivesZeroEmbedding) {
    pipeline::Model m;
    m.w = Matrix::Zero(3, 2);
    std::mt19937_64 rng(5);
    EXPECT_EQ(pipeline::project(m, oracle::random_matrix(4, 3, rng)), Matrix::Zero(4, 2));
}

TEST(Project, SingleNonzero) {
    pipeline::Model m;
    m.w = Matrix::Zero(3, 1);
    m.w(1, 0) = 2.0;
    Matrix x(1, 3);
    x << 5, 7, 9;
    EXPECT_EQ(pipeline::project(m, x)(0, 0), 14.0);
}

TEST(Project, MatchesTripleLoop) {
    std::mt19937_64 rng(6);
    pipeline::Model m;
    m.w = oracle::random_matrix(5, 3, rng);
    m.pca_basis = oracle::random_matrix(8, 5, rng);
    m.pca_mean = oracle::random_vector(8, rng);
    const Matrix x = oracle::random_matrix(4, 8, rng);
    const Matrix z = pipeline::project(m, x);
    for (Index i = 0; i < 4; ++i)
        for (Index t = 0; t < 3; ++t) {
            double acc = 0.0;
            for (Index k = 0; k < 5; ++k) {
                double r = 0.0;
                for (Index j = 0; j < 8; ++j) r += (x(i, j) - m.pca_mean(j)) * m.pca_basis(j, k);
                acc += r * m.w(k, t);
            }
            EXPECT_NEAR(z(i, t), acc, 1e-12);
        }
}

TEST(Project, DimensionMismatch) {
    pipeline::Model m;
    m.w = Matrix::Zero(3, 1);
    try {
        pipeline::project(m, Matrix::Zero(2, 4));
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_EQ(e.stage(), "project");
        EXPECT_NE(e.reason().find("4"), std::string::npos);
    }
}

TEST(ModelIo, RoundTripIsExact) {
    const SampleSet s = synthetic::sparse_signal_classes(3, 6, 10, 3, 0.3, 1.0, 18);
    pipeline::FitConfig cfg;
    cfg.K = 4;
    const pipeline::FitResult fr = pipeline::fit(s, cfg);
    const std::string buf = model_io::serialize(fr.model);
    ASSERT_EQ(buf.substr(0, 4), "MEN1");
    const pipeline::Model back = model_io::deserialize(buf);
    EXPECT_TRUE((back.w.array() == fr.model.w.array()).all());
    EXPECT_TRUE((back.pca_basis.array() == fr.model.pca_basis.array()).all());
    EXPECT_TRUE((back.pca_mean.array() == fr.model.pca_mean.array()).all());
    EXPECT_EQ(back.config.K, 4);
    EXPECT_EQ(model_io::serialize(back), buf);
    EXPECT_EQ(model_io::to_text(back), model_io::to_text(fr.model));
}

TEST(ModelIo, RejectsDamagedFiles) {
    pipeline::Model m;
    m.w = Matrix::Identity(2, 2);
    const std::string buf = model_io::serialize(m);
    EXPECT_THROW(model_io::deserialize("XXXX" + buf.substr(4)), Error);
    EXPECT_THROW(model_io::deserialize(buf.substr(0, buf.size() - 3)), Error);
    EXPECT_THROW(model_io::deserialize(buf + "x"), Error);
}
