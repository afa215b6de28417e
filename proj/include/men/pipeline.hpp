#pragma once

// End-to-end fit: optional PCA, patches and alignment, indicator targets,
// shared spectral factor, then one K-sparse LARS solve per projection column.

#include "men/alignment.hpp"
#include "men/common.hpp"
#include "men/indicator.hpp"
#include "men/lars.hpp"
#include "men/pca.hpp"
#include "men/transform.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace men::pipeline {

struct FitConfig {
    transform::MenConfig men;
    Index d = 2;
    int K = 10;
    Index k1 = 3;
    Index k2 = 3;
    double kappa = 1.0;
    Index pca_retain = -1;  // -1: min(n-1, p); 0: no preprocessing
    bool center_class_means = false;
    int threads = 1;

    void validate() const {
        men.validate();
        if (d < 1) throw Error("config", "d must be >= 1");
        if (K < 1) throw Error("config", "K must be >= 1");
        if (k1 < 0 || k2 < 0 || k1 + k2 < 1) throw Error("config", "need k1, k2 >= 0 and k1 + k2 >= 1");
        if (!(kappa >= 0.0)) throw Error("config", "kappa must be >= 0");
        if (pca_retain < -1) throw Error("config", "pca_retain must be -1 (auto), 0 (off) or positive");
    }
};

/// Sparse projection W plus the preprocessing needed to apply it.
struct Model {
    Matrix w;             // p x d, p in the (possibly reduced) space
    Vector pca_mean;      // empty when no preprocessing
    Matrix pca_basis;     // p_raw x p, empty when no preprocessing
    FitConfig config;

    bool has_pca() const { return pca_basis.size() > 0; }
    Index input_features() const { return has_pca() ? pca_basis.rows() : w.rows(); }
    Index dims() const { return w.cols(); }

    std::vector<Index> sparsity() const {
        std::vector<Index> nnz(static_cast<std::size_t>(w.cols()));
        for (Index t = 0; t < w.cols(); ++t) nnz[static_cast<std::size_t>(t)] = (w.col(t).array() != 0.0).count();
        return nnz;
    }

    /// W expressed on the raw input features.
    Matrix raw_space_w() const { return has_pca() ? Matrix(pca_basis * w) : w; }
};

struct ColumnReport {
    lars::CoefficientPath path;
    std::vector<double> objective;
    int entries = 0;
    int loops = 0;
    bool reached_least_squares = false;
};

struct FitReport {
    std::vector<ColumnReport> columns;
    std::vector<std::pair<std::string, double>> stage_ms;
    Matrix column_angles;  // degrees between columns of W; 90 for zero columns
    Index spectral_rows_dropped = 0;
    std::vector<std::string> warnings;
};

struct FitResult {
    Model model;
    FitReport report;
};

namespace detail {

template <class F>
auto run_stage(const char* stage, FitReport& report, F&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
        auto out = fn();
        const auto t1 = std::chrono::steady_clock::now();
        report.stage_ms.emplace_back(stage, std::chrono::duration<double, std::milli>(t1 - t0).count());
        return out;
    } catch (const Error& e) {
        if (e.stage() == stage) throw;
        throw Error(stage, e.stage() + ": " + e.reason(), e.kind());
    }
}

inline Matrix column_angles(const Matrix& w) {
    const Index d = w.cols();
    Matrix ang = Matrix::Constant(d, d, 90.0);
    for (Index a = 0; a < d; ++a)
        for (Index b = 0; b < d; ++b) {
            const double na = w.col(a).norm(), nb = w.col(b).norm();
            if (na == 0.0 || nb == 0.0) continue;
            const double c = std::clamp(w.col(a).dot(w.col(b)) / (na * nb), -1.0, 1.0);
            ang(a, b) = std::acos(c) * 180.0 / 3.14159265358979323846;
        }
    return ang;
}

}  // namespace detail

inline FitResult fit(const SampleSet& samples, const FitConfig& cfg) {
    try {
        cfg.validate();
    } catch (const Error& e) {
        throw Error("config", e.reason());
    }
    FitResult out;
    FitReport& rep = out.report;
    out.model.config = cfg;

    // Step 1: optional PCA.
    const SampleSet work = detail::run_stage("pca", rep, [&] {
        if (cfg.pca_retain == 0) return samples;
        const Index bound = std::min(samples.size() - 1, samples.features());
        const Index retain = cfg.pca_retain < 0 ? bound : cfg.pca_retain;
        pca::PcaResult pr = pca::pca_preprocess(samples, retain);
        out.model.pca_mean = std::move(pr.mean);
        out.model.pca_basis = std::move(pr.basis);
        return SampleSet(std::move(pr.reduced), samples.labels());
    });
    const Index n = work.size();
    const Index p = work.features();
    if (p > n && cfg.men.lambda2 < 1e-6)
        rep.warnings.push_back("p > n with lambda2 < 1e-6: active Gram matrices may be singular; lambda2 >= 1e-6 recommended");

    // Steps 2-3: patches and whole alignment.
    const Matrix l = detail::run_stage("alignment", rep, [&] {
        alignment::PatchPlan plan = alignment::build_all_patches(work, cfg.k1, cfg.k2, cfg.kappa);
        for (auto& w : plan.warnings) rep.warnings.push_back(std::move(w));
        return alignment::accumulate_alignment(work, plan.patches);
    });

    // Step 4: indicator matrix.
    const indicator::IndicatorMatrix ind = detail::run_stage(
        "indicator", rep, [&] { return indicator::build_indicator(work, cfg.d, cfg.center_class_means); });

    // Step 5: shared transformation.
    const transform::SpectralFactor factor = detail::run_stage("transform", rep, [&] {
        const Matrix m = transform::eliminate_z(l, cfg.men);
        return transform::spectral_factor(transform::build_a(l, m, cfg.men), cfg.men.eig_floor);
    });
    rep.spectral_rows_dropped = factor.dropped;
    if (factor.dropped > 0)
        rep.warnings.push_back("dropped " + std::to_string(factor.dropped) +
                               " non-positive spectral directions of (A+A^T)/2");
    const auto design = transform::build_design(work.data(), factor, cfg.men);

    // Step 6: column-by-column LARS.
    out.model.w = Matrix::Zero(p, cfg.d);
    rep.columns.resize(static_cast<std::size_t>(cfg.d));
    detail::run_stage("lars", rep, [&] {
        std::atomic<Index> next{0};
        std::exception_ptr failure;
        std::mutex failure_mu;
        auto worker = [&] {
            for (Index t = next++; t < cfg.d; t = next++) {
                try {
                    const transform::AugmentedProblem prob =
                        transform::build_augmented(design, ind.values.col(t), factor, cfg.men);
                    lars::SolveResult sr = lars::solve_column(prob, cfg.K, cfg.men.double_shrinkage_correction);
                    out.model.w.col(t) = sr.w;
                    ColumnReport& cr = rep.columns[static_cast<std::size_t>(t)];
                    cr.path = std::move(sr.path);
                    cr.objective = std::move(sr.objective);
                    cr.entries = sr.entries;
                    cr.loops = sr.loops;
                    cr.reached_least_squares = sr.reached_least_squares;
                } catch (...) {
                    std::lock_guard lock(failure_mu);
                    if (!failure) failure = std::current_exception();
                }
            }
        };
        const int nthreads = std::max(1, std::min<int>(cfg.threads, static_cast<int>(cfg.d)));
        std::vector<std::thread> pool;
        for (int i = 1; i < nthreads; ++i) pool.emplace_back(worker);
        worker();
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
        return 0;
    });

    for (std::size_t t = 0; t < rep.columns.size(); ++t) {
        const auto& obj = rep.columns[t].objective;
        for (std::size_t k = 1; k < obj.size(); ++k)
            if (obj[k] > obj[k - 1] + 1e-12 * std::max(1.0, obj[0])) {
                rep.warnings.push_back("column " + std::to_string(t) + ": objective increased at loop " + std::to_string(k));
                break;
            }
    }
    rep.column_angles = detail::column_angles(out.model.w);
    return out;
}

/// Embed raw samples: ((X - mean) * basis) * W, or X * W without preprocessing.
inline Matrix project(const Model& model, const Matrix& x) {
    if (x.cols() != model.input_features())
        throw Error("project", "feature count " + std::to_string(x.cols()) + " does not match model input dimension " +
                                   std::to_string(model.input_features()));
    if (!model.has_pca()) return x * model.w;
    const Matrix centered = x.rowwise() - model.pca_mean.transpose();
    return (centered * model.pca_basis) * model.w;
}

inline Matrix project(const Model& model, const SampleSet& samples) { return project(model, samples.data()); }

}  // namespace men::pipeline
