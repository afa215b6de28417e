#pragma once

// Rewrites the manifold-regularized regression as an augmented lasso.
//
// With Z eliminated through M = beta (alpha L + beta I)^{-1}, the smooth part
// of the objective becomes W^T X^T A X W - 2 W^T X^T Y + lambda2 |W|^2. The
// symmetric part of A is factored as R^T R (R = D^{1/2} U^T) and the l2 term is
// folded into extra design rows, giving |Y* - X* W*|^2 with W* = sqrt(1+lambda2) W.

#include "men/common.hpp"

#include <memory>
#include <optional>
#include <string>

namespace men::transform {

struct MenConfig {
    double alpha = 1.0;
    double beta = 100.0;
    double lambda2 = 0.01;
    std::optional<double> lambda1;  // sparsity is governed by the LARS loop count
    double eig_floor = 1e-10;
    bool double_shrinkage_correction = false;

    void validate() const {
        if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw Error("config", "alpha must be >= 0");
        if (!(beta > 0.0) || !std::isfinite(beta)) throw Error("config", "beta must be > 0");
        if (!(lambda2 >= 0.0) || !std::isfinite(lambda2)) throw Error("config", "lambda2 must be >= 0");
        if (!(eig_floor >= 0.0)) throw Error("config", "eig_floor must be >= 0");
        if (lambda1 && !(*lambda1 >= 0.0)) throw Error("config", "lambda1 must be >= 0");
    }

    /// W = W* / scale, or W = W* * scale under double_shrinkage_correction.
    double scale() const { return std::sqrt(1.0 + lambda2); }
};

inline constexpr double kMaxCondition = 1e14;

/// M = beta (alpha L + beta I)^{-1}; the optimal embedding is Z = M X W.
inline Matrix eliminate_z(const Matrix& l, const MenConfig& cfg) {
    cfg.validate();
    const Index n = l.rows();
    if (l.cols() != n) throw Error("transform", "alignment matrix must be square");
    if (cfg.alpha == 0.0) return Matrix::Identity(n, n);

    const Matrix sys = cfg.alpha * (0.5 * (l + l.transpose())) + cfg.beta * Matrix::Identity(n, n);
    Eigen::SelfAdjointEigenSolver<Matrix> es(sys);
    if (es.info() != Eigen::Success) throw Error("transform", "eigendecomposition of alpha L + beta I failed", ErrorKind::numerical);
    const Vector mag = es.eigenvalues().cwiseAbs();
    const double cond = mag.maxCoeff() / mag.minCoeff();
    if (!(cond < kMaxCondition))
        throw Error("transform", "alpha L + beta I is ill-conditioned (condition estimate " + format_double(cond) + ")",
                    ErrorKind::numerical);
    const Vector inv = es.eigenvalues().cwiseInverse() * cfg.beta;
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

/// A = alpha M^T L M + beta (M - I)^T (M - I) + I.
inline Matrix build_a(const Matrix& l, const Matrix& m, const MenConfig& cfg) {
    const Index n = l.rows();
    const Matrix mi = m - Matrix::Identity(n, n);
    return cfg.alpha * m.transpose() * l * m + cfg.beta * mi.transpose() * mi + Matrix::Identity(n, n);
}

inline Matrix build_a(const Matrix& l, const MenConfig& cfg) { return build_a(l, eliminate_z(l, cfg), cfg); }

/// Square root of (A + A^T)/2 restricted to eigenvalues above eig_floor * top.
struct SpectralFactor {
    Matrix root;          // n' x n, D^{1/2} U^T
    Matrix inv_root_t;    // n' x n, D^{-1/2} U^T; maps Y to the transformed response
    Vector eigenvalues;   // retained, descending
    Index dropped = 0;

    Vector transform_response(const Vector& y) const { return inv_root_t * y; }
};

inline SpectralFactor spectral_factor(const Matrix& a, double eig_floor) {
    const Index n = a.rows();
    if (a.cols() != n) throw Error("transform", "A must be square");
    const Matrix sym = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
    if (es.info() != Eigen::Success) throw Error("transform", "eigendecomposition of (A+A^T)/2 failed", ErrorKind::numerical);
    const Vector evals = es.eigenvalues().reverse();
    Matrix evecs = es.eigenvectors().rowwise().reverse();
    normalize_column_signs(evecs);

    const double top = evals.size() ? evals(0) : 0.0;
    if (!(top > 0.0)) throw Error("transform", "(A+A^T)/2 has no positive eigenvalue", ErrorKind::numerical);
    const double cutoff = std::max(eig_floor * top, 0.0);
    Index kept = 0;
    while (kept < n && evals(kept) > cutoff) ++kept;

    SpectralFactor f;
    f.eigenvalues = evals.head(kept);
    f.dropped = n - kept;
    const Matrix ut = evecs.leftCols(kept).transpose();
    f.root = f.eigenvalues.cwiseSqrt().asDiagonal() * ut;
    f.inv_root_t = f.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal() * ut;
    return f;
}

/// Lasso problem min |ystar - xstar w|^2 (+ lambda |w|_1) for one indicator column.
///
/// The design depends only on X, L and the config, so the columns of one fit
/// share it.
struct AugmentedProblem {
    std::shared_ptr<const Matrix> design;  // (n' + p) x p
    Vector ystar;                          // n' + p
    std::optional<double> lambda;
    Index n_effective = 0;
    double scale = 1.0;

    const Matrix& xstar() const { return *design; }
    Index features() const { return design->cols(); }
};

/// X* = (1+lambda2)^{-1/2} [R X ; sqrt(lambda2) I].
inline std::shared_ptr<const Matrix> build_design(const Matrix& x, const SpectralFactor& factor,
                                                  const MenConfig& cfg) {
    if (factor.root.cols() != x.rows()) throw Error("transform", "spectral factor does not match sample count");
    const Index np = factor.root.rows();
    const Index p = x.cols();
    const double shrink = 1.0 / std::sqrt(1.0 + cfg.lambda2);
    auto xs = std::make_shared<Matrix>(np + p, p);
    xs->topRows(np).noalias() = shrink * (factor.root * x);
    xs->bottomRows(p) = (shrink * std::sqrt(cfg.lambda2)) * Matrix::Identity(p, p);
    return xs;
}

/// Y* = [R^{-T} y ; 0] on a shared design.
inline AugmentedProblem build_augmented(std::shared_ptr<const Matrix> design, const Vector& y,
                                        const SpectralFactor& factor, const MenConfig& cfg) {
    cfg.validate();
    if (y.size() != factor.inv_root_t.cols()) throw Error("transform", "response length does not match sample count");
    const Index np = factor.root.rows();
    AugmentedProblem prob;
    prob.n_effective = np;
    prob.scale = cfg.scale();
    if (cfg.lambda1) prob.lambda = *cfg.lambda1 / (1.0 + cfg.lambda2);
    prob.ystar = Vector::Zero(design->rows());
    prob.ystar.head(np) = factor.transform_response(y);
    prob.design = std::move(design);
    return prob;
}

inline AugmentedProblem build_augmented(const Matrix& x, const Vector& y, const SpectralFactor& factor,
                                        const MenConfig& cfg) {
    cfg.validate();
    if (y.size() != x.rows()) throw Error("transform", "response length does not match sample count");
    return build_augmented(build_design(x, factor, cfg), y, factor, cfg);
}

inline AugmentedProblem build_augmented(const Matrix& x, const Vector& y, const Matrix& l, const MenConfig& cfg) {
    return build_augmented(x, y, spectral_factor(build_a(l, cfg), cfg.eig_floor), cfg);
}

}  // namespace men::transform
