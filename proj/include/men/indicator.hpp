#pragma once

// Regression targets from a weighted PCA of the class centers.

#include "men/common.hpp"

#include <string>

namespace men::indicator {

struct ClassCenters {
    Matrix centers;  // c x p
    Vector weights;  // class proportions, sum to 1
};

struct CenterPca {
    Matrix eta;          // p x d, orthonormal columns
    Vector eigenvalues;  // descending
    Index rank = 0;
};

struct IndicatorMatrix {
    Matrix values;   // n x d
    Matrix centers;  // c x d, projected class centers
    Matrix basis;    // p x d
    Vector eigenvalues;
};

inline constexpr double kRankTolerance = 1e-10;

inline ClassCenters class_centers(const SampleSet& samples) {
    const int c = samples.num_classes();
    ClassCenters out{Matrix::Zero(c, samples.features()), Vector::Zero(c)};
    for (Index j = 0; j < samples.size(); ++j) out.centers.row(samples.label(j)) += samples.data().row(j);
    for (int k = 0; k < c; ++k) {
        const double count = static_cast<double>(samples.class_size(k));
        out.centers.row(k) /= count;
        out.weights(k) = count / static_cast<double>(samples.size());
    }
    return out;
}

/// Top-d eigenvectors of V = sum_i w_i o_i^T o_i.
///
/// V = B^T B with B = diag(sqrt(w)) O has rank <= c, so the eigenpairs come
/// from the c x c matrix B B^T instead of the p x p V. With `center` set the
/// weighted mean of the centers is removed first.
inline CenterPca weighted_center_pca(const Matrix& centers, const Vector& weights, Index d, bool center = false) {
    if (centers.rows() != weights.size())
        throw Error("indicator", "center/weight count mismatch");
    if (d < 1) throw Error("indicator", "target dimension d must be >= 1");

    Matrix o = centers;
    if (center) {
        const Eigen::RowVectorXd mean = (weights.asDiagonal() * o).colwise().sum() / weights.sum();
        o.rowwise() -= mean;
    }
    const Matrix b = weights.cwiseSqrt().asDiagonal() * o;
    const Matrix small = b * b.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> es(small);
    if (es.info() != Eigen::Success) throw Error("indicator", "eigendecomposition failed", ErrorKind::numerical);

    // Eigen returns ascending order.
    const Vector evals = es.eigenvalues().reverse();
    const Matrix evecs = es.eigenvectors().rowwise().reverse();
    const double top = evals.size() > 0 ? evals(0) : 0.0;
    Index rank = 0;
    if (top > 0.0)
        for (Index k = 0; k < evals.size(); ++k)
            if (evals(k) > kRankTolerance * top) ++rank;
    if (d > rank)
        throw Error("indicator", "d=" + std::to_string(d) + " exceeds numerical rank " + std::to_string(rank) +
                                     " of the class-center covariance");

    CenterPca out;
    out.rank = rank;
    out.eigenvalues = evals.head(d);
    out.eta = b.transpose() * evecs.leftCols(d);
    // Small eigenvalues amplify rounding in B^T v / sqrt(lambda); one Gram-Schmidt pass restores orthonormality.
    for (Index k = 0; k < d; ++k) {
        for (Index j = 0; j < k; ++j) out.eta.col(k) -= out.eta.col(j).dot(out.eta.col(k)) * out.eta.col(j);
        out.eta.col(k).normalize();
    }
    normalize_column_signs(out.eta);
    return out;
}

inline IndicatorMatrix build_indicator(const SampleSet& samples, Index d, bool center = false) {
    const ClassCenters cc = class_centers(samples);
    CenterPca pca = weighted_center_pca(cc.centers, cc.weights, d, center);
    IndicatorMatrix out;
    out.centers = cc.centers * pca.eta;
    out.values.resize(samples.size(), d);
    for (Index j = 0; j < samples.size(); ++j) out.values.row(j) = out.centers.row(samples.label(j));
    out.basis = std::move(pca.eta);
    out.eigenvalues = std::move(pca.eigenvalues);
    return out;
}

}  // namespace men::indicator
