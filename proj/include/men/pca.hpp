#pragma once

#include "men/common.hpp"

#include <string>

namespace men::pca {

struct PcaResult {
    Matrix reduced;      // n x retain, centered data in the basis
    Vector mean;         // p
    Matrix basis;        // p x retain, orthonormal columns
    Vector variances;    // per-component variance, 1/(n-1) normalisation, descending
};

/// Mean-centered PCA keeping `retain` components (1 <= retain <= min(n-1, p)).
inline PcaResult pca_preprocess(const Matrix& x, Index retain) {
    const Index n = x.rows();
    const Index p = x.cols();
    if (retain < 1 || retain > std::min(n - 1, p))
        throw Error("pca", "retain=" + std::to_string(retain) + " outside [1, " + std::to_string(std::min(n - 1, p)) + "]");
    PcaResult out;
    out.mean = x.colwise().mean().transpose();
    const Matrix centered = x.rowwise() - out.mean.transpose();
    Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw Error("pca", "SVD failed", ErrorKind::numerical);
    out.basis = svd.matrixV().leftCols(retain);
    normalize_column_signs(out.basis);
    out.reduced = centered * out.basis;
    out.variances = svd.singularValues().head(retain).array().square() / static_cast<double>(n - 1);
    return out;
}

inline PcaResult pca_preprocess(const SampleSet& samples, Index retain) { return pca_preprocess(samples.data(), retain); }

}  // namespace men::pca
