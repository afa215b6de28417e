#pragma once

// Discriminative patches and the global alignment matrix.
//
// Each sample i owns a patch made of itself, its k1 nearest same-class
// neighbours and its k2 nearest different-class neighbours. The patch's part
// matrix pulls same-class neighbours in (weight 1) and pushes the others out
// (weight -kappa); summing the part matrices at their index sets gives L.

#include "men/common.hpp"

#include <numeric>
#include <string>
#include <vector>

namespace men::alignment {

struct Patch {
    Index center = 0;
    IndexList same_class;
    IndexList diff_class;
    double kappa = 1.0;

    /// F_i: center first, then same-class, then different-class.
    IndexList index_set() const {
        IndexList f;
        f.reserve(1 + same_class.size() + diff_class.size());
        f.push_back(center);
        f.insert(f.end(), same_class.begin(), same_class.end());
        f.insert(f.end(), diff_class.begin(), diff_class.end());
        return f;
    }
    Index size() const { return static_cast<Index>(1 + same_class.size() + diff_class.size()); }
};

enum class Metric { euclidean };

namespace detail {

inline double squared_distance(const Matrix& x, Index a, Index b) { return (x.row(a) - x.row(b)).squaredNorm(); }

/// The `count` closest candidates to `center`, ties by ascending index.
inline IndexList nearest(const Matrix& x, Index center, IndexList candidates, std::size_t count) {
    std::vector<std::pair<double, Index>> keyed;
    keyed.reserve(candidates.size());
    for (Index c : candidates) keyed.emplace_back(squared_distance(x, center, c), c);
    std::partial_sort(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(count), keyed.end());
    IndexList out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) out.push_back(keyed[k].second);
    return out;
}

}  // namespace detail

inline Patch build_patch(const SampleSet& samples, Index i, Index k1, Index k2, double kappa,
                         Metric metric = Metric::euclidean) {
    (void)metric;
    if (i < 0 || i >= samples.size())
        throw Error("alignment", "sample index " + std::to_string(i) + " out of range [0, " +
                                     std::to_string(samples.size()) + ")");
    if (k1 < 0 || k2 < 0 || k1 + k2 < 1)
        throw Error("alignment", "need k1 >= 0, k2 >= 0 and k1 + k2 >= 1 (got k1=" + std::to_string(k1) +
                                     ", k2=" + std::to_string(k2) + ")");
    if (kappa < 0.0) throw Error("alignment", "kappa must be nonnegative");

    const int cls = samples.label(i);
    IndexList same, diff;
    for (Index j = 0; j < samples.size(); ++j) {
        if (j == i) continue;
        (samples.label(j) == cls ? same : diff).push_back(j);
    }
    if (static_cast<Index>(same.size()) < k1)
        throw Error("alignment", "class " + std::to_string(cls) + " has " + std::to_string(same.size()) +
                                     " same-class neighbours for sample " + std::to_string(i) + ", k1=" +
                                     std::to_string(k1) + " required");
    if (static_cast<Index>(diff.size()) < k2)
        throw Error("alignment", "only " + std::to_string(diff.size()) + " samples outside class " +
                                     std::to_string(cls) + ", k2=" + std::to_string(k2) + " required");

    Patch p;
    p.center = i;
    p.kappa = kappa;
    p.same_class = detail::nearest(samples.data(), i, std::move(same), static_cast<std::size_t>(k1));
    p.diff_class = detail::nearest(samples.data(), i, std::move(diff), static_cast<std::size_t>(k2));
    return p;
}

/// L_i = [[sum(w), -w^T], [-w, diag(w)]] with w = (1 x k1, -kappa x k2).
inline Matrix part_matrix(const Patch& patch) {
    const Index k1 = static_cast<Index>(patch.same_class.size());
    const Index k = patch.size() - 1;
    Vector w(k);
    w.head(k1).setOnes();
    w.tail(k - k1).setConstant(-patch.kappa);

    Matrix li = Matrix::Zero(k + 1, k + 1);
    li(0, 0) = w.sum();
    li.block(0, 1, 1, k) = -w.transpose();
    li.block(1, 0, k, 1) = -w;
    li.block(1, 1, k, k).diagonal() = w;
    return li;
}

/// L(F_i, F_i) += L_i over all patches.
inline Matrix accumulate_alignment(Index n, const std::vector<Patch>& patches) {
    Matrix l = Matrix::Zero(n, n);
    for (const Patch& patch : patches) {
        const IndexList f = patch.index_set();
        for (Index idx : f)
            if (idx < 0 || idx >= n)
                throw Error("alignment", "patch index " + std::to_string(idx) + " out of range [0, " +
                                             std::to_string(n) + ")");
        const Matrix li = part_matrix(patch);
        for (std::size_t a = 0; a < f.size(); ++a)
            for (std::size_t b = 0; b < f.size(); ++b)
                l(f[a], f[b]) += li(static_cast<Index>(a), static_cast<Index>(b));
    }
    return l;
}

inline Matrix accumulate_alignment(const SampleSet& samples, const std::vector<Patch>& patches) {
    return accumulate_alignment(samples.size(), patches);
}

struct PatchPlan {
    std::vector<Patch> patches;
    std::vector<std::string> warnings;
};

/// One patch per sample with k1/k2 clamped to what each class can supply.
inline PatchPlan build_all_patches(const SampleSet& samples, Index k1, Index k2, double kappa) {
    PatchPlan plan;
    plan.patches.reserve(static_cast<std::size_t>(samples.size()));
    std::vector<bool> warned(static_cast<std::size_t>(samples.num_classes()), false);
    for (Index i = 0; i < samples.size(); ++i) {
        const int cls = samples.label(i);
        const Index own = samples.class_size(cls);
        const Index eff_k1 = std::min(k1, own - 1);
        const Index eff_k2 = std::min(k2, samples.size() - own);
        if ((eff_k1 != k1 || eff_k2 != k2) && !warned[static_cast<std::size_t>(cls)]) {
            warned[static_cast<std::size_t>(cls)] = true;
            plan.warnings.push_back("class " + std::to_string(cls) + " (size " + std::to_string(own) +
                                    "): clamped k1=" + std::to_string(eff_k1) + ", k2=" + std::to_string(eff_k2));
        }
        plan.patches.push_back(build_patch(samples, i, eff_k1, eff_k2, kappa));
    }
    return plan;
}

}  // namespace men::alignment
