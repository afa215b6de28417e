#pragma once

// Recognition-rate protocol: random per-class splits, fit on the training
// part, 1-NN in the embedded space for every dimension prefix of W.

#include "men/common.hpp"
#include "men/config.hpp"
#include "men/io.hpp"
#include "men/lars.hpp"
#include "men/pipeline.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace men::eval {

struct SplitSpec {
    Index per_class_train = 5;
    std::uint64_t seed = 42;
    int repeats = 5;
};

struct Split {
    IndexList train;
    IndexList test;
};

/// Per class, a Fisher-Yates shuffle of the class's indices (ascending order
/// to start) driven by std::mt19937_64(seed), swap partner `engine() % (i + 1)`
/// for i from m-1 down to 1; the first per_class_train indices train.
inline Split random_split(const SampleSet& samples, Index per_class_train, std::uint64_t seed) {
    if (per_class_train < 1) throw Error("eval", "per_class_train must be >= 1");
    std::mt19937_64 engine(seed);
    Split out;
    for (int c = 0; c < samples.num_classes(); ++c) {
        IndexList idx;
        for (Index j = 0; j < samples.size(); ++j)
            if (samples.label(j) == c) idx.push_back(j);
        if (per_class_train >= static_cast<Index>(idx.size()))
            throw Error("eval", "per_class_train=" + std::to_string(per_class_train) + " leaves no test samples in class " +
                                    std::to_string(c) + " (size " + std::to_string(idx.size()) + ")");
        for (std::size_t i = idx.size() - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(engine() % (i + 1));
            std::swap(idx[i], idx[j]);
        }
        out.train.insert(out.train.end(), idx.begin(), idx.begin() + per_class_train);
        out.test.insert(out.test.end(), idx.begin() + per_class_train, idx.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

/// 1-NN under Euclidean distance; ties go to the smallest training index.
inline std::vector<int> nn_classify(const Matrix& train, const std::vector<int>& train_labels, const Matrix& test) {
    if (train.rows() == 0) throw Error("eval", "empty training set");
    if (train.cols() != test.cols()) throw Error("eval", "embedding dimension mismatch");
    std::vector<int> out(static_cast<std::size_t>(test.rows()));
    for (Index i = 0; i < test.rows(); ++i) {
        Index best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (Index j = 0; j < train.rows(); ++j) {
            const double d = (train.row(j) - test.row(i)).squaredNorm();
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        out[static_cast<std::size_t>(i)] = train_labels[static_cast<std::size_t>(best)];
    }
    return out;
}

struct FiveNumber {
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

/// Quartiles by linear interpolation between order statistics.
inline FiveNumber five_number(std::vector<double> v) {
    if (v.empty()) return {};
    std::sort(v.begin(), v.end());
    auto q = [&](double f) {
        const double pos = f * static_cast<double>(v.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, v.size() - 1);
        return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
    };
    return {v.front(), q(0.25), q(0.5), q(0.75), v.back()};
}

struct EvalResult {
    std::vector<Index> dims;
    Matrix rates;         // repeats x dims
    Vector mean_rates;    // per dim
    std::vector<FiveNumber> boxplot;
    double best_rate = 0.0;
    Index best_dim = 0;
};

inline double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) hit += predicted[i] == truth[i];
    return truth.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(truth.size());
}

/// One fit per repeat with d = max(dim_grid); each grid point uses the first d columns.
inline EvalResult evaluate(const SampleSet& samples, pipeline::FitConfig cfg, const SplitSpec& split,
                           const std::vector<Index>& dim_grid) {
    if (dim_grid.empty()) throw Error("eval", "dim_grid is empty");
    if (split.repeats < 1) throw Error("eval", "repeats must be >= 1");
    cfg.d = *std::max_element(dim_grid.begin(), dim_grid.end());

    EvalResult res;
    res.dims = dim_grid;
    res.rates.resize(split.repeats, static_cast<Index>(dim_grid.size()));
    for (int r = 0; r < split.repeats; ++r) {
        const Split sp = random_split(samples, split.per_class_train, split.seed + static_cast<std::uint64_t>(r));
        const SampleSet train = samples.subset(sp.train);
        Matrix test_x(static_cast<Index>(sp.test.size()), samples.features());
        std::vector<int> test_labels;
        for (std::size_t i = 0; i < sp.test.size(); ++i) {
            test_x.row(static_cast<Index>(i)) = samples.data().row(sp.test[i]);
            test_labels.push_back(samples.label(sp.test[i]));
        }
        const pipeline::FitResult fr = pipeline::fit(train, cfg);
        const Matrix ztrain = pipeline::project(fr.model, train);
        const Matrix ztest = pipeline::project(fr.model, test_x);
        for (std::size_t g = 0; g < dim_grid.size(); ++g) {
            const Index d = dim_grid[g];
            const auto pred = nn_classify(ztrain.leftCols(d), train.labels(), ztest.leftCols(d));
            res.rates(r, static_cast<Index>(g)) = accuracy(pred, test_labels);
        }
    }
    res.mean_rates = res.rates.colwise().mean().transpose();
    for (std::size_t g = 0; g < dim_grid.size(); ++g) {
        const Vector col = res.rates.col(static_cast<Index>(g));
        res.boxplot.push_back(five_number(std::vector<double>(col.data(), col.data() + col.size())));
        const double m = res.mean_rates(static_cast<Index>(g));
        if (g == 0 || m > res.best_rate || (m == res.best_rate && dim_grid[g] < res.best_dim)) {
            res.best_rate = m;
            res.best_dim = dim_grid[g];
        }
    }
    return res;
}

inline EvalResult evaluate(const SampleSet& samples, const config::RunConfig& rc) {
    return evaluate(samples, rc.fit, SplitSpec{rc.per_class_train, rc.seed, rc.repeats}, rc.effective_grid());
}

inline std::string results_csv(const EvalResult& r) {
    std::string s = "repeat,dimension,rate\n";
    for (Index i = 0; i < r.rates.rows(); ++i)
        for (std::size_t g = 0; g < r.dims.size(); ++g)
            s += std::to_string(i) + "," + std::to_string(r.dims[g]) + "," + format_double(r.rates(i, static_cast<Index>(g))) + "\n";
    return s;
}

inline std::string boxplot_csv(const EvalResult& r) {
    std::string s = "dimension,min,q1,median,q3,max\n";
    for (std::size_t g = 0; g < r.dims.size(); ++g) {
        const FiveNumber& f = r.boxplot[g];
        s += std::to_string(r.dims[g]) + "," + format_double(f.min) + "," + format_double(f.q1) + "," +
             format_double(f.median) + "," + format_double(f.q3) + "," + format_double(f.max) + "\n";
    }
    return s;
}

/// "best=0.9500@dim=2"
inline std::string summary_line(const EvalResult& r) {
    return "best=" + format_fixed(r.best_rate, 4) + "@dim=" + std::to_string(r.best_dim);
}

/// Min-max normalise each column to 8 bits and reshape row-major; a constant column maps to 128.
inline std::vector<io::GrayImage> export_bases(const Matrix& raw_w, Index height, Index width) {
    if (raw_w.rows() != height * width)
        throw Error("export", "basis length " + std::to_string(raw_w.rows()) + " does not match image shape " +
                                  std::to_string(height) + "x" + std::to_string(width));
    std::vector<io::GrayImage> out;
    for (Index t = 0; t < raw_w.cols(); ++t) {
        io::GrayImage img{width, height, std::vector<std::uint8_t>(static_cast<std::size_t>(height * width), 128)};
        const double lo = raw_w.col(t).minCoeff(), hi = raw_w.col(t).maxCoeff();
        if (hi > lo)
            for (Index i = 0; i < raw_w.rows(); ++i)
                img.pixels[static_cast<std::size_t>(i)] =
                    static_cast<std::uint8_t>(std::lround(255.0 * (raw_w(i, t) - lo) / (hi - lo)));
        out.push_back(std::move(img));
    }
    return out;
}

/// loop,event,variable,l1_norm,C_hat,w0..w{p-1}
inline std::string export_paths(const lars::CoefficientPath& path, Index p) {
    std::string s = "loop,event,variable,l1_norm,C_hat";
    for (Index j = 0; j < p; ++j) s += ",w" + std::to_string(j);
    s += "\n";
    for (const auto& bp : path.breakpoints) {
        s += std::to_string(bp.loop) + "," + lars::to_string(bp.event) + "," + std::to_string(bp.variable) + "," +
             format_double(bp.l1_norm) + "," + format_double(bp.c_hat);
        for (Index j = 0; j < bp.coeffs.size(); ++j) s += "," + format_double(bp.coeffs(j));
        s += "\n";
    }
    return s;
}

inline std::vector<std::string> export_paths(const pipeline::FitReport& report, Index p) {
    std::vector<std::string> out;
    for (const auto& c : report.columns) out.push_back(export_paths(c.path, p));
    return out;
}

}  // namespace men::eval
