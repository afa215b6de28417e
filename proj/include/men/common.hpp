#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

namespace men {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using IndexList = std::vector<Index>;

/// User/data problems are `invalid_input`; breakdowns inside the solvers are `numerical`.
enum class ErrorKind { invalid_input, numerical };

class Error : public std::runtime_error {
public:
    Error(std::string stage, std::string reason, ErrorKind kind = ErrorKind::invalid_input)
        : std::runtime_error("stage=" + stage + ", reason=" + reason),
          stage_(std::move(stage)),
          reason_(std::move(reason)),
          kind_(kind) {}

    const std::string& stage() const noexcept { return stage_; }
    const std::string& reason() const noexcept { return reason_; }
    ErrorKind kind() const noexcept { return kind_; }

private:
    std::string stage_;
    std::string reason_;
    ErrorKind kind_;
};

/// Locale-independent shortest round-trip formatting.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string format_fixed(double v, int decimals) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, decimals);
    return std::string(buf, res.ptr);
}

inline bool parse_double(std::string_view s, double& out) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return false;
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

inline bool parse_int(std::string_view s, long long& out) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return false;
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

/// Flip each column so its largest-magnitude entry is positive (first one wins on ties).
inline void normalize_column_signs(Matrix& m) {
    for (Index j = 0; j < m.cols(); ++j) {
        Index arg = 0;
        double best = -1.0;
        for (Index i = 0; i < m.rows(); ++i) {
            const double a = std::abs(m(i, j));
            if (a > best) {
                best = a;
                arg = i;
            }
        }
        if (m.rows() > 0 && m(arg, j) < 0.0) m.col(j) = -m.col(j);
    }
}

/// Labelled data: one sample per row, labels dense in [0, num_classes).
class SampleSet {
public:
    SampleSet() = default;

    SampleSet(Matrix data, std::vector<int> labels) : data_(std::move(data)), labels_(std::move(labels)) {
        if (data_.rows() < 2) throw Error("input", "need at least 2 samples, got " + std::to_string(data_.rows()));
        if (data_.cols() < 1) throw Error("input", "need at least 1 feature");
        if (static_cast<Index>(labels_.size()) != data_.rows())
            throw Error("input", "label count " + std::to_string(labels_.size()) + " does not match sample count " +
                                     std::to_string(data_.rows()));
        if (!data_.allFinite()) throw Error("input", "data contains non-finite entries");
        int max_label = -1;
        for (int l : labels_) {
            if (l < 0) throw Error("input", "negative class label " + std::to_string(l));
            max_label = std::max(max_label, l);
        }
        num_classes_ = max_label + 1;
        counts_.assign(static_cast<std::size_t>(num_classes_), 0);
        for (int l : labels_) ++counts_[static_cast<std::size_t>(l)];
        for (int c = 0; c < num_classes_; ++c)
            if (counts_[static_cast<std::size_t>(c)] == 0)
                throw Error("input", "class " + std::to_string(c) + " has no samples");
    }

    const Matrix& data() const noexcept { return data_; }
    const std::vector<int>& labels() const noexcept { return labels_; }
    int label(Index i) const { return labels_[static_cast<std::size_t>(i)]; }
    Index size() const noexcept { return data_.rows(); }
    Index features() const noexcept { return data_.cols(); }
    int num_classes() const noexcept { return num_classes_; }
    Index class_size(int c) const { return counts_[static_cast<std::size_t>(c)]; }

    SampleSet subset(const IndexList& rows) const {
        Matrix d(static_cast<Index>(rows.size()), data_.cols());
        std::vector<int> l(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            d.row(static_cast<Index>(r)) = data_.row(rows[r]);
            l[r] = labels_[static_cast<std::size_t>(rows[r])];
        }
        return SampleSet(std::move(d), std::move(l));
    }

private:
    Matrix data_;
    std::vector<int> labels_;
    int num_classes_ = 0;
    std::vector<Index> counts_;
};

}  // namespace men
