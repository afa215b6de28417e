#pragma once

// Model container.
//
//   "MEN1"
//   u64 len, len bytes        config block (key=value lines)
//   u64 m, m x f64            PCA mean (m = 0 without preprocessing)
//   u64 r, u64 c, r*c x f64   PCA basis, row-major
//   u64 r, u64 c, u64 nnz     W shape and nonzero count
//   nnz x (f64 row, f64 col, f64 value)   W triplets, column-major order
//
// All integers and floats little-endian.

#include "men/common.hpp"
#include "men/config.hpp"
#include "men/pipeline.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

namespace men::model_io {

inline constexpr char kMagic[4] = {'M', 'E', 'N', '1'};

namespace detail {

inline void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

inline void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
public:
    explicit Reader(const std::string& buf) : buf_(buf) {}

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string bytes(std::uint64_t n) {
        need(n);
        std::string s = buf_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    bool at_end() const { return pos_ == buf_.size(); }

private:
    void need(std::uint64_t n) const {
        if (n > buf_.size() - pos_) throw Error("model", "truncated model file");
    }
    const std::string& buf_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline config::RunConfig run_config_of(const pipeline::Model& m) {
    config::RunConfig rc;
    rc.fit = m.config;
    return rc;
}

inline std::string serialize(const pipeline::Model& model, const config::RunConfig& rc) {
    std::string out(kMagic, 4);
    const std::string cfg = config::to_text(rc);
    detail::put_u64(out, cfg.size());
    out += cfg;

    detail::put_u64(out, static_cast<std::uint64_t>(model.pca_mean.size()));
    for (Index i = 0; i < model.pca_mean.size(); ++i) detail::put_f64(out, model.pca_mean(i));

    detail::put_u64(out, static_cast<std::uint64_t>(model.pca_basis.rows()));
    detail::put_u64(out, static_cast<std::uint64_t>(model.pca_basis.cols()));
    for (Index i = 0; i < model.pca_basis.rows(); ++i)
        for (Index j = 0; j < model.pca_basis.cols(); ++j) detail::put_f64(out, model.pca_basis(i, j));

    detail::put_u64(out, static_cast<std::uint64_t>(model.w.rows()));
    detail::put_u64(out, static_cast<std::uint64_t>(model.w.cols()));
    const Index nnz = (model.w.array() != 0.0).count();
    detail::put_u64(out, static_cast<std::uint64_t>(nnz));
    for (Index j = 0; j < model.w.cols(); ++j)
        for (Index i = 0; i < model.w.rows(); ++i)
            if (model.w(i, j) != 0.0) {
                detail::put_f64(out, static_cast<double>(i));
                detail::put_f64(out, static_cast<double>(j));
                detail::put_f64(out, model.w(i, j));
            }
    return out;
}

inline std::string serialize(const pipeline::Model& model) { return serialize(model, run_config_of(model)); }

inline pipeline::Model deserialize(const std::string& buf) {
    if (buf.size() < 4 || std::memcmp(buf.data(), kMagic, 4) != 0) throw Error("model", "bad magic, not a MEN1 model");
    detail::Reader rd(buf);
    rd.bytes(4);
    pipeline::Model m;
    const std::uint64_t cfg_len = rd.u64();
    m.config = config::parse_string(rd.bytes(cfg_len)).fit;

    const std::uint64_t mean_len = rd.u64();
    m.pca_mean.resize(static_cast<Index>(mean_len));
    for (Index i = 0; i < m.pca_mean.size(); ++i) m.pca_mean(i) = rd.f64();

    const auto br = static_cast<Index>(rd.u64());
    const auto bc = static_cast<Index>(rd.u64());
    m.pca_basis.resize(br, bc);
    for (Index i = 0; i < br; ++i)
        for (Index j = 0; j < bc; ++j) m.pca_basis(i, j) = rd.f64();

    const auto wr = static_cast<Index>(rd.u64());
    const auto wc = static_cast<Index>(rd.u64());
    const std::uint64_t nnz = rd.u64();
    m.w = Matrix::Zero(wr, wc);
    for (std::uint64_t k = 0; k < nnz; ++k) {
        const double r = rd.f64(), c = rd.f64(), v = rd.f64();
        if (!(r >= 0 && r < static_cast<double>(wr) && c >= 0 && c < static_cast<double>(wc)))
            throw Error("model", "W triplet out of range");
        m.w(static_cast<Index>(r), static_cast<Index>(c)) = v;
    }
    if (!rd.at_end()) throw Error("model", "trailing bytes after W triplets");
    if (m.pca_mean.size() != br || (br > 0 && bc != wr))
        throw Error("model", "inconsistent PCA/W dimensions");
    return m;
}

/// Lossless text view (shortest round-trip decimals).
inline std::string to_text(const pipeline::Model& model) {
    std::string s = "MEN1\n[config]\n" + config::to_text(run_config_of(model));
    s += "[mean] " + std::to_string(model.pca_mean.size()) + "\n";
    for (Index i = 0; i < model.pca_mean.size(); ++i) s += format_double(model.pca_mean(i)) + "\n";
    s += "[pca_basis] " + std::to_string(model.pca_basis.rows()) + " " + std::to_string(model.pca_basis.cols()) + "\n";
    for (Index i = 0; i < model.pca_basis.rows(); ++i) {
        for (Index j = 0; j < model.pca_basis.cols(); ++j) s += (j ? " " : "") + format_double(model.pca_basis(i, j));
        s += "\n";
    }
    const Index nnz = (model.w.array() != 0.0).count();
    s += "[w] " + std::to_string(model.w.rows()) + " " + std::to_string(model.w.cols()) + " " + std::to_string(nnz) + "\n";
    for (Index j = 0; j < model.w.cols(); ++j)
        for (Index i = 0; i < model.w.rows(); ++i)
            if (model.w(i, j) != 0.0) s += std::to_string(i) + " " + std::to_string(j) + " " + format_double(model.w(i, j)) + "\n";
    return s;
}

inline void save(const std::string& path, const pipeline::Model& model, const config::RunConfig& rc) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("model", "cannot write '" + path + "'");
    const std::string buf = serialize(model, rc);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw Error("model", "write failed for '" + path + "'");
}

inline pipeline::Model load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("model", "cannot open '" + path + "'");
    const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize(buf);
}

}  // namespace men::model_io
