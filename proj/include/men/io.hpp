#pragma once

// Dataset loaders (csv-matrix, 8-bit binary graymaps) and plain writers.

#include "men/common.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace men::io {

enum class Format { csv_matrix, raw_gray_images };

struct GrayImage {
    Index width = 0;
    Index height = 0;
    std::vector<std::uint8_t> pixels;  // row-major
};

/// Map arbitrary label tokens to dense class indices. Tokens that all parse
/// as integers are ordered numerically, otherwise lexicographically.
inline std::vector<int> densify_labels(const std::vector<std::string>& tokens) {
    bool numeric = true;
    std::vector<long long> values(tokens.size());
    for (std::size_t i = 0; i < tokens.size() && numeric; ++i) numeric = parse_int(tokens[i], values[i]);
    std::vector<int> out(tokens.size());
    if (numeric) {
        std::map<long long, int> ids;
        for (long long v : values) ids.emplace(v, 0);
        int next = 0;
        for (auto& [k, v] : ids) v = next++;
        for (std::size_t i = 0; i < values.size(); ++i) out[i] = ids[values[i]];
    } else {
        std::map<std::string, int> ids;
        for (const auto& t : tokens) ids.emplace(t, 0);
        int next = 0;
        for (auto& [k, v] : ids) v = next++;
        for (std::size_t i = 0; i < tokens.size(); ++i) out[i] = ids[tokens[i]];
    }
    return out;
}

/// One sample per line, last field is the integer class label.
inline SampleSet read_csv_matrix(std::istream& in, const std::string& name = "<csv>") {
    std::vector<std::vector<double>> rows;
    std::vector<std::string> labels;
    std::string line;
    std::size_t lineno = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (!line.empty() && line.back() == ',') fields.emplace_back();
        if (fields.size() < 2)
            throw Error("ingest", name + ":" + std::to_string(lineno) + ": need at least one feature and a label");
        if (width == 0) width = fields.size();
        if (fields.size() != width)
            throw Error("ingest", name + ":" + std::to_string(lineno) + ": ragged row with " + std::to_string(fields.size()) +
                                      " fields, expected " + std::to_string(width));
        std::vector<double> row(width - 1);
        for (std::size_t k = 0; k + 1 < width; ++k)
            if (!parse_double(fields[k], row[k]))
                throw Error("ingest", name + ":" + std::to_string(lineno) + ": cannot parse field " + std::to_string(k + 1) +
                                          " '" + fields[k] + "'");
        long long lab;
        if (!parse_int(fields.back(), lab))
            throw Error("ingest", name + ":" + std::to_string(lineno) + ": cannot parse label '" + fields.back() + "'");
        rows.push_back(std::move(row));
        labels.push_back(std::to_string(lab));
    }
    if (rows.empty()) throw Error("ingest", name + ": no samples");
    Matrix x(static_cast<Index>(rows.size()), static_cast<Index>(width - 1));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t k = 0; k + 1 < width; ++k) x(static_cast<Index>(i), static_cast<Index>(k)) = rows[i][k];
    return SampleSet(std::move(x), densify_labels(labels));
}

inline SampleSet read_csv_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("ingest", "cannot open '" + path + "'");
    return read_csv_matrix(in, path);
}

namespace detail {

inline std::string pgm_token(const std::string& buf, std::size_t& pos) {
    while (pos < buf.size()) {
        if (buf[pos] == '#') {
            while (pos < buf.size() && buf[pos] != '\n') ++pos;
        } else if (std::isspace(static_cast<unsigned char>(buf[pos]))) {
            ++pos;
        } else {
            break;
        }
    }
    std::size_t start = pos;
    while (pos < buf.size() && !std::isspace(static_cast<unsigned char>(buf[pos]))) ++pos;
    return buf.substr(start, pos - start);
}

}  // namespace detail

/// Binary graymap (P5), maxval <= 255.
inline GrayImage parse_pgm(const std::string& buf, const std::string& name = "<pgm>") {
    std::size_t pos = 0;
    if (detail::pgm_token(buf, pos) != "P5") throw Error("ingest", name + ": not a binary graymap (P5)");
    long long w, h, maxval;
    if (!parse_int(detail::pgm_token(buf, pos), w) || !parse_int(detail::pgm_token(buf, pos), h) ||
        !parse_int(detail::pgm_token(buf, pos), maxval) || w <= 0 || h <= 0)
        throw Error("ingest", name + ": malformed graymap header");
    if (maxval < 1 || maxval > 255) throw Error("ingest", name + ": only 8-bit graymaps supported");
    ++pos;  // single whitespace before raster
    const std::size_t need = static_cast<std::size_t>(w * h);
    if (buf.size() < pos + need) throw Error("ingest", name + ": truncated raster");
    GrayImage img{w, h, std::vector<std::uint8_t>(buf.begin() + static_cast<std::ptrdiff_t>(pos),
                                                  buf.begin() + static_cast<std::ptrdiff_t>(pos + need))};
    if (maxval != 255)
        for (auto& px : img.pixels) px = static_cast<std::uint8_t>(std::min<long long>(255, px * 255 / maxval));
    return img;
}

inline GrayImage read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("ingest", "cannot open image '" + path + "'");
    const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_pgm(buf, path);
}

inline std::string encode_pgm(const GrayImage& img) {
    std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    out.append(img.pixels.begin(), img.pixels.end());
    return out;
}

inline void write_pgm(const std::string& path, const GrayImage& img) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("export", "cannot write '" + path + "'");
    const std::string buf = encode_pgm(img);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

/// Row-major flatten scaled to [0, 1].
inline Vector image_to_row(const GrayImage& img) {
    Vector v(img.width * img.height);
    for (Index i = 0; i < v.size(); ++i) v(i) = img.pixels[static_cast<std::size_t>(i)] / 255.0;
    return v;
}

/// Images either from class subdirectories of `path` or from a manifest file
/// with `image-path,label` lines (paths relative to the manifest).
inline SampleSet read_gray_images(const std::string& path) {
    namespace fs = std::filesystem;
    std::vector<std::pair<fs::path, std::string>> entries;
    if (fs::is_directory(path)) {
        std::vector<fs::path> classes;
        for (const auto& e : fs::directory_iterator(path))
            if (e.is_directory()) classes.push_back(e.path());
        std::sort(classes.begin(), classes.end());
        for (const auto& dir : classes) {
            std::vector<fs::path> files;
            for (const auto& e : fs::directory_iterator(dir))
                if (e.is_regular_file() && e.path().extension() == ".pgm") files.push_back(e.path());
            std::sort(files.begin(), files.end());
            for (auto& f : files) entries.emplace_back(f, dir.filename().string());
        }
    } else {
        std::ifstream in(path);
        if (!in) throw Error("ingest", "cannot open manifest '" + path + "'");
        const fs::path base = fs::path(path).parent_path();
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line[0] == '#') continue;
            const auto comma = line.rfind(',');
            if (comma == std::string::npos || comma + 1 == line.size())
                throw Error("ingest", path + ":" + std::to_string(lineno) + ": expected image-path,label");
            fs::path img = line.substr(0, comma);
            if (img.is_relative()) img = base / img;
            entries.emplace_back(img, line.substr(comma + 1));
        }
    }
    if (entries.empty()) throw Error("ingest", path + ": no images found");

    std::vector<std::string> labels;
    Matrix x;
    Index w = 0, h = 0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const GrayImage img = read_pgm(entries[i].first.string());
        if (i == 0) {
            w = img.width;
            h = img.height;
            x.resize(static_cast<Index>(entries.size()), w * h);
        } else if (img.width != w || img.height != h) {
            throw Error("ingest", entries[i].first.string() + ": size " + std::to_string(img.width) + "x" +
                                      std::to_string(img.height) + " differs from " + std::to_string(w) + "x" +
                                      std::to_string(h));
        }
        x.row(static_cast<Index>(i)) = image_to_row(img).transpose();
        labels.push_back(entries[i].second);
    }
    return SampleSet(std::move(x), densify_labels(labels));
}

inline SampleSet ingest(const std::string& path, Format format) {
    return format == Format::csv_matrix ? read_csv_matrix(path) : read_gray_images(path);
}

inline std::string matrix_to_csv(const Matrix& m) {
    std::string s;
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) s += (j ? "," : "") + format_double(m(i, j));
        s += "\n";
    }
    return s;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("export", "cannot write '" + path + "'");
    out << text;
}

}  // namespace men::io
