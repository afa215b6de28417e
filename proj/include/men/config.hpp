#pragma once

// key=value run configuration. Unknown keys are rejected; '#' starts a comment.
//
//   key                          default   meaning
//   alpha                        1         manifold (alignment) weight
//   beta                         100       linearization weight, Z ~ XW
//   kappa                        1         different-class push weight in each patch
//   lambda2                      0.01      l2 (elastic net) weight
//   k1                           3         same-class neighbours per patch
//   k2                           3         different-class neighbours per patch
//   d                            2         projection dimension
//   K                            10        max nonzeros per projection column
//   pca_retain                   -1        PCA components kept; -1 = min(n-1, p), 0 = off
//   eig_floor                    1e-10     relative spectral floor for (A+A^T)/2
//   double_shrinkage_correction  false     report sqrt(1+lambda2) W* instead of W*/sqrt(1+lambda2)
//   center_class_means           false     center class means before the indicator PCA
//   seed                         42        split seed
//   repeats                      5         random train/test splits
//   per_class_train              5         training samples per class
//   dim_grid                     auto      comma list of dimensions; auto = 1..d

#include "men/common.hpp"
#include "men/pipeline.hpp"

#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace men::config {

struct RunConfig {
    pipeline::FitConfig fit;
    std::uint64_t seed = 42;
    int repeats = 5;
    Index per_class_train = 5;
    std::vector<Index> dim_grid;  // empty = 1..d
    bool dim_grid_auto = true;

    std::vector<Index> effective_grid() const {
        if (!dim_grid_auto) return dim_grid;
        std::vector<Index> g;
        for (Index d = 1; d <= fit.d; ++d) g.push_back(d);
        return g;
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return std::string(s);
}

inline double to_double(const std::string& key, const std::string& v) {
    double out;
    if (!parse_double(v, out)) throw Error("config", "key '" + key + "': cannot parse '" + v + "' as a number");
    return out;
}

inline long long to_int(const std::string& key, const std::string& v) {
    long long out;
    if (!parse_int(v, out)) throw Error("config", "key '" + key + "': cannot parse '" + v + "' as an integer");
    return out;
}

inline bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw Error("config", "key '" + key + "': cannot parse '" + v + "' as a boolean");
}

}  // namespace detail

inline void apply(RunConfig& cfg, const std::string& key, const std::string& value) {
    using namespace detail;
    auto& f = cfg.fit;
    if (key == "alpha") f.men.alpha = to_double(key, value);
    else if (key == "beta") f.men.beta = to_double(key, value);
    else if (key == "kappa") f.kappa = to_double(key, value);
    else if (key == "lambda2") f.men.lambda2 = to_double(key, value);
    else if (key == "k1") f.k1 = to_int(key, value);
    else if (key == "k2") f.k2 = to_int(key, value);
    else if (key == "d") f.d = to_int(key, value);
    else if (key == "K") f.K = static_cast<int>(to_int(key, value));
    else if (key == "pca_retain") f.pca_retain = to_int(key, value);
    else if (key == "eig_floor") f.men.eig_floor = to_double(key, value);
    else if (key == "double_shrinkage_correction") f.men.double_shrinkage_correction = to_bool(key, value);
    else if (key == "center_class_means") f.center_class_means = to_bool(key, value);
    else if (key == "seed") {
        const long long s = to_int(key, value);
        if (s < 0) throw Error("config", "key 'seed': must be >= 0");
        cfg.seed = static_cast<std::uint64_t>(s);
    } else if (key == "repeats") cfg.repeats = static_cast<int>(to_int(key, value));
    else if (key == "per_class_train") cfg.per_class_train = to_int(key, value);
    else if (key == "dim_grid") {
        cfg.dim_grid.clear();
        cfg.dim_grid_auto = value == "auto";
        if (!cfg.dim_grid_auto) {
            std::stringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ',')) {
                const std::string t = trim(item);
                if (t.empty()) continue;
                const long long d = to_int(key, t);
                if (d < 1) throw Error("config", "key 'dim_grid': dimensions must be >= 1");
                cfg.dim_grid.push_back(d);
            }
        }
    } else {
        throw Error("config", "unknown key '" + key + "'");
    }
}

inline RunConfig parse(std::istream& in) {
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw Error("config", "line " + std::to_string(lineno) + ": expected key=value, got '" + t + "'");
        apply(cfg, detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
    }
    return cfg;
}

inline RunConfig parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
}

inline RunConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("config", "cannot open config file '" + path + "'");
    return parse(in);
}

/// Canonical text form; parse(to_text(c)) reproduces c.
inline std::string to_text(const RunConfig& cfg) {
    const auto& f = cfg.fit;
    std::string s;
    auto kv = [&](const char* k, const std::string& v) { s += std::string(k) + "=" + v + "\n"; };
    kv("alpha", format_double(f.men.alpha));
    kv("beta", format_double(f.men.beta));
    kv("kappa", format_double(f.kappa));
    kv("lambda2", format_double(f.men.lambda2));
    kv("k1", std::to_string(f.k1));
    kv("k2", std::to_string(f.k2));
    kv("d", std::to_string(f.d));
    kv("K", std::to_string(f.K));
    kv("pca_retain", std::to_string(f.pca_retain));
    kv("eig_floor", format_double(f.men.eig_floor));
    kv("double_shrinkage_correction", f.men.double_shrinkage_correction ? "true" : "false");
    kv("center_class_means", f.center_class_means ? "true" : "false");
    kv("seed", std::to_string(cfg.seed));
    kv("repeats", std::to_string(cfg.repeats));
    kv("per_class_train", std::to_string(cfg.per_class_train));
    std::string grid;
    if (cfg.dim_grid_auto) grid = "auto";
    else
        for (std::size_t i = 0; i < cfg.dim_grid.size(); ++i) grid += (i ? "," : "") + std::to_string(cfg.dim_grid[i]);
    kv("dim_grid", grid);
    return s;
}

}  // namespace men::config
