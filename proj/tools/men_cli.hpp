#pragma once

// Command-line driver: fit | project | evaluate | export-bases | export-paths.
// Exit codes: 0 success, 1 user/data error, 2 internal numerical failure.

#include "men/men.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace men::cli {

struct Overrides {
    std::optional<long long> d;
    std::optional<long long> K;
    std::optional<long long> seed;
    int threads = 1;
};

inline config::RunConfig load_config(const std::string& path, const Overrides& ov) {
    config::RunConfig rc = path.empty() ? config::RunConfig{} : config::load(path);
    if (ov.d) config::apply(rc, "d", std::to_string(*ov.d));
    if (ov.K) config::apply(rc, "K", std::to_string(*ov.K));
    if (ov.seed) config::apply(rc, "seed", std::to_string(*ov.seed));
    rc.fit.threads = ov.threads;
    return rc;
}

inline io::Format parse_format(const std::string& f) {
    if (f == "csv") return io::Format::csv_matrix;
    if (f == "pgm") return io::Format::raw_gray_images;
    throw Error("cli", "unknown data format '" + f + "' (csv or pgm)");
}

inline void write_report(const std::string& dir, const pipeline::FitResult& fr) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const Index p = fr.model.w.rows();
    const auto paths = eval::export_paths(fr.report, p);
    for (std::size_t t = 0; t < paths.size(); ++t)
        io::write_text((fs::path(dir) / ("path_col" + std::to_string(t) + ".csv")).string(), paths[t]);
    std::string obj = "column,loop,objective\n";
    for (std::size_t t = 0; t < fr.report.columns.size(); ++t) {
        const auto& o = fr.report.columns[t].objective;
        for (std::size_t k = 0; k < o.size(); ++k)
            obj += std::to_string(t) + "," + std::to_string(k) + "," + format_double(o[k]) + "\n";
    }
    io::write_text((fs::path(dir) / "objective.csv").string(), obj);
    io::write_text((fs::path(dir) / "angles.csv").string(), io::matrix_to_csv(fr.report.column_angles));
    io::write_text((fs::path(dir) / "model.txt").string(), model_io::to_text(fr.model));
    std::string warn;
    for (const auto& w : fr.report.warnings) warn += w + "\n";
    io::write_text((fs::path(dir) / "warnings.txt").string(), warn);
}

inline int cmd_fit(const std::string& data, const std::string& fmt, const std::string& cfg_path,
                   const std::string& model_out, std::string report_dir, const Overrides& ov, bool verbose,
                   std::ostream& out, std::ostream& err) {
    const config::RunConfig rc = load_config(cfg_path, ov);
    const SampleSet samples = io::ingest(data, parse_format(fmt));
    const pipeline::FitResult fr = pipeline::fit(samples, rc.fit);
    model_io::save(model_out, fr.model, rc);
    if (report_dir.empty()) report_dir = model_out + ".report";
    write_report(report_dir, fr);
    for (const auto& w : fr.report.warnings) err << "warning: " << w << "\n";
    if (verbose)
        for (const auto& [stage, ms] : fr.report.stage_ms) err << "time: " << stage << "=" << format_fixed(ms, 3) << "ms\n";
    out << "fit: n=" << samples.size() << " p=" << fr.model.w.rows() << " d=" << fr.model.dims() << " nnz=";
    const auto nnz = fr.model.sparsity();
    for (std::size_t t = 0; t < nnz.size(); ++t) out << (t ? "," : "") << nnz[t];
    out << "\n";
    return 0;
}

inline int cmd_project(const std::string& model_path, const std::string& data, const std::string& fmt,
                       const std::string& out_path, std::ostream& out) {
    const pipeline::Model model = model_io::load(model_path);
    const SampleSet samples = io::ingest(data, parse_format(fmt));
    const Matrix z = pipeline::project(model, samples);
    io::write_text(out_path, io::matrix_to_csv(z));
    out << "project: " << z.rows() << "x" << z.cols() << "\n";
    return 0;
}

inline int cmd_evaluate(const std::string& data, const std::string& fmt, const std::string& cfg_path,
                        const std::string& out_dir, const Overrides& ov, std::ostream& out) {
    namespace fs = std::filesystem;
    const config::RunConfig rc = load_config(cfg_path, ov);
    if (rc.effective_grid().empty()) throw Error("config", "dim_grid is empty");
    const SampleSet samples = io::ingest(data, parse_format(fmt));
    const eval::EvalResult res = eval::evaluate(samples, rc);
    fs::create_directories(out_dir);
    io::write_text((fs::path(out_dir) / "results.csv").string(), eval::results_csv(res));
    io::write_text((fs::path(out_dir) / "boxplot.csv").string(), eval::boxplot_csv(res));
    const std::string summary = eval::summary_line(res);
    io::write_text((fs::path(out_dir) / "summary.txt").string(), summary + "\n");
    out << summary << "\n";
    return 0;
}

inline std::pair<Index, Index> parse_shape(const std::string& shape, Index p) {
    if (shape.empty()) {
        const auto side = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(p))));
        if (side * side != p) throw Error("cli", "basis length " + std::to_string(p) + " is not square; pass --shape HxW");
        return {side, side};
    }
    const auto x = shape.find('x');
    long long h, w;
    if (x == std::string::npos || !parse_int(shape.substr(0, x), h) || !parse_int(shape.substr(x + 1), w) || h < 1 || w < 1)
        throw Error("cli", "bad --shape '" + shape + "', expected HxW");
    return {h, w};
}

inline int cmd_export_bases(const std::string& model_path, const std::string& out_dir, const std::string& shape,
                            std::ostream& out) {
    namespace fs = std::filesystem;
    const pipeline::Model model = model_io::load(model_path);
    const Matrix raw = model.raw_space_w();
    const auto [h, w] = parse_shape(shape, raw.rows());
    const auto images = eval::export_bases(raw, h, w);
    fs::create_directories(out_dir);
    for (std::size_t t = 0; t < images.size(); ++t)
        io::write_pgm((fs::path(out_dir) / ("basis_" + std::to_string(t) + ".pgm")).string(), images[t]);
    out << "export-bases: " << images.size() << " images " << h << "x" << w << "\n";
    return 0;
}

inline int cmd_export_paths(const std::string& data, const std::string& fmt, const std::string& cfg_path,
                            const std::string& out_dir, const Overrides& ov, std::ostream& out) {
    namespace fs = std::filesystem;
    const config::RunConfig rc = load_config(cfg_path, ov);
    const SampleSet samples = io::ingest(data, parse_format(fmt));
    const pipeline::FitResult fr = pipeline::fit(samples, rc.fit);
    const auto paths = eval::export_paths(fr.report, fr.model.w.rows());
    fs::create_directories(out_dir);
    for (std::size_t t = 0; t < paths.size(); ++t)
        io::write_text((fs::path(out_dir) / ("path_col" + std::to_string(t) + ".csv")).string(), paths[t]);
    out << "export-paths: " << paths.size() << " columns\n";
    return 0;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Sparse discriminative projections by manifold elastic net"};
    app.require_subcommand(1);

    std::string data, fmt = "csv", cfg_path, model_path, out_path, report_dir, shape;
    Overrides ov;
    bool verbose = false;
    long long d = 0, k = 0, seed = 0;

    auto add_overrides = [&](CLI::App* sub) {
        sub->add_option("--d", d, "projection dimension (overrides config)");
        sub->add_option("--K", k, "max nonzeros per column (overrides config)");
        sub->add_option("--seed", seed, "split seed (overrides config)");
        sub->add_option("--threads", ov.threads, "worker threads for column solves")->check(CLI::PositiveNumber);
    };

    CLI::App* fit = app.add_subcommand("fit", "fit a sparse projection and write a model file");
    fit->add_option("--data", data, "training data")->required();
    fit->add_option("--format", fmt, "csv or pgm");
    fit->add_option("--config", cfg_path, "key=value config file");
    fit->add_option("--out,--model", out_path, "model file to write")->required();
    fit->add_option("--report", report_dir, "fit-report directory (default <model>.report)");
    fit->add_flag("--verbose", verbose, "print stage timings");
    add_overrides(fit);

    CLI::App* proj = app.add_subcommand("project", "embed samples with a fitted model");
    proj->add_option("--model", model_path, "model file")->required();
    proj->add_option("--data", data, "samples to embed")->required();
    proj->add_option("--format", fmt, "csv or pgm");
    proj->add_option("--out", out_path, "embedding CSV to write")->required();

    CLI::App* ev = app.add_subcommand("evaluate", "random-split 1-NN recognition rates");
    ev->add_option("--data", data, "labelled data")->required();
    ev->add_option("--format", fmt, "csv or pgm");
    ev->add_option("--config", cfg_path, "key=value config file");
    ev->add_option("--out", out_path, "output directory")->required();
    add_overrides(ev);

    CLI::App* eb = app.add_subcommand("export-bases", "write each projection column as a graymap");
    eb->add_option("--model", model_path, "model file")->required();
    eb->add_option("--out", out_path, "output directory")->required();
    eb->add_option("--shape", shape, "image shape HxW (default square)");

    CLI::App* ep = app.add_subcommand("export-paths", "fit and write per-column coefficient paths");
    ep->add_option("--data", data, "training data")->required();
    ep->add_option("--format", fmt, "csv or pgm");
    ep->add_option("--config", cfg_path, "key=value config file");
    ep->add_option("--out", out_path, "output directory")->required();
    add_overrides(ep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: stage=cli, reason=" << e.what() << "\n";
        return 1;
    }

    for (CLI::App* sub : {fit, ev, ep}) {
        if (sub->count("--d")) ov.d = d;
        if (sub->count("--K")) ov.K = k;
        if (sub->count("--seed")) ov.seed = seed;
    }

    try {
        if (*fit) return cmd_fit(data, fmt, cfg_path, out_path, report_dir, ov, verbose, out, err);
        if (*proj) return cmd_project(model_path, data, fmt, out_path, out);
        if (*ev) return cmd_evaluate(data, fmt, cfg_path, out_path, ov, out);
        if (*eb) return cmd_export_bases(model_path, out_path, shape, out);
        if (*ep) return cmd_export_paths(data, fmt, cfg_path, out_path, ov, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.kind() == ErrorKind::numerical ? 2 : 1;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: stage=io, reason=" << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: stage=internal, reason=" << e.what() << "\n";
        return 2;
    }
    return 1;
}

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    std::vector<const char*> argv{"men"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace men::cli
