#include "men/men.hpp"
#include "men_cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

using namespace men;
namespace fs = std::filesystem;

namespace {

const std::string kData = std::string(MEN_DATA_DIR) + "/tiny.csv";
const std::string kConfig = std::string(MEN_DATA_DIR) + "/default.cfg";

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("men_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct CliRun {
    int code;
    std::string out, err;
};

CliRun invoke(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

}  // namespace

TEST(Config, DefaultsAndRoundTrip) {
    const config::RunConfig def;
    EXPECT_EQ(config::to_text(config::load(kConfig)), config::to_text(def));
    config::RunConfig c = config::parse_string("alpha=0.5 # note\n\n dim_grid = 1, 3\nK=4\n");
    EXPECT_EQ(c.fit.men.alpha, 0.5);
    EXPECT_EQ(c.effective_grid(), (std::vector<Index>{1, 3}));
    EXPECT_EQ(config::to_text(config::parse_string(config::to_text(c))), config::to_text(c));
}

TEST(Config, UnknownKeyIsNamed) {
    try {
        config::parse_string("alpah=1\n");
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("alpah"), std::string::npos);
    }
    EXPECT_THROW(config::parse_string("beta=fast\n"), Error);
    EXPECT_THROW(config::parse_string("no equals sign\n"), Error);
    EXPECT_THROW(config::parse_string("double_shrinkage_correction=maybe\n"), Error);
}

TEST(Cli, FitWritesModelAndReport) {
    const fs::path dir = scratch("fit");
    const CliRun r = invoke({"fit", "--data", kData, "--config", kConfig, "--out", (dir / "m.men").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.rfind("fit: n=24 p=6 d=2", 0), 0u) << r.out;
    const pipeline::Model m = model_io::load((dir / "m.men").string());
    EXPECT_EQ(m.dims(), 2);
    for (Index nnz : m.sparsity()) EXPECT_LE(nnz, 10);
    for (const char* f : {"path_col0.csv", "path_col1.csv", "objective.csv", "angles.csv", "model.txt", "warnings.txt"})
        EXPECT_TRUE(fs::exists(dir / "m.men.report" / f)) << f;
}

TEST(Cli, InvalidKeyExitsOne) {
    const fs::path dir = scratch("badkey");
    io::write_text((dir / "c.cfg").string(), "lambda3=1\n");
    const CliRun r = invoke({"fit", "--data", kData, "--config", (dir / "c.cfg").string(), "--out", (dir / "m").string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("stage=config"), std::string::npos);
    EXPECT_NE(r.err.find("lambda3"), std::string::npos);
    EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
}

TEST(Cli, RepeatedFitIsByteIdentical) {
    const fs::path dir = scratch("det");
    ASSERT_EQ(invoke({"fit", "--data", kData, "--out", (dir / "a").string()}).code, 0);
    ASSERT_EQ(invoke({"fit", "--data", kData, "--out", (dir / "b").string(), "--threads", "2"}).code, 0);
    EXPECT_EQ(slurp(dir / "a"), slurp(dir / "b"));
    EXPECT_EQ(slurp(dir / "a.report" / "path_col1.csv"), slurp(dir / "b.report" / "path_col1.csv"));
}

TEST(Cli, ProjectMatchesLibraryAndSelfClassifies) {
    const fs::path dir = scratch("project");
    ASSERT_EQ(invoke({"fit", "--data", kData, "--out", (dir / "m").string()}).code, 0);
    ASSERT_EQ(invoke({"project", "--model", (dir / "m").string(), "--data", kData, "--out", (dir / "z.csv").string()}).code, 0);
    const SampleSet s = io::read_csv_matrix(kData);
    const Matrix z = pipeline::project(model_io::load((dir / "m").string()), s);
    EXPECT_EQ(slurp(dir / "z.csv"), io::matrix_to_csv(z));
    EXPECT_EQ(eval::accuracy(eval::nn_classify(z, s.labels(), z), s.labels()), 1.0);
}

TEST(Cli, ProjectDimensionMismatchExitsOne) {
    const fs::path dir = scratch("mismatch");
    ASSERT_EQ(invoke({"fit", "--data", kData, "--out", (dir / "m").string()}).code, 0);
    io::write_text((dir / "other.csv").string(), "1,2,0\n3,4,1\n");
    const CliRun r = invoke({"project", "--model", (dir / "m").string(), "--data", (dir / "other.csv").string(), "--out",
                       (dir / "z.csv").string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("stage=project"), std::string::npos);
    EXPECT_NE(r.err.find("feature count 2"), std::string::npos);
}

TEST(Cli, EvaluateWritesSummary) {
    const fs::path dir = scratch("evaluate");
    const CliRun r = invoke({"evaluate", "--data", kData, "--out", dir.string(), "--seed", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(std::regex_match(r.out, std::regex("best=[01]\\.\\d{4}@dim=\\d+\n")));
    EXPECT_EQ(slurp(dir / "summary.txt"), r.out);
    EXPECT_TRUE(fs::exists(dir / "results.csv"));
    EXPECT_TRUE(fs::exists(dir / "boxplot.csv"));
}

TEST(Cli, EmptyDimGridExitsOne) {
    const fs::path dir = scratch("grid");
    io::write_text((dir / "c.cfg").string(), "dim_grid=\n");
    const CliRun r = invoke({"evaluate", "--data", kData, "--config", (dir / "c.cfg").string(), "--out", dir.string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("dim_grid"), std::string::npos);
}

TEST(Cli, ExportCommands) {
    const fs::path dir = scratch("export");
    ASSERT_EQ(invoke({"fit", "--data", kData, "--out", (dir / "m").string(), "--d", "1"}).code, 0);
    EXPECT_EQ(invoke({"export-bases", "--model", (dir / "m").string(), "--out", (dir / "b").string(), "--shape", "2x3"}).code, 0);
    EXPECT_TRUE(fs::exists(dir / "b" / "basis_0.pgm"));
    EXPECT_EQ(io::read_pgm((dir / "b" / "basis_0.pgm").string()).width, 3);
    EXPECT_EQ(invoke({"export-bases", "--model", (dir / "m").string(), "--out", (dir / "b").string()}).code, 1);
    EXPECT_EQ(invoke({"export-paths", "--data", kData, "--out", (dir / "p").string(), "--K", "3"}).code, 0);
    EXPECT_TRUE(fs::exists(dir / "p" / "path_col1.csv"));
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(invoke({}).code, 1);
    EXPECT_EQ(invoke({"fit", "--data", kData}).code, 1);
    EXPECT_EQ(invoke({"fit", "--data", "/nonexistent.csv", "--out", "/tmp/x"}).code, 1);
    EXPECT_EQ(invoke({"fit", "--data", kData, "--out", "/tmp/x", "--format", "tiff"}).code, 1);
}
