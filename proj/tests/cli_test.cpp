#include <gtest/gtest.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gig/csv.hpp"
#include "gig/diffnet.hpp"
#include "gig_tools/config.hpp"

namespace {

namespace fs = std::filesystem;

const char* kSmallConfig = R"({
  "dataset": {"n": 600, "noise": 0.15},
  "model": {"epochs": 20},
  "eval_points": 10,
  "energy": {"iters": 20},
  "benchmark": {"noise_grid": [0.05, 0.25], "num_seeds": 2}
})";

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("gig_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    std::ofstream(dir_ / "cfg.json") << kSmallConfig;
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) const {
    const std::string cmd = std::string(GIG_CLI_PATH) + " " + args + " > " +
                            (dir_ / "stdout.txt").string() + " 2> " + (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::string common() const {
    return "--config " + (dir_ / "cfg.json").string() + " --out " + dir_.string();
  }

  fs::path dir_;
};

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t data_rows(const fs::path& file) {
  std::ifstream in(file);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) ++n;
  return n == 0 ? 0 : n - 1;
}

void expect_well_formed_svg(const fs::path& file) {
  boost::property_tree::ptree tree;
  ASSERT_NO_THROW(boost::property_tree::read_xml(file.string(), tree)) << file;
  EXPECT_EQ(tree.count("svg"), 1u) << file;
}

TEST_F(CliTest, NoSubcommandIsUsageError) { EXPECT_EQ(run(""), 2); }

TEST_F(CliTest, UnknownFlagIsUsageError) { EXPECT_EQ(run("train --bogus 1"), 2); }

TEST_F(CliTest, MissingOutDirIsUsageError) {
  EXPECT_EQ(run("train --out " + (dir_ / "missing").string()), 2);
}

TEST_F(CliTest, UnknownMethodIsUsageError) { EXPECT_EQ(run("train " + common() + " --methods nope"), 2); }

TEST_F(CliTest, UnknownConfigKeyIsUsageError) {
  std::ofstream(dir_ / "bad.json") << R"({"datset": {}})";
  EXPECT_EQ(run("train --config " + (dir_ / "bad.json").string() + " --out " + dir_.string()), 2);
}

TEST_F(CliTest, CorruptModelIsRuntimeError) {
  std::ofstream(dir_ / "model.json") << "{not json";
  EXPECT_EQ(run("attribute " + common() + " --methods ig"), 1);
}

TEST_F(CliTest, TrainWritesModelReportAndDataset) {
  ASSERT_EQ(run("train " + common() + " --seed 3"), 0);
  EXPECT_NO_THROW(gig::load_model(dir_ / "model.json"));
  EXPECT_EQ(data_rows(dir_ / "dataset.csv"), 600u);
  std::ifstream report(dir_ / "train_report.csv");
  std::string header, row;
  std::getline(report, header);
  std::getline(report, row);
  EXPECT_EQ(header, "seed,train_accuracy,test_accuracy,final_loss");
  EXPECT_EQ(gig::split_csv_line(row).front(), "3");
}

TEST_F(CliTest, AttributeRowCountsAndColumns) {
  ASSERT_EQ(run("train " + common()), 0);
  ASSERT_EQ(run("attribute " + common() + " --methods ig,geodesic_knn,random"), 0);
  for (const char* m : {"ig", "geodesic_knn", "random"}) {
    const fs::path file = dir_ / (std::string("attributions_") + m + ".csv");
    EXPECT_EQ(data_rows(file), 20u) << m;
    std::ifstream in(file);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    EXPECT_EQ(header,
              "input_id,feature_index,value,f_input,f_baseline,completeness_residual,"
              "strong_completeness_residual,method");
    const auto fields = gig::split_csv_line(row);
    ASSERT_EQ(fields.size(), 8u);
    EXPECT_EQ(fields.back(), m);
  }
}

TEST_F(CliTest, AttributeIsDeterministic) {
  ASSERT_EQ(run("train " + common()), 0);
  ASSERT_EQ(run("attribute " + common() + " --methods gradient_shap,geodesic_svi"), 0);
  const std::string first = slurp(dir_ / "attributions_geodesic_svi.csv") +
                            slurp(dir_ / "attributions_gradient_shap.csv");
  ASSERT_EQ(run("attribute " + common() + " --methods gradient_shap,geodesic_svi"), 0);
  EXPECT_EQ(first, slurp(dir_ / "attributions_geodesic_svi.csv") +
                       slurp(dir_ / "attributions_gradient_shap.csv"));
}

TEST_F(CliTest, DumpsGraphPathsAndTrace) {
  std::ofstream(dir_ / "cfg.json") << R"({"dataset": {"n": 600}, "model": {"epochs": 20},
    "eval_points": 4, "energy": {"iters": 15}, "dump_graph": true, "dump_paths": 2,
    "dump_energy_trace": true})";
  ASSERT_EQ(run("train " + common()), 0);
  ASSERT_EQ(run("attribute " + common() + " --methods geodesic_knn"), 0);
  EXPECT_EQ(slurp(dir_ / "graph.csv").substr(0, 20), "i,j,weight,is_bridge");
  EXPECT_TRUE(fs::exists(dir_ / "paths" / "geodesic_knn_1.csv"));
  EXPECT_EQ(data_rows(dir_ / "energy_trace.csv"), 15u);
}

TEST_F(CliTest, AxiomsSummarisesEachMethod) {
  ASSERT_EQ(run("train " + common()), 0);
  ASSERT_EQ(run("axioms " + common() + " --methods ig,occlusion"), 0);
  EXPECT_EQ(data_rows(dir_ / "axioms.csv"), 2u);
}

TEST_F(CliTest, BenchmarkOutputsAndSvgs) {
  ASSERT_EQ(run("benchmark " + common() + " --methods ig,random"), 0);
  EXPECT_EQ(data_rows(dir_ / "purity.csv"), 2u * 2u * 2u);
  EXPECT_EQ(data_rows(dir_ / "summary.csv"), 2u);
  EXPECT_EQ(data_rows(dir_ / "mask_curve.csv"), 2u * 14u);
  expect_well_formed_svg(dir_ / "purity_vs_noise.svg");
  expect_well_formed_svg(dir_ / "heatmap_ig.svg");
  expect_well_formed_svg(dir_ / "heatmap_random.svg");
}

TEST(ConfigTest, DefaultsAndOverrides) {
  const gig::tools::RunConfig cfg = gig::tools::parse_config(R"({"seed": 7, "knn": {"k": 5}})");
  EXPECT_EQ(cfg.dataset.seed, 7u);
  EXPECT_EQ(cfg.method_config(gig::Method::geodesic_knn).knn.k, 5u);
  EXPECT_THROW(gig::tools::parse_config(R"({"knn": {"k": -1}})"), gig::tools::UsageError);
  EXPECT_THROW(gig::tools::parse_config("[1"), gig::tools::UsageError);
  EXPECT_THROW(gig::tools::parse_method_list("ig,,x"), gig::tools::UsageError);
}

}  // namespace
