#include <gtest/gtest.h>

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string output;  // stdout and stderr interleaved
};

Outcome dcvae(const std::string& args) {
  const std::string cmd = std::string(DCVAE_CLI_PATH) + " " + args + " 2>&1";
  Outcome r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe) != nullptr) r.output += buf;
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("dcvae_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }

  std::string p(const std::string& name) const { return (dir / name).string(); }

  // 4 subjects x 10 sites x 2 beats; split 2/1/1 subjects.
  std::string tiny_data() const {
    return "--n_subjects 4 --sites_per_subject 10 --beats_per_site 2 --train_fraction 0.5 --val_fraction 0.25 "
           "--data_in " + p("beats.csv");
  }
  static std::string tiny_model() {
    return "--dim_v 3 --dim_z 2 --encoder_hidden 16 --decoder_hidden 16 --batch_size 8 --n_pairs 16";
  }

  void synth() const {
    ASSERT_EQ(dcvae("synth --n_subjects 4 --sites_per_subject 10 --beats_per_site 2 --data_out " + p("beats.csv") +
                    " --truth_out " + p("truth.csv"))
                  .code,
              0);
  }

  fs::path dir;
};

}  // namespace

TEST_F(Cli, SynthRowCountAndByteIdenticalRepeat) {
  const std::string args = "synth --n_subjects 3 --sites_per_subject 10 --beats_per_site 2 --data_seed 5 ";
  const Outcome a = dcvae(args + "--data_out " + p("a.csv") + " --truth_out " + p("ta.csv"));
  ASSERT_EQ(a.code, 0) << a.output;
  EXPECT_NE(a.output.find("# dcvae synth resolved configuration"), std::string::npos);
  EXPECT_NE(a.output.find("data_seed=5"), std::string::npos);
  ASSERT_EQ(dcvae(args + "--data_out " + p("b.csv") + " --truth_out " + p("tb.csv")).code, 0);
  EXPECT_EQ(count_lines(p("a.csv")), 1u + 3 * 10 * 2);
  EXPECT_EQ(count_lines(p("ta.csv")), 1u + 3 * 10 * 2);
  EXPECT_EQ(slurp(p("a.csv")), slurp(p("b.csv")));
  EXPECT_EQ(slurp(p("ta.csv")), slurp(p("tb.csv")));
}

TEST_F(Cli, MalformedKeyExitsTwoNamingTheKey) {
  const Outcome flag = dcvae("synth --not_a_key 3");
  EXPECT_EQ(flag.code, 2);
  EXPECT_NE(flag.output.find("not_a_key"), std::string::npos) << flag.output;

  std::ofstream(p("bad.cfg")) << "n_subjects = 4\nlearning_rat = 0.1\n";
  const Outcome file = dcvae("synth --config " + p("bad.cfg"));
  EXPECT_EQ(file.code, 2);
  EXPECT_NE(file.output.find("learning_rat"), std::string::npos) << file.output;

  const Outcome value = dcvae("synth --n_subjects many");
  EXPECT_EQ(value.code, 2);
  EXPECT_NE(value.output.find("n_subjects"), std::string::npos) << value.output;
}

TEST_F(Cli, ConfigFileAndFlagsResolveIntoPrintout) {
  std::ofstream(p("run.cfg")) << "# tiny\nn_subjects=3\nsites_per_subject = 10\n";
  const Outcome r = dcvae("synth --config " + p("run.cfg") + " --sites_per_subject 20 --beats_per_site 1 --data_out " +
                      p("d.csv") + " --truth_out " + p("t.csv"));
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("n_subjects=3\n"), std::string::npos);
  EXPECT_NE(r.output.find("sites_per_subject=20\n"), std::string::npos);
  EXPECT_EQ(count_lines(p("d.csv")), 1u + 3 * 20);
}

TEST_F(Cli, SmokeTrainUnderOneMinute) {
  synth();
  const auto t0 = std::chrono::steady_clock::now();
  const Outcome r = dcvae("train " + tiny_data() + " " + tiny_model() + " --epochs 2 --out_dir " + p("run") +
                      " --checkpoint " + p("run/model.ckpt"));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_LT(secs, 60.0);
  EXPECT_TRUE(fs::exists(p("run/model.ckpt")));
  EXPECT_EQ(count_lines(p("run/metrics/train_log.csv")), 3u);
}

TEST_F(Cli, ZeroLambdasLogZeroPenaltyTerms) {
  synth();
  const Outcome r = dcvae("train " + tiny_data() + " " + tiny_model() + " --epochs 3 --lambda1 0 --lambda2 0 --out_dir " +
                      p("run") + " --checkpoint " + p("run/model.ckpt"));
  ASSERT_EQ(r.code, 0) << r.output;
  std::ifstream in(p("run/metrics/train_log.csv"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "epoch,total_loss,neg_elbo,recon,kl,mmd_term,contrastive_term,wall_seconds");
  int rows = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    ASSERT_EQ(cells.size(), 8u) << line;
    EXPECT_EQ(std::stod(cells[5]), 0.0) << line;
    EXPECT_EQ(std::stod(cells[6]), 0.0) << line;
    EXPECT_EQ(cells[1], cells[2]) << "total equals negative ELBO";
    ++rows;
  }
  EXPECT_EQ(rows, 3);
}

TEST_F(Cli, MissingDatasetExitsTwo) {
  const Outcome r = dcvae("train --data_in " + p("nope.csv") + " --out_dir " + p("run"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("nope.csv"), std::string::npos) << r.output;
  EXPECT_EQ(dcvae("eval --data_in " + p("nope.csv")).code, 2);
}

TEST_F(Cli, MissingCheckpointExitsTwo) {
  synth();
  const Outcome r = dcvae("eval " + tiny_data() + " --checkpoint " + p("missing.ckpt"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("missing.ckpt"), std::string::npos) << r.output;
}

// An untrained checkpoint: zero epochs writes the freshly initialized model.
TEST_F(Cli, EvalOfUntrainedCheckpointProducesFullLayout) {
  synth();
  ASSERT_EQ(dcvae("train " + tiny_data() + " " + tiny_model() + " --epochs 0 --out_dir " + p("run") +
                  " --checkpoint " + p("run/model.ckpt"))
                .code,
            0);
  const Outcome r = dcvae("eval " + tiny_data() + " --checkpoint " + p("run/model.ckpt") + " --out_dir " + p("run") +
                      " --n_plot_beats 2 --probe_max_iter 200");
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_TRUE(fs::exists(p("run/tables/segment_accuracy.csv")));
  EXPECT_TRUE(fs::exists(p("run/tables/cross_factor.csv")));
  EXPECT_TRUE(fs::exists(p("run/metrics/train_log.csv")));
  std::size_t svgs = 0;
  for (const auto& e : fs::directory_iterator(p("run/figures"))) {
    svgs += e.path().extension() == ".svg";
    EXPECT_EQ(e.path().filename().string().rfind("beat_", 0), 0u);
  }
  EXPECT_EQ(svgs, 2u);
  EXPECT_EQ(count_lines(p("run/tables/cross_factor.csv")), 5u);
}

TEST_F(Cli, SwapWritesGenerations) {
  synth();
  ASSERT_EQ(dcvae("train " + tiny_data() + " " + tiny_model() + " --epochs 1 --out_dir " + p("run") +
                  " --checkpoint " + p("run/model.ckpt"))
                .code,
            0);
  const Outcome r = dcvae("swap " + tiny_data() + " --checkpoint " + p("run/model.ckpt") + " --out_dir " + p("run") +
                      " --swap_segment 4 --swap_n 2");
  ASSERT_EQ(r.code, 0) << r.output;
  for (int i = 0; i < 2; ++i) {
    EXPECT_TRUE(fs::exists(p("run/figures/swap_seg4_00" + std::to_string(i) + ".svg")));
    EXPECT_TRUE(fs::exists(p("run/figures/swap_seg4_00" + std::to_string(i) + ".csv")));
  }
}

TEST_F(Cli, GradcheckPasses) {
  const Outcome r = dcvae("gradcheck --gradcheck_coords 40");
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("PASS"), std::string::npos);
  EXPECT_EQ(r.output.find("FAIL"), std::string::npos);
}
