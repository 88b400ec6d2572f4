#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "tsnzeek");
  std::ostringstream out, err;
  const int code = tsnzeek::cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string scenario(const std::string& name) {
  return std::string(TSNZEEK_SOURCE_DIR) + "/scenarios/" + name + ".json";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

class CliTest : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("tsnzeek_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string gen(const std::string& name) {
    const auto prefix = (dir_ / name).string();
    const auto r = cli({"generate", "--script", scenario(name), "--out", prefix});
    EXPECT_EQ(r.code, 0) << r.err;
    return prefix;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, BenignMonitorIsClean) {
  const auto p = gen("benign");
  const auto r = cli({"monitor", "--pcap", p + ".pcap", "--config", p + ".config.json", "--routes",
                      p + ".routes.json", "--log", p + ".log"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("notices: 0"), std::string::npos) << r.out;
  EXPECT_TRUE(fs::exists(p + ".log"));
  EXPECT_EQ(fs::file_size(p + ".log"), 0u);
}

TEST_F(CliTest, AttackMonitorReportsNotices) {
  const auto p = gen("a5_sequence_injection");
  const auto r = cli({"monitor", "--pcap", p + ".pcap", "--config", p + ".config.json",
                      "--fixed-clock", "--log", p + ".log"});
  EXPECT_EQ(r.code, 2) << r.err;
  EXPECT_NE(slurp(p + ".log").find(R"("observed":"7148")"), std::string::npos);
}

TEST_F(CliTest, VerifyPassAndMismatch) {
  const auto p = gen("a3_modify_allocation");
  auto r = cli({"verify", "--pcap", p + ".pcap", "--truth", p + ".truth.json", "--config",
                p + ".config.json", "--routes", p + ".routes.json"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("verify: PASS"), std::string::npos);

  const auto b = gen("benign");
  r = cli({"verify", "--pcap", p + ".pcap", "--truth", b + ".truth.json", "--config",
           p + ".config.json"});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.out.find("UNEXPECTED"), std::string::npos);
}

TEST_F(CliTest, FixedClockLogsAreIdentical) {
  const auto p = gen("a7_sequence_rebase");
  for (const char* name : {".1.log", ".2.log"}) {
    cli({"monitor", "--pcap", p + ".pcap", "--config", p + ".config.json", "--fixed-clock", "--log",
         p + name});
  }
  const auto a = slurp(p + ".1.log");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(p + ".2.log"));
}

TEST_F(CliTest, CheckRoutes) {
  const auto shared = gen("a6_shared_path");
  EXPECT_EQ(cli({"check-routes", "--routes", shared + ".routes.json"}).code, 2);
  const auto ok = gen("benign");
  EXPECT_EQ(cli({"check-routes", "--routes", ok + ".routes.json"}).code, 0);
}

TEST_F(CliTest, Errors) {
  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"monitor"}).code, 1);
  EXPECT_EQ(cli({"monitor", "--pcap", (dir_ / "none.pcap").string()}).code, 1);
  const auto p = gen("benign");
  EXPECT_EQ(cli({"monitor", "--pcap", p + ".pcap", "--config", (dir_ / "none.json").string()}).code, 1);
  EXPECT_EQ(cli({"monitor", "--pcap", p + ".pcap", "--speed", "-1"}).code, 1);

  std::ofstream(dir_ / "bad.json") << R"({"attack": {"kind": "A0"}})";
  EXPECT_EQ(cli({"generate", "--script", (dir_ / "bad.json").string(), "--out",
                 (dir_ / "x").string()})
                .code,
            1);
  std::ofstream(dir_ / "cfg.json") << R"({"deviation_factor_k": 0.5})";
  EXPECT_EQ(cli({"monitor", "--pcap", p + ".pcap", "--config", (dir_ / "cfg.json").string()}).code, 1);
}

TEST_F(CliTest, HelpExitsClean) {
  const auto r = cli({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("monitor"), std::string::npos);
}
