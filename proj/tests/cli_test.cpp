#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / "qmoney_cli_test";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  static Outcome run(const std::string& args) {
    std::string cmd = "cd '" + dir_.string() + "' && '" QMONEY_CLI "' " + args + " 2>&1";
    Outcome r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    while (std::fgets(buf, sizeof buf, p)) r.out += buf;
    int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
  }

  static std::string slurp(const std::string& name) {
    std::ifstream in(dir_ / name, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static inline fs::path dir_;
};

}  // namespace

TEST_F(Cli, MintVerifyTrace) {
  ASSERT_EQ(run("keygen --kind at --seed 3 --out at.json").code, 0);
  ASSERT_EQ(run("mint --world at.json --tag 5a --seed 1 --out n.json").code, 0);
  auto v = run("verify --world at.json --in n.json --seed 2");
  EXPECT_EQ(v.code, 0) << v.out;
  EXPECT_NE(v.out.find("accept"), std::string::npos);
  auto t = run("trace --world at.json --in n.json");
  EXPECT_EQ(t.code, 0);
  EXPECT_EQ(t.out, "5a\n");
}

TEST_F(Cli, RerandChangesSerialAndSpendsInput) {
  ASSERT_EQ(run("keygen --kind at --seed 4 --out at4.json").code, 0);
  ASSERT_EQ(run("mint --world at4.json --tag 01 --seed 1 --out a.json").code, 0);
  auto r = run("rerand --world at4.json --in a.json --out b.json --seed 5");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(run("verify --world at4.json --in b.json").code, 0);
  auto again = run("verify --world at4.json --in a.json");
  EXPECT_EQ(again.code, 2);
  EXPECT_NE(again.out.find("consumed"), std::string::npos);
  EXPECT_EQ(run("trace --world at4.json --in b.json").out, "01\n");
}

TEST_F(Cli, ForeignSerialRejected) {
  ASSERT_EQ(run("keygen --kind at --seed 6 --out at6.json").code, 0);
  ASSERT_EQ(run("mint --world at6.json --tag 01 --seed 1 --out x.json").code, 0);
  ASSERT_EQ(run("mint --world at6.json --tag 02 --seed 2 --out y.json").code, 0);
  // Swap in y's serial on x's register.
  auto x = slurp("x.json");
  auto y = slurp("y.json");
  auto serial = [](const std::string& s) {
    auto a = s.find("\"serial\"");
    return s.substr(a, s.find('}', a) - a);
  };
  auto pos = x.find(serial(x));
  x.replace(pos, serial(x).size(), serial(y));
  std::ofstream(dir_ / "x.json", std::ios::binary) << x;
  auto v = run("verify --world at6.json --in x.json --seed 9");
  EXPECT_EQ(v.code, 1) << v.out;
  EXPECT_NE(v.out.find("reject"), std::string::npos);
}

TEST_F(Cli, VoteAndTally) {
  ASSERT_EQ(run("crs --seed 1 --out crs.json").code, 0);
  ASSERT_EQ(run("keygen --kind vote --crs crs.json --seed 2 --out vote.json").code, 0);
  for (int i = 0; i < 3; ++i) {
    auto t = "t" + std::to_string(i) + ".json";
    ASSERT_EQ(run("mint --world vote.json --crs crs.json --seed " + std::to_string(i) + " --out " + t).code, 0);
    ASSERT_EQ(run("verify --world vote.json --crs crs.json --in " + t).code, 0);
    std::string c = i < 2 ? "0b" : "c0";
    auto r = run("vote --world vote.json --crs crs.json --in " + t + " --candidate " + c + " --seed " +
                 std::to_string(i) + " --out board.jsonl");
    ASSERT_EQ(r.code, 0) << r.out;
  }
  auto tally = run("tally --world vote.json --crs crs.json --in board.jsonl");
  ASSERT_EQ(tally.code, 0);
  EXPECT_NE(tally.out.find("\"0b\": 2"), std::string::npos) << tally.out;
  EXPECT_NE(tally.out.find("\"c0\": 1"), std::string::npos) << tally.out;
  EXPECT_NE(tally.out.find("\"counted\": 3"), std::string::npos);
}

TEST_F(Cli, CrsWorldWithoutCrsIsUsageError) {
  EXPECT_EQ(run("keygen --kind ut --seed 2 --out u.json").code, 2);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("keygen --preset nope --out z.json").code, 2);
  EXPECT_EQ(run("keygen --kind bogus --out z.json").code, 2);
  EXPECT_EQ(run("verify --world missing.json --in missing.json").code, 2);
  EXPECT_EQ(run("").code, 2);
  auto g = run("experiment --game nope");
  EXPECT_EQ(g.code, 2);
  EXPECT_NE(g.out.find("fresh-banknote"), std::string::npos);
  EXPECT_NE(g.out.find("voting-uniqueness"), std::string::npos);
}

TEST_F(Cli, ExperimentIsReproducible) {
  ASSERT_EQ(run("experiment --game tracing --trials 5 --seed 9 --out r1.csv").code, 0);
  ASSERT_EQ(run("experiment --game tracing --trials 5 --seed 9 --out r2.csv").code, 0);
  EXPECT_EQ(slurp("r1.csv"), slurp("r2.csv"));
  EXPECT_EQ(slurp("r1.csv").rfind("game,scheme,adversary,trials,wins,rate,ci_low,ci_high,seed\n", 0), 0u);
  ASSERT_EQ(run("experiment --game tracing --trials 5 --seed 9 --format json --out r.json").code, 0);
  EXPECT_NE(slurp("r.json").find("\"ci_high\""), std::string::npos);
}
