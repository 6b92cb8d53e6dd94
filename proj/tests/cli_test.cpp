#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Out {
  int code;
  std::string out, err;
};

Out run(std::vector<std::string> args) {
  args.insert(args.begin(), "pofin");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = pofin::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("pofin_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static std::string slurp(const std::string& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
  }
  static void spit(const std::string& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

  fs::path dir_;
};

const std::vector<std::string> kKappa{"--depth", "32", "certify", "kappa", "--beta", "2"};
const std::vector<std::string> kReduce{"--depth", "256", "certify", "reduce", "--u", "periodic:/10", "--v", "periodic:/1"};
const std::vector<std::string> kIncomp{"--depth", "64", "certify", "incomparable", "--u", "periodic:/10",
                                       "--v", "periodic:/01"};

std::vector<std::string> with_out(std::vector<std::string> a, const std::string& p) {
  a.insert(a.begin(), {"--out", p});
  return a;
}

}  // namespace

TEST_F(Cli, CertifyThenCheck) {
  for (const auto* args : {&kKappa, &kReduce, &kIncomp}) {
    std::string f = path("c.json");
    Out c = run(with_out(*args, f));
    ASSERT_EQ(c.code, 0) << c.err;
    Out k = run({"check", f});
    EXPECT_EQ(k.code, 0) << k.err;
    EXPECT_EQ(k.out.rfind("pass ", 0), 0u) << k.out;
  }
}

TEST_F(Cli, Deterministic) {
  for (const auto* args : {&kKappa, &kIncomp}) {
    ASSERT_EQ(run(with_out(*args, path("a.json"))).code, 0);
    ASSERT_EQ(run(with_out(*args, path("b.json"))).code, 0);
    EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
  }
  Out a = run(kIncomp), b = run(kIncomp);
  EXPECT_EQ(a.out, b.out);
  EXPECT_FALSE(fs::exists(path("a.json.tmp")));
}

TEST_F(Cli, SingleByteMutationIsRejected) {
  std::string f = path("k.json");
  ASSERT_EQ(run(with_out(kKappa, f)).code, 0);
  std::string text = slurp(f);
  size_t at = text.find("\"1/4\"");
  ASSERT_NE(at, std::string::npos);
  text[at + 3] = '5';
  spit(f, text);
  EXPECT_EQ(run({"check", f}).code, 2);
  EXPECT_EQ(run({"check", "--no-integrity", f}).code, 2);
}

TEST_F(Cli, ReverificationWithoutIntegrity) {
  std::string f = path("k.json");
  ASSERT_EQ(run(with_out(kKappa, f)).code, 0);
  auto doc = nlohmann::json::parse(slurp(f));
  ASSERT_EQ(doc["certificate"]["kappa"]["kappa"][3]["exact"], "1/4");
  doc["certificate"]["kappa"]["kappa"][3]["exact"] = "1/2";
  spit(f, doc.dump(2));
  Out k = run({"check", "--no-integrity", f});
  EXPECT_EQ(k.code, 2) << k.err;
  EXPECT_NE(k.err.find("fail"), std::string::npos);

  // changed inputs are caught by the input hash even without integrity
  doc = nlohmann::json::parse(slurp(f));
  doc["inputs"]["envelope"] = "inv_t:0";
  spit(f, doc.dump(2));
  EXPECT_EQ(run({"check", "--no-integrity", f}).code, 2);
}

TEST_F(Cli, TruncatedAndForeignFiles) {
  std::string f = path("k.json");
  ASSERT_EQ(run(with_out(kKappa, f)).code, 0);
  std::string text = slurp(f);
  spit(f, text.substr(0, text.size() / 2));
  Out k = run({"check", f});
  EXPECT_EQ(k.code, 2);
  EXPECT_NE(k.err.find("not a certificate"), std::string::npos) << k.err;

  spit(f, "{\"schema_version\": 99}");
  EXPECT_EQ(run({"check", f}).code, 2);
  EXPECT_EQ(run({"check", path("missing.json")}).code, 4);
}

TEST_F(Cli, ReportRowsStayUnderBound) {
  std::string f = path("w.json");
  ASSERT_EQ(run(with_out(kIncomp, f)).code, 0);
  Out r = run({"--csv", "report", f});
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "l,log2_ratio,log2_bound,direction");
  long rows = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    ASSERT_EQ(cells.size(), 4u) << line;
    EXPECT_LE(std::stod(cells[1]), std::stod(cells[2])) << line;
    ++rows;
  }
  // 4 levels, both ratios, both witnesses
  EXPECT_EQ(rows, 16);

  spit(f, "{}");
  Out e = run({"--csv", "report", f});
  EXPECT_EQ(e.code, 0);
  EXPECT_EQ(e.out, "n,log2_f_u,log2_f_v,log2_ratio\n");
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 4);
  EXPECT_EQ(run({"frobnicate"}).code, 4);
  EXPECT_EQ(run({"--depth", "8", "certify", "kappa", "--beta", "2"}).code, 4);
  EXPECT_EQ(run({"certify", "reduce", "--u", "periodic:/10"}).code, 4);
  EXPECT_EQ(run({"certify", "kappa"}).code, 4);
  EXPECT_EQ(run({"classify", "--u", "periodic:/1x", "--v", "periodic:/1"}).code, 4);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(Cli, ClassifyAndAntichain) {
  Out c = run({"--depth", "256", "classify", "--u", "periodic:/10", "--v", "periodic:/1"});
  ASSERT_EQ(c.code, 0) << c.err;
  auto doc = nlohmann::json::parse(c.out);
  EXPECT_EQ(doc["verdict"]["kind"], "RightReduces");
  Out a = run({"--depth", "64", "antichain", "--branches", "00,01,10,11"});
  EXPECT_EQ(a.code, 0) << a.err;
}
