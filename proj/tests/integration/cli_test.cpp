#include <gtest/gtest.h>

#include <sstream>

#include "promptpack/cli.hpp"
#include "temp_dir.hpp"

using testing_support::read_all;
using testing_support::TempDir;
using testing_support::write_all;

namespace {

const std::string kFixtures = PROMPTPACK_FIXTURE_DIR;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = promptpack::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> fixture_args() {
  return {"--prompt", kFixtures + "/prompt.txt", "--attach", kFixtures + "/filing.txt", "--attach",
          kFixtures + "/segments.csv"};
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST(Cli, MissingPromptIsUsageError) {
  const auto r = cli({"compress", "--attach", kFixtures + "/filing.txt"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--prompt"), std::string::npos);
}

TEST(Cli, UnknownModelIsUsageError) {
  TempDir dir;
  const auto r = cli(concat({"compress", "--model", "no-such-model", "--out", dir / "b"}, fixture_args()));
  EXPECT_EQ(r.code, 1);
}

TEST(Cli, IdentityCompressionIsByteEqual) {
  TempDir dir;
  const auto r = cli(concat({"compress", "--budget", "1.0", "--no-ngram", "--quant", "off", "--out", dir / "b"},
                            fixture_args()));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_all(dir / "b/prompt.txt"), read_all(kFixtures + "/prompt.txt"));
  EXPECT_EQ(read_all(dir / "b/attachments/filing.txt"), read_all(kFixtures + "/filing.txt"));
  EXPECT_EQ(read_all(dir / "b/attachments/segments.csv"), read_all(kFixtures + "/segments.csv"));
}

TEST(Cli, CompressExpandRoundTrip) {
  TempDir dir;
  const auto r = cli(concat({"compress", "--out", dir / "b"}, fixture_args()));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("\"ratio\""), std::string::npos);
  EXPECT_NE(read_all(dir / "b/attachments/filing.txt"), read_all(kFixtures + "/filing.txt"));

  const auto e = cli({"expand", "--in", dir / "b", "--out", dir / "restored.txt", "--attachment", "filing.txt"});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_EQ(read_all(dir / "restored.txt"), read_all(kFixtures + "/filing.txt"));

  const auto all = cli({"expand", "--in", dir / "b", "--out", dir / "all"});
  ASSERT_EQ(all.code, 0) << all.err;
  EXPECT_EQ(read_all(dir / "all/filing.txt"), read_all(kFixtures + "/filing.txt"));
  EXPECT_FALSE(read_all(dir / "all/segments.csv").empty());
}

TEST(Cli, TamperedPlaceholderFailsWithDataError) {
  TempDir dir;
  ASSERT_EQ(cli(concat({"compress", "--out", dir / "b"}, fixture_args())).code, 0);
  const std::string path = dir / "b/attachments/filing.txt";
  write_all(path, read_all(path) + " ZZ9");
  const auto e = cli({"expand", "--in", dir / "b", "--out", dir / "x.txt", "--attachment", "filing.txt"});
  EXPECT_EQ(e.code, 2);
  EXPECT_NE(e.err.find("UnknownPlaceholder"), std::string::npos);
}

TEST(Cli, MissingDictionaryFailsWithDataError) {
  TempDir dir;
  ASSERT_EQ(cli(concat({"compress", "--out", dir / "b"}, fixture_args())).code, 0);
  std::filesystem::remove(dir / "b/attachments/filing.txt.dict.json");
  const auto e = cli({"expand", "--in", dir / "b", "--out", dir / "x.txt", "--attachment", "filing.txt"});
  EXPECT_EQ(e.code, 2);
}

TEST(Cli, GridPrintsOneLinePerCellDeterministically) {
  const auto a = cli(concat({"grid", "--tgrid", "2,3,4,5", "--ggrid", "2,3,4"}, fixture_args()));
  ASSERT_EQ(a.code, 0) << a.err;
  std::istringstream ss(a.out);
  std::vector<std::string> lines;
  for (std::string l; std::getline(ss, l);) lines.push_back(l);
  ASSERT_EQ(lines.size(), 12u);
  EXPECT_EQ(lines[0].rfind("{\"G\":2,\"T\":2", 0), 0u);
  const auto b = cli(concat({"grid", "--tgrid", "2,3,4,5", "--ggrid", "2,3,4"}, fixture_args()));
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(cli(concat({"grid", "--tgrid", "2,x"}, fixture_args())).code, 1);
}

TEST(Cli, GridCellMatchesCompress) {
  TempDir dir;
  const auto g = cli(concat({"grid", "--tgrid", "3", "--ggrid", "2"}, fixture_args()));
  ASSERT_EQ(g.code, 0) << g.err;
  const auto c = cli(concat({"compress", "--topk", "3", "--ngram", "2", "--out", dir / "b"}, fixture_args()));
  ASSERT_EQ(c.code, 0) << c.err;
  const std::string report = read_all(dir / "b/report.json");
  // compressed token counts agree
  const auto key = [](const std::string& s) {
    const auto p = s.find("\"compressedTokens\":");
    return s.substr(p, s.find_first_of(",}\n", p) - p);
  };
  std::string compact = report;
  compact.erase(std::remove_if(compact.begin(), compact.end(), [](char ch) { return ch == ' ' || ch == '\n'; }),
                compact.end());
  EXPECT_EQ(key(g.out), key(compact));
}
