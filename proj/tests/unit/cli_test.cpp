// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <memory>
#include <sstream>

#include <gtest/gtest.h>
#include <torch/torch.h>

#include "support/fixtures.hpp"
#include "swinmark/cli.hpp"
#include "swinmark/errors.hpp"
#include "swinmark/image_io.hpp"

namespace swinmark::cli {
namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "swinmark");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

size_t count(const std::string& text, const std::string& needle) {
  size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = std::make_unique<testing::TempDir>("swinmark-cli");
    const auto images = testing::natural_images(16, 16);
    std::filesystem::create_directories(data());
    for (int64_t i = 0; i < 8; ++i) save_image(data() / ("img" + std::to_string(i) + ".png"), images[i]);
    auto r = invoke({"train", "--preset", "tiny", "--data", data().string(), "--override", "steps=3", "--override",
                     "batch_size=4", "--out", checkpoint().string()});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  static void TearDownTestSuite() { dir_.reset(); }

  static std::filesystem::path path(const std::string& name) { return *dir_ / name; }
  static std::filesystem::path data() { return path("data"); }
  static std::filesystem::path checkpoint() { return path("tiny.pt"); }
  static std::filesystem::path cover() { return data() / "img0.png"; }

  static std::unique_ptr<testing::TempDir> dir_;
};

std::unique_ptr<testing::TempDir> CliTest::dir_;

TEST(Messages, HexAndBitStrings) {
  auto bits = hex_to_bits("a5", 8);
  EXPECT_EQ(bits_to_string(bits), "10100101");
  EXPECT_EQ(bits_to_hex(bits), "a5");
  EXPECT_EQ(bits_to_hex(hex_to_bits("0F3c", 16)), "0f3c");
  EXPECT_TRUE(torch::equal(string_to_bits("10100101", 8), bits));
  EXPECT_THROW(hex_to_bits("a5f", 8), DataError);
  EXPECT_THROW(hex_to_bits("g5", 8), DataError);
  EXPECT_THROW(hex_to_bits("a", 6), DataError);
  EXPECT_THROW(string_to_bits("1010010", 8), DataError);
  EXPECT_THROW(string_to_bits("1010012x", 8), DataError);
}

TEST(Usage, ExitCodes) {
  EXPECT_EQ(invoke({"--help"}).code, 0);
  EXPECT_EQ(invoke({}).code, kUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, kUsage);
  EXPECT_EQ(invoke({"attack", "--in", "x.png"}).code, kUsage);
  EXPECT_EQ(invoke({"train", "--preset", "tiny", "--override", "nonsense=1", "--out", "x.pt"}).code, kUsage);
  EXPECT_EQ(invoke({"train", "--preset", "tiny", "--out", "x.pt"}).code, kUsage);
  EXPECT_EQ(invoke({"report", "/nonexistent/sweep.csv"}).code, kDataError);
}

TEST_F(CliTest, TrainLogsResolvedConfig) {
  auto r = invoke({"train", "--preset", "tiny", "--data", data().string(), "--override", "steps=2", "--override",
                   "log_every=1", "--seed", "5", "--out", path("again.pt").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("# resolved config"), std::string::npos);
  EXPECT_NE(r.err.find("seed = 5"), std::string::npos);
  EXPECT_EQ(count(r.out, "step "), 2u) << r.out;
  EXPECT_TRUE(std::filesystem::exists(path("again.pt")));
}

TEST_F(CliTest, EmbedWritesEightBitImageAndSidecar) {
  const auto out = path("marked.png");
  auto r = invoke({"embed", "--checkpoint", checkpoint().string(), "--in", cover().string(), "--out", out.string(),
                   "--message", "c3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto bytes = slurp(out);
  ASSERT_GE(bytes.size(), 8u);
  EXPECT_EQ(bytes.substr(1, 3), "PNG");
  auto image = load_image(out);
  EXPECT_EQ(image.sizes(), (torch::IntArrayRef{1, 3, 16, 16}));
  EXPECT_TRUE(torch::equal(image, quantize_8bit(image)));
  const auto sidecar = slurp(out.string() + ".json");
  EXPECT_NE(sidecar.find("\"bits\": \"11000011\""), std::string::npos);
  EXPECT_NE(sidecar.find("\"hex\": \"c3\""), std::string::npos);
}

TEST_F(CliTest, EmbedRejectsWrongMessageLengthAndLossyOutput) {
  auto r = invoke({"embed", "--checkpoint", checkpoint().string(), "--in", cover().string(), "--out",
                   path("bad.png").string(), "--message", "c3f"});
  EXPECT_EQ(r.code, kDataError);
  EXPECT_NE(r.err.find("12 bits"), std::string::npos);
  EXPECT_EQ(invoke({"embed", "--checkpoint", checkpoint().string(), "--in", cover().string(), "--out",
                    path("bad.png").string(), "--bits", "1010101"})
                .code,
            kDataError);
  EXPECT_EQ(invoke({"embed", "--checkpoint", checkpoint().string(), "--in", cover().string(), "--out",
                    path("bad.jpg").string()})
                .code,
            kUsage);
  EXPECT_EQ(invoke({"embed", "--checkpoint", checkpoint().string(), "--in", path("missing.png").string(), "--out",
                    path("bad.png").string()})
                .code,
            kDataError);
  EXPECT_EQ(invoke({"embed", "--checkpoint", path("missing.pt").string(), "--in", cover().string(), "--out",
                    path("bad.png").string()})
                .code,
            kDataError);
}

TEST_F(CliTest, ExtractIsDeterministicWithConfidencesInUnitInterval) {
  const auto marked = path("for_extract.png");
  ASSERT_EQ(invoke({"embed", "--checkpoint", checkpoint().string(), "--in", cover().string(), "--out",
                    marked.string(), "--seed", "3"})
                .code,
            0);
  auto a = invoke({"extract", "--checkpoint", checkpoint().string(), "--in", marked.string(), "--truth",
                   marked.string() + ".json"});
  auto b = invoke({"extract", "--checkpoint", checkpoint().string(), "--in", marked.string(), "--truth",
                   marked.string() + ".json"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("acc: "), std::string::npos);
  const auto line = a.out.substr(a.out.find("confidence:") + 11);
  std::istringstream values(line.substr(0, line.find('\n')));
  int n = 0;
  for (double v; values >> v; ++n) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
  EXPECT_EQ(n, 8);
  auto j = invoke({"extract", "--checkpoint", checkpoint().string(), "--in", marked.string(), "--json"});
  ASSERT_EQ(j.code, 0);
  EXPECT_NE(j.out.find("\"confidence\""), std::string::npos);
}

TEST_F(CliTest, AttackContracts) {
  const auto same = path("rot0.png");
  auto r = invoke({"attack", "--spec", "rotation:0", "--in", cover().string(), "--out", same.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "rotation:0\n");
  EXPECT_TRUE(torch::equal(load_image(same), load_image(cover())));

  const auto lossy = path("jpeg50.png");
  ASSERT_EQ(invoke({"attack", "--spec", "jpeg:50", "--in", cover().string(), "--out", lossy.string()}).code, 0);
  EXPECT_FALSE(torch::equal(load_image(lossy), load_image(cover())));

  EXPECT_EQ(invoke({"attack", "--spec", "dropout:0.4", "--in", cover().string(), "--out", path("d.png").string()})
                .code,
            kUsage);
  EXPECT_EQ(invoke({"attack", "--spec", "dropout:0.4", "--in", cover().string(), "--cover",
                    (data() / "img1.png").string(), "--out", path("d.png").string()})
                .code,
            0);
  EXPECT_EQ(invoke({"attack", "--spec", "jpeg:0", "--in", cover().string(), "--out", path("x.png").string()}).code,
            kUsage);
  EXPECT_EQ(invoke({"attack", "--spec", "twirl:3", "--in", cover().string(), "--out", path("x.png").string()}).code,
            kUsage);
}

TEST_F(CliTest, EvaluateThenReport) {
  const auto csv = path("sweep.csv");
  auto r = invoke({"evaluate", "--checkpoint", checkpoint().string(), "--data", data().string(), "--kind",
                   "gaussian_noise", "--out", csv.string(), "--batch", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto text = slurp(csv);
  EXPECT_EQ(count(text, "\ngaussian_noise,"), 5u);
  EXPECT_NE(text.find("# checkpoint: tiny.pt"), std::string::npos);

  auto rep = invoke({"report", csv.string()});
  ASSERT_EQ(rep.code, 0);
  // the CSV carries the exported PSNR only; the live run also shows the float one
  EXPECT_NE(r.out.find("PSNR float (dB)"), std::string::npos);
  EXPECT_EQ(rep.out.find("PSNR float (dB)"), std::string::npos);
  for (const char* label : {"σ=0.01", "σ=0.02", "σ=0.03", "σ=0.04", "σ=0.05"}) {
    EXPECT_NE(rep.out.find(label), std::string::npos);
  }
  EXPECT_LT(rep.out.find("σ=0.01"), rep.out.find("σ=0.05"));
}

TEST_F(CliTest, ReportOnEmptyCsv) {
  const auto csv = path("empty.csv");
  std::ofstream(csv) << "";
  auto r = invoke({"report", csv.string()});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "");
  std::ofstream(csv) << "kind,strength\n";
  EXPECT_EQ(invoke({"report", csv.string()}).code, kDataError);
}

TEST_F(CliTest, AblateEmitsTwoRows) {
  auto r = invoke({"ablate", "--preset", "tiny", "--data", data().string(), "--override", "steps=2", "--override",
                   "batch_size=4", "--block", "feb"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("\nfull "), std::string::npos);
  EXPECT_NE(r.out.find("\nuse_feb=false "), std::string::npos);
  EXPECT_NE(r.out.find("\ndelta "), std::string::npos);
}

}  // namespace
}  // namespace swinmark::cli
