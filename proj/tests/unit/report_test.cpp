// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <sstream>

#include <gtest/gtest.h>

#include "swinmark/errors.hpp"
#include "swinmark/training.hpp"

namespace swinmark::training {
namespace {

SweepReport sample_report() {
  SweepReport r;
  r.metadata = {"00ff00ff00ff00ff", "ckpt-a", "natural", 16, 2000, 0.01, 7};
  for (const auto& spec : noise::test_grid(noise::Kind::gaussian_noise)) {
    r.rows.push_back({"gaussian_noise", spec.strength(), 38.5, 99.25, 39.1});
  }
  for (const auto& spec : noise::test_grid(noise::Kind::affine)) {
    r.rows.push_back({"affine", spec.strength(), 36.0, 91.5, std::nullopt});
  }
  return r;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

TEST(Csv, RoundTripKeepsRowsAndMetadata) {
  auto report = sample_report();
  auto text = to_csv(report);
  auto back = parse_csv(text);
  ASSERT_EQ(back.rows.size(), report.rows.size());
  for (size_t i = 0; i < report.rows.size(); ++i) {
    EXPECT_EQ(back.rows[i].kind, report.rows[i].kind);
    EXPECT_EQ(back.rows[i].strength, report.rows[i].strength);
    EXPECT_DOUBLE_EQ(back.rows[i].psnr_db, report.rows[i].psnr_db);
    EXPECT_DOUBLE_EQ(back.rows[i].acc_pct, report.rows[i].acc_pct);
  }
  EXPECT_EQ(back.metadata.config_hash, "00ff00ff00ff00ff");
  EXPECT_EQ(back.metadata.checkpoint_id, "ckpt-a");
  EXPECT_EQ(back.metadata.dataset_id, "natural");
  EXPECT_EQ(back.metadata.batch_size, 16);
  EXPECT_EQ(back.metadata.steps, 2000);
  EXPECT_DOUBLE_EQ(back.metadata.weight_decay, 0.01);
  EXPECT_EQ(back.metadata.seed, 7u);
  EXPECT_EQ(to_csv(back), text);
}

TEST(Csv, LayoutAndQuoting) {
  auto text = to_csv(sample_report());
  auto lines = lines_of(text);
  auto header = std::find(lines.begin(), lines.end(), "kind,strength,psnr_db,acc_pct");
  ASSERT_NE(header, lines.end());
  for (auto it = lines.begin(); it != header; ++it) EXPECT_EQ(it->front(), '#');
  EXPECT_EQ(*(header + 1), "gaussian_noise,0.01,38.5000,99.2500");
  EXPECT_EQ(*(header + 6), "affine,\"10,0.1,0.7,30\",36.0000,91.5000");
}

TEST(Csv, EmptyInputs) {
  EXPECT_TRUE(parse_csv("").rows.empty());
  EXPECT_TRUE(parse_csv("# seed: 3\nkind,strength,psnr_db,acc_pct\n").rows.empty());
  EXPECT_EQ(parse_csv("# seed: 3\nkind,strength,psnr_db,acc_pct\n").metadata.seed, 3u);
  EXPECT_EQ(render_tables(SweepReport{}), "");
}

TEST(Csv, RejectsMalformedInput) {
  const std::string h = "kind,strength,psnr_db,acc_pct\n";
  EXPECT_THROW(parse_csv("kind,psnr\njpeg,50,1,2\n"), DataError);
  EXPECT_THROW(parse_csv(h + "jpeg,50,abc,2\n"), DataError);
  EXPECT_THROW(parse_csv(h + "jpeg,50,1\n"), DataError);
  EXPECT_THROW(parse_csv(h + "blur,1,1,2\n"), DataError);
  EXPECT_THROW(parse_csv(h + "jpeg,500,1,2\n"), DataError);
  EXPECT_THROW(parse_csv(h + "affine,\"1,2,3\",1,2\n"), DataError);
  EXPECT_THROW(parse_csv(h + "affine,\"1,2,3,4,1,2\n"), DataError);
  EXPECT_THROW(parse_csv(h + "jpeg,50,1,2\njpeg,50,3,4\n"), DataError);
  EXPECT_NO_THROW(parse_csv(h + "jpeg,50,1,2\r\n\njpeg,60,3,4\n"));
}

TEST(Tables, GaussianGridRendersFiveAccColumns) {
  auto text = render_tables(sample_report());
  auto lines = lines_of(text);
  auto title = std::find_if(lines.begin(), lines.end(),
                            [](const std::string& l) { return l.find("[gaussian_noise]") != std::string::npos; });
  ASSERT_NE(title, lines.end());
  const auto& labels = *(title + 1);
  for (const char* label : {"σ=0.01", "σ=0.02", "σ=0.03", "σ=0.04", "σ=0.05"}) {
    EXPECT_NE(labels.find(label), std::string::npos) << label;
  }
  auto acc = std::find_if(title, lines.end(), [](const std::string& l) { return l.rfind("ACC (%)", 0) == 0; });
  ASSERT_NE(acc, lines.end());
  std::istringstream cells(acc->substr(7));
  std::vector<std::string> values;
  for (std::string v; cells >> v;) values.push_back(v);
  EXPECT_EQ(values, std::vector<std::string>(5, "99.25"));
  EXPECT_NE(text.find("PSNR float (dB)"), std::string::npos);
}

TEST(Tables, ScalarColumnsAscendTupleColumnsKeepOrder) {
  SweepReport r;
  for (const char* s : {"90", "40", "70"}) r.rows.push_back({"jpeg", s, 30, 90, std::nullopt});
  for (const auto& spec : noise::test_grid(noise::Kind::affine)) r.rows.push_back({"affine", spec.strength(), 30, 90, {}});
  auto text = render_tables(r);
  const auto q40 = text.find("QF=40"), q70 = text.find("QF=70"), q90 = text.find("QF=90");
  ASSERT_NE(q40, std::string::npos);
  EXPECT_LT(q40, q70);
  EXPECT_LT(q70, q90);
  const auto a = text.find("s=(10,0.1,0.7,30)"), b = text.find("s=(0,0.2,0.7,30)"),
             c = text.find("s=(0,0.1,0.6,30)"), d = text.find("s=(0,0.1,0.7,20)");
  ASSERT_NE(d, std::string::npos);
  EXPECT_LT(a, b);
  EXPECT_LT(b, c);
  EXPECT_LT(c, d);
  // jpeg is listed before affine
  EXPECT_LT(text.find("[jpeg]"), text.find("[affine]"));
  EXPECT_EQ(text.find("PSNR float"), std::string::npos);
}

TEST(Tables, HeaderFlagsDefaultedHyperparameters) {
  auto r = sample_report();
  auto text = render_tables(r);
  EXPECT_NE(text.find("batch_size=16 (default)"), std::string::npos);
  EXPECT_NE(text.find("weight_decay=0.01 (default)"), std::string::npos);
  EXPECT_NE(text.find("steps=2000 (default)"), std::string::npos);
  r.metadata.batch_size = 8;
  EXPECT_NE(render_tables(r).find("batch_size=8  "), std::string::npos);
  EXPECT_NE(text.find("before the attack"), std::string::npos);
}

TEST(Tables, ColumnsAlignUnderUtf8Labels) {
  SweepReport r;
  for (const char* s : {"-30", "15"}) r.rows.push_back({"rotation", s, 31.25, 88.5, std::nullopt});
  auto lines = lines_of(render_tables(r));
  auto title = std::find_if(lines.begin(), lines.end(),
                            [](const std::string& l) { return l.find("[rotation]") != std::string::npos; });
  ASSERT_NE(title, lines.end());
  auto columns = [](const std::string& s) {
    size_t n = 0;
    for (unsigned char c : s) n += (c & 0xC0) != 0x80;
    return n;
  };
  EXPECT_EQ(columns(*(title + 1)), columns(*(title + 2)));
  EXPECT_EQ(columns(*(title + 2)), columns(*(title + 3)));
  EXPECT_NE((title + 1)->find("θ=-30°"), std::string::npos);
}

TEST(StrengthLabel, Forms) {
  using noise::Kind;
  EXPECT_EQ(strength_label(Kind::identity, ""), "none");
  EXPECT_EQ(strength_label(Kind::gaussian_noise, "0.03"), "σ=0.03");
  EXPECT_EQ(strength_label(Kind::median_blur, "5"), "w=5×5");
  EXPECT_EQ(strength_label(Kind::jpeg, "50"), "QF=50");
  EXPECT_EQ(strength_label(Kind::cropout, "0.4"), "r=0.4");
  EXPECT_EQ(strength_label(Kind::rotation, "15"), "θ=15°");
  EXPECT_EQ(strength_label(Kind::affine, "0,0.1,0.6,30"), "s=(0,0.1,0.6,30)");
}

TEST(Ablation, RendersTwoRowsAndDelta) {
  AblationReport r{{"full", 1000, 38.0, 99.5}, {"use_lceb=false", 900, 37.0, 99.0}};
  EXPECT_DOUBLE_EQ(r.delta_psnr_db(), 1.0);
  EXPECT_DOUBLE_EQ(r.delta_acc_pct(), 0.5);
  auto lines = lines_of(render_ablation(r));
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[1].rfind("full", 0), 0u);
  EXPECT_EQ(lines[2].rfind("use_lceb=false", 0), 0u);
  EXPECT_NE(lines[3].find("+1.00"), std::string::npos);
  EXPECT_NE(lines[3].find("+0.50"), std::string::npos);
}

}  // namespace
}  // namespace swinmark::training
