#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>

#include "fixtures.hpp"
#include "gazefuse/binary_io.hpp"
#include "gazefuse/error.hpp"
#include "gazefuse/features/feature_store.hpp"
#include "gazefuse/features/toy_backbone.hpp"

using namespace gazefuse;
using gazefuse::testing::TempDir;

namespace {

RgbImage noise_image(std::size_t w, std::size_t h, std::uint64_t seed) {
  Rng rng(seed, "image");
  RgbImage img(w, h);
  for (auto& v : img.pixels) v = static_cast<float>(rng.below(256)) / 255.f;
  return img;
}

TokenSequence sample_sequence(const std::string& session, View view, double t, std::uint64_t seed) {
  Rng rng(seed, "tokens");
  TokenSequence seq{session, view, t, 3, 5, {}};
  for (std::size_t i = 0; i < 15; ++i) seq.values.push_back(static_cast<float>(rng.normal()));
  return seq;
}

}  // namespace

TEST(ToyBackbone, UniformImageFullBoxGivesIdenticalTokens) {
  const RgbImage gray(32, 32, 0.5f, 0.5f, 0.5f);
  const auto seq = toy_backbone_extract(gray, {0, 0, 1, 1}, {});
  ASSERT_EQ(seq.n_tokens, 64u);
  ASSERT_EQ(seq.dim, 64u);
  for (std::size_t t = 1; t < seq.n_tokens; ++t) {
    EXPECT_TRUE(std::equal(seq.values.begin(), seq.values.begin() + 64, seq.values.begin() + t * 64));
  }
}

TEST(ToyBackbone, Deterministic) {
  const auto img = noise_image(40, 30, 1);
  const HeadBox box{0.1, 0.2, 0.4, 0.6};
  EXPECT_EQ(toy_backbone_extract(img, box, {}), toy_backbone_extract(img, box, {}));
  ToyBackboneConfig other;
  other.projection_seed = 1;
  EXPECT_NE(toy_backbone_extract(img, box, {}).values, toy_backbone_extract(img, box, other).values);
}

TEST(ToyBackbone, MovingBoxChangesOnlyCoverageOfAffectedCells) {
  const auto img = noise_image(64, 64, 2);
  const std::size_t g = 8;
  const HeadBox left{0.05, 0.3, 0.45, 0.7}, right{0.55, 0.3, 0.95, 0.7};
  const auto a = toy_cell_features(img, left, g);
  const auto b = toy_cell_features(img, right, g);
  // Coverage oracle: overlap of each cell with the box in normalized units.
  auto coverage = [&](const HeadBox& box, std::size_t cx, std::size_t cy) {
    const double x0 = static_cast<double>(cx) / g, x1 = static_cast<double>(cx + 1) / g;
    const double y0 = static_cast<double>(cy) / g, y1 = static_cast<double>(cy + 1) / g;
    const double w = std::max(0.0, std::min(x1, box.x1) - std::max(x0, box.x0));
    const double h = std::max(0.0, std::min(y1, box.y1) - std::max(y0, box.y0));
    return w * h / ((x1 - x0) * (y1 - y0));
  };
  for (std::size_t cy = 0; cy < g; ++cy) {
    for (std::size_t cx = 0; cx < g; ++cx) {
      const auto& fa = a[cy * g + cx];
      const auto& fb = b[cy * g + cx];
      for (int c = 0; c < 3; ++c) EXPECT_EQ(fa[c], fb[c]);
      EXPECT_NEAR(fa[3], coverage(left, cx, cy), 1e-12);
      EXPECT_NEAR(fb[3], coverage(right, cx, cy), 1e-12);
      const bool affected = coverage(left, cx, cy) != coverage(right, cx, cy);
      EXPECT_EQ(fa[3] != fb[3], affected);
    }
  }
}

TEST(ToyBackbone, RejectsDegenerateBoxesAndTinyImages) {
  const auto img = noise_image(16, 16, 3);
  EXPECT_THROW(toy_backbone_extract(img, {0.5, 0.1, 0.5, 0.9}, {}), InputError);
  EXPECT_THROW(toy_backbone_extract(img, {-0.1, 0.1, 0.5, 0.9}, {}), InputError);
  EXPECT_THROW(toy_backbone_extract(noise_image(4, 4, 1), {0, 0, 1, 1}, {}), InputError);
  ToyBackboneConfig bad;
  bad.out_dim = 3;
  EXPECT_THROW(toy_backbone_extract(img, {0, 0, 1, 1}, bad), ConfigError);
}

TEST(Ppm, RoundTripAndAscii) {
  TempDir dir("ppm");
  auto img = noise_image(7, 5, 4);
  write_ppm(img, dir.path() / "a.ppm");
  EXPECT_EQ(read_ppm(dir.path() / "a.ppm"), img);
  const auto ascii = decode_ppm("P3\n# comment\n2 1\n255\n255 0 0  0 0 255\n");
  EXPECT_EQ(ascii.width, 2u);
  EXPECT_EQ(ascii.at(0, 0, 0), 1.f);
  EXPECT_EQ(ascii.at(1, 0, 2), 1.f);
}

TEST(Ppm, CorruptInputsAreFormatErrors) {
  EXPECT_THROW(decode_ppm("P5\n1 1\n255\n\0"), FormatError);
  EXPECT_THROW(decode_ppm("P6\n4 4\n255\nabc"), FormatError);
  EXPECT_THROW(decode_ppm("P6\n1 1\n65535\n......"), FormatError);
  EXPECT_THROW(read_ppm("/nonexistent.ppm"), LookupError);
}

TEST(FeatureStore, RoundTripIsBitExact) {
  TempDir dir("store");
  FeatureStore store(dir.path());
  auto seq = sample_sequence("dyad01", View::Parent, 12.0, 1);
  seq.values[4] = -0.0f;
  seq.values[7] = 1e-40f;  // subnormal
  EXPECT_FALSE(store.write(seq));
  const auto back = store.read("dyad01", View::Parent, 12.0);
  ASSERT_EQ(back.values.size(), seq.values.size());
  for (std::size_t i = 0; i < seq.values.size(); ++i) {
    EXPECT_EQ(std::bit_cast<std::uint32_t>(back.values[i]), std::bit_cast<std::uint32_t>(seq.values[i]));
  }
  EXPECT_EQ(back, seq);
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "dyad01" / "parent" / "12000.gzfs"));
}

TEST(FeatureStore, MissingRecordIsLookupError) {
  TempDir dir("store");
  FeatureStore store(dir.path());
  store.write(sample_sequence("s", View::Infant, 1.0, 1));
  EXPECT_THROW(store.read("s", View::Infant, 2.0), LookupError);
  EXPECT_THROW(store.read("s", View::Parent, 1.0), LookupError);
  EXPECT_THROW(store.read("other", View::Infant, 1.0), LookupError);
}

TEST(FeatureStore, SessionsWithSameTimestampStayDistinct) {
  TempDir dir("store");
  FeatureStore store(dir.path());
  const auto a = sample_sequence("a", View::Infant, 3.0, 1);
  const auto b = sample_sequence("b", View::Infant, 3.0, 2);
  store.write(a);
  store.write(b);
  EXPECT_EQ(store.read("a", View::Infant, 3.0), a);
  EXPECT_EQ(store.read("b", View::Infant, 3.0), b);
}

TEST(FeatureStore, EnumerationIsIndependentOfWriteOrder) {
  std::vector<TokenSequence> records;
  for (int i = 0; i < 6; ++i) {
    records.push_back(sample_sequence(i % 2 ? "x" : "y", i % 3 ? View::Infant : View::Parent, i * 1.5, i));
  }
  TempDir d1("store"), d2("store");
  FeatureStore s1(d1.path()), s2(d2.path());
  for (const auto& r : records) s1.write(r);
  for (auto it = records.rbegin(); it != records.rend(); ++it) s2.write(*it);
  auto sorted = records;
  std::sort(sorted.begin(), sorted.end(), [](const TokenSequence& l, const TokenSequence& r) {
    return FeatureKey{l.session, l.view, timestamp_ms(l.timestamp_s)} <
           FeatureKey{r.session, r.view, timestamp_ms(r.timestamp_s)};
  });
  EXPECT_EQ(s1.read_all(), sorted);
  EXPECT_EQ(s2.read_all(), sorted);
}

TEST(FeatureStore, CorruptionIsTypedAndVerified) {
  TempDir dir("store");
  FeatureStore store(dir.path());
  const auto seq = sample_sequence("s", View::Infant, 1.0, 1);
  store.write(seq);
  const auto path = store.path_for({"s", View::Infant, 1000});
  const auto bytes = io::read_file(path);

  for (std::size_t cut : {std::size_t{0}, std::size_t{6}, std::size_t{20}, bytes.size() - 1}) {
    io::write_file_atomic(path, bytes.substr(0, cut));
    EXPECT_THROW(store.read("s", View::Infant, 1.0), FormatError) << "cut " << cut;
  }
  auto bad = bytes;
  bad[0] = 'X';
  io::write_file_atomic(path, bad);
  EXPECT_THROW(store.read("s", View::Infant, 1.0), FormatError);
  EXPECT_EQ(store.verify().size(), 1u);

  // A record copied to the wrong location is caught by the header check.
  io::write_file_atomic(path, bytes);
  io::write_file_atomic(store.path_for({"s", View::Infant, 2000}), bytes);
  EXPECT_THROW(store.read("s", View::Infant, 2.0), FormatError);
  std::ofstream(dir.path() / "s" / "infant" / "3000.gzfs.tmp.1") << "partial";
  EXPECT_EQ(store.verify().size(), 2u);
}

TEST(FeatureStore, OverwriteIsReportedAndRejectsBadKeys) {
  TempDir dir("store");
  FeatureStore store(dir.path());
  EXPECT_FALSE(store.write(sample_sequence("s", View::Infant, 1.0, 1)));
  EXPECT_TRUE(store.write(sample_sequence("s", View::Infant, 1.0, 2)));
  EXPECT_EQ(store.read("s", View::Infant, 1.0), sample_sequence("s", View::Infant, 1.0, 2));
  EXPECT_THROW(store.write(sample_sequence("../evil", View::Infant, 1.0, 1)), InputError);
  EXPECT_THROW(store.write(sample_sequence("s", View::Infant, -1.0, 1)), InputError);
  auto bad = sample_sequence("s", View::Infant, 5.0, 1);
  bad.values[0] = std::numeric_limits<float>::infinity();
  EXPECT_THROW(store.write(bad), InputError);
}
