// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <sstream>
#include <string>

#include "psgld/data_io.hpp"
#include "psgld/errors.hpp"

namespace psgld {
namespace {

const std::filesystem::path kDataDir = PSGLD_TEST_DATA_DIR;

std::string idx_bytes(std::uint32_t magic, const std::vector<std::uint32_t>& dims,
                      const std::vector<std::uint8_t>& payload) {
  std::string s;
  auto put = [&](std::uint32_t v) {
    for (int sh = 24; sh >= 0; sh -= 8) s += static_cast<char>((v >> sh) & 0xFF);
  };
  put(magic);
  for (auto d : dims) put(d);
  for (auto b : payload) s += static_cast<char>(b);
  return s;
}

TEST(Libsvm, SingleRow) {
  std::istringstream in("+1 3:1 11:0.5\n");
  const Dataset d = parse_libsvm(in);
  EXPECT_EQ(d.rows(), 1u);
  EXPECT_EQ(d.cols(), 11u);
  EXPECT_EQ(d.label(0), 1);
  const auto r = d.sparse_row(0);
  ASSERT_EQ(r.index.size(), 2u);
  EXPECT_EQ(r.index[0], 2u);
  EXPECT_EQ(r.index[1], 10u);
  EXPECT_EQ(r.value[0], 1.0);
  EXPECT_EQ(r.value[1], 0.5);
}

TEST(Libsvm, CommentsBlankLinesAndZeroOneLabels) {
  std::istringstream in("# header\n\n0 1:2\n1 2:-1 # trailing\n");
  const Dataset d = parse_libsvm(in);
  EXPECT_EQ(d.rows(), 2u);
  EXPECT_EQ(d.label(0), -1);
  EXPECT_EQ(d.label(1), 1);
}

TEST(Libsvm, Errors) {
  std::istringstream empty("");
  try {
    parse_libsvm(empty);
    FAIL();
  } catch (const DatasetError& e) {
    EXPECT_NE(std::string(e.what()).find("no rows"), std::string::npos);
  }
  std::istringstream order("1 3:1 2:1\n");
  EXPECT_THROW(parse_libsvm(order), ParseError);
  std::istringstream bad("1 x:1\n");
  EXPECT_THROW(parse_libsvm(bad), ParseError);
  std::istringstream wide("1 5:1\n");
  EXPECT_THROW(parse_libsvm(wide, LibsvmOptions{"w", 4}), ParseError);
  std::istringstream frac("0.5 1:1\n");
  EXPECT_THROW(parse_libsvm(frac), DatasetError);
}

TEST(Libsvm, RoundTrip) {
  std::istringstream in("-1 1:0.25 4:3\n1 2:1e-7\n");
  const Dataset a = parse_libsvm(in);
  std::ostringstream out;
  write_libsvm(out, a);
  std::istringstream back(out.str());
  const Dataset b = parse_libsvm(back, LibsvmOptions{"b", a.cols()});
  ASSERT_EQ(b.rows(), a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    EXPECT_EQ(a.label(r), b.label(r));
    const auto x = a.sparse_row(r), y = b.sparse_row(r);
    EXPECT_TRUE(std::equal(x.value.begin(), x.value.end(), y.value.begin(), y.value.end()));
  }
}

TEST(Libsvm, BundledFiles) {
  const Dataset a9a = load_libsvm(kDataDir / "a9a", LibsvmOptions{"a9a", 123});
  EXPECT_EQ(a9a.rows(), 32561u);
  EXPECT_EQ(a9a.cols(), 123u);
  const Dataset aus = load_libsvm(kDataDir / "australian");
  EXPECT_EQ(aus.rows(), 690u);
  EXPECT_EQ(aus.cols(), 14u);
}

TEST(Idx, Labels) {
  std::istringstream in(idx_bytes(0x00000801, {3}, {7, 2, 1}));
  const IdxTensor t = read_idx(in);
  EXPECT_EQ(t.dims, std::vector<std::uint32_t>{3});
  EXPECT_EQ(t.data, (std::vector<std::uint8_t>{7, 2, 1}));
}

TEST(Idx, ImagesScaled) {
  std::istringstream img(idx_bytes(0x00000803, {2, 1, 2}, {255, 0, 51, 255}));
  std::istringstream lab(idx_bytes(0x00000801, {2}, {4, 9}));
  const Dataset d = idx_to_dataset(read_idx(img), read_idx(lab), "m");
  EXPECT_EQ(d.cols(), 2u);
  EXPECT_EQ(d.dense_row(0)[0], 1.0);
  EXPECT_EQ(d.dense_row(0)[1], 0.0);
  EXPECT_DOUBLE_EQ(d.dense_row(1)[0], 0.2);
  EXPECT_EQ(d.label(1), 9);
}

TEST(Idx, Errors) {
  std::istringstream magic(idx_bytes(0x00000802, {1}, {0}));
  EXPECT_THROW(read_idx(magic), DatasetError);
  std::istringstream shortp(idx_bytes(0x00000801, {3}, {1, 2}));
  EXPECT_THROW(read_idx(shortp), DatasetError);
  std::istringstream longp(idx_bytes(0x00000801, {1}, {1, 2}));
  EXPECT_THROW(read_idx(longp), DatasetError);
  std::istringstream header(std::string("\x00\x00", 2));
  EXPECT_THROW(read_idx(header), DatasetError);
}

TEST(Idx, BundledMnist) {
  const Dataset train = load_mnist(kDataDir / "mnist", "train");
  EXPECT_EQ(train.rows(), 8000u);
  EXPECT_EQ(train.cols(), 784u);
  const Dataset small = load_mnist(kDataDir / "mnist", "t10k", 100);
  EXPECT_EQ(small.rows(), 100u);
  for (int y : train.labels()) {
    EXPECT_GE(y, 0);
    EXPECT_LE(y, 9);
  }
}

SampleTrace seven_by_two() {
  SampleTrace t;
  t.dim = 2;
  for (int k = 1; k <= 7; ++k)
    t.samples.push_back(Sample{{0.1 * k, -1.0 / 3.0 * k}, 1.0 / (k + 2)});
  t.S_T = 1.234567890123;
  t.total_iters = 21;
  t.burn_in = 7;
  t.thinning = 2;
  t.seed = 18446744073709551615ull;
  t.algorithm = "pSGLD";
  t.schedule = "polynomial(a=1,b=0,gamma=1)";
  return t;
}

TEST(TraceIo, RoundTripExact) {
  const SampleTrace t = seven_by_two();
  std::stringstream s;
  write_trace(t, s);
  const std::string text = s.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 8);
  std::istringstream lines(text);
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) EXPECT_EQ(std::count(line.begin(), line.end(), ','), 2);
  EXPECT_EQ(read_trace(s), t);
}

TEST(TraceIo, HeaderOnly) {
  SampleTrace t;
  t.dim = 3;
  std::stringstream s;
  write_trace(t, s);
  const SampleTrace back = read_trace(s);
  EXPECT_TRUE(back.empty());
  EXPECT_EQ(back.dim, 3u);
}

TEST(TraceIo, Errors) {
  std::istringstream none("");
  EXPECT_THROW(read_trace(none), DatasetError);
  std::istringstream notjson("eps,a\n");
  EXPECT_THROW(read_trace(notjson), ParseError);
  std::stringstream s;
  write_trace(seven_by_two(), s);
  std::string text = s.str();
  std::istringstream truncated(text.substr(0, text.rfind('\n', text.size() - 2) + 1));
  EXPECT_THROW(read_trace(truncated), DatasetError);
  const auto first_row = text.find('\n') + 1;
  std::string extra = text;
  extra.insert(extra.find('\n', first_row), ",9");
  std::istringstream cols(extra);
  EXPECT_THROW(read_trace(cols), ParseError);
}

TEST(SynthBlr, DeterministicAndBalanced) {
  const Dataset a = synth_blr(4000, 3, 5, {0.0, 0.0, 0.0});
  const Dataset b = synth_blr(4000, 3, 5, {0.0, 0.0, 0.0});
  EXPECT_TRUE(std::equal(a.labels().begin(), a.labels().end(), b.labels().begin()));
  EXPECT_EQ(a.dense_row(17)[2], b.dense_row(17)[2]);
  long pos = std::count(a.labels().begin(), a.labels().end(), 1);
  EXPECT_NEAR(pos / 4000.0, 0.5, 0.04);
  const Dataset s = synth_blr(4000, 2, 6, {8.0, 0.0});
  long agree = 0;
  for (std::size_t r = 0; r < s.rows(); ++r) agree += (s.dense_row(r)[0] > 0) == (s.label(r) > 0);
  EXPECT_GT(agree / 4000.0, 0.9);
  EXPECT_THROW(synth_blr(10, 2, 1, {1.0}), ConfigError);
}

TEST(RunConfig, ParsesAndTypes) {
  std::istringstream in(
      "# run\nname = \"demo # not a comment\"\nalgorithm = psgld\neps = 1e-3  # step\n"
      "total_iters = 200\nstandardize = true\neps_grid = 0.1, 0.2\n");
  const RunConfig c = RunConfig::parse(in);
  EXPECT_EQ(c.get_string("name"), "demo # not a comment");
  EXPECT_EQ(c.get_real("eps", 0.0), 1e-3);
  EXPECT_EQ(c.get_u64("total_iters", 0), 200u);
  EXPECT_TRUE(c.get_bool("standardize", false));
  EXPECT_EQ(c.get_list("eps_grid", {}), (std::vector<double>{0.1, 0.2}));
  EXPECT_EQ(c.get_real("alpha", 0.99), 0.99);
  const SamplerConfig sc = c.sampler_config();
  EXPECT_EQ(sc.algorithm, Algorithm::pSGLD);
  EXPECT_EQ(sc.total_iters, 200u);
}

void expect_config_error(const std::string& text, const std::string& needle) {
  try {
    std::istringstream in(text);
    RunConfig c = RunConfig::parse(in);
    c.validate();
    c.sampler_config();
    FAIL() << "no error for: " << text;
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
  }
}

TEST(RunConfig, Errors) {
  expect_config_error("bogus = 1\n", "bogus");
  expect_config_error("eps = 1\neps = 2\n", "duplicate key 'eps'");
  expect_config_error("eps = fast\n", "eps");
  expect_config_error("total_iters = -3\n", "total_iters");
  expect_config_error("standardize = maybe\n", "standardize");
  expect_config_error("dataset = /no/such/file\n", "dataset");
  expect_config_error("name = \"open\n", "unterminated");
  expect_config_error("just words\n", "key = value");
  expect_config_error("schedule = cosine\n", "schedule");
  expect_config_error("algorithm = hmc\n", "hmc");
  RunConfig c;
  EXPECT_THROW(c.apply_override("eps"), ConfigError);
  c.apply_override("eps = 0.5");
  EXPECT_EQ(c.get_real("eps", 0.0), 0.5);
  EXPECT_THROW(c.get_path("dataset"), ConfigError);
}

}  // namespace
}  // namespace psgld
