#include <gtest/gtest.h>

#include <nlbt/io.hpp>
#include <nlbt/models.hpp>

#include <cstring>
#include <filesystem>

#include "test_util.hpp"

using namespace nlbt;
using namespace testutil;

namespace {

bool bit_equal(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

bool bit_equal(const PolyVectorField& a, const PolyVectorField& b) {
  if (a.rows != b.rows || a.base != b.base || a.degree() != b.degree()) return false;
  for (int k = 0; k <= a.degree(); ++k)
    if (!bit_equal(a[k], b[k])) return false;
  return true;
}

bool bit_equal(const ControlAffineSystem& a, const ControlAffineSystem& b) {
  if (a.n != b.n || a.m != b.m || a.p != b.p || !bit_equal(a.f, b.f) || !bit_equal(a.h, b.h)) return false;
  for (Index l = 0; l < a.m; ++l)
    if (!bit_equal(a.g[l], b.g[l])) return false;
  return true;
}

}  // namespace

TEST(Io, DoubleRoundTrip) {
  std::mt19937_64 rng(60);
  std::uniform_int_distribution<std::uint64_t> bits;
  int tested = 0;
  while (tested < 2000) {
    const std::uint64_t b = bits(rng);
    double v;
    std::memcpy(&v, &b, sizeof v);
    if (!std::isfinite(v)) continue;
    const double w = parse_double(format_double(v));
    EXPECT_EQ(std::memcmp(&v, &w, sizeof v), 0) << format_double(v);
    ++tested;
  }
  for (double v : {0.0, -0.0, 1e-310, 0.1, 1.0 / 3.0, -7.88e7, std::numeric_limits<double>::max()}) {
    const double w = parse_double(format_double(v));
    EXPECT_EQ(std::memcmp(&v, &w, sizeof v), 0);
  }
}

TEST(Io, SystemRoundTripBitExact) {
  std::vector<ControlAffineSystem> zoo = {two_dim_illustrative(), pendulum(7), three_dim_illustrative(),
                                          double_pendulum(5), beam_single_element()};
  for (std::uint64_t seed = 0; seed < 5; ++seed) zoo.push_back(random_stable_poly(4, 3, seed));
  for (const auto& s : zoo) {
    const ControlAffineSystem t = parse_system(serialize_system(s));
    EXPECT_TRUE(bit_equal(s, t));
    EXPECT_EQ(serialize_system(t), serialize_system(s));
  }
}

TEST(Io, DocumentLayout) {
  const json j = system_to_json(two_dim_illustrative());
  EXPECT_EQ(j["version"], "kps-1");
  EXPECT_EQ(j["n"], 2);
  EXPECT_EQ(j["degree"], 2);
  // W_1 of the drift is row-major: [A00, A01, A10, A11]
  const auto s = two_dim_illustrative();
  EXPECT_EQ(parse_double(j["f"][1][1]), s.f[1](0, 1));
  EXPECT_EQ(parse_double(j["f"][1][2]), s.f[1](1, 0));
  EXPECT_EQ(j["f"][2].size(), 8u);
  EXPECT_TRUE(j["f"][1][0].is_string());
}

TEST(Io, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "nlbt_io_test.json";
  const auto s = random_stable_poly(3, 2, 61);
  write_json_file(path.string(), system_to_json(s));
  EXPECT_TRUE(bit_equal(system_from_json(read_json_file(path.string())), s));
  std::filesystem::remove(path);
  EXPECT_THROW(read_json_file(path.string()), std::runtime_error);
}

TEST(Io, MalformedRejected) {
  const json good = system_to_json(two_dim_illustrative());
  EXPECT_THROW(parse_system("{not json"), parse_error);
  EXPECT_THROW(parse_system("[1,2]"), parse_error);
  auto broken = [&](auto edit) {
    json j = good;
    edit(j);
    return j.dump();
  };
  EXPECT_THROW(parse_system(broken([](json& j) { j["version"] = "kps-2"; })), parse_error);
  EXPECT_THROW(parse_system(broken([](json& j) { j.erase("h"); })), parse_error);
  EXPECT_THROW(parse_system(broken([](json& j) { j["n"] = 3; })), parse_error);
  EXPECT_THROW(parse_system(broken([](json& j) { j["n"] = -1; })), parse_error);
  EXPECT_THROW(parse_system(broken([](json& j) { j["degree"] = 5; })), parse_error);
  EXPECT_THROW(parse_system(broken([](json& j) { j["f"][1][0] = "1.0x"; })), parse_error);
  EXPECT_THROW(parse_system(broken([](json& j) { j["f"][1][0] = true; })), parse_error);
  EXPECT_THROW(parse_system(broken([](json& j) { j["f"][1].erase(0); })), parse_error);
  EXPECT_THROW(parse_system(broken([](json& j) { j["g"] = json::array(); })), parse_error);
  // drift with a constant term
  EXPECT_THROW(parse_system(broken([](json& j) { j["f"][0][0] = "1"; })), parse_error);
}

TEST(Io, ArtifactAndRomRoundTrip) {
  const auto s = three_dim_illustrative();
  PipelineOptions o;
  o.d_transf = 3;
  const PipelineResult r = run_pipeline(s, o);
  const json art = json::parse(pipeline_to_json(s, r, 3, 3).dump());
  const BalancedRealization br = realization_from_json(art);
  EXPECT_TRUE(bit_equal(br.sys, r.realization.sys));
  EXPECT_TRUE(bit_equal(br.Tbar, r.Tbar));
  EXPECT_TRUE(bit_equal(br.P, r.P));
  EXPECT_TRUE(bit_equal(br.Tbar1_inv, r.Tbar1_inv));
  EXPECT_EQ(vector_from_json(art["hankel"]), r.hankel);

  const ReducedOrderModel rom = build_rom(br, 2);
  const ReducedOrderModel back = rom_from_json(json::parse(rom_to_json(rom).dump()));
  EXPECT_EQ(back.r, 2);
  EXPECT_TRUE(bit_equal(back.sys, rom.sys));
  EXPECT_TRUE(bit_equal(back.T, rom.T));
  EXPECT_TRUE(bit_equal(back.P, rom.P));
  EXPECT_THROW(realization_from_json(system_to_json(s)), parse_error);
}
