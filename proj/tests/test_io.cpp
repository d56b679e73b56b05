#include "minnaert/io.hpp"

#include "minnaert/forward.hpp"

#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

using namespace minnaert;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("minnaert_io_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("grid binary round trip is exact") {
  TempDir tmp;
  Grid3d g(Vec3(-0.3, 0.1, 2.0), 0.05, Index3(7, 5, 6));
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.values[i] = u(rng);
  const std::string base = (tmp.path / "field").string();
  write_grid(g, base);
  const Grid3d back = read_grid(base);
  CHECK(back.dims == g.dims);
  CHECK(back.spacing == g.spacing);
  CHECK((back.origin - g.origin).norm() == 0.0);
  CHECK((back.values == g.values).all());
}

TEST_CASE("csv round trip preserves doubles") {
  TempDir tmp;
  Series a(4), b(4);
  a << 1.0, -2.5, 1e-17, 3.14159265358979;
  b << 0.1, 0.2, 0.3, 1234567.89;
  const std::string path = (tmp.path / "t.csv").string();
  write_csv(path, {"a", "b"}, {&a, &b});
  std::vector<std::string> header;
  const auto cols = read_csv(path, &header);
  REQUIRE(header.size() == 2);
  CHECK(header[0] == "a");
  CHECK((cols[0] == a).all());
  CHECK((cols[1] == b).all());

  // RFC 4180 line endings
  std::ifstream in(path, std::ios::binary);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(text.find("\r\n") != std::string::npos);
}

TEST_CASE("manifest hashes are stable") {
  TempDir tmp;
  const std::string f = (tmp.path / "x.bin").string();
  std::ofstream(f, std::ios::binary) << "payload";
  const std::string h1 = sha256_file(f);
  const std::string h2 = sha256_file(f);
  CHECK(h1 == h2);
  CHECK(h1.size() == 64);
  Manifest m;
  m.add(f);
  const std::string mpath = (tmp.path / "manifest.json").string();
  m.write(mpath);
  std::ifstream in(mpath);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(text.find(h1) != std::string::npos);
}

TEST_CASE("svg plot is emitted with polylines") {
  TempDir tmp;
  const std::string path = (tmp.path / "p.svg").string();
  write_svg_plot(path, "demo", {{"curve", {1.0, 2.0, 4.0}, {1.0, 4.0, 16.0}}}, true, true);
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(text.find("<svg") != std::string::npos);
  CHECK(text.find("polyline") != std::string::npos);
  CHECK(text.find("curve") != std::string::npos);
}

TEST_CASE("smooth causal noise is reproducible and gated") {
  const TimeGrid tg(0.01, 300);
  const Series a = smooth_causal_noise(tg, 1.0, 77);
  const Series b = smooth_causal_noise(tg, 1.0, 77);
  const Series c = smooth_causal_noise(tg, 1.0, 78);
  CHECK((a == b).all());
  CHECK((a - c).abs().maxCoeff() > 0.0);
  CHECK(a.abs().maxCoeff() == doctest::Approx(1.0));
  for (int i = 0; tg.time(i) <= 1.0; ++i) CHECK(a[i] == 0.0);
}
