#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "trimode/io.hpp"

using namespace trimode;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("trimode_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                          "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string l; std::getline(ss, l);) out.push_back(l);
  return out;
}

RunManifest manifest(double wall = 0.0) {
  RunManifest m;
  m.command = "lyapunov-map";
  m.parameters = {{"r", 0.15}, {"grid", {20, 20}}, {"seed", 7}};
  m.wall_time_s = wall;
  return m;
}

}  // namespace

TEST(Fnv1a, ReferenceVectors) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a("foobar"), 0x85944171f73967e8ULL);
  EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
}

TEST(RunManifest, HashIgnoresWallTimeAndOutputs) {
  RunManifest a = manifest(1.0), b = manifest(99.0);
  b.outputs.push_back("x.csv");
  EXPECT_EQ(a.hash(), b.hash());
  b.parameters["seed"] = 8;
  EXPECT_NE(a.hash(), b.hash());
  // Key order in the parameter object does not matter.
  RunManifest c;
  c.command = a.command;
  c.parameters["seed"] = 7;
  c.parameters["grid"] = {20, 20};
  c.parameters["r"] = 0.15;
  EXPECT_EQ(a.hash(), c.hash());
  EXPECT_EQ(a.to_json()["manifest_hash"], a.hash());
}

TEST(FormatNumber, RoundTripsExactly) {
  for (double v : {0.1, 1.0 / 3.0, -2.0943951023931953, 1e-300, 6.02214076e23}) {
    EXPECT_EQ(std::strtod(format_number(v).c_str(), nullptr), v);
  }
  EXPECT_EQ(format_number(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(format_number(-std::numeric_limits<double>::infinity()), "-inf");
}

TEST(Table, RejectsRaggedRows) {
  Table t{{"a", "b"}, {}, {}};
  EXPECT_THROW(t.add({1.0}), Error);
}

TEST(WriteCsv, HeaderColumnsAndRows) {
  TempDir dir;
  Table t{{"t", "C"}, {}, {"units: t in hbar/gN"}};
  t.add({0.0, 0.0});
  t.add({0.5, 1.25e-3});
  write_csv(t, dir.file("o.csv"), manifest());
  const auto l = lines(slurp(dir.file("o.csv")));
  ASSERT_EQ(l.size(), 8u);
  EXPECT_EQ(l[0], "# manifest_hash: " + manifest().hash());
  EXPECT_EQ(l[1], "# command: lyapunov-map");
  EXPECT_EQ(l[4], "# units: t in hbar/gN");
  EXPECT_EQ(l[5], "t,C");
  EXPECT_EQ(l[7], "0.5,0.00125");
}

TEST(WriteCsv, LyapunovMapIsLongFormAndDeterministic) {
  TempDir dir;
  EnergyShellSpec shell;
  shell.n_rho0 = shell.n_theta_s = 20;
  LyapunovConfig cfg;
  cfg.t_min = 5;
  cfg.t_total = 30;
  const ModelParams p{1, 1, 0.15, 100};
  const LyapunovMap a = lyapunov_map(shell, cfg, p);
  const LyapunovMap b = lyapunov_map(shell, cfg, p);
  write_csv(to_table(a), dir.file("a.csv"), manifest(1.0));
  write_csv(to_table(b), dir.file("b.csv"), manifest(2.0));
  const std::string ta = slurp(dir.file("a.csv"));
  EXPECT_EQ(ta, slurp(dir.file("b.csv")));

  std::size_t data = 0, nan_cells = 0;
  bool header_seen = false;
  for (const auto& l : lines(ta)) {
    if (l.rfind("#", 0) == 0) continue;
    if (!header_seen) {
      EXPECT_EQ(l, "i,j,rho0,theta_s,m,lambda,stderr");
      header_seen = true;
      continue;
    }
    ++data;
    if (l.find("nan") != std::string::npos) ++nan_cells;
  }
  EXPECT_EQ(data, 400u);
  EXPECT_EQ(nan_cells, 400u - a.populated());
}

TEST(WriteCsv, OtocSeriesColumns) {
  OtocSeries s;
  s.times = {0, 1};
  s.values = {0, 2};
  s.v_label = s.w_label = "rho0";
  EXPECT_EQ(to_table(s).columns, (std::vector<std::string>{"t", "C"}));
  s.errors = {0, 0.1};
  EXPECT_EQ(to_table(s).columns, (std::vector<std::string>{"t", "C", "bootstrap_err"}));
}

TEST(TableJson, NonFiniteBecomesNull) {
  Table t{{"x"}, {}, {}};
  t.add({1.5});
  t.add({std::numeric_limits<double>::quiet_NaN()});
  const auto j = table_json(t, manifest());
  EXPECT_EQ(j["data"]["x"][0], 1.5);
  EXPECT_TRUE(j["data"]["x"][1].is_null());
  EXPECT_EQ(j["manifest_hash"], manifest().hash());
}

TEST(WriteJson, ParsesBack) {
  TempDir dir;
  write_json(manifest().to_json(), dir.file("m.json"));
  const auto j = nlohmann::json::parse(slurp(dir.file("m.json")));
  EXPECT_EQ(j["command"], "lyapunov-map");
  EXPECT_EQ(j["parameters"]["seed"], 7);
}

TEST(WritePgm, HeaderAndScaling) {
  TempDir dir;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  write_pgm({0.0, 1.0, nan, 0.5, 2.0, 1.0}, 2, 3, dir.file("g.pgm"));
  const std::string s = slurp(dir.file("g.pgm"));
  const std::string head = "P5\n3 2\n255\n";
  ASSERT_EQ(s.size(), head.size() + 6);
  EXPECT_EQ(s.substr(0, head.size()), head);
  const auto* px = reinterpret_cast<const unsigned char*>(s.data() + head.size());
  // Top image row holds raster row 1.
  EXPECT_EQ(px[0], 64);
  EXPECT_EQ(px[1], 255);
  EXPECT_EQ(px[2], 128);
  EXPECT_EQ(px[3], 0);
  EXPECT_EQ(px[5], 0);
  EXPECT_THROW(write_pgm({1.0}, 2, 3, dir.file("h.pgm")), Error);
}

TEST(WriteErrors, SurfaceTheOsReason) {
  Table t{{"a"}, {}, {}};
  try {
    write_csv(t, "/nonexistent-dir/x.csv", manifest());
    FAIL() << "expected an exception";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("No such file or directory"), std::string::npos) << e.what();
  }
}
