#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "superrad/correlations.hpp"
#include "superrad/coupling.hpp"
#include "superrad/emitters.hpp"
#include "superrad/montecarlo.hpp"

namespace fs = std::filesystem;
using namespace superrad;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "superrad");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("superrad_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace

TEST_CASE("scan-n with the single-mode model") {
  TempDir tmp;
  const auto r = invoke({"scan-n", "--env", "bic", "--beta", "0.8179", "--sizes", "3,5,7,9,11", "--out",
                      tmp / "run"});
  REQUIRE(r.code == 0);
  const auto rows = csv_rows(slurp(tmp / "run/scan_n.csv"));
  REQUIRE(rows.size() == 6);
  CHECK(rows[0] == std::vector<std::string>{"n_side", "n_total", "g2", "g2_independent", "g2_dicke",
                                            "g2_bic_analytic"});
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const int n = std::stoi(rows[i][1]);
    CHECK(std::stod(rows[i][2]) == doctest::Approx(g2_bic_analytic(n, 0.8179)).epsilon(1e-12));
  }
  CHECK(std::abs(std::stod(rows[5][2]) - 1.6552) < 1e-4);
  CHECK(fs::exists(tmp / "run/manifest.json"));
}

TEST_CASE("scan-n in free space respects the bounds") {
  TempDir tmp;
  const auto r = invoke({"scan-n", "--env", "freespace", "--d-nm", "400", "--sizes", "3", "--out", tmp / "fs"});
  REQUIRE(r.code == 0);
  const auto rows = csv_rows(slurp(tmp / "fs/scan_n.csv"));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].size() == 5);
  const double g2 = std::stod(rows[1][2]);
  CHECK(g2 >= std::stod(rows[1][3]) - 1e-9);
  CHECK(g2 <= std::stod(rows[1][4]) + 1e-9);
}

TEST_CASE("scan-n with a tabulated matrix uses centred blocks") {
  TempDir tmp;
  LatticeSpec spec;
  spec.n_side = 5;
  const auto full = build_matrices(build_square_lattice(spec, 708.9), FreeSpace{}).decay;
  {
    std::ofstream out(tmp / "gamma.csv");
    write_matrix_csv(out, full.rates());
  }
  const auto r = invoke({"scan-n", "--env", "tabulated:" + (tmp / "gamma.csv"), "--sizes", "3,5",
                      "--out", tmp / "tab"});
  INFO(r.err);
  REQUIRE(r.code == 0);
  const auto rows = csv_rows(slurp(tmp / "tab/scan_n.csv"));
  REQUIRE(rows.size() == 3);
  spec.n_side = 3;
  const auto small = build_matrices(build_square_lattice(spec, 708.9), FreeSpace{}).decay;
  CHECK(std::stod(rows[1][2]) == doctest::Approx(g2_spectral(small).value).epsilon(1e-12));
  CHECK(std::stod(rows[2][2]) == doctest::Approx(g2_spectral(full).value).epsilon(1e-12));

  CHECK(invoke({"scan-n", "--env", "tabulated:" + (tmp / "gamma.csv"), "--sizes", "7", "--out", tmp / "x"})
            .code == 1);
}

TEST_CASE("scan-n usage errors") {
  TempDir tmp;
  CHECK(invoke({"scan-n", "--out", tmp / "a"}).code == 1);
  CHECK(invoke({"scan-n", "--env", "", "--out", tmp / "a"}).code == 1);
  CHECK(invoke({"scan-n", "--env", "bic", "--sizes", "4", "--out", tmp / "a"}).code == 1);
  CHECK(invoke({"scan-n", "--env", "bic", "--sizes", "1", "--out", tmp / "a"}).code == 1);
  CHECK(invoke({"scan-n", "--env", "plasma", "--out", tmp / "a"}).code == 1);
  CHECK(invoke({"frobnicate"}).code == 1);
  CHECK(invoke({"--help"}).code == 0);
  CHECK(invoke({"scan-n", "--help"}).out.find("--sizes") != std::string::npos);
}

TEST_CASE("scan-d") {
  TempDir tmp;
  const auto r = invoke({"scan-d", "--env", "freespace", "--n-side", "3", "--d-nm", "0",
                      "--allow-coincident", "--out", tmp / "d0"});
  REQUIRE(r.code == 0);
  const auto rows = csv_rows(slurp(tmp / "d0/scan_d.csv"));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::vector<std::string>{"d_nm", "d_over_lambda", "g2"});
  CHECK(std::abs(std::stod(rows[1][2]) - 16.0 / 9.0) <= 1e-12);

  CHECK(invoke({"scan-d", "--env", "freespace", "--d-nm", "0", "--out", tmp / "x"}).code == 1);
  CHECK(invoke({"scan-d", "--env", "freespace", "--d-nm", "-5", "--out", tmp / "x"}).code == 1);

  const auto far = invoke({"scan-d", "--env", "freespace", "--d-over-lambda", "3,4", "--out", tmp / "far"});
  REQUIRE(far.code == 0);
  const auto far_rows = csv_rows(slurp(tmp / "far/scan_d.csv"));
  REQUIRE(far_rows.size() == 3);
  for (std::size_t i = 1; i < far_rows.size(); ++i)
    CHECK(std::abs(std::stod(far_rows[i][2]) - 8.0 / 9.0) < 0.02);

  const auto flat = invoke({"scan-d", "--env", "bic", "--d-nm", "100,400,1000", "--out", tmp / "bic"});
  REQUIRE(flat.code == 0);
  const auto frows = csv_rows(slurp(tmp / "bic/scan_d.csv"));
  CHECK(frows[1][2] == frows[2][2]);
  CHECK(frows[2][2] == frows[3][2]);
}

TEST_CASE("dynamics") {
  TempDir tmp;
  SUBCASE("closed form peak time") {
    REQUIRE(invoke({"dynamics", "--method", "closed", "--beta", "0.8179", "--n", "9", "--out", tmp / "c"})
                .code == 0);
    const auto meta = nlohmann::json::parse(slurp(tmp / "c/trace_meta.json"));
    const double bn = 0.8179 * 9;
    CHECK(meta["peak_time"].get<double>() == doctest::Approx(std::log(bn) / (1 + bn)).epsilon(1e-14));
    CHECK(meta["t0_exact"] == meta["peak_time"]);
    CHECK(slurp(tmp / "c/trace.csv").rfind("t,rate\n", 0) == 0);
  }
  SUBCASE("single emitter emits one photon") {
    REQUIRE(invoke({"dynamics", "--method", "lindblad", "--env", "independent", "--n", "1", "--t-end",
                 "20", "--steps", "400", "--out", tmp / "l"})
                .code == 0);
    const auto meta = nlohmann::json::parse(slurp(tmp / "l/trace_meta.json"));
    CHECK(meta["integrated"].get<double>() == doctest::Approx(1.0).epsilon(0.01));
  }
  SUBCASE("independent ladder") {
    REQUIRE(invoke({"dynamics", "--method", "ladder", "--beta", "0", "--n", "3", "--t-end", "5",
                 "--steps", "100", "--out", tmp / "lad"})
                .code == 0);
    const auto rows = csv_rows(slurp(tmp / "lad/trace.csv"));
    REQUIRE(rows.size() == 102);
    for (std::size_t i = 1; i < rows.size(); ++i)
      CHECK(std::abs(std::stod(rows[i][1]) - 3.0 * std::exp(-std::stod(rows[i][0]))) < 1e-6);
  }
  SUBCASE("caps") {
    CHECK(invoke({"dynamics", "--method", "lindblad", "--env", "bic", "--n", "13", "--out", tmp / "x"})
              .code == 1);
    CHECK(invoke({"dynamics", "--method", "warp", "--out", tmp / "x"}).code == 1);
  }
}

TEST_CASE("disorder") {
  TempDir tmp;
  SUBCASE("full filling collapses") {
    REQUIRE(invoke({"disorder", "--env", "bic", "--mode", "filling", "--eta", "1", "--samples", "50",
                 "--out", tmp / "f"})
                .code == 0);
    const auto doc = nlohmann::json::parse(slurp(tmp / "f/distribution.json"));
    const auto samples = doc["samples"].get<std::vector<double>>();
    REQUIRE(samples.size() == 50);
    for (double s : samples) CHECK(s == samples.front());
    CHECK(samples.front() == doctest::Approx(g2_bic_analytic(121, 0.8179)).epsilon(1e-12));
    CHECK(doc["std"].get<double>() == 0.0);
    CHECK(doc["skewness"].is_null());
    CHECK(slurp(tmp / "f/stats.csv").rfind("mean,std,skewness\n", 0) == 0);
    CHECK(slurp(tmp / "f/histogram.csv").rfind("bin_left,bin_right,count\n", 0) == 0);
  }
  SUBCASE("tabulated full filling equals the matrix value") {
    LatticeSpec spec;
    spec.n_side = 11;
    const auto full = build_matrices(build_square_lattice(spec, 708.9), FreeSpace{}).decay;
    {
      std::ofstream out(tmp / "g121.csv");
      write_matrix_csv(out, full.rates());
    }
    REQUIRE(invoke({"disorder", "--env", "tabulated:" + (tmp / "g121.csv"), "--mode", "filling", "--eta",
                 "1", "--samples", "4", "--out", tmp / "t"})
                .code == 0);
    const auto doc = nlohmann::json::parse(slurp(tmp / "t/distribution.json"));
    const double ref = g2_direct(full).value;
    for (double s : doc["samples"].get<std::vector<double>>())
      CHECK(std::abs(s - ref) < 1e-12);
    CHECK(invoke({"disorder", "--env", "tabulated:" + (tmp / "g121.csv"), "--mode", "position", "--out",
               tmp / "x"})
              .code == 1);
  }
  SUBCASE("round trip") {
    REQUIRE(invoke({"disorder", "--env", "freespace", "--mode", "orientation", "--delta-theta-deg", "60",
                 "--samples", "100", "--seed", "3", "--out", tmp / "o"})
                .code == 0);
    const auto doc = nlohmann::json::parse(slurp(tmp / "o/distribution.json"));
    const auto samples = doc["samples"].get<std::vector<double>>();
    const auto s = summary_stats(samples);
    CHECK(std::abs(s.mean - doc["mean"].get<double>()) <= 1e-12);
    CHECK(std::abs(s.std - doc["std"].get<double>()) <= 1e-12);
    CHECK(std::abs(s.skewness - doc["skewness"].get<double>()) <= 1e-12);
  }
}

TEST_CASE("manifests reproduce runs byte for byte") {
  TempDir tmp;
  const std::vector<std::vector<std::string>> runs{
      {"disorder", "--env", "freespace", "--mode", "position", "--delta-r-nm", "20", "--samples", "60",
       "--seed", "99"},
      {"scan-n", "--env", "freespace", "--sizes", "3,5"},
      {"scan-d", "--env", "dicke", "--d-nm", "100,200"},
      {"dynamics", "--method", "meanfield", "--beta", "0.6", "--n", "7"},
  };
  const std::vector<std::string> outputs{"distribution.json", "scan_n.csv", "scan_d.csv", "trace.csv"};
  for (std::size_t i = 0; i < runs.size(); ++i) {
    auto args = runs[i];
    args.push_back("--out");
    args.push_back(tmp / ("a" + std::to_string(i)));
    REQUIRE(invoke(args).code == 0);
    const auto second = invoke({runs[i][0], "--config", tmp / ("a" + std::to_string(i) + "/manifest.json"),
                             "--out", tmp / ("b" + std::to_string(i))});
    REQUIRE(second.code == 0);
    CHECK(slurp(tmp / ("a" + std::to_string(i) + "/" + outputs[i])) ==
          slurp(tmp / ("b" + std::to_string(i) + "/" + outputs[i])));
  }
}

TEST_CASE("config precedence") {
  TempDir tmp;
  write_text(tmp / "cfg.json", R"({"env": "bic", "beta": 0.5, "sizes": [3]})");
  REQUIRE(invoke({"scan-n", "--config", tmp / "cfg.json", "--out", tmp / "p1"}).code == 0);
  auto manifest = nlohmann::json::parse(slurp(tmp / "p1/manifest.json"));
  CHECK(manifest["beta"].get<double>() == 0.5);
  CHECK(manifest["lambda0_nm"].get<double>() == 708.9);
  CHECK(manifest["d_nm"].get<double>() == 400.0);

  REQUIRE(invoke({"scan-n", "--config", tmp / "cfg.json", "--beta", "0.9", "--out", tmp / "p2"}).code == 0);
  manifest = nlohmann::json::parse(slurp(tmp / "p2/manifest.json"));
  CHECK(manifest["beta"].get<double>() == 0.9);
  CHECK(manifest["sizes"] == nlohmann::json::array({3}));

  write_text(tmp / "bad.json", R"({"env": "bic", "colour": "blue"})");
  CHECK(invoke({"scan-n", "--config", tmp / "bad.json", "--out", tmp / "p3"}).code == 1);
  write_text(tmp / "broken.json", R"({"env": )");
  CHECK(invoke({"scan-n", "--config", tmp / "broken.json", "--out", tmp / "p3"}).code == 1);
  CHECK(invoke({"scan-n", "--config", tmp / "missing.json", "--out", tmp / "p3"}).code == 1);
}

TEST_CASE("validate") {
  TempDir tmp;
  write_text(tmp / "ok.csv", "1.0,0.5\n0.5,1.0\n");
  write_text(tmp / "cs.csv", "1.0,1.5\n1.5,1.0\n");
  write_text(tmp / "ragged.csv", "1,0\n0,1\n0,0\n");
  const auto ok = invoke({"validate", tmp / "ok.csv", "--out", tmp / "v"});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("ok") != std::string::npos);
  const auto cs = invoke({"validate", tmp / "cs.csv", "--out", tmp / "v"});
  CHECK(cs.code == 2);
  CHECK(cs.out.find("(0,1)") != std::string::npos);
  CHECK(invoke({"validate", tmp / "missing.csv", "--out", tmp / "v"}).code == 1);
  CHECK(invoke({"validate", tmp / "ragged.csv", "--out", tmp / "v"}).code == 1);
  // Unphysical tabulated input is a validation failure wherever it enters.
  CHECK(invoke({"scan-n", "--env", "tabulated:" + (tmp / "cs.csv"), "--sizes", "3", "--out", tmp / "v"})
            .code == 2);
}
