#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>

#include <unistd.h>

#include "doctest.h"
#include "eqdesign/cli.hpp"
#include "eqdesign/io.hpp"

using namespace eqdesign;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result eqd(std::vector<std::string> args) {
  args.insert(args.begin(), "eqdesign");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("eqdesign_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

double moment_of(const json& j, std::vector<int> e) {
  for (const auto& m : j.at("moments")) {
    if (m.at("exp").get<std::vector<int>>() == e) return m.at("value").get<double>();
  }
  FAIL("moment not found");
  return 0.0;
}

const char* kSimplexFile = R"({"name": "tri", "dim": 2, "bounds": [[0, 1], [0, 1]], "generators": [
  [{"exp": [1, 0], "coef": 1}], [{"exp": [0, 1], "coef": 1}],
  [{"exp": [0, 0], "coef": 1}, {"exp": [1, 0], "coef": -1}, {"exp": [0, 1], "coef": -1}]]})";

const char* kBallFile = R"({"dim": 2, "generators": [
  [{"exp": [0, 0], "coef": 1}, {"exp": [2, 0], "coef": -1}, {"exp": [0, 2], "coef": -1}]]})";

}  // namespace

TEST_CASE("moments reproduces the disk values") {
  const auto r = eqd({"moments", "--set", "ball", "--dim", "2", "--degree", "4"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j.at("moments").size() == 15);
  CHECK(moment_of(j, {0, 0}) == 1.0);
  CHECK(std::abs(moment_of(j, {2, 0}) - 1.0 / 3) <= 1e-12);
  CHECK(std::abs(moment_of(j, {0, 4}) - 1.0 / 5) <= 1e-12);
  CHECK(std::abs(moment_of(j, {2, 2}) - 1.0 / 15) <= 1e-12);
}

TEST_CASE("solve writes a design that reloads and re-verifies") {
  TempDir dir;
  const auto path = dir / "design.json";
  const auto r = eqd({"solve", "--set", "interval", "--n", "8", "--objective", "variant", "--out", path});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  for (const auto& entry : fs::directory_iterator(dir.path)) CHECK(entry.path().filename() == "design.json");

  const auto j = json::parse(read_file(path));
  CHECK(j.at("converged").get<bool>());
  CHECK(j.at("objective_kind") == "variant");
  const auto design = load_design(path);
  REQUIRE(design.size() == 9);
  std::vector<double> nodes(design.atoms.data(), design.atoms.data() + 9);
  std::sort(nodes.begin(), nodes.end());
  for (int i = 1; i <= 9; ++i) {
    CHECK(std::abs(nodes[static_cast<std::size_t>(9 - i)] - std::cos((2 * i - 1) * std::numbers::pi / 18)) <= 1e-3);
  }

  // Writing and reading preserves every bit, hence the certificate.
  const auto again = design_from_json(json::parse(design_to_json(design).dump()));
  CHECK(again.atoms == design.atoms);
  CHECK(again.weights == design.weights);
  const auto set = SemiAlgebraicSet::interval();
  CHECK(std::abs(equivalence_gap(set, again, 8, ObjectiveKind::variant).gap -
                 equivalence_gap(set, design, 8, ObjectiveKind::variant).gap) <= 1e-12);

  const auto kkt = eqd({"verify", "kkt", "--set", "interval", "--n", "8", "--design", path});
  REQUIRE(kkt.code == 0);
  CHECK(json::parse(kkt.out).at("passed").get<bool>());
}

TEST_CASE("verify subcommands") {
  const auto pell = eqd({"verify", "pell", "--set", "simplex", "--dim", "2", "--n", "3", "--samples", "1000"});
  REQUIRE(pell.code == 0);
  const auto pj = json::parse(pell.out);
  CHECK(pj.at("passed").get<bool>());
  CHECK(pj.at("max_residual").get<double>() <= 1e-7);

  const auto boundary = eqd({"verify", "boundary", "--set", "box", "--dim", "2", "--n", "2", "--samples", "200"});
  REQUIRE(boundary.code == 0);
  CHECK(json::parse(boundary.out).at("passed").get<bool>());

  const auto pstar = eqd({"verify", "pstar", "--set", "ball", "--dim", "2", "--n", "3", "--point", "0.2,-0.4"});
  REQUIRE(pstar.code == 0);
  CHECK(json::parse(pstar.out).at("deviation").get<double>() <= 1e-9);

  const auto ws = eqd({"verify", "weakstar", "--set", "interval", "--n", "2", "--monomial", "10"});
  REQUIRE(ws.code == 0);
  CHECK(json::parse(ws.out).at("gap").get<double>() == doctest::Approx(63.0 / 256 - 81.0 / 512));

  CHECK(eqd({"verify", "weakstar", "--set", "box", "--dim", "2", "--n", "2", "--monomial", "6"}).code == 2);
  CHECK(eqd({"verify", "nothing", "--n", "2"}).code == 2);
}

TEST_CASE("cubature and christoffel outputs") {
  TempDir dir;
  const auto csv = dir / "rule.csv";
  REQUIRE(eqd({"cubature", "--set", "simplex", "--dim", "2", "--n", "2", "--out", csv}).code == 0);
  const auto rule = read_points_csv(csv, 3);
  CHECK(rule.cols() <= 15);
  CHECK(rule.row(2).sum() == doctest::Approx(1.0).epsilon(1e-12));
  const auto side = json::parse(read_file(dir / "rule.json"));
  CHECK(side.at("max_moment_residual").get<double>() <= 1e-8);
  CHECK(side.at("exact_degree") == 4);

  const auto pts = dir / "pts.csv";
  write_atomic(pts, "x1\n0\n1\n");
  const auto k = eqd({"christoffel", "--set", "interval", "--n", "2", "--points", pts});
  REQUIRE(k.code == 0);
  const auto values = [&] {
    const auto file = dir / "k.csv";
    write_atomic(file, k.out);
    return read_points_csv(file, 3);
  }();
  CHECK(values(1, 0) == doctest::Approx(3.0));
  CHECK(values(1, 1) == doctest::Approx(5.0));
  CHECK(values(2, 1) == doctest::Approx(0.2));

  const auto bad = dir / "two.json";
  write_atomic(bad, R"({"atoms": [[0], [1]], "weights": [0.5, 0.5]})");
  CHECK(eqd({"christoffel", "--set", "interval", "--n", "3", "--design", bad, "--points", pts}).code == 3);
}

TEST_CASE("custom set files") {
  TempDir dir;
  const auto tri = dir / "tri.json";
  write_atomic(tri, kSimplexFile);
  const auto r = eqd({"solve", "--set-file", tri, "--n", "2", "--objective", "variant"});
  REQUIRE(r.code == 0);
  CHECK(r.err.find("warning") != std::string::npos);
  CHECK(json::parse(r.out).at("block_dims").get<std::vector<int>>() == std::vector<int>{6, 3, 3, 3});
  // Same seed, same bytes.
  CHECK(eqd({"solve", "--set-file", tri, "--n", "2"}).out == r.out);
  CHECK(eqd({"--threads", "1", "solve", "--set-file", tri, "--n", "2"}).out == r.out);

  const auto withball = eqd({"solve", "--set-file", tri, "--add-ball", "2", "--n", "1"});
  REQUIRE(withball.code == 0);
  CHECK(withball.err.find("warning") == std::string::npos);

  const auto ball = dir / "ball.json";
  write_atomic(ball, kBallFile);
  const auto custom = eqd({"solve", "--set-file", ball, "--n", "2", "--objective", "variant"});
  const auto builtin = eqd({"solve", "--set", "ball", "--dim", "2", "--n", "2", "--objective", "variant"});
  REQUIRE(custom.code == 0);
  REQUIRE(builtin.code == 0);
  const auto cj = json::parse(custom.out), bj = json::parse(builtin.out);
  CHECK(cj.at("block_dims") == bj.at("block_dims"));
  CHECK(cj.at("objective").get<double>() == doctest::Approx(bj.at("objective").get<double>()).epsilon(1e-3));

  const auto empty = dir / "empty.json";
  write_atomic(empty, R"({"dim": 2, "generators": []})");
  CHECK(eqd({"solve", "--set-file", empty, "--n", "2"}).code == 2);
  const auto broken = dir / "broken.json";
  write_atomic(broken, R"({"dim": 2, "generators": [)");
  const auto br = eqd({"solve", "--set-file", broken, "--n", "2"});
  CHECK(br.code == 2);
  CHECK(br.err.find("malformed JSON") != std::string::npos);
  CHECK(eqd({"solve", "--set-file", dir / "missing.json", "--n", "2"}).code == 2);
}

TEST_CASE("usage errors exit with 2") {
  const auto unknown = eqd({"moments", "--frobnicate", "3"});
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find("Usage") != std::string::npos);
  CHECK(eqd({}).code == 2);
  CHECK(eqd({"solve", "--set", "ball", "--dim", "2", "--n", "2", "--objective", "A"}).code == 2);
  CHECK(eqd({"moments", "--set", "torus"}).code == 2);
  CHECK(eqd({"moments", "--set", "ball", "--dim", "0"}).code == 2);
  CHECK(eqd({"solve", "--set", "ball", "--dim", "2"}).code == 2);
  CHECK(eqd({"--help"}).code == 0);

  ::setenv("EQDESIGN_THREADS", "lots", 1);
  CHECK(eqd({"moments", "--set", "ball", "--dim", "2"}).code == 2);
  ::setenv("EQDESIGN_THREADS", "2", 1);
  CHECK(eqd({"moments", "--set", "ball", "--dim", "2"}).code == 0);
  ::unsetenv("EQDESIGN_THREADS");
}
