#include "dspp/cli.hpp"
#include "dspp/oracle.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace dspp;
using namespace dspp::testing;
namespace fs = std::filesystem;

namespace {

class Scratch {
 public:
  Scratch() : dir_(fs::temp_directory_path() / ("dspp-cli-" + std::to_string(counter_++) + "-" +
                                                std::to_string(reinterpret_cast<std::uintptr_t>(this)))) {
    fs::create_directories(dir_);
  }
  ~Scratch() { fs::remove_all(dir_); }

  std::string csv(const std::string& name, const MatrixXd& m) const {
    const std::string p = path(name);
    write_csv_matrix(p, m);
    return p;
  }
  std::string text(const std::string& name, const std::string& body) const {
    const std::string p = path(name);
    std::ofstream(p) << body;
    return p;
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

 private:
  static inline int counter_ = 0;
  fs::path dir_;
};

struct Run {
  int code;
  Json json;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "dspp");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  Json j;
  if (code == 0 && !out.str().empty() && out.str().front() == '{') j = Json::parse(out.str());
  return {code, j, err.str()};
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("identical metrics match to the identity") {
  Scratch dir;
  Rng rng(131);
  const std::string d = dir.csv("d.csv", point_distances(random_points(5, 3, rng)));
  const Run r = run({"match", "--source-dist", d, "--target-dist", d});
  REQUIRE(r.code == 0);
  CHECK(r.json["assignment"] == Json::parse("[0, 1, 2, 3, 4]"));
  CHECK(r.json["energy"].get<double>() == doctest::Approx(0.0).scale(1.0));
  CHECK(r.json.contains("lower_bound"));
}

TEST_CASE("flat energy bounds") {
  Scratch dir;
  Json e;
  e["k"] = 3;
  e["n"] = 3;
  e["W"] = matrix_to_json(MatrixXd::Identity(9, 9));
  write_json_file(dir.path("e.json"), e);
  const Run r = run({"bounds", "--dense-energy", dir.path("e.json")});
  REQUIRE(r.code == 0);
  for (const char* key : {"spectral", "ds_plus", "ds_pp", "upper"}) {
    CHECK(r.json[key].get<double>() == doctest::Approx(3.0));
  }
  CHECK(r.json["ds"].get<double>() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.json["gaps"]["upper_minus_ds_pp"].get<double>() == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("gaussian bounds at ten points") {
  Scratch dir;
  Rng rng(132);
  const Isometry iso = isometric_instance(10, 2, rng, 0.02);
  const Run r = run({"bounds", "--source-dist", dir.csv("s.csv", iso.metric.source), "--target-dist",
                     dir.csv("t.csv", iso.metric.target), "--energy", "gauss", "--sigma", "0.2"});
  REQUIRE(r.code == 0);
  CHECK(r.json["ds"].is_null());
  CHECK(r.json["spectral"].get<double>() <= r.json["ds_pp"].get<double>());
  CHECK(r.json["ds_pp"].get<double>() <= r.json["upper"].get<double>());
}

TEST_CASE("injective match agrees with the oracle command") {
  Scratch dir;
  Rng rng(133);
  const std::string s = dir.csv("s.csv", point_distances(random_points(5, 2, rng)));
  const std::string t = dir.csv("t.csv", point_distances(random_points(5, 2, rng)));
  const Run m = run({"match", "--source-dist", s, "--target-dist", t, "--injective", "3"});
  const Run o = run({"oracle", "--source-dist", s, "--target-dist", t, "--injective", "3"});
  REQUIRE(m.code == 0);
  REQUIRE(o.code == 0);
  CHECK(m.json["assignment"].size() == 3);
  CHECK(o.json["enumerated"] == 60);
  CHECK(o.json["value"].get<double>() <= m.json["energy"].get<double>() + 1e-9);
}

TEST_CASE("reported energies reproduce from the emitted assignment") {
  Scratch dir;
  Rng rng(134);
  const Isometry iso = isometric_instance(6, 2, rng, 0.05);
  const std::string s = dir.csv("s.csv", iso.metric.source);
  const std::string t = dir.csv("t.csv", iso.metric.target);
  for (const char* kind : {"gw", "loggw", "gauss"}) {
    const Run r = run({"match", "--source-dist", s, "--target-dist", t, "--energy", kind});
    REQUIRE(r.code == 0);
    const MetricData reread{read_csv_matrix(s), read_csv_matrix(t)};
    const double energy = eval_energy(metric_energy(reread, parse_metric_energy(kind)), assignment_from_json(r.json));
    CHECK(energy == doctest::Approx(r.json["energy"].get<double>()).epsilon(1e-9));
  }
}

TEST_CASE("fuzzy output and pins") {
  Scratch dir;
  Rng rng(135);
  const Isometry iso = isometric_instance(6, 2, rng);
  const std::string s = dir.csv("s.csv", iso.metric.source);
  const std::string t = dir.csv("t.csv", iso.metric.target);
  const std::string pins = dir.text("pins.json", "{\"pairs\": [[0, " + std::to_string(iso.truth[0]) + "], [1, " +
                                                     std::to_string(iso.truth[1]) + "]]}");
  const Run r = run({"match", "--source-dist", s, "--target-dist", t, "--energy", "loggw", "--pins", pins,
                     "--fuzzy", dir.path("fuzzy.csv")});
  REQUIRE(r.code == 0);
  CHECK(r.json["assignment"][0] == iso.truth[0]);
  CHECK(r.json["assignment"][1] == iso.truth[1]);
  CHECK(r.json.contains("objective"));
  const MatrixXd fuzzy = read_csv_matrix(dir.path("fuzzy.csv"));
  CHECK(fuzzy.rows() == 6);
  CHECK((fuzzy.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-8);

  const std::string clash = dir.text("clash.json", "[[0, 1], [2, 1]]");
  CHECK(run({"match", "--source-dist", s, "--target-dist", t, "--pins", clash}).code == 4);
}

TEST_CASE("arrange") {
  Scratch dir;
  Rng rng(136);
  const std::string f = dir.csv("f.csv", random_matrix(6, 2, rng));
  const Run r = run({"arrange", "--features", f, "--grid", "2x3", "--swaps", "200", "--seed", "3"});
  REQUIRE(r.code == 0);
  CHECK(r.json["grid"].size() == 2);
  CHECK(r.json["grid"][0].size() == 3);
  CHECK(r.json["energy"].get<double>() <= r.json["energy_before_swaps"].get<double>());
  CHECK(run({"arrange", "--features", f, "--grid", "2x2"}).code == 2);
  CHECK(run({"arrange", "--features", f, "--grid", "two"}).code == 2);
}

TEST_CASE("upsample") {
  Scratch dir;
  Rng rng(137);
  const Isometry iso = isometric_instance(12, 3, rng);
  const std::string s = dir.csv("s.csv", iso.metric.source);
  const std::string t = dir.csv("t.csv", iso.metric.target);
  Json pairs = Json::array();
  for (int i : {0, 3, 6, 9, 11}) pairs.push_back({i, iso.truth[i]});
  write_json_file(dir.path("coarse.json"), pairs);
  for (const char* mode : {"greedy", "limited"}) {
    const Run r = run({"upsample", "--source-dist", s, "--target-dist", t, "--coarse", dir.path("coarse.json"),
                       "--mode", mode});
    REQUIRE(r.code == 0);
    CHECK(r.json["assignment"].get<std::vector<int>>() == iso.truth);
    CHECK(r.json["provenance"][0] == "anchor");
    CHECK(r.json["injective"] == true);
  }
  write_json_file(dir.path("bad.json"), Json::parse("[[0, 40]]"));
  CHECK(run({"upsample", "--source-dist", s, "--target-dist", t, "--coarse", dir.path("bad.json")}).code == 2);
}

TEST_CASE("input errors exit with 2") {
  Scratch dir;
  const std::string bad = dir.text("bad.csv", "0,1\n1,zero\n");
  const Run r = run({"match", "--source-dist", bad, "--target-dist", bad});
  CHECK(r.code == 2);
  CHECK(r.err.find("bad.csv:2") != std::string::npos);
  CHECK(run({"match", "--source-dist", "/no/such.csv", "--target-dist", "/no/such.csv"}).code == 2);
  CHECK(run({"match"}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"--help"}).code == 0);
  const std::string d = dir.csv("d.csv", MatrixXd::Zero(3, 3));
  CHECK(run({"match", "--source-dist", d, "--target-dist", d, "--energy", "l1"}).code == 2);
}

TEST_CASE("exit codes by error type") {
  CHECK(cli::exit_code_for(InputError("x")) == 2);
  CHECK(cli::exit_code_for(DimensionError("x")) == 2);
  CHECK(cli::exit_code_for(ConvergenceError("x")) == 3);
  CHECK(cli::exit_code_for(InfeasibleError("x")) == 4);
}

TEST_CASE("same seed, same output") {
  Scratch dir;
  Rng rng(138);
  const std::string s = dir.csv("s.csv", point_distances(random_points(7, 2, rng)));
  const std::string t = dir.csv("t.csv", point_distances(random_points(7, 2, rng)));
  const Run a = run({"match", "--source-dist", s, "--target-dist", t, "--seed", "9"});
  const Run b = run({"match", "--source-dist", s, "--target-dist", t, "--seed", "9"});
  CHECK(a.json == b.json);
}

}
