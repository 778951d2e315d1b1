#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "nlsgi/io.hpp"

using namespace nlsgi;
namespace fs = std::filesystem;

namespace {

const fs::path root = fs::temp_directory_path() / "nlsgi_test_cli";

struct Run {
  int code;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run nlsgi_run(const std::string& args, const std::string& env = "") {
  fs::create_directories(root);
  const fs::path o = root / "stdout.txt", e = root / "stderr.txt";
  const std::string cmd = env + " " + NLSGI_BINARY + " " + args + " > " + o.string() + " 2> " + e.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(o), slurp(e)};
}

fs::path config(const std::string& name, const std::string& text) {
  fs::create_directories(root);
  const fs::path p = root / name;
  std::ofstream(p) << text;
  return p;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = root / name;
  fs::remove_all(d);
  return d;
}

const std::string small_grid = "L = 20\nN = 512\nZ = 16\nM = 1024\n";

}  // namespace

TEST_CASE("zero potential: archive a = 1, b = 0, and a zero field back") {
  const fs::path cfg = config("zero.cfg", "L = 20\nN = 256\nZ = 8\nM = 256\npotential = zero\n");
  const fs::path out = fresh_dir("zero");
  Run s = nlsgi_run("scatter --config " + cfg.string() + " --out " + out.string());
  REQUIRE(s.code == 0);
  const ScatteringData d = read_scattering_json(out / "scattering.json");
  CHECK((d.a - 1.0).abs().maxCoeff() == 0.0);
  CHECK(d.b.abs().maxCoeff() == 0.0);
  CHECK(fs::exists(out / "scattering.csv"));
  Run i = nlsgi_run("invert --config " + cfg.string() + " --out " + out.string());
  REQUIRE(i.code == 0);
  const CsvTable t = read_csv_table(out / "reconstruction.csv");
  double peak = 0;
  for (double v : t.column("re_u")) peak = std::max(peak, std::abs(v));
  for (double v : t.column("im_u")) peak = std::max(peak, std::abs(v));
  CHECK(peak == 0.0);
  CHECK(t.rows.size() == 256);
  const Json sum = read_json(out / "summary.json");
  CHECK(sum["seam_gap"] == 0.0);
}

TEST_CASE("0.3 sech archive at default grids meets the unitarity bound") {
  const fs::path out = fresh_dir("sech");
  Run s = nlsgi_run("scatter --out " + out.string());
  REQUIRE(s.code == 0);
  const Json j = read_json(out / "scattering.json");
  CHECK(j["unitarity_max_err"].get<double>() <= 1e-6);
  CHECK(j["min_abs_a"].get<double>() > 0.9);
}

TEST_CASE("round trip through the CLI on a small grid; summary is thread-count independent") {
  const fs::path cfg = config("small.cfg", small_grid);
  const fs::path out = fresh_dir("small");
  REQUIRE(nlsgi_run("scatter --config " + cfg.string() + " --out " + out.string()).code == 0);
  REQUIRE(nlsgi_run("invert --threads 1 --config " + cfg.string() + " --out " + out.string()).code == 0);
  const std::string one = slurp(out / "summary.json");
  const std::string rec1 = slurp(out / "reconstruction.csv");
  REQUIRE(nlsgi_run("invert --config " + cfg.string() + " --out " + out.string(), "NLSGI_THREADS=3").code == 0);
  CHECK(slurp(out / "summary.json") == one);
  CHECK(slurp(out / "reconstruction.csv") == rec1);
  const Json sum = Json::parse(one);
  CHECK(sum["roundtrip"]["linf_rel"].get<double>() <= 1e-3);
  CHECK(sum["seam_ok"] == true);
  // deltas dump re-parses
  const CsvTable d = read_csv_table(out / "deltas.csv");
  CHECK(d.header == std::vector<std::string>{"z", "re_dp", "im_dp", "re_dm", "im_dm"});
}

TEST_CASE("evolve at t = 0 reports the round-trip error as its gap") {
  const fs::path cfg = config("evolve0.cfg", small_grid + "potential = sech:A=0.1\nt_final = 0\n");
  const fs::path out = fresh_dir("evolve0");
  REQUIRE(nlsgi_run("evolve --config " + cfg.string() + " --out " + out.string()).code == 0);
  REQUIRE(nlsgi_run("scatter --config " + cfg.string() + " --out " + out.string()).code == 0);
  REQUIRE(nlsgi_run("invert --config " + cfg.string() + " --out " + out.string()).code == 0);
  const Json cmp = read_json(out / "comparison.json");
  const Json sum = read_json(out / "summary.json");
  for (const char* k : {"t", "linf_gap", "l2_gap", "mass_drift_ist", "mass_drift_ref"}) CHECK(cmp.contains(k));
  CHECK(cmp["linf_gap"].get<double>() == doctest::Approx(sum["roundtrip"]["linf_abs"].get<double>()).epsilon(1e-9));
  CHECK(cmp["mass_drift_ref"].get<double>() <= 1e-15);
}

TEST_CASE("evolve and reference at t = 0.1 on a small grid") {
  const fs::path cfg = config("evolve.cfg", small_grid + "potential = sech:A=0.1\nsnapshots = 0.05, 0.1\n");
  const fs::path out = fresh_dir("evolve");
  REQUIRE(nlsgi_run("evolve --config " + cfg.string() + " --out " + out.string()).code == 0);
  const Json cmp = read_json(out / "comparison.json");
  CHECK(cmp["t"].get<double>() == doctest::Approx(0.1));
  CHECK(cmp["linf_gap"].get<double>() <= 1e-2);
  CHECK(cmp["snapshots"].size() == 2);
  CHECK(fs::exists(out / "ist_t0.05.csv"));
  CHECK(fs::exists(out / "ref_t0.1.csv"));
  REQUIRE(nlsgi_run("reference --config " + cfg.string() + " --out " + out.string()).code == 0);
  const Json ref = read_json(out / "reference.json");
  CHECK(ref["mass_drift"].get<double>() <= 1e-8);
}

TEST_CASE("exit codes") {
  SUBCASE("missing potential file -> 1") {
    const fs::path cfg = config("missing.cfg", "potential = /nonexistent/u0.csv\n");
    Run r = nlsgi_run("scatter --config " + cfg.string() + " --out " + fresh_dir("missing").string());
    CHECK(r.code == 1);
    CHECK(r.err.find("u0.csv") != std::string::npos);
  }
  SUBCASE("missing config file -> 1") {
    CHECK(nlsgi_run("scatter --config /nonexistent/x.cfg").code == 1);
  }
  SUBCASE("bad config line -> 1 with the line number") {
    const fs::path cfg = config("bad.cfg", "N = 512\nrh_tol = -1\n");
    Run r = nlsgi_run("scatter --config " + cfg.string());
    CHECK(r.code == 1);
    CHECK(r.err.find("bad.cfg:2") != std::string::npos);
  }
  SUBCASE("corrupted archive -> 1") {
    const fs::path out = fresh_dir("corrupt");
    fs::create_directories(out);
    std::ofstream(out / "scattering.json") << "{\"zgrid\": {\"Z\": 16, \"M\": 4}, \"a_re\": [1, 2";
    CHECK(nlsgi_run("invert --out " + out.string()).code == 1);
  }
  SUBCASE("A = 5 -> 2 from scatter and from invert") {
    const fs::path cfg = config("big.cfg", "potential = sech:A=5\n");
    const fs::path out = fresh_dir("big");
    Run s = nlsgi_run("scatter --config " + cfg.string() + " --out " + out.string());
    CHECK(s.code == 2);
    CHECK(s.err.find("min") != std::string::npos);
    REQUIRE(fs::exists(out / "scattering.json"));
    CHECK(nlsgi_run("invert --config " + cfg.string() + " --out " + out.string()).code == 2);
    CHECK(nlsgi_run("evolve --config " + cfg.string() + " --out " + out.string() + "/ev").code == 2);
  }
  SUBCASE("unstable dt -> 3") {
    const fs::path cfg = config("unstable.cfg", small_grid + "dt = 0.01\n");
    Run r = nlsgi_run("evolve --config " + cfg.string() + " --out " + fresh_dir("unstable").string());
    CHECK(r.code == 3);
    CHECK(r.err.find("dt") != std::string::npos);
    CHECK(nlsgi_run("reference --config " + cfg.string() + " --out " + fresh_dir("unstable").string()).code == 3);
  }
  SUBCASE("unknown suite -> 1") {
    CHECK(nlsgi_run("verify --suite nonsense --out " + fresh_dir("verify").string()).code == 1);
  }
  SUBCASE("usage errors -> 1") {
    CHECK(nlsgi_run("").code == 1);
    CHECK(nlsgi_run("frobnicate").code == 1);
    CHECK(nlsgi_run("scatter --threads 0").code == 1);
    CHECK(nlsgi_run("--dry-run scatter", "NLSGI_THREADS=abc").code == 1);
  }
}

TEST_CASE("dry run echoes a normalized, re-parseable config and the thread choice") {
  const fs::path cfg = config("dry.cfg", "# c\nN=1024\n  rh_tol =1e-9 \n");
  Run r = nlsgi_run("--dry-run scatter --config " + cfg.string());
  REQUIRE(r.code == 0);
  CHECK(r.out.find("N = 1024") != std::string::npos);
  CHECK(r.out.find("rh_tol = 1.0000000000000001e-09") != std::string::npos);
  CHECK(r.out.find("# effective threads = 1") != std::string::npos);
  const fs::path echoed = config("echo.cfg", r.out);
  Run again = nlsgi_run("--dry-run scatter --config " + echoed.string());
  CHECK(again.out == r.out);
  CHECK(nlsgi_run("--dry-run scatter", "NLSGI_THREADS=3").out.find("# effective threads = 3") != std::string::npos);
  CHECK(nlsgi_run("--dry-run --threads 2 scatter", "NLSGI_THREADS=3").out.find("# effective threads = 2") !=
        std::string::npos);
  const fs::path empty = config("empty.cfg", "");
  CHECK(nlsgi_run("--dry-run scatter --config " + empty.string()).out == nlsgi_run("--dry-run scatter").out);
}

TEST_CASE("verify writes a report and prints one line per check") {
  const fs::path out = fresh_dir("verify_ok");
  Run r = nlsgi_run("verify --suite projectors --out " + out.string());
  CHECK(r.code == 0);
  CHECK(r.out.find("PASS ") != std::string::npos);
  CHECK(r.out.find("FAIL ") == std::string::npos);
  const Json j = read_json(out / "verify_projectors.json");
  CHECK(j["pass"] == true);
}
