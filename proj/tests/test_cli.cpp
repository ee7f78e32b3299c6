#include <doctest.h>

#include "simplexlab/diagnostics.hpp"
#include "simplexlab/geometry.hpp"

#include <json.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " SIMPLEXLAB_CLI_PATH " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(SIMPLEXLAB_TEST_SCRATCH) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("simplex command") {
  const fs::path dir = scratch("simplex");
  auto r = run("simplex --k 3 --h 2 --rho 1 --out " + dir.string());
  CHECK(r.code == 0);
  const std::string csv = slurp(dir / "simplex.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  const json rep = json::parse(slurp(dir / "simplex_report.json"));
  CHECK(rep["verification"]["pass"] == true);

  r = run("simplex --k 4 --h 3 --rho 2 --out " + dir.string());
  CHECK(r.code == 0);
  const json tet = json::parse(slurp(dir / "simplex_report.json"));
  REQUIRE(tet["pairwise_inner_products"].size() == 6);
  for (const auto& p : tet["pairwise_inner_products"]) {
    CHECK(p["dot"].get<double>() == doctest::Approx(-4.0 / 3.0).epsilon(1e-12));
  }

  r = run("simplex --k 5 --h 3 --out " + dir.string());
  CHECK(r.code == 2);
  CHECK(r.out.find("simplex requires K <= h+1") != std::string::npos);
}

TEST_CASE("bound command") {
  auto r = run("bound sc --n 12 --k 3 --b 9 --rho 1");
  REQUIRE(r.code == 0);
  const json sc = json::parse(r.out);
  CHECK(std::abs(sc["mean"].get<double>() - 12.12015) < 1e-4);

  r = run("bound ce --rw 1 --k 3");
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["value"].get<double>() ==
        doctest::Approx(std::log(1 + 2 * std::exp(-1.5))));
  r = run("bound ce --frob 1.7320508075688772 --k 3");
  CHECK(json::parse(r.out)["value"].get<double>() ==
        doctest::Approx(std::log(1 + 2 * std::exp(-1.5))));
  r = run("bound ce --lambda 0.01");
  CHECK(r.code == 0);
  CHECK(json::parse(r.out)["inputs"]["r_w"].get<double>() > 0);

  CHECK(run("bound ce").code == 2);
  CHECK(run("bound ce --rw 1 --lambda 0.1").code == 2);
  CHECK(run("bound ce --lambda -1").code == 2);
  CHECK(run("bound sc --n 10 --k 3").code == 2);
  CHECK(run("bound xx").code == 2);
  CHECK(run("bound ce --rw 1 --k 5 --h 2").out.find("not necessarily tight") != std::string::npos);
}

TEST_CASE("enumerate command") {
  auto r = run("enumerate --count-only --n 12 --b 9");
  CHECK(r.code == 0);
  CHECK(r.out == "167960\n");
  r = run("enumerate --n 2 --b 2");
  CHECK(r.out == "1 1\n1 2\n2 2\n");
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(run("").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("simplex --k notanumber").code == 2);
  CHECK(run("repro ce-sweep --lambdas \"\" --out-dir " + scratch("empty").string()).code == 2);
  CHECK(run("repro ce-sweep --lambdas 0.1,-2 --out-dir " + scratch("neg").string()).code == 2);
  CHECK(run("repro sc-toy --mode fast").code == 2);
  CHECK(run("batch-minimizers --multiplicities 1").code == 2);
  CHECK(run("batch-minimizers --multiplicities 2,x").code == 2);
  CHECK(run("--help").code == 0);
}

TEST_CASE("batch-minimizers command") {
  const fs::path dir = scratch("bm");
  const auto r = run("batch-minimizers --multiplicities 9 --multiplicities 1,1,1,1,1,1,1,1,1 "
                     "--multiplicities 3,3,3 --out " + dir.string());
  REQUIRE(r.code == 0);
  const json rep = json::parse(slurp(dir / "report.json"));
  REQUIRE(rep["results"].size() == 3);
  CHECK(rep["results"][0]["loss"].get<double>() == doctest::Approx(9 * std::log(8.0)).epsilon(1e-8));
  CHECK(rep["results"][1]["loss"].get<double>() == 0.0);
  for (const auto& res : rep["results"]) {
    const auto emb = simplexlab::load_embeddings((dir / res["file"].get<std::string>()).string());
    CHECK(emb.points.size() == 9);
  }
  const auto emb = simplexlab::load_embeddings((dir / "batch_3-3-3.csv").string());
  const auto check = simplexlab::equality_report_sc(
      simplexlab::PointConfig::free(emb.points.points()), emb.labels, 1e-4);
  CHECK(check.pass);
  CHECK(fs::exists(dir / "summary.csv"));
  CHECK(fs::exists(dir / "config.json"));
}

TEST_CASE("diagnose command") {
  const fs::path dir = scratch("diag");
  const auto s = simplexlab::build_simplex(3, 2, 1.0);
  const auto y = simplexlab::LabelVector::balanced(3, 2);
  {
    std::ofstream os(dir / "collapsed.csv");
    simplexlab::write_embeddings(os, simplexlab::collapsed_config(s, y).points(), y);
    std::ofstream w(dir / "weights.csv");
    w.precision(17);
    simplexlab::Matrix wm = 2.0 * s.vertices;
    for (Eigen::Index r = 0; r < 3; ++r) w << wm(r, 0) << ',' << wm(r, 1) << '\n';
  }
  auto r = run("diagnose --embeddings " + (dir / "collapsed.csv").string() + " --weights " +
               (dir / "weights.csv").string() + " --out " + (dir / "out").string());
  REQUIRE(r.code == 0);
  const json rep = json::parse(slurp(dir / "out" / "equality_report.json"));
  CHECK(rep["across_means"]["min"].get<double>() == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(rep["to_means"]["min"].get<double>() == doctest::Approx(1.0));
  CHECK(rep["equality_report_sc"]["pass"] == true);
  CHECK(rep["equality_report_ce"]["pass"] == true);
  CHECK(slurp(dir / "out" / "stats.csv").rfind("statistic,pair_or_index,value\n", 0) == 0);

  {
    std::ofstream os(dir / "bad.csv");
    os << "label,x1,x2\n1,0.1,0.2\n2,0.3\n";
  }
  r = run("diagnose --embeddings " + (dir / "bad.csv").string() + " --out " + (dir / "bad").string());
  CHECK(r.code == 3);
  CHECK(r.out.find("line 3") != std::string::npos);
  CHECK(run("diagnose --embeddings " + (dir / "missing.csv").string()).code == 3);

  {
    std::ofstream os(dir / "gap.csv");
    os << "label,x1,x2\n1,1,0\n1,1,0\n3,-1,0\n3,-1,0\n";
  }
  r = run("diagnose --embeddings " + (dir / "gap.csv").string() + " --out " + (dir / "gap").string());
  CHECK(r.code == 0);
  CHECK(r.out.find("warning") != std::string::npos);

  {
    std::ofstream os(dir / "orthant.csv");
    os << "label,x1,x2,x3\n1,1,0.1,0\n1,0.9,0.2,0\n2,0,1,0.1\n2,0.1,1,0\n3,0,0,1\n3,0.2,0,1\n";
  }
  r = run("diagnose --embeddings " + (dir / "orthant.csv").string() + " --out " + (dir / "orth").string());
  CHECK(r.code == 0);
  const json orth = json::parse(slurp(dir / "orth" / "equality_report.json"));
  CHECK(orth["across_means"]["min"].get<double>() >= 0.5);
  CHECK(orth["notes"].size() == 1);
}

TEST_CASE("ce-sweep writes one row per lambda and its config reproduces the run") {
  const fs::path dir = scratch("sweep");
  auto r = run("repro ce-sweep --lambdas 0.01,0.1 --steps 300 --per-class 10 --out-dir " +
               (dir / "a").string());
  REQUIRE(r.code == 0);
  const std::string csv = slurp(dir / "a" / "sweep.csv");
  CHECK(csv.rfind("lambda,bound,empirical,r_w_theory,w_norm_mean\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

  r = run("repro ce-sweep --config " + (dir / "a" / "config.json").string() + " --out-dir " +
          (dir / "b").string());
  REQUIRE(r.code == 0);
  CHECK(slurp(dir / "b" / "sweep.csv") == csv);
  CHECK(slurp(dir / "b" / "report.json") == slurp(dir / "a" / "report.json"));
}

TEST_CASE("sc-toy output is independent of the thread count and reproducible from its config") {
  const fs::path dir = scratch("toy");
  const std::string common = " repro sc-toy --steps 20 --log-every 5 --out-dir ";
  auto r1 = run("--threads 1" + common + (dir / "t1").string());
  auto r3 = run("--threads 3" + common + (dir / "t3").string());
  auto env = run(common + (dir / "env").string(), "SIMPLEXLAB_THREADS=2");
  REQUIRE(r1.code == 0);
  REQUIRE(r3.code == 0);
  REQUIRE(env.code == 0);
  const std::string traj = slurp(dir / "t1" / "trajectory.csv");
  CHECK(slurp(dir / "t3" / "trajectory.csv") == traj);
  CHECK(slurp(dir / "env" / "trajectory.csv") == traj);
  CHECK(slurp(dir / "t3" / "final_points.csv") == slurp(dir / "t1" / "final_points.csv"));

  const json cfg = json::parse(slurp(dir / "t1" / "config.json"));
  CHECK(cfg["mode"] == "full");
  CHECK(cfg["lr"].get<double>() > 0);
  CHECK(cfg["steps"] == 20);
  auto again = run("repro sc-toy --config " + (dir / "t1" / "config.json").string() + " --out-dir " +
                   (dir / "again").string());
  REQUIRE(again.code == 0);
  CHECK(slurp(dir / "again" / "trajectory.csv") == traj);
  const json rep = json::parse(slurp(dir / "t1" / "report.json"));
  CHECK(rep["batch_count"] == 167960);
  CHECK(rep["gap"]["absolute"].get<double>() >= 0.0);
}
