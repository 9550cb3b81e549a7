#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "obci/experiments.hpp"
#include "obci/limits.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() / ("obci_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run run(const std::string& args, const std::string& env = "") {
  const fs::path out = scratch() / "stdout.txt";
  const fs::path err = scratch() / "stderr.txt";
  const std::string cmd = env + " " + OBCI_CLI_PATH + " " + args + " >" + out.string() + " 2>" +
                          err.string();
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

fs::path write_series(const std::string& name, const obci::TimeSeriesData& data) {
  const fs::path p = scratch() / name;
  std::ofstream f(p);
  f.precision(17);
  for (double v : data.values()) f << v << '\n';
  return p;
}

fs::path write_text(const std::string& name, const std::string& text) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("usage errors exit 2") {
  CHECK(run("").code == 2);
  CHECK(run("critvals --beta 0.1").code == 2);
  CHECK(run("critvals --beta 0.1 --q \"\"").code == 2);
  CHECK(run("coverage --study nope").code == 2);
  CHECK(run("ci --method ob9 --data x").code == 2);
}

TEST_CASE("ci on normal data") {
  const auto data = obci::generate({obci::IidNormal{}, 1000}, {1, 0});
  const auto path = write_series("normal.txt", data);
  const Run r = run("ci --method ob1 --m 250 --d 1 --alpha 0.05 --estimator mean --reps 10000 "
                    "--grid 128 --data " + path.string());
  REQUIRE(r.code == 0);
  double f[7];
  unsigned long b = 0;
  char cls[16] = {};
  REQUIRE(std::sscanf(r.out.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lu,%15s", &f[0], &f[1], &f[2],
                      &f[3], &f[4], &f[5], &f[6], &b, cls) == 9);
  double mean = 0.0;
  for (double v : data.values()) mean += v;
  mean /= 1000.0;
  CHECK(f[1] == doctest::Approx(mean));
  CHECK(f[0] <= mean);
  CHECK(f[2] >= mean);
  CHECK(f[3] == doctest::Approx(f[5] * f[4] / std::sqrt(1000.0)).epsilon(1e-8));
  CHECK(b == 751);
  CHECK(std::string(cls) == "inf");
  CHECK(r.err.find("# obci") != std::string::npos);
}

TEST_CASE("degenerate and parse exit codes") {
  std::string text;
  for (int i = 0; i < 50; ++i) text += "1.5\n";
  const auto constant = write_text("constant.txt", text);
  CHECK(run("ci --method ob1 --m 10 --data " + constant.string()).code == 5);
  CHECK(run("ci --method ss --data " + constant.string()).code == 0);

  const auto bad = write_text("bad.txt", "1\n2\nnot-a-number\n4\n");
  const Run r = run("ci --method ob1 --m 2 --data " + bad.string());
  CHECK(r.code == 3);
  CHECK(r.err.find("line 3") != std::string::npos);

  const auto zeros = write_text("zeros.txt", "0\n0\n0\n0\n0\n0\n0\n0\n0\n0\n");
  CHECK(run("ci --method ob1 --m 5 --estimator ar1 --data " + zeros.string()).code == 4);

  const auto four = write_text("four.txt", "1\n2\n4\n3\n");
  CHECK(run("ci --method ob3 --estimator ar1 --m 2 --regime small --data " + four.string()).code ==
        5);
}

TEST_CASE("table round trip reproduces the on-demand interval") {
  const auto data = obci::generate({obci::Ar1Process{0.5}, 400}, {2, 0});
  const auto path = write_series("ar.txt", data);
  const fs::path table = scratch() / "table.csv";
  const Run w = run("--seed 77 critvals --method ob1,ob2 --beta 0.25 --b-inf inf --q 0.975 "
                    "--reps 10000 --grid 128 --out " + table.string());
  REQUIRE(w.code == 0);
  const auto t = obci::CriticalValueTable::load(table.string());
  CHECK(t.entries().size() == 2);
  for (const char* m : {"ob1", "ob2"}) {
    const std::string common = std::string("ci --method ") + m +
                               " --m 100 --d 1 --estimator ar1 --regime large --data " +
                               path.string();
    const Run a = run("--seed 77 " + common + " --table " + table.string());
    const Run b = run("--seed 77 " + common + " --reps 10000 --grid 128");
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(a.out == b.out);
  }
  fs::copy_file(table, scratch() / "critvals.csv", fs::copy_options::overwrite_existing);
  const std::string plain = "--seed 77 ci --method ob1 --m 100 --d 1 --estimator ar1 "
                            "--regime large --data " + path.string();
  const Run env = run(plain, "OBCI_TABLE_DIR=" + scratch().string());
  const Run direct = run(plain + " --table " + table.string());
  REQUIRE(env.code == 0);
  CHECK(env.out == direct.out);
}

TEST_CASE("coverage output is the same for any thread count") {
  const std::string args =
      "coverage --study cvar --gamma 0.7 --n 300 --method ob1 --beta 0.25 --reps 40 "
      "--cv-reps 10000 --grid 128";
  const Run a = run("--threads 1 " + args);
  const Run b = run("--threads 4 " + args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.rfind(obci::CoverageReport::kCsvHeader, 0) == 0);
  CHECK(run("coverage --list-presets").code == 0);
  const Run na = run("coverage --study ar1 --phi 0.9 --n 100 --method ob2 --beta 0 --reps 20");
  CHECK(na.code == 0);
}
