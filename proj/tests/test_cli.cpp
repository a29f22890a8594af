#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "dgopt_cli_test";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result cli(const std::string& args) {
  fs::create_directories(kWork);
  const fs::path out = kWork / "stdout.txt", err = kWork / "stderr.txt";
  const std::string cmd = std::string("\"") + DIRGRAPH_OPT_BIN + "\" " + args + " >\"" +
                          out.string() + "\" 2>\"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

bool starts_with(const std::string& s, const std::string& prefix) {
  return s.rfind(prefix, 0) == 0;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

}  // namespace

TEST_CASE("graph") {
  Result r = cli("graph check fig1");
  CHECK(r.code == 0);
  CHECK(r.out.find("strongly_connected=true") != std::string::npos);

  write_file(kWork / "broken.txt", "3\n0 1\n1 0\n");
  r = cli("graph check " + (kWork / "broken.txt").string());
  CHECK(r.code == 1);
  CHECK(r.out.find("strongly_connected=false") != std::string::npos);

  write_file(kWork / "bad.txt", "3\n0 7\n");
  CHECK(cli("graph check " + (kWork / "bad.txt").string()).code == 2);

  r = cli("graph spectrum ring:5");
  CHECK(r.code == 0);
  CHECK(r.out.find("sigma=") != std::string::npos);
  CHECK(r.out.find("pi=0.2,0.2,0.2,0.2,0.2") != std::string::npos);
}

TEST_CASE("data gen and solve") {
  const fs::path csv = kWork / "data.csv";
  Result r = cli("data gen --n 4 --m 5 --p 2 --seed 3 --out " + csv.string());
  REQUIRE(r.code == 0);
  const std::string text = slurp(csv);
  CHECK(starts_with(text, "agent,label,f1,f2\n"));
  CHECK(std::count(text.begin(), text.end(), '\n') == 21);

  r = cli("data solve --data " + csv.string());
  CHECK(r.code == 0);
  CHECK(r.out.find("converged") != std::string::npos);

  CHECK(cli("data solve --data " + (kWork / "missing.csv").string()).code == 2);
}

TEST_CASE("run") {
  Result r = cli("run --alg addopt --alpha 0.3 --iters 50");
  REQUIRE(r.code == 0);
  CHECK(starts_with(r.out, "k,residual,consensus_err,tracking_err,gap\n"));
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 52);
  CHECK(r.out.find("\n0,1,") != std::string::npos);

  // Deterministic output.
  CHECK(cli("run --alg addopt --alpha 0.3 --iters 50").out == r.out);

  const fs::path trace = kWork / "gp.csv";
  r = cli("run --alg gp --alpha 1 --iters 20 --out " + trace.string());
  CHECK(r.code == 0);
  CHECK(starts_with(slurp(trace), "k,residual"));

  CHECK(cli("run --alg sgd").code == 2);
  CHECK(cli("run --alpha -1").code == 2);
  CHECK(cli("run --iters 10 --graph " + (kWork / "broken.txt").string()).code == 2);
  // A step far beyond the stable range.
  CHECK(cli("run --alg addopt --alpha 50 --iters 2000").code == 1);
}

TEST_CASE("analyze") {
  Result r = cli("analyze --sweep 0.0001:0.001:4");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("# alpha_bar=") != std::string::npos);
  const auto header = r.out.find("alpha,rho_g\n");
  REQUIRE(header != std::string::npos);
  CHECK(std::count(r.out.begin() + static_cast<long>(header), r.out.end(), '\n') == 5);
  CHECK(cli("analyze --sweep 1:0.1:3").code == 2);
  CHECK(cli("analyze --s 5 --l 1").code == 2);
}

TEST_CASE("compare") {
  const fs::path dir = kWork / "cmp";
  fs::remove_all(dir);
  Result r = cli("compare --iters 200 --out " + dir.string());
  REQUIRE(r.code == 0);
  CHECK(starts_with(r.out, "alg,iters,initial_residual,final_residual,slope,r2,diverged\n"));
  CHECK(r.err.find("alpha_bar") != std::string::npos);
  for (const char* f : {"summary.csv", "trace_addopt.csv", "trace_dextra.csv", "trace_gp.csv"}) {
    CAPTURE(f);
    CHECK(fs::exists(dir / f));
  }
  CHECK(slurp(dir / "summary.csv") == r.out);
  CHECK(cli("compare --alg addopt,addopt").code == 2);
}

TEST_CASE("sweep and sparsity") {
  // A diverged step size sets the exit code but the table is still written.
  Result r = cli("sweep --sweep 0.1:3:3 --iters 300");
  CHECK(r.code == 1);
  CHECK(starts_with(r.out, "alpha,rho_g,converged,diverged,residual_at_200,final_residual\n"));
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 4);
  CHECK(cli("sweep --sweep 0.05:0.2:3 --iters 300").code == 0);

  r = cli("sparsity --agents 6 --chain 3,100");
  CHECK(r.code == 0);
  CHECK(starts_with(r.out, "graph,edges,slope,r2,diverged\n"));
  CHECK(r.out.find("\n2,30,") != std::string::npos);
}

TEST_CASE("INI config and thread cap") {
  const fs::path ini = kWork / "run.ini";
  write_file(ini, "[run]\nalg = dextra\nalpha = 0.2\niters = 30\n");
  const Result from_file = cli("--config " + ini.string() + " run");
  const Result from_flags = cli("run --alg dextra --alpha 0.2 --iters 30");
  REQUIRE(from_file.code == 0);
  CHECK(from_file.out == from_flags.out);

  const Result capped = cli("compare --iters 100");
  ::setenv("DIRGRAPH_OPT_THREADS", "1", 1);
  const Result single = cli("compare --iters 100");
  ::unsetenv("DIRGRAPH_OPT_THREADS");
  CHECK(capped.out == single.out);

  CHECK(cli("--config " + (kWork / "none.ini").string() + " run").code == 2);
  CHECK(cli("").code == 2);
}
