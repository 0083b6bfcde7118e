#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "mfa/cli.hpp"
#include "mfa/config.hpp"
#include "mfa/errors.hpp"
#include "mfa/format.hpp"

using namespace mfa;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("mfa_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string write_config(const std::string& name, const std::string& text) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p.string();
}

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::string> data_lines(const std::string& s) {
  std::vector<std::string> lines;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);)
    if (!line.empty() && line[0] != '#') lines.push_back(line);
  return lines;
}

const char* kBinomial =
    "[system]\nbuiltin = affine_cantor\nratios = 0.3333333333333333, 0.3333333333333333\n"
    "[potential]\npsi = probabilities\nprobabilities = 0.3, 0.7\nu = 1\n";

}  // namespace

TEST_CASE("dim on the Cantor set") {
  const Result r = run({"dim", "--config", write_config("cantor.ini", "[system]\nbuiltin = affine_cantor\n")});
  REQUIRE(r.code == cli::kExitOk);
  const auto lines = data_lines(r.out);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "dim,lower,upper");
  CHECK(parse_real(lines[1].substr(0, lines[1].find(','))) == doctest::Approx(0.6309297535714574).epsilon(1e-13));
}

TEST_CASE("configuration echo") {
  const Result r = run({"dim", "--config", write_config("echo.ini", "[system]\nbuiltin = affine_cantor\n"), "--nodes",
                        "48"});
  CHECK(r.out.find("# command = dim\n") != std::string::npos);
  CHECK(r.out.find("# [system] builtin = affine_cantor\n") != std::string::npos);
  CHECK(r.out.find("# [numerics] nodes = 48\n") != std::string::npos);
}

TEST_CASE("spectrum file has the fixed header and 101 rows") {
  const std::string cfg = write_config("binomial.ini", kBinomial);
  const fs::path a = scratch() / "a.csv", b = scratch() / "b.csv";
  REQUIRE(run({"spectrum", "--config", cfg, "--out", a.string(), "--threads", "1"}).code == 0);
  REQUIRE(run({"spectrum", "--config", cfg, "--out", b.string(), "--threads", "3"}).code == 0);
  const std::string text = slurp(a);
  CHECK(text == slurp(b));
  std::istringstream in(text);
  std::string header;
  std::getline(in, header);
  CHECK(header == "q,T,alpha_fd,alpha_grad,f,chi,residual");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 101);
}

TEST_CASE("check reports the boundary gap") {
  const Result r =
      run({"check", "--config", write_config("cfno.ini", "[system]\nbuiltin = cf_no_one\ntruncation = 50\n")});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("\nbsc_gap_exact: 5/28\n") != std::string::npos);
  CHECK(r.out.find("\ncofinitely_regular: yes\n") != std::string::npos);
}

TEST_CASE("temperature and pressure tables") {
  const std::string cfg = write_config("binomial2.ini", kBinomial);
  const Result t = run({"temperature", "--config", cfg, "--q-min", "-1", "--q-max", "1", "--q-steps", "3"});
  REQUIRE(t.code == 0);
  const auto lines = data_lines(t.out);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "q,T,residual");
  CHECK(lines[2].rfind("0,", 0) == 0);

  const Result p = run({"pressure", "--config", cfg});
  REQUIRE(p.code == 0);
  CHECK(data_lines(p.out).size() == 1 + 3 * 21);
}

TEST_CASE("localdim and concentrate") {
  const std::string cfg = write_config(
      "sym.ini", "[system]\nbuiltin = affine_cantor\n[potential]\npsi = probabilities\nprobabilities = 0.5, 0.5\n"
                 "[numerics]\ncount = 20\npoints = 0.0, 1.0\nq_values = 0\n");
  const Result l = run({"localdim", "--config", cfg});
  REQUIRE(l.code == 0);
  CHECK(data_lines(l.out).size() == 3);
  const Result c = run({"concentrate", "--config", cfg});
  REQUIRE(c.code == 0);
  const auto lines = data_lines(c.out);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "q,alpha,fraction_in_band");
}

TEST_CASE("exit codes") {
  CHECK(run({"dim"}).code == cli::kExitConfig);
  CHECK(run({"frobnicate", "--config", "x"}).code == cli::kExitConfig);
  CHECK(run({"dim", "--config", (scratch() / "missing.ini").string()}).code == cli::kExitConfig);
  CHECK(run({"dim", "--config", write_config("bad.ini", "[system]\nbogus = 1\n")}).code == cli::kExitConfig);
  CHECK(run({"spectrum", "--config", write_config("q.ini", kBinomial), "--q-steps", "1"}).code == cli::kExitConfig);
  const std::string below = write_config(
      "below.ini", "[system]\nbuiltin = cf_full\ntruncation = 3\n[numerics]\nq_values = 0\nt_min = 0.2\nt_max = 1\n");
  const Result d = run({"pressure", "--config", below});
  CHECK(d.code == cli::kExitDomain);
  CHECK(d.err.find("domain error") != std::string::npos);
}

TEST_CASE("config parsing") {
  std::istringstream in(
      "# comment\n[system]\nbuiltin = custom\nvertices = 0 0 1; 1 2 3\n"
      "edges = 0 0 0 affine 0.25 0; 1 0 1 affine 0.25 0; 2 1 0 affine 0.5 2\n"
      "[numerics]\nq_values = -1, 2.5\n");
  const RunConfig cfg = parse_config(in);
  CHECK(cfg.numerics.q_values == std::vector<double>{-1.0, 2.5});
  const System s = build_system(cfg);
  CHECK(s.num_edges() == 3);
  CHECK(s.vertices().size() == 2);
  CHECK_FALSE(s.is_full_shift());
  std::istringstream bad("[numerics]\nnodes = many\n");
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
}

TEST_CASE("number formatting") {
  CHECK(format_real(0.1) == "0.10000000000000001");
  CHECK(format_real(-2.0) == "-2");
  CHECK(parse_real(format_real(0.6309297535714574)) == 0.6309297535714574);
  CHECK(std::isnan(parse_real("nan")));
  CHECK_THROWS_AS(parse_real("1,5"), ParameterError);
}
