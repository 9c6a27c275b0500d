// end-to-end tests for the command-line front end: each case shells out to
// the built binary, then parses the report it wrote
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "quasim/weights.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string cli = QUASIM_CLI_PATH;

fs::path tmpdir() {
  static fs::path d = [] {
    fs::path p = fs::temp_directory_path() /
                 ("quasim_cli_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return d;
}

int run(const std::string& args) {
  std::string cmd = "\"" + cli + "\" " + args + " 2>/dev/null";
  int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -2;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(bool(in));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_report(const fs::path& p) { return json::parse(slurp(p)); }

double num(const json& j) { return std::stod(j.get<std::string>()); }

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  REQUIRE(bool(out));
  out << text;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

}  // namespace

TEST_CASE("coeffs emits the weight table as CSV") {
  fs::path out = tmpdir() / "coeffs.csv";
  REQUIRE(run("--format csv --out \"" + out.string() + "\" coeffs") == 0);
  std::vector<std::string> lines;
  for (const std::string& l : split(slurp(out), '\n'))
    if (!l.empty()) lines.push_back(l);
  REQUIRE(lines.size() == 34);
  CHECK(lines[0] == "n,a_n,running_sum");

  quasim::WeightSequence w =
      quasim::fourier_coefficients(16, 1L << 17, 1e-10);
  double sum = 0.0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto parts = split(lines[i], ',');
    REQUIRE(parts.size() == 3);
    long n = std::stol(parts[0]);
    CHECK(n == long(i) - 17);
    // the table prints with round-trip precision, so values match exactly
    CHECK(std::stod(parts[1]) == w.a(n));
    sum += w.a(n);
  }
  CHECK(std::stod(split(lines.back(), ',')[2]) ==
        doctest::Approx(sum).epsilon(1e-12));
}

TEST_CASE("verify-intertwine passes on the default model") {
  fs::path out = tmpdir() / "verify.json";
  REQUIRE(run("--out \"" + out.string() + "\" verify-intertwine") == 0);
  json rep = read_report(out);
  CHECK(rep["pass"].get<bool>());
  CHECK(num(rep["intertwine_residual"]) <= 1e-10);
  CHECK(num(rep["intertwine_worst_per_n"]) <= 1e-10);
  CHECK(rep["safe_columns"].get<long>() == 64);
  CHECK(rep["markov_flags"]["pass"].get<bool>());
  CHECK(num(rep["markov_flags"]["min_entry"]) >= -1e-12);
  CHECK(num(rep["markov_flags"]["operator_norm"]) <= 1.0 + 1e-10);
  // margins frozen from an independent dense-kernel computation
  CHECK(num(rep["kernel_margins"]["J"]) ==
        doctest::Approx(0.15221631334319488).epsilon(1e-8));
  CHECK(num(rep["kernel_margins"]["J_adjoint"]) ==
        doctest::Approx(0.08636068676061519).epsilon(1e-8));
  CHECK(num(rep["kernel_margins"]["empty_sector"]) ==
        doctest::Approx(0.014065296386636846).epsilon(1e-8));
  CHECK(num(rep["xi_max_dev"]) <= 1e-12);
  CHECK(num(rep["zeta_max_dev"]) <= 1e-12);

  // identical invocations produce byte-identical reports
  fs::path again = tmpdir() / "verify2.json";
  REQUIRE(run("--out \"" + again.string() + "\" verify-intertwine") == 0);
  CHECK(slurp(out) == slurp(again));

  // a seed override is echoed back
  fs::path seeded = tmpdir() / "verify3.json";
  REQUIRE(run("--seed 7 --out \"" + seeded.string() + "\" verify-intertwine") ==
          0);
  CHECK(read_report(seeded)["config_echo"]["seed"].get<std::uint64_t>() == 7);
}

TEST_CASE("construct reports the model shape") {
  fs::path out = tmpdir() / "construct.json";
  REQUIRE(run("--out \"" + out.string() + "\" construct") == 0);
  json rep = read_report(out);
  CHECK(rep["dim"].get<long>() == 4096);
  CHECK(rep["sector_count"].get<long>() == 512);
  CHECK(rep["safe_sector_count"].get<long>() == 8);
  CHECK(rep["alive_sector_count"].get<long>() >= 383);
  CHECK(rep["alive_sector_count"].get<long>() <= 512);
  CHECK(rep["edge_count"].get<long>() > 0);
  CHECK(rep["frequency_diagonal"].get<bool>());
  CHECK(rep["skew_product_ergodic"].get<bool>());
  CHECK(num(rep["weight_sum"]) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("kernel-scan margins match the frozen values") {
  fs::path out = tmpdir() / "scan.json";
  REQUIRE(run("--out \"" + out.string() + "\" kernel-scan") == 0);
  json rep = read_report(out);
  CHECK(rep["pass"].get<bool>());
  CHECK(num(rep["safe_nonempty"]["J"]) ==
        doctest::Approx(0.15221631334319488).epsilon(1e-8));
  CHECK(num(rep["safe_nonempty"]["J_adjoint"]) ==
        doctest::Approx(0.08636068676061519).epsilon(1e-8));
  CHECK(rep["safe_nonempty"]["sectors"].get<long>() == 7);
  CHECK(rep["safe_with_empty"]["sectors"].get<long>() == 8);
  CHECK(num(rep["empty_only"]["J"]) ==
        doctest::Approx(0.014065296386636846).epsilon(1e-8));
  // every sector together (and every alive sector) leaves no margin
  CHECK(num(rep["alive"]["J"]) == 0.0);
  CHECK(num(rep["full"]["J"]) == 0.0);
  REQUIRE(rep["window_scan"].size() == 2);
  CHECK(rep["window_scan"][0]["margin_parameter"].get<long>() == 3);
  CHECK(rep["window_scan"][0]["sectors"].get<long>() == 7);
  // a larger margin parameter leaves a smaller sector family (radius 0 here)
  CHECK(rep["window_scan"][1]["sectors"].get<long>() == 1);
  // and the margin over a smaller family can only grow
  CHECK(num(rep["window_scan"][1]["J"]) >= num(rep["window_scan"][0]["J"]));
}

TEST_CASE("counterexample reports the vanishing residual bound") {
  fs::path out = tmpdir() / "cex.json";
  REQUIRE(run("--out \"" + out.string() + "\" counterexample --K 8") == 0);
  json rep = read_report(out);
  CHECK(rep["K"].get<long>() == 8);
  CHECK(rep["within_bound"].get<bool>());
  CHECK(rep["f_large_enough"].get<bool>());
  CHECK(rep["pass"].get<bool>());
  double bound = num(rep["bound"]);
  CHECK(bound == 0.0009765625);  // 2^-10, exactly representable
  CHECK(num(rep["measured"]) <= bound + 1e-12);
  CHECK(num(rep["f_norm"]) > 1.0);
}

TEST_CASE("spectral-compare certifies a conjugated pair") {
  fs::path out = tmpdir() / "spectral.json";
  REQUIRE(run("--out \"" + out.string() + "\" spectral-compare --dim 12") == 0);
  json rep = read_report(out);
  CHECK(rep["certified"].get<bool>());
  CHECK(rep["spectra_match"].get<bool>());
  CHECK(rep["equivalent"].get<bool>());
  CHECK(num(rep["residual_forward"]) <= 1e-8);
  CHECK(num(rep["residual_backward"]) <= 1e-8);
  CHECK(num(rep["margin_v"]) > 0.9);
}

TEST_CASE("joinings of coprime rotations are trivial and exact") {
  fs::path s2 = tmpdir() / "sys2.json";
  fs::path s3 = tmpdir() / "sys3.json";
  write_file(s2, R"({"n": 2, "perm": [1, 0], "p": ["1/2", "1/2"]})");
  write_file(s3, R"({"n": 3, "perm": [1, 2, 0], "p": ["1/3", "1/3", "1/3"]})");
  fs::path out = tmpdir() / "joinings.json";
  REQUIRE(run("--out \"" + out.string() + "\" joinings --sys1 \"" +
              s2.string() + "\" --sys2 \"" + s3.string() +
              "\" --emit-markov") == 0);
  json rep = read_report(out);
  CHECK(rep["n1"].get<long>() == 2);
  CHECK(rep["n2"].get<long>() == 3);
  CHECK(rep["dimension"].get<long>() == 0);
  CHECK(rep["disjoint"].get<bool>());
  CHECK(rep["exact"].get<bool>());
  CHECK(rep["pass"].get<bool>());
  REQUIRE(rep["product_joining"].size() == 2);
  CHECK(num(rep["product_joining"][0][0]) ==
        doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  REQUIRE(rep["product_markov"].size() == 3);

  // numeric weights still get an exact basis: the homogeneous constraints
  // are integral, so small problems use rational elimination either way
  fs::path s2f = tmpdir() / "sys2_float.json";
  write_file(s2f, R"({"n": 2, "perm": [1, 0], "p": [0.5, 0.5]})");
  fs::path out2 = tmpdir() / "joinings_float.json";
  REQUIRE(run("--out \"" + out2.string() + "\" joinings --sys1 \"" +
              s2f.string() + "\" --sys2 \"" + s2f.string() + "\"") == 0);
  json rep2 = read_report(out2);
  CHECK(rep2["dimension"].get<long>() == 1);
  CHECK(rep2["exact"].get<bool>());
  CHECK(!rep2["disjoint"].get<bool>());
}

TEST_CASE("bad inputs exit nonzero") {
  // weights that do not sum to one are rejected
  fs::path cfg = tmpdir() / "broken.json";
  write_file(cfg, R"({"K": 1, "weights": [0.5, 0.2, 0.2]})");
  fs::path out = tmpdir() / "broken_out.json";
  CHECK(run("--config \"" + cfg.string() + "\" --out \"" + out.string() +
            "\" construct") != 0);

  // malformed configuration file
  fs::path garbage = tmpdir() / "garbage.json";
  write_file(garbage, "not json at all");
  CHECK(run("--config \"" + garbage.string() + "\" verify-intertwine") != 0);

  // missing configuration file fails the existence check
  CHECK(run("--config /nonexistent/нет.json construct") != 0);

  // a subcommand is required; unknown ones are rejected
  CHECK(run("") != 0);
  CHECK(run("frobnicate") != 0);

  // a system whose weights are not invariant under its map is rejected
  fs::path bad_sys = tmpdir() / "bad_sys.json";
  write_file(bad_sys, R"({"n": 2, "perm": [1, 0], "p": ["1/4", "3/4"]})");
  fs::path ok_sys = tmpdir() / "ok_sys.json";
  write_file(ok_sys, R"({"n": 2, "perm": [1, 0], "p": ["1/2", "1/2"]})");
  CHECK(run("joinings --sys1 \"" + bad_sys.string() + "\" --sys2 \"" +
            ok_sys.string() + "\"") != 0);
}
