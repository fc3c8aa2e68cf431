// End-to-end checks of the command-line surface. The binary path comes from
// the STKERN_CLI environment variable (set by the ctest fixture).

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const char* cli_path() { return std::getenv("STKERN_CLI"); }

int run_cli(const std::string& args) {
  const std::string cmd = std::string(cli_path()) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) ++n;
  return n;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("stkern_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("simulate row count and eval/band contracts") {
  if (!cli_path()) {
    MESSAGE("STKERN_CLI not set; skipping CLI end-to-end checks");
    return;
  }
  TempDir dir;

  SUBCASE("simulate writes n * p^2 observation rows") {
    REQUIRE(run_cli("simulate --n 100 --p 15 --seed 5 --scenario S1 --out " + dir.file("s")) ==
            0);
    CHECK(count_lines(dir.file("s_obs.csv")) == 22500 + 1);  // data rows + header
    CHECK(count_lines(dir.file("s_truth.csv")) == 22500 + 1);
    CHECK(count_lines(dir.file("s_cov.csv")) == 100 + 1);
  }

  SUBCASE("fit records a cv-selected triple in the manifest") {
    REQUIRE(run_cli("simulate --n 30 --p 4 --seed 6 --scenario S1 --out " + dir.file("m")) == 0);
    REQUIRE(run_cli("fit --obs " + dir.file("m_obs.csv") + " --cov " + dir.file("m_cov.csv") +
                    " --h cv --K 3 --out " + dir.file("manifest.txt")) == 0);
    std::ifstream in(dir.file("manifest.txt"));
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string manifest = ss.str();
    CHECK(manifest.find("h: ") != std::string::npos);
    CHECK(manifest.find("(cv)") != std::string::npos);
    CHECK(manifest.find("K: 3") != std::string::npos);
    CHECK(manifest.find("phi: 0.9") != std::string::npos);
    CHECK(manifest.find("aggregate_table_fnv1a: ") != std::string::npos);
  }

  SUBCASE("band rejects too-close queries with exit code 3 and no output file") {
    REQUIRE(run_cli("simulate --n 40 --p 4 --seed 8 --scenario S1 --out " + dir.file("b")) == 0);
    std::ofstream q(dir.file("q.csv"));
    q << "t,x1\n0.9,2.0\n0.95,2.01\n";
    q.close();
    CHECK(run_cli("band --obs " + dir.file("b_obs.csv") + " --cov " + dir.file("b_cov.csv") +
                  " --queries " + dir.file("q.csv") + " --h 0.2 --K 2 --z 3 --s 0.5,0.5 --out " +
                  dir.file("band.csv")) == 3);
    CHECK_FALSE(fs::exists(dir.file("band.csv")));
  }

  SUBCASE("usage errors exit with code 2") {
    CHECK(run_cli("predict --obs missing-required-queries.csv") == 2);
    CHECK(run_cli("nonsense-subcommand") == 2);
  }

  SUBCASE("missing input files exit with code 3") {
    CHECK(run_cli("fit --obs " + dir.file("no_such.csv") + " --h 0.1 --K 2 --out " +
                  dir.file("f.txt")) == 3);
  }

  SUBCASE("results do not depend on the worker-thread count") {
    const std::string flags = "eval --scenario S3 --n 24 --p 4 --B 3 --seed 9 --holdout 4 "
                              "--h 0.3 --K 3 --out ";
    const std::string one = dir.file("threads1.csv"), many = dir.file("threads4.csv");
    auto run_env = [&](const std::string& env, const std::string& out) {
      const std::string cmd =
          env + " " + std::string(cli_path()) + " " + flags + out + " > /dev/null 2>&1";
      return WEXITSTATUS(std::system(cmd.c_str()));
    };
    REQUIRE(run_env("STKERN_THREADS=1", one) == 0);
    REQUIRE(run_env("STKERN_THREADS=4", many) == 0);
    std::ifstream a(one), b(many);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK_FALSE(sa.str().empty());
    CHECK(sa.str() == sb.str());
  }
}

TEST_SUITE_END();
