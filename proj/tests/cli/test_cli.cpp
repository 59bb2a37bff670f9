#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(OODGNN_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path workdir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "oodgnn_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

std::string read(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("gen, train, evaluate and report succeed") {
  const fs::path dir = workdir();
  REQUIRE(run("gen --count 64 --min-nodes 4 --max-nodes 30 --seed 3 --out " + (dir / "data.jsonl").string()) == 0);
  write(dir / "cfg.txt", "epochs=2\nbatch_size=16\nd=8\nseed=5\ntrain_max_nodes=20\n");
  REQUIRE(run("train --config " + (dir / "cfg.txt").string() + " --data " +
              (dir / "data.jsonl").string() + " --out " + (dir / "run").string()) == 0);
  CHECK(fs::exists(dir / "run" / "results.jsonl"));
  CHECK(fs::exists(dir / "run" / "checkpoint.txt"));
  CHECK(run("evaluate --checkpoint " + (dir / "run" / "checkpoint.txt").string() + " --data " +
            (dir / "data.jsonl").string()) == 0);
  CHECK(run("report --in " + (dir / "run").string()) == 0);
}

TEST_CASE("repeated training writes identical records apart from timing") {
  const fs::path dir = workdir();
  REQUIRE(run("gen --count 48 --min-nodes 4 --max-nodes 30 --seed 4 --out " + (dir / "d2.jsonl").string()) == 0);
  write(dir / "cfg2.txt", "epochs=1\nbatch_size=16\nd=8\nseed=1\ntrain_max_nodes=20\n");
  for (const char* out : {"a", "b"}) {
    REQUIRE(run("train --config " + (dir / "cfg2.txt").string() + " --data " +
                (dir / "d2.jsonl").string() + " --out " + (dir / out).string()) == 0);
  }
  auto strip = [](std::string s) {
    const auto at = s.find(",\"wall_seconds\"");
    if (at != std::string::npos) s.erase(at, s.find_first_of(",}", at + 1) - at);
    return s;
  };
  CHECK(strip(read(dir / "a" / "results.jsonl")) == strip(read(dir / "b" / "results.jsonl")));
  CHECK(read(dir / "a" / "checkpoint.txt") == read(dir / "b" / "checkpoint.txt"));
}

TEST_CASE("usage and configuration errors exit with 1") {
  const fs::path dir = workdir();
  CHECK(run("") != 0);
  CHECK(run("frobnicate") == 1);
  CHECK(run("gen --out x") == 1);
  write(dir / "bad.txt", "epochs=2\nwat=1\n");
  CHECK(run("train --config " + (dir / "bad.txt").string() + " --data x --out y") == 1);
  CHECK(run("experiment --name nope --out " + (dir / "nope").string()) == 1);
}

TEST_CASE("data errors exit with 2") {
  const fs::path dir = workdir();
  write(dir / "cfg3.txt", "epochs=1\n");
  CHECK(run("train --config " + (dir / "cfg3.txt").string() + " --data " +
            (dir / "missing.jsonl").string() + " --out " + (dir / "r3").string()) == 2);
  write(dir / "garbage.jsonl", "{not json\n");
  CHECK(run("evaluate --checkpoint " + (dir / "missing.txt").string() + " --data " +
            (dir / "garbage.jsonl").string()) == 2);
  CHECK(run("report --in " + (dir / "garbage.jsonl").string()) == 2);
}
