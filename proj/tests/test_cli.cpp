// Runs the pprod binary end to end.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#ifndef PPROD_PATH
#error "PPROD_PATH must point at the pprod binary"
#endif

namespace fs = std::filesystem;

static int failures = 0;

#define EXPECT(cond)                                              \
  do {                                                            \
    if (!(cond)) {                                                \
      std::printf("FAIL %s:%d %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                 \
    }                                                             \
  } while (0)

static int run(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(PPROD_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

static std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int main() {
  const fs::path root = fs::temp_directory_path() / ("pprod_cli_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path log = root / "log.txt";

  // missing --out
  EXPECT(run("eval --log-size 8", log) == 2);
  EXPECT(slurp(log).find("--out") != std::string::npos);
  // bad value
  EXPECT(run("eval --log-size 2 --out " + (root / "bad").string(), log) == 2);
  EXPECT(run("sweep --axis Q=1 --out " + (root / "bad").string(), log) == 2);

  // zero input gives a zero output
  EXPECT(run("eval --log-size 8 --input-model zero --out " + (root / "zero").string(), log) == 0);
  {
    const auto j = nlohmann::json::parse(slurp(root / "zero" / "results.json"));
    EXPECT(j["norm_out_r"].get<double>() == 0.0);
    EXPECT(fs::exists(root / "zero" / "config.json"));
    EXPECT(fs::exists(root / "zero" / "manifest.json"));
  }

  // tiles on a zero input: nothing is organized into trees
  EXPECT(run("tiles --log-size 9 --input-model zero --tile-seeds 6 --out " + (root / "tz").string(), log) == 0);
  {
    const auto j = nlohmann::json::parse(slurp(root / "tz" / "results.json"));
    EXPECT(j.dump().find("\"trees\":[]") != std::string::npos);
  }

  // one-point sweep in CSV
  EXPECT(run("sweep --log-size 8 --trials 2 --axis M1=0 --format csv --out " + (root / "sw").string(), log) == 0);
  {
    const std::string csv = slurp(root / "sw" / "sweep.csv");
    int lines = 0;
    for (char c : csv) lines += c == '\n';
    EXPECT(lines == 2);
  }

  // telescope passes its identity check
  EXPECT(run("telescope --log-size 10 --out " + (root / "tel").string(), log) == 0);

  // reruns are byte-identical, whatever the thread count
  const std::string cmds[] = {
      "eval --log-size 9 --seed 7",
      "telescope --log-size 10 --M2 1",
      "tiles --log-size 9 --tile-seeds 8 --Gamma 1",
      "sweep --log-size 8 --trials 3 --axis M1=-1,0,1 --axis n1=0,1",
  };
  int idx = 0;
  for (const auto& c : cmds) {
    for (const char* fmt : {"json", "csv"}) {
      const fs::path a = root / ("a" + std::to_string(idx)), b = root / ("b" + std::to_string(idx));
      ++idx;
      EXPECT(run(c + " --format " + fmt + " --jobs 1 --out " + a.string(), log) == 0);
      EXPECT(run(c + " --format " + fmt + " --jobs 3 --out " + b.string(), log) == 0);
      for (const auto& e : fs::directory_iterator(a)) {
        const bool same = slurp(e.path()) == slurp(b / e.path().filename());
        if (!same) std::printf("differs: %s %s\n", c.c_str(), e.path().filename().c_str());
        EXPECT(same);
      }
    }
  }

  fs::remove_all(root);
  if (failures == 0) std::printf("cli: all checks passed\n");
  return failures == 0 ? 0 : 1;
}
