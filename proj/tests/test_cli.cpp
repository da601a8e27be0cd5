#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "rome/config.hpp"
#include "rome/error.hpp"
#include "rome/io.hpp"

using namespace rome;
namespace fs = std::filesystem;

namespace {

const char* kSmallLinear = R"(seed = 3

[model]
type = "linear"
n = 20
spectral_radius = 0.9
density = 0.2
noise_sigma = 0.05

[probe]
t = 4000
burn_in = 200
k_max = 20

[task]
kind = "delays"
delays = [3]

[encoder]
kind = "rome"
power = 0.01
random_count = 5

[run]
t = 3000
washout = 200
seeds = [1, 2]
eval_k_max = 10

[sweep]
power_min = 0.001
power_max = 0.1
power_points = 3
angles = 36

[ascent]
eta_scale = 0.5
steps = 1500
eval_every = 500
starts = 2

[output]
formats = ["csv", "json", "svg"]
)";

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("rome_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  fs::path p = dir / "config.toml";
  std::ofstream(p) << text;
  return p;
}

int rome_cli(const std::string& args) {
  const std::string cmd = std::string(ROME_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

std::string slurp(const fs::path& p) { return read_text_file(p); }

std::string config_error(const std::string& text) {
  try {
    parse_config(text, "test.toml");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config parsing") {
  auto cfg = parse_config(kSmallLinear);
  CHECK(cfg.seed == 3);
  CHECK(cfg.model.type == "linear");
  CHECK(cfg.model.linear.n == 20);
  CHECK(cfg.model.linear.seed == 3);
  CHECK(cfg.probe.k_max == 20);
  CHECK(cfg.task.delays == std::vector<int>{3});
  CHECK(cfg.run.seeds == std::vector<std::uint64_t>{1, 2});
  CHECK(cfg.sweep.power_grid().size() == 3);
  CHECK(cfg.sweep.power_grid().front() == doctest::Approx(0.001));
  CHECK(cfg.sweep.power_grid()[1] == doctest::Approx(0.01));
  CHECK(cfg.input_cov()(0, 0) == doctest::Approx(1.0 / 3.0));
  override_seed(cfg, 9);
  CHECK(cfg.seed == 9);
  CHECK(cfg.model.linear.seed == 9);

  auto narma = parse_config("[task]\nkind = \"narma10\"\n");
  CHECK(narma.input_cov()(0, 0) == doctest::Approx(1.0 / 48.0));
  CHECK(narma.task.task_weights(50).max_delay() == 10);
}

TEST_CASE("config errors name the offending key") {
  std::string msg = config_error("[probe]\nk_max = 50\ntypo_key = 1\n");
  CHECK(msg.find("typo_key") != std::string::npos);
  CHECK(msg.find("test.toml:3") != std::string::npos);

  msg = config_error("[probe]\nk_max = 50\n[task]\ndelays = [60]\n");
  CHECK(msg.find("60") != std::string::npos);

  CHECK(!config_error("[nonsense]\nx = 1\n").empty());
  CHECK(!config_error("[run]\nseeds = []\n").empty());
  CHECK(!config_error("[run]\nt = 100\nwashout = 200\n").empty());
  CHECK(!config_error("[encoder]\npower = -1\n").empty());
  CHECK(!config_error("[model]\ntype = \"quantum\"\n").empty());
  CHECK(!config_error("[output]\nformats = [\"xlsx\"]\n").empty());
  CHECK(!config_error("[probe]\nk_max = \"fifty\"\n").empty());
  CHECK(!config_error("seed = [1\n").empty());
}

TEST_CASE("shipped configs parse") {
  for (const char* name : {"linear_memory.toml", "esn_narma.toml", "spinwave.toml", "snn.toml"}) {
    CAPTURE(name);
    auto cfg = load_config(fs::path(ROME_CONFIG_DIR) / name);
    CHECK_NOTHROW(make_reservoir(cfg.model));
  }
}

TEST_CASE("CLI exit codes") {
  auto dir = scratch("exit");
  auto good = write_config(dir, kSmallLinear);
  CHECK(rome_cli("") == 2);
  CHECK(rome_cli("probe") == 2);
  CHECK(rome_cli("probe --config " + (dir / "missing.toml").string()) == 2);
  CHECK(rome_cli("frobnicate --config " + good.string()) == 2);
  CHECK(rome_cli("probe --config " + good.string() + " --jobs 0") == 2);

  auto bad_dir = scratch("exit_bad");
  auto bad = write_config(bad_dir, std::string(kSmallLinear) + "\n[extra]\nfoo = 1\n");
  CHECK(rome_cli("probe --config " + bad.string() + " --out " + bad_dir.string()) == 2);

  // Evaluate without a probe artifact or encoder.
  CHECK(rome_cli("optimize --config " + good.string() + " --out " + (dir / "empty").string()) == 2);

  auto esn_dir = scratch("exit_esn");
  std::string esn = kSmallLinear;
  esn.replace(esn.find("\"linear\""), 8, "\"esn\"");
  auto esn_cfg = write_config(esn_dir, esn);
  CHECK(rome_cli("probe --analytic --config " + esn_cfg.string() + " --out " + esn_dir.string()) == 2);
}

TEST_CASE("probe, optimize, evaluate, sweep and ascent pipeline") {
  auto dir = scratch("pipeline");
  auto cfg_path = write_config(dir, kSmallLinear);
  const std::string base = " --config " + cfg_path.string() + " --out ";
  const fs::path analytic = dir / "analytic";
  const fs::path empirical = dir / "empirical";

  REQUIRE(rome_cli("probe --analytic" + base + analytic.string()) == 0);
  REQUIRE(rome_cli("probe" + base + empirical.string()) == 0);

  SUBCASE("empirical and analytic probes agree") {
    auto a = probe_from_json(read_json_file(analytic / "probe.json"));
    auto e = probe_from_json(read_json_file(empirical / "probe.json"));
    const double fluct_err = (a.fluct.sigma_ref - e.fluct.sigma_ref).norm() / a.fluct.sigma_ref.norm();
    CHECK(fluct_err <= 0.1);
    for (int k = 1; k <= 20; ++k) CHECK((a.kernel.at(k) - e.kernel.at(k)).norm() <= 1e-8);
  }

  SUBCASE("probe artifact is deterministic") {
    const fs::path again = dir / "again";
    REQUIRE(rome_cli("probe" + base + again.string()) == 0);
    CHECK(slurp(again / "probe.json") == slurp(empirical / "probe.json"));
    const fs::path other = dir / "other_seed";
    REQUIRE(rome_cli("probe --seed 4" + base + other.string()) == 0);
    CHECK(slurp(other / "probe.json") != slurp(empirical / "probe.json"));
  }

  SUBCASE("optimize writes a descending spectrum and a full-power encoder") {
    REQUIRE(rome_cli("optimize" + base + analytic.string()) == 0);
    auto spectrum = read_csv(analytic / "spectrum.csv");
    REQUIRE(spectrum.size() == 21);
    CHECK(spectrum[0] == std::vector<std::string>{"index", "eigenvalue"});
    for (std::size_t i = 2; i < spectrum.size(); ++i) CHECK(std::stod(spectrum[i][1]) <= std::stod(spectrum[i - 1][1]));
    auto j = read_json_file(analytic / "encoder.json");
    Encoder enc = encoder_from_json(j);
    CHECK(enc.whitened_power() == doctest::Approx(0.01).epsilon(1e-10));
    CHECK(j["provenance"]["kind"] == "rome");
    CHECK(enc.predicted_objective == doctest::Approx(0.01 * std::stod(spectrum[1][1])).epsilon(1e-8));

    SUBCASE("evaluate") {
      REQUIRE(rome_cli("evaluate" + base + analytic.string()) == 0);
      auto metrics = read_csv(analytic / "metrics.csv");
      CHECK(metrics[0] == std::vector<std::string>{"seed", "k", "mf", "r2"});
      CHECK(metrics.size() == 1 + 2 * 10 + 2 * 10);
      auto random = read_csv(analytic / "random.csv");
      CHECK(random.size() == 1 + 5 * 10 + 2 * 10);
      CHECK(fs::exists(analytic / "mf.svg"));
      const std::string first = slurp(analytic / "metrics.csv");
      REQUIRE(rome_cli("evaluate" + base + analytic.string()) == 0);
      CHECK(slurp(analytic / "metrics.csv") == first);

      auto manifest = read_json_file(analytic / "manifest.json");
      for (const char* cmd : {"probe", "optimize", "evaluate"}) {
        CAPTURE(cmd);
        REQUIRE(manifest["commands"].contains(cmd));
        CHECK(manifest["commands"][cmd]["status"] == "ok");
        for (const auto& name : manifest["commands"][cmd]["artifacts"]) {
          const std::string file = name.get<std::string>();
          CHECK(manifest["artifacts"][file] == sha256_hex(slurp(analytic / file)));
        }
      }
    }
  }

  SUBCASE("power sweep covers the grid with both encoder kinds") {
    REQUIRE(rome_cli("sweep" + base + analytic.string()) == 0);
    auto rows = read_csv(analytic / "sweep.csv");
    CHECK(rows[0] ==
          std::vector<std::string>{"sweep_var", "value", "encoder_kind", "seed", "metric", "metric_value"});
    std::map<std::string, std::set<std::string>> kinds;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      CHECK(rows[i][0] == "power");
      kinds[rows[i][1]].insert(rows[i][2]);
    }
    CHECK(kinds.size() == 3);
    for (const auto& [value, k] : kinds) {
      CHECK(k.count("rome") == 1);
      CHECK(k.count("random") == 1);
    }
  }

  SUBCASE("plane scan is symmetric under a half turn") {
    const fs::path plane = dir / "plane";
    fs::create_directories(plane);
    fs::copy_file(analytic / "probe.json", plane / "probe.json");
    REQUIRE(rome_cli("sweep --plane" + base + plane.string()) == 0);
    auto rows = read_csv(plane / "sweep.csv");
    REQUIRE(rows.size() == 37);
    for (std::size_t i = 1; i <= 18; ++i) {
      CHECK(std::stod(rows[i][5]) == doctest::Approx(std::stod(rows[i + 18][5])).epsilon(1e-9));
    }
    CHECK(fs::exists(plane / "plane.json"));
  }

  SUBCASE("ascent converges on the linear config") {
    REQUIRE(rome_cli("ascent" + base + analytic.string()) == 0);
    auto rows = read_csv(analytic / "ascent.csv");
    CHECK(rows[0] == std::vector<std::string>{"start", "step", "alignment", "objective", "r2"});
    std::map<std::string, std::vector<double>> objective, align;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      objective[rows[i][0]].push_back(std::stod(rows[i][3]));
      align[rows[i][0]].push_back(std::stod(rows[i][2]));
    }
    CHECK(objective.size() == 2);
    for (const auto& [start, values] : objective) {
      CHECK(values.size() <= 1501);
      for (std::size_t i = 1; i < values.size(); ++i) CHECK(values[i] >= values[i - 1] * (1.0 - 1e-12));
      CHECK(align[start].back() >= 0.99);
    }
  }
}
