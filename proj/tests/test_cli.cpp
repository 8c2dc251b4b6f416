#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qfgan/csvio.hpp"
#include "qfgan/matrix.hpp"
#include "qfgan/synthetic.hpp"

// Drives the installed command-line binary as a subprocess; the path comes
// from the QFGAN_CLI environment variable set by the test harness.

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  const char* env = std::getenv("QFGAN_CLI");
  REQUIRE_MESSAGE(env != nullptr, "QFGAN_CLI must point at the command-line binary");
  return env;
}

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

RunResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  const std::string cmd = env_prefix + cli_path() + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult result;
  char buf[4096];
  while (std::fgets(buf, sizeof(buf), pipe) != nullptr) result.output += buf;
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

// First "key value" line match; empty string when the key never appears.
std::string stdout_value(const std::string& output, const std::string& key) {
  std::size_t pos = 0;
  while (pos < output.size()) {
    std::size_t end = output.find('\n', pos);
    if (end == std::string::npos) end = output.size();
    const std::string line = output.substr(pos, end - pos);
    if (line.rfind(key + " ", 0) == 0) return line.substr(key.size() + 1);
    pos = end + 1;
  }
  return "";
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir =
      fs::temp_directory_path() / ("qfgan_cli_" + tag + "_" + std::to_string(getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_price_csv(const fs::path& path, int num_returns, std::uint64_t seed) {
  const qfgan::PriceSeries series = qfgan::student_t_prices(num_returns, 3, 0.01, seed);
  std::string out = "date,close\n";
  for (std::size_t i = 0; i < series.prices.size(); ++i)
    out += series.dates[i] + "," + qfgan::fmt_double(series.prices[i]) + "\n";
  qfgan::write_text_file(path, out);
}

// A small but complete run configuration rooted at `dir`.
std::string config_text(const fs::path& dir, const std::string& work_name) {
  return std::string("{\n") +
         "  \"seed\": 7,\n" +
         "  \"io\": {\"input_csv\": \"" + (dir / "prices.csv").string() +
         "\", \"batch_csv\": \"windows.csv\", \"work_dir\": \"" +
         (dir / work_name).string() + "\"},\n" +
         "  \"pipeline\": {\"window\": 8, \"stride\": 4, \"delta\": 0.5, \"clip_bound\": 4.0},\n" +
         "  \"circuit\": {\"n_qubits\": 4, \"n_layers\": 2, \"topology\": \"chain\"},\n" +
         "  \"critic\": {\"conv_layers\": [{\"filters\": 4, \"kernel\": 3, \"stride\": 1}], "
         "\"dense_layers\": [8]},\n" +
         "  \"train\": {\"epochs\": 4, \"batch_size\": 8, \"n_critic\": 2, \"eval_rows\": 8, "
         "\"checkpoint_every\": 0},\n" +
         "  \"metrics\": {\"tau_max\": 3},\n" +
         "  \"generate\": {\"count\": 6},\n" +
         "  \"fidelity\": {\"n_qubits\": 4, \"depths\": [1, 2], \"bonds\": [1, 2, 4], "
         "\"seeds\": 2}\n" +
         "}\n";
}

fs::path setup_workspace(const std::string& tag, int num_returns = 200) {
  const fs::path dir = fresh_dir(tag);
  write_price_csv(dir / "prices.csv", num_returns, 42);
  qfgan::write_text_file(dir / "cfg.json", config_text(dir, "runs"));
  return dir;
}

std::string slurp(const fs::path& path) { return qfgan::read_text_file(path); }

bool same_bytes(const fs::path& a, const fs::path& b) { return slurp(a) == slurp(b); }

}  // namespace

TEST_CASE("preprocess reports the window-count oracle and writes the sidecar") {
  const fs::path dir = setup_workspace("pre");
  const RunResult r = run_cli("preprocess --config " + (dir / "cfg.json").string());
  CHECK(r.exit_code == 0);
  // 200 returns, window 8, stride 4 -> (200 - 8) / 4 + 1 windows.
  CHECK(stdout_value(r.output, "rows") == "49");
  CHECK(stdout_value(r.output, "window") == "8");

  const fs::path batch = dir / "runs" / "windows.csv";
  const qfgan::Matrix m = qfgan::read_matrix_csv(batch);
  CHECK(m.rows == 49);
  CHECK(m.cols == 8);
  for (double v : m.data) CHECK(std::abs(v) <= 1.0);

  const auto kv = qfgan::read_kv_file(batch.string() + ".meta");
  CHECK(qfgan::kv_lookup(kv, "rows") == "49");
  CHECK(qfgan::kv_lookup(kv, "window") == "8");
  CHECK(slurp(batch).rfind("# tool_version", 0) == 0);
}

TEST_CASE("preprocess warns when the circuit width cannot match the window") {
  const fs::path dir = fresh_dir("prewarn");
  write_price_csv(dir / "prices.csv", 200, 42);
  std::string text = config_text(dir, "runs");
  text.replace(text.find("\"n_qubits\": 4"), 13, "\"n_qubits\": 3");
  qfgan::write_text_file(dir / "cfg.json", text);

  const RunResult pre = run_cli("preprocess --config " + (dir / "cfg.json").string());
  CHECK(pre.exit_code == 0);
  CHECK(pre.output.find("warning:") != std::string::npos);

  const RunResult tr = run_cli("train --config " + (dir / "cfg.json").string());
  CHECK(tr.exit_code == 2);
}

TEST_CASE("bad inputs map onto the documented exit codes") {
  const fs::path dir = fresh_dir("exit");

  CHECK(run_cli("preprocess --config " + (dir / "nope.json").string()).exit_code == 3);

  qfgan::write_text_file(dir / "bad.json", "{\"bogus\": 1}\n");
  CHECK(run_cli("preprocess --config " + (dir / "bad.json").string()).exit_code == 2);

  qfgan::write_text_file(dir / "noin.json",
                         "{\"io\": {\"input_csv\": \"" + (dir / "absent.csv").string() +
                             "\"}}\n");
  CHECK(run_cli("preprocess --config " + (dir / "noin.json").string()).exit_code == 3);

  CHECK(run_cli("").exit_code == 2);            // a subcommand is required
  CHECK(run_cli("frobnicate").exit_code == 2);  // unknown subcommand
  CHECK(run_cli("--version").exit_code == 0);
}

TEST_CASE("train writes the full artifact set and is idempotent to re-run") {
  const fs::path dir = setup_workspace("train");
  const std::string cfg = (dir / "cfg.json").string();
  REQUIRE(run_cli("preprocess --config " + cfg).exit_code == 0);

  const RunResult r = run_cli("train --config " + cfg);
  REQUIRE(r.exit_code == 0);
  const fs::path run_dir(stdout_value(r.output, "run_dir"));
  REQUIRE(fs::exists(run_dir));
  CHECK(stdout_value(r.output, "final_epoch") == "4");

  for (const char* name : {"config.json", "train_log.csv", "timing.csv", "report.json",
                           "acf_reference.csv", "acf_generated.csv"})
    CHECK_MESSAGE(fs::exists(run_dir / name), name);
  CHECK(fs::exists(run_dir / "checkpoints" / "epoch_000004" / "generator.txt"));

  // Log: provenance header, column header, then one row per epoch.
  const std::string log = slurp(run_dir / "train_log.csv");
  CHECK(log.find("epoch,critic_loss,generator_loss,wasserstein_estimate,e_acf_id,e_acf_abs,"
                 "e_lev,emd\n") != std::string::npos);
  CHECK(log.find("wall_time") == std::string::npos);
  int data_lines = 0;
  for (std::size_t pos = 0; (pos = log.find("\n4,", pos)) != std::string::npos; ++pos)
    ++data_lines;
  CHECK(data_lines == 1);

  const nlohmann::json rep = nlohmann::json::parse(slurp(run_dir / "report.json"));
  CHECK(rep.contains("emd"));
  CHECK(rep.contains("e_acf_id"));

  // Re-running the identical command resumes at the final epoch and leaves
  // every byte in place.
  const std::string before_log = slurp(run_dir / "train_log.csv");
  const std::string before_rep = slurp(run_dir / "report.json");
  const RunResult again = run_cli("train --config " + cfg);
  CHECK(again.exit_code == 0);
  CHECK(stdout_value(again.output, "resumed_from_epoch") == "4");
  CHECK(slurp(run_dir / "train_log.csv") == before_log);
  CHECK(slurp(run_dir / "report.json") == before_rep);
}

TEST_CASE("same config and seed reproduce artifacts byte for byte across work roots") {
  const fs::path dir = setup_workspace("repro");
  qfgan::write_text_file(dir / "cfgA.json", config_text(dir, "rootA"));
  qfgan::write_text_file(dir / "cfgB.json", config_text(dir, "rootB"));

  for (const char* name : {"cfgA.json", "cfgB.json"}) {
    const std::string cfg = (dir / name).string();
    REQUIRE(run_cli("preprocess --config " + cfg).exit_code == 0);
    REQUIRE(run_cli("train --config " + cfg).exit_code == 0);
  }

  // The run directory name is part of the contract: io paths stay out of the
  // config hash, so both roots hold a directory of the same name.
  std::vector<fs::path> runs;
  for (const char* root : {"rootA", "rootB"})
    for (const auto& entry : fs::directory_iterator(dir / root))
      if (entry.is_directory()) runs.push_back(entry.path());
  REQUIRE(runs.size() == 2);
  CHECK(runs[0].filename() == runs[1].filename());

  for (const char* name : {"config.json", "train_log.csv", "report.json"})
    CHECK_MESSAGE(same_bytes(runs[0] / name, runs[1] / name), name);
  const fs::path ckpt = fs::path("checkpoints") / "epoch_000004";
  for (const char* name : {"generator.txt", "critic.txt", "optimizer.txt", "state.txt"})
    CHECK_MESSAGE(same_bytes(runs[0] / ckpt / name, runs[1] / ckpt / name), name);

  // A different seed must change the trajectory.
  qfgan::write_text_file(dir / "cfgC.json", config_text(dir, "rootC"));
  const std::string cfgC = (dir / "cfgC.json").string();
  REQUIRE(run_cli("preprocess --config " + cfgC).exit_code == 0);
  REQUIRE(run_cli("train --config " + cfgC + " --seed 8").exit_code == 0);
  std::vector<fs::path> other;
  for (const auto& entry : fs::directory_iterator(dir / "rootC"))
    if (entry.is_directory()) other.push_back(entry.path());
  REQUIRE(other.size() == 1);
  CHECK(other[0].filename() != runs[0].filename());
  CHECK(slurp(other[0] / "train_log.csv") != slurp(runs[0] / "train_log.csv"));
}

TEST_CASE("a stopped run resumes into the same bytes as an uninterrupted one") {
  const fs::path dir = setup_workspace("resume");
  qfgan::write_text_file(dir / "cfgA.json", config_text(dir, "straight"));
  qfgan::write_text_file(dir / "cfgB.json", config_text(dir, "stopped"));

  const std::string cfgA = (dir / "cfgA.json").string();
  const std::string cfgB = (dir / "cfgB.json").string();
  REQUIRE(run_cli("preprocess --config " + cfgA).exit_code == 0);
  REQUIRE(run_cli("preprocess --config " + cfgB).exit_code == 0);

  REQUIRE(run_cli("train --config " + cfgA).exit_code == 0);
  REQUIRE(run_cli("train --config " + cfgB, "QFGAN_STOP_AFTER_EPOCH=2 ").exit_code == 0);
  const RunResult resumed = run_cli("train --config " + cfgB);
  REQUIRE(resumed.exit_code == 0);
  CHECK(stdout_value(resumed.output, "resumed_from_epoch") == "2");
  CHECK(stdout_value(resumed.output, "final_epoch") == "4");

  std::vector<fs::path> runs;
  for (const char* root : {"straight", "stopped"})
    for (const auto& entry : fs::directory_iterator(dir / root))
      if (entry.is_directory()) runs.push_back(entry.path());
  REQUIRE(runs.size() == 2);
  for (const char* name : {"train_log.csv", "report.json", "acf_generated.csv"})
    CHECK_MESSAGE(same_bytes(runs[0] / name, runs[1] / name), name);
  const fs::path ckpt = fs::path("checkpoints") / "epoch_000004";
  for (const char* name : {"generator.txt", "critic.txt", "optimizer.txt"})
    CHECK_MESSAGE(same_bytes(runs[0] / ckpt / name, runs[1] / ckpt / name), name);
}

TEST_CASE("generate honors count, seed determinism, and the raw pre-image range") {
  const fs::path dir = setup_workspace("gen");
  const std::string cfg = (dir / "cfg.json").string();
  REQUIRE(run_cli("preprocess --config " + cfg).exit_code == 0);
  REQUIRE(run_cli("train --config " + cfg).exit_code == 0);

  const RunResult r = run_cli("generate --config " + cfg + " --emit-raw");
  REQUIRE(r.exit_code == 0);
  CHECK(stdout_value(r.output, "rows") == "6");
  CHECK(stdout_value(r.output, "checkpoint_hash").size() == 16);

  const fs::path out(stdout_value(r.output, "output"));
  const qfgan::Matrix post = qfgan::read_matrix_csv(out);
  CHECK(post.rows == 6);
  CHECK(post.cols == 8);
  CHECK(slurp(out).find("# checkpoint_hash ") != std::string::npos);

  const qfgan::Matrix raw = qfgan::read_matrix_csv(fs::path(stdout_value(r.output, "raw_output")));
  CHECK(raw.rows == 6);
  for (double v : raw.data) CHECK(std::abs(v) <= 1.0);

  // Same seed, same bytes; the fresh file lands elsewhere to prove it.
  const fs::path copy = dir / "copy.csv";
  REQUIRE(run_cli("generate --config " + cfg + " --output " + copy.string()).exit_code == 0);
  CHECK(same_bytes(out, copy));

  // count 0 is a valid request for a header-only file.
  const fs::path empty = dir / "empty.csv";
  const RunResult zero = run_cli("generate --config " + cfg + " --count 0 --output " +
                                 empty.string());
  CHECK(zero.exit_code == 0);
  CHECK(stdout_value(zero.output, "rows") == "0");
  const std::string text = slurp(empty);
  CHECK(text.find("t0,t1") != std::string::npos);
  CHECK(text.find("\nt0") == text.rfind("\nt"));  // no data lines after the header
}

TEST_CASE("evaluate compares a file against itself to zero and rejects bad lag cutoffs") {
  const fs::path dir = setup_workspace("eval");
  const std::string cfg = (dir / "cfg.json").string();
  REQUIRE(run_cli("preprocess --config " + cfg).exit_code == 0);
  REQUIRE(run_cli("train --config " + cfg).exit_code == 0);
  const RunResult gen = run_cli("generate --config " + cfg + " --count 16 --output " +
                                (dir / "gen.csv").string());
  REQUIRE(gen.exit_code == 0);

  const std::string pair =
      " --reference " + (dir / "gen.csv").string() + " --generated " + (dir / "gen.csv").string();
  const RunResult r =
      run_cli("evaluate" + pair + " --output-dir " + (dir / "eval").string());
  REQUIRE(r.exit_code == 0);
  CHECK(stdout_value(r.output, "emd") == "0");
  CHECK(stdout_value(r.output, "e_acf_abs") == "0");
  CHECK(stdout_value(r.output, "e_lev") == "0");
  CHECK(stdout_value(r.output, "qq_tail_low") == "0 flag no");

  for (const char* name : {"report.json", "acf_reference.csv", "acf_generated.csv", "qq.csv",
                           "pdf_reference.csv", "pdf_generated.csv"})
    CHECK_MESSAGE(fs::exists(dir / "eval" / name), name);

  const nlohmann::json rep = nlohmann::json::parse(slurp(dir / "eval" / "report.json"));
  CHECK(rep.at("emd").get<double>() == 0.0);

  CHECK(run_cli("evaluate" + pair + " --tau-max 8").exit_code == 2);
  CHECK(run_cli("evaluate" + pair + " --tau-max 99").exit_code == 2);
}

TEST_CASE("fidelity sweep covers the grid and finds an exact top bond on a small circuit") {
  const fs::path dir = setup_workspace("fid");
  const std::string cfg = (dir / "cfg.json").string();
  const RunResult r = run_cli("fidelity-sweep --config " + cfg);
  REQUIRE(r.exit_code == 0);
  // 2 depths x 2 seeds x 3 bonds.
  CHECK(stdout_value(r.output, "rows") == "12");
  CHECK(stdout_value(r.output, "monotonicity_violations") == "0");
  // Bond 4 represents a 4-qubit state exactly.
  CHECK(std::stod(stdout_value(r.output, "min_top_bond_fidelity")) >= 1.0 - 1e-9);

  const fs::path out(stdout_value(r.output, "output"));
  const std::string text = slurp(out);
  CHECK(text.find("depth,bond,seed,fidelity,kept_weight_log,weighted_fidelity\n") !=
        std::string::npos);
  const qfgan::Matrix m = qfgan::read_matrix_csv(out);
  CHECK(m.rows == 12);
  CHECK(m.cols == 6);

  // Re-running reproduces the file byte for byte.
  REQUIRE(run_cli("fidelity-sweep --config " + cfg).exit_code == 0);
  CHECK(slurp(out) == text);
}
