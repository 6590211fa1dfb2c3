// gaslab: runs one experiment and writes <experiment>.csv and summary.json.
// Exit status is 0 iff the experiment passes.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gaslab/lab.hpp"

int main(int argc, char **argv)
{
  CLI::App app{"Spectral experiments for the 2D isentropic gas system on the torus"};
  app.require_subcommand(1);
  app.fallthrough(); // global flags may follow the subcommand

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  app.add_option("--config", config_path, "JSON experiment configuration")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--seed", seed, "Base random seed");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  for (const char *name :
       {"nonuniform", "residue-scaling", "error-scaling", "exact-check", "higher-norm", "inequalities"}) {
    app.add_subcommand(name, std::string("Run the ") + name + " experiment");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    const auto experiment = gaslab::experiment_from_string(app.get_subcommands().front()->get_name());
    nlohmann::json doc = nlohmann::json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      doc = nlohmann::json::parse(in);
    }
    // The subcommand decides which experiment runs.
    doc["experiment"] = gaslab::to_string(experiment);
    auto cfg = gaslab::config_from_json(doc);
    if (out_dir) cfg.output_dir = *out_dir;
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;
    cfg.validate();

    const auto out = gaslab::run_experiment(cfg);
    gaslab::write_outputs(cfg, out);
    std::cout << gaslab::to_string(experiment) << ": " << (out.pass ? "PASS" : "FAIL") << " ("
              << cfg.output_dir << ")\n";
    return out.pass ? 0 : 1;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
