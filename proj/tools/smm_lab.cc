// smm-lab: runs one experiment kind and writes CSV/SVG artifacts plus a
// manifest. Errors go to stderr as a single JSON line.
#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "lab/experiment.h"

namespace {

int ReportError(const std::string& code, const std::string& message) {
  nlohmann::json j;
  j["error"] = {{"code", code}, {"message", message}};
  std::cerr << j.dump() << "\n";
  return code == "config" || code == "usage" ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tabular state marginal matching experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string seeds;
  std::size_t jobs = 1;
  bool print_config = false;

  for (smm::lab::Kind kind : smm::lab::kAllKinds) {
    auto* sub = app.add_subcommand(smm::lab::KindName(kind));
    sub->add_option("--config", config_path, "Config file (key = value)");
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--seeds", seeds, "Comma-separated seed list");
    sub->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--print-config", print_config,
                  "Print the effective config and exit");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return ReportError("usage", e.what());
  }

  try {
    const smm::lab::Kind kind =
        smm::lab::ParseKind(app.get_subcommands().front()->get_name());
    std::string text;
    if (!config_path.empty()) text = smm::ReadTextFile(config_path);
    if (!seeds.empty()) text += "\nseeds = " + seeds + "\n";
    smm::lab::ExperimentConfig config =
        smm::lab::ParseExperimentConfig(kind, text);
    if (!out_dir.empty()) config.out_dir = out_dir;
    config.jobs = jobs;
    if (print_config) {
      std::cout << smm::lab::CanonicalConfigText(config);
      return 0;
    }
    const smm::lab::RunManifest manifest = smm::lab::Run(config);
    std::cout << config.out_dir << "/manifest.json ("
              << manifest.artifacts.size() << " artifacts, hash "
              << manifest.config_hash << ")\n";
  } catch (const smm::Error& e) {
    return ReportError(smm::ErrorCodeName(e.code()), e.what());
  } catch (const std::exception& e) {
    return ReportError("internal", e.what());
  }
  return 0;
}
