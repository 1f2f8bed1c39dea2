#include "imtm/config.hpp"
#include "imtm/error.hpp"
#include "imtm/experiments.hpp"
#include "imtm/trace.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

std::string default_out_dir() {
  const char* env = std::getenv("IMTM_OUT_DIR");
  return env != nullptr && *env != '\0' ? env : "out";
}

std::string read_text(const std::string& path, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw imtm::ConfigError("cannot open " + what + " '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void report_artifacts(const std::string& dir, const imtm::ExperimentOutput& out, double seconds) {
  for (const auto& a : out.artifacts) {
    std::cout << "wrote " << dir << '/' << a.name << '\n';
  }
  std::cout << "elapsed " << seconds << " s\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interacting multiple-try Metropolis samplers and experiments"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "Run a sampler described by an INI config");
  run_cmd->add_option("config", config_path, "Config file")->required();

  std::string id;
  imtm::ReproduceOptions repro;
  std::string repro_out = default_out_dir();
  auto* repro_cmd = app.add_subcommand("reproduce", "Run a canned experiment");
  repro_cmd->add_option("id", id, "Experiment id")->required();
  repro_cmd->add_option("--seed", repro.seed, "Master seed");
  repro_cmd->add_option("--out", repro_out, "Output directory (default $IMTM_OUT_DIR or ./out)");
  repro_cmd->add_flag("--synthetic", repro.synthetic, "Use the synthetic LOH dataset for e4");
  repro_cmd->add_option("--data", repro.data_path, "LOH data CSV for e4");
  repro_cmd->add_option("--threads", repro.threads, "Worker threads per population");

  std::string trace_path;
  std::string spec_path;
  std::string diag_out = default_out_dir();
  auto* diag_cmd = app.add_subcommand("diag", "Compute diagnostics from a trace CSV");
  diag_cmd->add_option("trace", trace_path, "Trace CSV")->required();
  diag_cmd->add_option("spec", spec_path, "Diagnostics INI")->required();
  diag_cmd->add_option("--out", diag_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  const auto start = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  try {
    if (*run_cmd) {
      const imtm::ExperimentConfig config = imtm::load_experiment_config(config_path);
      const auto out = imtm::run_experiment(config);
      const std::string dir = config.output_dir.empty() ? default_out_dir() : config.output_dir;
      imtm::write_artifacts(dir, out.artifacts);
      report_artifacts(dir, out, elapsed());
    } else if (*repro_cmd) {
      const auto& ids = imtm::experiment_ids();
      if (std::find(ids.begin(), ids.end(), id) == ids.end()) {
        std::string valid;
        for (const auto& v : ids) {
          valid += (valid.empty() ? "" : ", ") + v;
        }
        throw imtm::ConfigError("unknown experiment id '" + id + "'; valid ids: " + valid);
      }
      const auto out = imtm::reproduce_experiment(id, repro);
      imtm::write_artifacts(repro_out, out.artifacts);
      std::cout << out.report.summary(id);
      report_artifacts(repro_out, out, elapsed());
    } else if (*diag_cmd) {
      std::istringstream trace_in(read_text(trace_path, "trace"));
      const imtm::ChainTrace trace = imtm::ChainTrace::read_csv(trace_in);
      const auto out = imtm::diagnose_trace(trace, read_text(spec_path, "diagnostics spec"));
      imtm::write_artifacts(diag_out, out.artifacts);
      report_artifacts(diag_out, out, elapsed());
    }
  } catch (const imtm::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const imtm::TraceParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
