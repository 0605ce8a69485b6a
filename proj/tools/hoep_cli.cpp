// Command-line front end: hoep <command> --config <file> [--out <dir>].
// Exit codes: 0 success, 2 diagnostic failure (curvature, stalled line search, no convergence),
// 1 any other error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "hoep/commands.hpp"

namespace {

int run(const std::string& cmd, const std::string& config_path, const std::string& out_override) {
  hoep::RunConfig c = hoep::load_config(config_path);
  const std::filesystem::path out = out_override.empty() ? std::filesystem::path(c.out_dir) : std::filesystem::path(out_override);
  if (!out_override.empty()) c.effective["output"]["dir"] = out_override;
  const hoep::CommandResult r = hoep::run_command(cmd, c, out, config_path);
  std::cout << r.report.dump(2) << "\n";
  if (r.exit_code != 0) {
    const std::string msg = r.report.contains("message") ? r.report["message"].get<std::string>()
                            : r.report.contains("error") ? r.report["error"].get<std::string>()
                                                         : "diagnostic check failed";
    std::cerr << "hoep " << cmd << ": " << msg << "\n";
  }
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Higher-order Euler-Poincare field tools"};
  app.set_version_flag("--version", hoep::kVersion);
  app.require_subcommand(1, 1);
  std::string config_path, out;
  for (const auto& name : hoep::command_names()) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " pipeline");
    sub->add_option("--config", config_path, "JSON configuration file")->required();
    sub->add_option("--out", out, "output directory, overrides output.dir");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    return run(cmd, config_path, out);
  } catch (const hoep::Error& e) {
    std::cerr << "hoep " << cmd << ": " << e.what() << "\n";
    return hoep::is_diagnostic(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "hoep " << cmd << ": " << e.what() << "\n";
    return 1;
  }
}
