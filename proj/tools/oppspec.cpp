#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "oppspec/cli.hpp"
#include "oppspec/errors.hpp"
#include "oppspec/io.hpp"
#include "oppspec/version.hpp"

namespace {

void emit_error_record(const char* kind, const std::string& message) {
  // machine-readable error record on stderr
  std::string escaped;
  for (char c : message) {
    if (c == '"' || c == '\\') escaped += '\\';
    escaped += c;
  }
  std::cerr << "{\"error\":\"" << kind << "\",\"message\":\"" << escaped
            << "\"}\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"opportunistic spectrum access toolkit"};
  app.set_version_flag("--version", std::string("oppspec ") + oppspec::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;

  for (const char* name : {"fit", "analyze", "optimize", "simulate", "sweep"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "run configuration (JSON)")
        ->required();
    sub->add_option("--out", out_dir, "output directory override");
    sub->add_option("--seed", seed, "seed override")
        ->each([&seed_set](const std::string&) { seed_set = true; });
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    oppspec::RunConfig cfg = oppspec::load_config(config_path);
    if (seed_set) cfg.seed = seed;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    return oppspec::run_command(command, cfg, std::cerr);
  } catch (const oppspec::ParseError& e) {
    emit_error_record("parse", e.line >= 0
                                   ? e.what() + std::string(" (line ") +
                                         std::to_string(e.line) + ")"
                                   : e.what());
    return 1;
  } catch (const oppspec::ValidationError& e) {
    emit_error_record("validation", e.what());
    return 1;
  } catch (const oppspec::FitError& e) {
    emit_error_record("fit", e.what());
    return 1;
  } catch (const oppspec::DomainError& e) {
    emit_error_record("domain", e.what());
    return 1;
  } catch (const std::exception& e) {
    emit_error_record("internal", e.what());
    return 1;
  }
}
