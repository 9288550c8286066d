#pragma once

#include <iosfwd>
#include <string>

#include "oppspec/io.hpp"

namespace oppspec {

/// One of: fit, analyze, optimize, simulate, sweep. Reports are written under
/// cfg.output_dir with a reproducible header (version, command, seed, config
/// echo). Returns 0 when every requested output was written; module errors
/// propagate as exceptions for the frontend to render.
int run_command(const std::string& command, const RunConfig& cfg,
                std::ostream& diag);

}  // namespace oppspec
