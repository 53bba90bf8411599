#pragma once

#include "fleetrel/trace_io.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace fleetrel {

/// Names accepted by run_command, in CLI order.
const std::vector<std::string>& command_names();

/// Commands whose output depends on a random seed.
bool command_is_stochastic(std::string_view name);

const char* library_version();

/**
 * Runs one pipeline step. `params` carries the command's inputs and options
 * ("input", "seed", "format", "svg", ...); artifacts go to out_dir, which is
 * created if needed. Returns a summary document.
 *
 * A manifest.json describing the run (inputs, seed, parameters, library
 * version, built-in model coefficients and the outcome) is written to out_dir
 * whether or not the command succeeds. Errors propagate after that.
 */
Json run_command(std::string_view name, const Json& params, const std::string& out_dir);

} // namespace fleetrel
