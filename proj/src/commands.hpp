#pragma once

#include <string>

#include "json_io.hpp"

namespace rainfall {

/// Runs one pipeline command ("fit", "simulate", "diagnose", "price",
/// "calibrate", "bootstrap") on a JSON configuration. Output files go to the
/// directory named by the "out" field when present; the returned JSON
/// summarises the run. Errors propagate as the library exception types.
Json run_command(const std::string& name, const Json& config);

}  // namespace rainfall
