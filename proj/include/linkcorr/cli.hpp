#pragma once

#include <string>
#include <vector>

#include "linkcorr/gaussian.hpp"

namespace linkcorr {

/// Subcommands: synth, estimate, diagnose, forecast, ingest. Returns the process exit status.
int run_cli(int argc, char** argv);

/// "1-11", "3,5,7-9" → 0-based indices in the order given; numbers are 1-based links.
std::vector<Index> parse_link_list(const std::string& text, int n_links);

}  // namespace linkcorr
