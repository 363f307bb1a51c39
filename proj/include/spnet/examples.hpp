#pragma once
#include <string>
#include <vector>

#include "spnet/spec_file.hpp"

namespace spnet {

std::vector<std::string> example_names();

// Canonical demo networks: "single", "tandem", "n_network", "jobshop_fig3".
// Each bundle carries scaling, a default review policy, costs, and (where the
// workload map is not derivable) a verified workload pair. Throws
// UnknownExampleError for any other name.
SpecFileData load_example(const std::string& name);

}  // namespace spnet
