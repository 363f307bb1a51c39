#pragma once
#include <optional>
#include <string>

#include "spnet/bcp_eval.hpp"
#include "spnet/network.hpp"
#include "spnet/plan.hpp"
#include "spnet/tracking.hpp"

namespace spnet {

// One parsed network description file. [topology], [routing], [primitives]
// and [scaling] define the network; [workload], [policy] and [cost] are
// optional and feed the planning, control and experiment layers. Grammar in
// docs/spec_format.md.
struct SpecFileData {
  NetworkSpec spec;
  ScalingScheme scaling;
  std::optional<WorkloadInput> workload;
  std::optional<TrackingParams> policy;
  std::optional<CostParams> cost;
};

// Throws ParseError with origin:line on malformed input; the assembled
// network is also run through validate_spec / validate_bundle.
SpecFileData parse_spec_text(const std::string& text, const std::string& origin);
SpecFileData load_spec_file(const std::string& path);

// Inverse of the parser, numbers in shortest round-trip form. Parsing the
// output reproduces the data exactly.
std::string render_spec_file(const SpecFileData& data);

}  // namespace spnet
