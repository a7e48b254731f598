// JSON serialization of protocol reports, feasibility reports and oracle
// tables. Key order is fixed and doubles round-trip exactly, so identical
// runs produce byte-identical files.

#pragma once

#include <json.hpp>

#include "spinport/heisenberg.hpp"
#include "spinport/protocols.hpp"

namespace spinport {

nlohmann::ordered_json to_json(const protocols::ProtocolReport& report);
nlohmann::ordered_json to_json(const heisenberg::PropagationTable<double>& table,
                               const std::vector<std::string>& mode_labels,
                               const std::vector<std::string>& outcome_names);

}  // namespace spinport
