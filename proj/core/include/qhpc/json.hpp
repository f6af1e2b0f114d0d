#pragma once

#include <json.hpp>

namespace qhpc {

// Ordered JSON everywhere: object key order is insertion order, so emitted
// documents (traces, metrics, reports) are byte-stable across runs.
using Json = nlohmann::ordered_json;

}  // namespace qhpc
