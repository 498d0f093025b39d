#pragma once

#include "sisdmdp/model.hpp"

#include <string>
#include <string_view>

namespace sisdmdp {

/// Model document (JSON, indices 0-based):
///
///     {"format": "sisdmdp-model", "version": 1,
///      "header": {"n_states": N, "n_actions": A, "K": K,
///                 "partition_boundaries": [0, ..., N]},
///      "transitions": [ [[source, target, probability], ...],   // one list per action
///                       ... ],
///      "rewards": [[r(0,0), ..., r(0,A-1)], ...]}               // N rows
///
/// Probabilities and rewards are written with 17 significant digits, which
/// round-trips every binary64 value exactly. Output is byte-deterministic.
std::string serialize_model(const MdpModel& model);

/// Parses and re-validates a model document. Throws ParseError naming the
/// missing or incomplete section, or ValidationError on invariant violations.
MdpModel parse_model(std::string_view text);

/// Formats a double with 17 significant digits ("%.17g").
std::string format_double(double v);

} // namespace sisdmdp
