#ifndef RIGIDKIT_INSTANCE_IO_HPP
#define RIGIDKIT_INSTANCE_IO_HPP

#include "rigidkit/hypergraph.hpp"

#include <stdexcept>
#include <string>

namespace rigidkit {

// Thrown for any malformed instance document. The message identifies the
// specific violation (schema, pin count, dimension, duplicate edge, ...).
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Document schema:
//   { "d": int, "vertices": [id...],
//     "hyperedges": [ { "vertices": [id...], "weight": int,
//                       "pins": [[float x (d-1)]...] } ] }
// "pins" and "weight" are optional (weight defaults to 1); pins, when present,
// must number exactly `weight` per hyperedge.
PinnedInstance parse_instance(const std::string& text);
std::string serialize_instance(const PinnedInstance& inst);

PinnedInstance load_instance(const std::string& path);
void save_instance(const PinnedInstance& inst, const std::string& path);

} // namespace rigidkit

#endif
