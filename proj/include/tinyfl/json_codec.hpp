#ifndef TINYFL_JSON_CODEC_HPP
#define TINYFL_JSON_CODEC_HPP

#include <string>

#include "tinyfl/messages.hpp"

// Minified JSON mirror of the CBOR message layouts, for size comparison.
// Messages are positional arrays, not keyed objects:
//
//   global   ["<uuid>",round,[p,...],true|false]
//   dataset  [size] or [size,train,val]
//   local    ["<uuid>",round,[p,...],train,val]
//
// No whitespace. Floats render as the shortest decimal round-tripping the
// binary64 value, ".0" appended when integral, so 1.0 costs exactly three
// characters. The UUID is the lowercase hyphenated 36-character text form.
// All floats must be finite.

namespace tinyfl::alt {

std::string json_encode(const msg::GlobalModelUpdate& m);
std::string json_encode(const msg::LocalDataSetUpdate& m);
std::string json_encode(const msg::LocalModelUpdate& m);

// Strict positional parsers. Structural violations raise msg::SchemaError
// with the CDDL field name; malformed JSON raises a parse error carrying
// the input position. Decoded parameters are binary64 and marked
// Heterogeneous.
msg::GlobalModelUpdate json_decode_global(const std::string& text);
msg::LocalDataSetUpdate json_decode_dataset_update(const std::string& text);
msg::LocalModelUpdate json_decode_local_model(const std::string& text);

}  // namespace tinyfl::alt

#endif
