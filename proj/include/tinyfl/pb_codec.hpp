#ifndef TINYFL_PB_CODEC_HPP
#define TINYFL_PB_CODEC_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "tinyfl/messages.hpp"

// Hand-rolled Protobuf wire format for the three messages; no schema
// compiler involved, the schema is fixed (see docs/messages.proto):
//
//   GlobalModelUpdate   1: model_identifier (bytes)   2: model_round (varint)
//                       3: model_params (packed float) 4: continue_training (varint)
//   ModelMetadata       1: train_loss (double)        2: val_loss (double)
//   LocalDataSetUpdate  1: local_dataset_size (varint) 2: metadata (message)
//   LocalModelUpdate    1: model_identifier  2: model_round
//                       3: model_params (packed float) 4: metadata (message)
//
// Fields are emitted in ascending field-number order. Scalar fields are
// written even when default-valued (round 0, size 0, flag false) so sizes
// stay value-independent apart from varint widths; an empty parameter list
// omits the packed field, matching stock protobuf serializers. Parameters
// are quantized to binary32 on the wire, losses stay binary64.

namespace tinyfl::alt {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& detail, size_t position)
        : std::runtime_error("parse-error at offset " + std::to_string(position) + ": " + detail),
          position_(position) {}

    size_t position() const { return position_; }

private:
    size_t position_;
};

std::vector<uint8_t> pb_encode(const msg::GlobalModelUpdate& m);
std::vector<uint8_t> pb_encode(const msg::LocalDataSetUpdate& m);
std::vector<uint8_t> pb_encode(const msg::LocalModelUpdate& m);

// Unknown fields are skipped by wire type; a known field with the wrong
// wire type, a truncated buffer, or a missing required field is a
// ParseError. Decoded parameters carry TypedArray(Single) encoding since
// the wire held binary32 values.
msg::GlobalModelUpdate pb_decode_global(std::span<const uint8_t> buf);
msg::LocalDataSetUpdate pb_decode_dataset_update(std::span<const uint8_t> buf);
msg::LocalModelUpdate pb_decode_local_model(std::span<const uint8_t> buf);

}  // namespace tinyfl::alt

#endif
