#ifndef TINYFL_MESSAGES_HPP
#define TINYFL_MESSAGES_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tinyfl/cbor.hpp"

// The three TinyFL messages and their CBOR mapping.
//
//   FL_Global_Model_Update   = [ fl-model-identifier, fl-model-round,
//                                fl-model-params, fl-continue-training ]
//   FL_Local_DataSet_Update  = [ fl-local-dataset-size, ? fl-model-metadata ]
//   FL_Local_Model_Update    = [ fl-model-identifier, fl-model-round,
//                                fl-model-params, fl-model-metadata ]
//
// fl-model-metadata is a CDDL group (train loss, validation loss): its two
// floats splice into the enclosing array instead of nesting.
//
// Model parameters are either a plain array of floats or an RFC 8746 typed
// array: a tagged byte string of little-endian values, tag 84/85/86 for
// binary16/32/64. Encoders are profile-deterministic; decoders accept any
// declared variant.

namespace tinyfl::msg {

class SchemaError : public std::runtime_error {
public:
    SchemaError(std::string field, const std::string& detail)
        : std::runtime_error("schema-mismatch: " + field + ": " + detail), field_(std::move(field)) {}

    const std::string& field() const { return field_; }

private:
    std::string field_;
};

struct ModelIdentifier {
    std::array<uint8_t, 16> uuid{};

    // Lowercase hyphenated form (8-4-4-4-12).
    std::string to_string() const;
    // Accepts 32 hex digits, with or without the canonical hyphens.
    static ModelIdentifier parse(const std::string& text);

    bool operator==(const ModelIdentifier&) const = default;
};

struct Heterogeneous {
    bool operator==(const Heterogeneous&) const = default;
};
struct TypedArray {
    cbor::FloatWidth width;
    bool operator==(const TypedArray&) const = default;
};
using ParamsEncoding = std::variant<Heterogeneous, TypedArray>;

struct ModelParams {
    std::vector<double> values;
    ParamsEncoding encoding = TypedArray{cbor::FloatWidth::Half};
};

struct ModelMetadata {
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct GlobalModelUpdate {
    ModelIdentifier model_identifier;
    uint64_t model_round = 0;
    ModelParams model_params;
    bool continue_training = true;
};

struct LocalDataSetUpdate {
    uint64_t local_dataset_size = 0;
    std::optional<ModelMetadata> metadata;
};

struct LocalModelUpdate {
    ModelIdentifier model_identifier;
    uint64_t model_round = 0;
    ModelParams model_params;
    ModelMetadata metadata;
};

// Wire representation for a parameter list under a profile. Compact picks
// the typed array of the widest minimal lossless width across the values,
// falling back to the heterogeneous array for the degenerate models where
// that is strictly smaller (empty and most single-parameter lists, where
// the tag and byte string heads outweigh the width saving). Verbose always
// yields the heterogeneous array, whose elements then encode as doubles.
ParamsEncoding choose_params_encoding(std::span<const double> values, cbor::Profile profile);

std::vector<uint8_t> encode_global(const GlobalModelUpdate& m, cbor::Profile profile);
std::vector<uint8_t> encode_dataset_update(const LocalDataSetUpdate& m, cbor::Profile profile);
std::vector<uint8_t> encode_local_model(const LocalModelUpdate& m, cbor::Profile profile);

// Each decoder requires a single complete CBOR item spanning the whole
// buffer and reports violations as SchemaError carrying the CDDL name of
// the offending field. Truncated or non-CBOR input surfaces the underlying
// cbor::DecodeError.
GlobalModelUpdate decode_global(std::span<const uint8_t> buf);
LocalDataSetUpdate decode_dataset_update(std::span<const uint8_t> buf);
LocalModelUpdate decode_local_model(std::span<const uint8_t> buf);

// Field-per-line diagnostic form, `<cddl-name>: <value>`.
std::string describe(const GlobalModelUpdate& m);
std::string describe(const LocalDataSetUpdate& m);
std::string describe(const LocalModelUpdate& m);

bool params_equal(const ModelParams& a, const ModelParams& b);
bool operator==(const GlobalModelUpdate& a, const GlobalModelUpdate& b);
bool operator==(const LocalDataSetUpdate& a, const LocalDataSetUpdate& b);
bool operator==(const LocalModelUpdate& a, const LocalModelUpdate& b);

}  // namespace tinyfl::msg

#endif
