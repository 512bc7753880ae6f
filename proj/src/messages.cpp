#include "tinyfl/messages.hpp"

#include <bit>
#include <cmath>

#include "tinyfl/text_format.hpp"

namespace tinyfl::msg {

namespace {

constexpr uint64_t kTagUuid = 37;
constexpr uint64_t kTagFloat16LE = 84;
constexpr uint64_t kTagFloat32LE = 85;
constexpr uint64_t kTagFloat64LE = 86;

constexpr const char* kFieldIdentifier = "fl-model-identifier";
constexpr const char* kFieldRound = "fl-model-round";
constexpr const char* kFieldParams = "fl-model-params";
constexpr const char* kFieldContinue = "fl-continue-training";
constexpr const char* kFieldDataSetSize = "fl-local-dataset-size";
constexpr const char* kFieldMetadata = "fl-model-metadata";
constexpr const char* kFieldTrainLoss = "fl-local-model-train-loss";
constexpr const char* kFieldValLoss = "fl-local-model-val-loss";

uint64_t typed_array_tag(cbor::FloatWidth w) {
    switch (w) {
        case cbor::FloatWidth::Half: return kTagFloat16LE;
        case cbor::FloatWidth::Single: return kTagFloat32LE;
        default: return kTagFloat64LE;
    }
}

void append_le(std::vector<uint8_t>& out, uint64_t v, unsigned octets) {
    for (unsigned i = 0; i < octets; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

std::vector<uint8_t> pack_typed(std::span<const double> values, cbor::FloatWidth w) {
    std::vector<uint8_t> out;
    out.reserve(values.size() * cbor::float_width_octets(w));
    for (const double v : values) {
        switch (w) {
            case cbor::FloatWidth::Half: append_le(out, cbor::encode_half(v), 2); break;
            case cbor::FloatWidth::Single: append_le(out, std::bit_cast<uint32_t>(static_cast<float>(v)), 4); break;
            case cbor::FloatWidth::Double: append_le(out, std::bit_cast<uint64_t>(v), 8); break;
        }
    }
    return out;
}

cbor::Value params_to_cbor(const ModelParams& p) {
    if (const auto* typed = std::get_if<TypedArray>(&p.encoding)) {
        return cbor::Value::tagged(typed_array_tag(typed->width), cbor::Value::bytes(pack_typed(p.values, typed->width)));
    }
    std::vector<cbor::Value> items;
    items.reserve(p.values.size());
    for (const double v : p.values) items.push_back(cbor::Value::real(v, cbor::min_float_width(v)));
    return cbor::Value::array(std::move(items));
}

cbor::Value identifier_to_cbor(const ModelIdentifier& id) {
    return cbor::Value::tagged(kTagUuid, cbor::Value::bytes({id.uuid.begin(), id.uuid.end()}));
}

ModelIdentifier identifier_from_cbor(const cbor::Value& v) {
    const auto* tagged = v.get_if<cbor::Value::Tagged>();
    if (tagged == nullptr || tagged->tag != kTagUuid) {
        throw SchemaError(kFieldIdentifier, "expected #6.37(bstr)");
    }
    const auto* bytes = tagged->item->get_if<cbor::Value::Bytes>();
    if (bytes == nullptr) throw SchemaError(kFieldIdentifier, "tag 37 content must be a byte string");
    if (bytes->bytes.size() != 16) {
        throw SchemaError(kFieldIdentifier, "UUID must be 16 octets, got " + std::to_string(bytes->bytes.size()));
    }
    ModelIdentifier id;
    std::copy(bytes->bytes.begin(), bytes->bytes.end(), id.uuid.begin());
    return id;
}

std::vector<double> unpack_typed(const std::vector<uint8_t>& bytes, cbor::FloatWidth w) {
    const size_t n = cbor::float_width_octets(w);
    if (bytes.size() % n != 0) {
        throw SchemaError(kFieldParams, "typed array payload of " + std::to_string(bytes.size()) +
                                            " octets is not a multiple of " + std::to_string(n));
    }
    std::vector<double> values;
    values.reserve(bytes.size() / n);
    for (size_t i = 0; i < bytes.size(); i += n) {
        uint64_t le = 0;
        for (size_t j = 0; j < n; ++j) le |= static_cast<uint64_t>(bytes[i + j]) << (8 * j);
        switch (w) {
            case cbor::FloatWidth::Half: values.push_back(cbor::decode_half(static_cast<uint16_t>(le))); break;
            case cbor::FloatWidth::Single: values.push_back(std::bit_cast<float>(static_cast<uint32_t>(le))); break;
            case cbor::FloatWidth::Double: values.push_back(std::bit_cast<double>(le)); break;
        }
    }
    return values;
}

ModelParams params_from_cbor(const cbor::Value& v) {
    if (const auto* arr = v.get_if<cbor::Value::Array>()) {
        ModelParams p;
        p.encoding = Heterogeneous{};
        p.values.reserve(arr->items.size());
        for (const auto& item : arr->items) {
            const auto* f = item.get_if<cbor::Value::Float>();
            if (f == nullptr) throw SchemaError(kFieldParams, "heterogeneous parameter list must contain only floats");
            p.values.push_back(f->value);
        }
        return p;
    }
    if (const auto* tagged = v.get_if<cbor::Value::Tagged>()) {
        cbor::FloatWidth w;
        switch (tagged->tag) {
            case kTagFloat16LE: w = cbor::FloatWidth::Half; break;
            case kTagFloat32LE: w = cbor::FloatWidth::Single; break;
            case kTagFloat64LE: w = cbor::FloatWidth::Double; break;
            case 80:
            case 81:
            case 82:
                throw SchemaError(kFieldParams, "big-endian typed arrays are not accepted");
            default:
                throw SchemaError(kFieldParams, "unexpected tag " + std::to_string(tagged->tag));
        }
        const auto* bytes = tagged->item->get_if<cbor::Value::Bytes>();
        if (bytes == nullptr) throw SchemaError(kFieldParams, "typed array content must be a byte string");
        ModelParams p;
        p.encoding = TypedArray{w};
        p.values = unpack_typed(bytes->bytes, w);
        return p;
    }
    throw SchemaError(kFieldParams, "expected float array or tagged typed array");
}

uint64_t uint_from_cbor(const cbor::Value& v, const char* field) {
    const auto* u = v.get_if<cbor::Value::Uint>();
    if (u == nullptr) throw SchemaError(field, "expected unsigned integer");
    return u->value;
}

double float_from_cbor(const cbor::Value& v, const char* field) {
    const auto* f = v.get_if<cbor::Value::Float>();
    if (f == nullptr) throw SchemaError(field, "expected float");
    return f->value;
}

bool bool_from_cbor(const cbor::Value& v, const char* field) {
    const auto* b = v.get_if<cbor::Value::Bool>();
    if (b == nullptr) throw SchemaError(field, "expected bool");
    return b->value;
}

// Decodes the complete buffer as one CBOR array of exactly `arity` items;
// shortfalls are reported as the first missing field.
const cbor::Value decode_message_array(std::span<const uint8_t> buf, const char* message_name,
                                       std::span<const char* const> field_names, size_t arity) {
    auto [value, consumed] = cbor::decode_value(buf);
    if (consumed != buf.size()) throw SchemaError(message_name, "trailing octets after message");
    const auto* arr = value.get_if<cbor::Value::Array>();
    if (arr == nullptr) throw SchemaError(message_name, "expected CBOR array");
    if (arr->items.size() < arity) throw SchemaError(field_names[arr->items.size()], "missing");
    if (arr->items.size() > arity) {
        throw SchemaError(message_name, "unexpected element count " + std::to_string(arr->items.size()));
    }
    return value;
}

bool loss_equal(double a, double b) {
    if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
    return a == b;
}

std::string params_diagnostic(const ModelParams& p) {
    std::string out;
    if (const auto* typed = std::get_if<TypedArray>(&p.encoding)) {
        switch (typed->width) {
            case cbor::FloatWidth::Half: out += "ta-float16le "; break;
            case cbor::FloatWidth::Single: out += "ta-float32le "; break;
            case cbor::FloatWidth::Double: out += "ta-float64le "; break;
        }
    }
    out += '[';
    for (size_t i = 0; i < p.values.size(); ++i) {
        if (i > 0) out += ", ";
        out += format_double(p.values[i]);
    }
    out += ']';
    return out;
}

}  // namespace

std::string ModelIdentifier::to_string() const {
    const std::string hex = cbor::to_hex(uuid);
    return hex.substr(0, 8) + "-" + hex.substr(8, 4) + "-" + hex.substr(12, 4) + "-" + hex.substr(16, 4) + "-" +
           hex.substr(20, 12);
}

ModelIdentifier ModelIdentifier::parse(const std::string& text) {
    std::string hex;
    hex.reserve(32);
    for (const char c : text) {
        if (c == '-') continue;
        hex += c;
    }
    if (hex.size() != 32) throw std::invalid_argument("UUID must contain exactly 32 hex digits");
    const auto bytes = cbor::from_hex(hex);
    ModelIdentifier id;
    std::copy(bytes.begin(), bytes.end(), id.uuid.begin());
    return id;
}

ParamsEncoding choose_params_encoding(std::span<const double> values, cbor::Profile profile) {
    if (profile == cbor::Profile::Verbose) return Heterogeneous{};
    cbor::FloatWidth widest = cbor::FloatWidth::Half;
    size_t heterogeneous_payload = 0;
    for (const double v : values) {
        const cbor::FloatWidth w = cbor::min_float_width(v);
        if (static_cast<uint8_t>(w) > static_cast<uint8_t>(widest)) widest = w;
        heterogeneous_payload += 1 + cbor::float_width_octets(w);
    }
    // Typed array unless the per-value float array is strictly smaller,
    // which only happens for degenerate models (the 2-octet tag plus byte
    // string head outweigh the width saving below two parameters).
    const size_t packed = values.size() * cbor::float_width_octets(widest);
    const size_t typed_size = 2 + cbor::head_octets(packed) + packed;
    const size_t heterogeneous_size = cbor::head_octets(values.size()) + heterogeneous_payload;
    if (typed_size <= heterogeneous_size) return TypedArray{widest};
    return Heterogeneous{};
}

std::vector<uint8_t> encode_global(const GlobalModelUpdate& m, cbor::Profile profile) {
    std::vector<cbor::Value> items;
    items.push_back(identifier_to_cbor(m.model_identifier));
    items.push_back(cbor::Value::uint(m.model_round));
    items.push_back(params_to_cbor(m.model_params));
    items.push_back(cbor::Value::boolean(m.continue_training));
    return cbor::encode_value(cbor::Value::array(std::move(items)), profile);
}

std::vector<uint8_t> encode_dataset_update(const LocalDataSetUpdate& m, cbor::Profile profile) {
    std::vector<cbor::Value> items;
    items.push_back(cbor::Value::uint(m.local_dataset_size));
    if (m.metadata) {
        items.push_back(cbor::Value::real(m.metadata->train_loss));
        items.push_back(cbor::Value::real(m.metadata->val_loss));
    }
    return cbor::encode_value(cbor::Value::array(std::move(items)), profile);
}

std::vector<uint8_t> encode_local_model(const LocalModelUpdate& m, cbor::Profile profile) {
    std::vector<cbor::Value> items;
    items.push_back(identifier_to_cbor(m.model_identifier));
    items.push_back(cbor::Value::uint(m.model_round));
    items.push_back(params_to_cbor(m.model_params));
    items.push_back(cbor::Value::real(m.metadata.train_loss));
    items.push_back(cbor::Value::real(m.metadata.val_loss));
    return cbor::encode_value(cbor::Value::array(std::move(items)), profile);
}

GlobalModelUpdate decode_global(std::span<const uint8_t> buf) {
    static constexpr const char* kFields[] = {kFieldIdentifier, kFieldRound, kFieldParams, kFieldContinue};
    const cbor::Value value = decode_message_array(buf, "FL_Global_Model_Update", kFields, 4);
    const auto& items = value.get_if<cbor::Value::Array>()->items;
    GlobalModelUpdate m;
    m.model_identifier = identifier_from_cbor(items[0]);
    m.model_round = uint_from_cbor(items[1], kFieldRound);
    m.model_params = params_from_cbor(items[2]);
    m.continue_training = bool_from_cbor(items[3], kFieldContinue);
    return m;
}

LocalDataSetUpdate decode_dataset_update(std::span<const uint8_t> buf) {
    auto [value, consumed] = cbor::decode_value(buf);
    if (consumed != buf.size()) throw SchemaError("FL_Local_DataSet_Update", "trailing octets after message");
    const auto* arr = value.get_if<cbor::Value::Array>();
    if (arr == nullptr) throw SchemaError("FL_Local_DataSet_Update", "expected CBOR array");
    const auto& items = arr->items;
    if (items.empty()) throw SchemaError(kFieldDataSetSize, "missing");
    if (items.size() == 2) throw SchemaError(kFieldMetadata, "metadata group needs both losses");
    if (items.size() > 3) {
        throw SchemaError("FL_Local_DataSet_Update", "unexpected element count " + std::to_string(items.size()));
    }
    LocalDataSetUpdate m;
    m.local_dataset_size = uint_from_cbor(items[0], kFieldDataSetSize);
    if (items.size() == 3) {
        m.metadata = ModelMetadata{float_from_cbor(items[1], kFieldTrainLoss), float_from_cbor(items[2], kFieldValLoss)};
    }
    return m;
}

LocalModelUpdate decode_local_model(std::span<const uint8_t> buf) {
    static constexpr const char* kFields[] = {kFieldIdentifier, kFieldRound, kFieldParams, kFieldMetadata,
                                              kFieldValLoss};
    const cbor::Value value = decode_message_array(buf, "FL_Local_Model_Update", kFields, 5);
    const auto& items = value.get_if<cbor::Value::Array>()->items;
    LocalModelUpdate m;
    m.model_identifier = identifier_from_cbor(items[0]);
    m.model_round = uint_from_cbor(items[1], kFieldRound);
    m.model_params = params_from_cbor(items[2]);
    m.metadata.train_loss = float_from_cbor(items[3], kFieldTrainLoss);
    m.metadata.val_loss = float_from_cbor(items[4], kFieldValLoss);
    return m;
}

std::string describe(const GlobalModelUpdate& m) {
    std::string out;
    out += std::string(kFieldIdentifier) + ": " + m.model_identifier.to_string() + "\n";
    out += std::string(kFieldRound) + ": " + format_uint(m.model_round) + "\n";
    out += std::string(kFieldParams) + ": " + params_diagnostic(m.model_params) + "\n";
    out += std::string(kFieldContinue) + ": " + (m.continue_training ? "true" : "false") + "\n";
    return out;
}

std::string describe(const LocalDataSetUpdate& m) {
    std::string out;
    out += std::string(kFieldDataSetSize) + ": " + format_uint(m.local_dataset_size) + "\n";
    if (m.metadata) {
        out += std::string(kFieldTrainLoss) + ": " + format_double(m.metadata->train_loss) + "\n";
        out += std::string(kFieldValLoss) + ": " + format_double(m.metadata->val_loss) + "\n";
    }
    return out;
}

std::string describe(const LocalModelUpdate& m) {
    std::string out;
    out += std::string(kFieldIdentifier) + ": " + m.model_identifier.to_string() + "\n";
    out += std::string(kFieldRound) + ": " + format_uint(m.model_round) + "\n";
    out += std::string(kFieldParams) + ": " + params_diagnostic(m.model_params) + "\n";
    out += std::string(kFieldTrainLoss) + ": " + format_double(m.metadata.train_loss) + "\n";
    out += std::string(kFieldValLoss) + ": " + format_double(m.metadata.val_loss) + "\n";
    return out;
}

// Parameter lists compare by value: the wire encoding is a representation
// choice and differs across codecs.
bool params_equal(const ModelParams& a, const ModelParams& b) {
    if (a.values.size() != b.values.size()) return false;
    for (size_t i = 0; i < a.values.size(); ++i) {
        if (!loss_equal(a.values[i], b.values[i])) return false;
    }
    return true;
}

bool operator==(const GlobalModelUpdate& a, const GlobalModelUpdate& b) {
    return a.model_identifier == b.model_identifier && a.model_round == b.model_round &&
           a.continue_training == b.continue_training && params_equal(a.model_params, b.model_params);
}

bool operator==(const LocalDataSetUpdate& a, const LocalDataSetUpdate& b) {
    if (a.local_dataset_size != b.local_dataset_size || a.metadata.has_value() != b.metadata.has_value()) return false;
    if (!a.metadata) return true;
    return loss_equal(a.metadata->train_loss, b.metadata->train_loss) &&
           loss_equal(a.metadata->val_loss, b.metadata->val_loss);
}

bool operator==(const LocalModelUpdate& a, const LocalModelUpdate& b) {
    return a.model_identifier == b.model_identifier && a.model_round == b.model_round &&
           params_equal(a.model_params, b.model_params) && loss_equal(a.metadata.train_loss, b.metadata.train_loss) &&
           loss_equal(a.metadata.val_loss, b.metadata.val_loss);
}

}  // namespace tinyfl::msg
