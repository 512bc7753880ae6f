#include "tinyfl/json_codec.hpp"

#include <nlohmann/json.hpp>

#include "tinyfl/text_format.hpp"

namespace tinyfl::alt {

namespace {

using nlohmann::json;

void append_params(std::string& out, const msg::ModelParams& params) {
    out += '[';
    for (size_t i = 0; i < params.values.size(); ++i) {
        if (i > 0) out += ',';
        out += format_double(params.values[i]);
    }
    out += ']';
}

json parse(const std::string& text) {
    return json::parse(text);  // throws json::parse_error with byte position
}

const json& element(const json& doc, size_t index, const char* field) {
    if (!doc.is_array()) throw msg::SchemaError(field, "expected positional JSON array");
    if (index >= doc.size()) throw msg::SchemaError(field, "missing");
    return doc[index];
}

msg::ModelIdentifier identifier_at(const json& doc, size_t index) {
    const json& item = element(doc, index, "fl-model-identifier");
    if (!item.is_string()) throw msg::SchemaError("fl-model-identifier", "expected UUID string");
    try {
        return msg::ModelIdentifier::parse(item.get<std::string>());
    } catch (const std::invalid_argument& e) {
        throw msg::SchemaError("fl-model-identifier", e.what());
    }
}

uint64_t uint_at(const json& doc, size_t index, const char* field) {
    const json& item = element(doc, index, field);
    if (!item.is_number_unsigned()) throw msg::SchemaError(field, "expected non-negative integer");
    return item.get<uint64_t>();
}

double number_at(const json& doc, size_t index, const char* field) {
    const json& item = element(doc, index, field);
    if (!item.is_number()) throw msg::SchemaError(field, "expected number");
    return item.get<double>();
}

msg::ModelParams params_at(const json& doc, size_t index) {
    const json& item = element(doc, index, "fl-model-params");
    if (!item.is_array()) throw msg::SchemaError("fl-model-params", "expected array of numbers");
    msg::ModelParams params;
    params.encoding = msg::Heterogeneous{};
    params.values.reserve(item.size());
    for (const json& v : item) {
        if (!v.is_number()) throw msg::SchemaError("fl-model-params", "expected array of numbers");
        params.values.push_back(v.get<double>());
    }
    return params;
}

void check_arity(const json& doc, size_t arity, const char* message_name) {
    if (!doc.is_array()) throw msg::SchemaError(message_name, "expected positional JSON array");
    if (doc.size() > arity) {
        throw msg::SchemaError(message_name, "unexpected element count " + std::to_string(doc.size()));
    }
}

}  // namespace

std::string json_encode(const msg::GlobalModelUpdate& m) {
    std::string out;
    out += "[\"";
    out += m.model_identifier.to_string();
    out += "\",";
    out += format_uint(m.model_round);
    out += ',';
    append_params(out, m.model_params);
    out += ',';
    out += m.continue_training ? "true" : "false";
    out += ']';
    return out;
}

std::string json_encode(const msg::LocalDataSetUpdate& m) {
    std::string out;
    out += '[';
    out += format_uint(m.local_dataset_size);
    if (m.metadata) {
        out += ',';
        out += format_double(m.metadata->train_loss);
        out += ',';
        out += format_double(m.metadata->val_loss);
    }
    out += ']';
    return out;
}

std::string json_encode(const msg::LocalModelUpdate& m) {
    std::string out;
    out += "[\"";
    out += m.model_identifier.to_string();
    out += "\",";
    out += format_uint(m.model_round);
    out += ',';
    append_params(out, m.model_params);
    out += ',';
    out += format_double(m.metadata.train_loss);
    out += ',';
    out += format_double(m.metadata.val_loss);
    out += ']';
    return out;
}

msg::GlobalModelUpdate json_decode_global(const std::string& text) {
    const json doc = parse(text);
    check_arity(doc, 4, "FL_Global_Model_Update");
    msg::GlobalModelUpdate m;
    m.model_identifier = identifier_at(doc, 0);
    m.model_round = uint_at(doc, 1, "fl-model-round");
    m.model_params = params_at(doc, 2);
    const json& flag = element(doc, 3, "fl-continue-training");
    if (!flag.is_boolean()) throw msg::SchemaError("fl-continue-training", "expected bool");
    m.continue_training = flag.get<bool>();
    return m;
}

msg::LocalDataSetUpdate json_decode_dataset_update(const std::string& text) {
    const json doc = parse(text);
    check_arity(doc, 3, "FL_Local_DataSet_Update");
    if (doc.size() == 2) throw msg::SchemaError("fl-model-metadata", "metadata group needs both losses");
    msg::LocalDataSetUpdate m;
    m.local_dataset_size = uint_at(doc, 0, "fl-local-dataset-size");
    if (doc.size() == 3) {
        m.metadata = msg::ModelMetadata{number_at(doc, 1, "fl-local-model-train-loss"),
                                        number_at(doc, 2, "fl-local-model-val-loss")};
    }
    return m;
}

msg::LocalModelUpdate json_decode_local_model(const std::string& text) {
    const json doc = parse(text);
    check_arity(doc, 5, "FL_Local_Model_Update");
    if (doc.size() == 3) throw msg::SchemaError("fl-model-metadata", "missing");
    msg::LocalModelUpdate m;
    m.model_identifier = identifier_at(doc, 0);
    m.model_round = uint_at(doc, 1, "fl-model-round");
    m.model_params = params_at(doc, 2);
    m.metadata.train_loss = number_at(doc, 3, "fl-local-model-train-loss");
    m.metadata.val_loss = number_at(doc, 4, "fl-local-model-val-loss");
    return m;
}

}  // namespace tinyfl::alt
