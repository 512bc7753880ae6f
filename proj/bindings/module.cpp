// Python bindings for the TinyFL message framework: the three messages,
// the CBOR/JSON/Protobuf codecs, the size benchmark and the round
// simulator.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "tinyfl/benchmark.hpp"
#include "tinyfl/flsim.hpp"
#include "tinyfl/json_codec.hpp"
#include "tinyfl/messages.hpp"
#include "tinyfl/pb_codec.hpp"
#include "tinyfl/text_format.hpp"

namespace py = pybind11;

using namespace tinyfl;

namespace {

cbor::Profile profile_from_name(const std::string& name) {
    if (name == "compact") return cbor::Profile::Compact;
    if (name == "verbose") return cbor::Profile::Verbose;
    throw py::value_error("profile must be 'compact' or 'verbose'");
}

msg::ModelIdentifier identifier_from_py(const py::object& uuid) {
    return msg::ModelIdentifier::parse(uuid.cast<std::string>());
}

msg::ModelParams params_from_values(const std::vector<double>& values, cbor::Profile profile) {
    msg::ModelParams p;
    p.encoding = msg::choose_params_encoding(values, profile);
    p.values = values;
    return p;
}

py::bytes to_py_bytes(const std::vector<uint8_t>& data) {
    return py::bytes(reinterpret_cast<const char*>(data.data()), data.size());
}

std::vector<uint8_t> from_py_bytes(const py::bytes& data) {
    const auto view = static_cast<std::string_view>(data);
    return {view.begin(), view.end()};
}

py::object params_width_name(const msg::ModelParams& p) {
    if (const auto* typed = std::get_if<msg::TypedArray>(&p.encoding)) {
        switch (typed->width) {
            case cbor::FloatWidth::Half: return py::str("f16");
            case cbor::FloatWidth::Single: return py::str("f32");
            case cbor::FloatWidth::Double: return py::str("f64");
        }
    }
    return py::none();
}

py::list report_rows(const bench::SizeReport& report) {
    py::list rows;
    for (const auto& row : report.rows) {
        py::dict d;
        d["message"] = row.message;
        d["model_size"] = row.model_size ? py::cast(*row.model_size) : py::none();
        d["codec"] = row.codec;
        d["profile"] = row.profile;
        d["bytes"] = row.octets;
        d["frames"] = row.frames;
        d["expected"] = row.expected ? py::cast(*row.expected) : py::none();
        d["tolerance"] = row.tolerance;
        rows.append(d);
    }
    return rows;
}

}  // namespace

PYBIND11_MODULE(_tinyfl, m) {
    m.doc() = "CBOR-serialized federated-learning messages, size benchmarks and round simulator";

    py::class_<msg::ModelMetadata>(m, "ModelMetadata")
        .def(py::init<double, double>(), py::arg("train_loss"), py::arg("val_loss"))
        .def_readwrite("train_loss", &msg::ModelMetadata::train_loss)
        .def_readwrite("val_loss", &msg::ModelMetadata::val_loss)
        .def("__repr__", [](const msg::ModelMetadata& meta) {
            return "ModelMetadata(train_loss=" + format_double(meta.train_loss) +
                   ", val_loss=" + format_double(meta.val_loss) + ")";
        });

    py::class_<msg::GlobalModelUpdate>(m, "GlobalModelUpdate")
        .def(py::init([](const py::object& uuid, uint64_t round, const std::vector<double>& params,
                         bool continue_training) {
                 return msg::GlobalModelUpdate{identifier_from_py(uuid), round,
                                               params_from_values(params, cbor::Profile::Compact), continue_training};
             }),
             py::arg("uuid"), py::arg("round"), py::arg("params"), py::arg("continue_training") = true)
        .def_property_readonly("uuid",
                               [](const msg::GlobalModelUpdate& m) { return m.model_identifier.to_string(); })
        .def_readwrite("round", &msg::GlobalModelUpdate::model_round)
        .def_property_readonly("params", [](const msg::GlobalModelUpdate& m) { return m.model_params.values; })
        .def_property_readonly("params_width",
                               [](const msg::GlobalModelUpdate& m) { return params_width_name(m.model_params); })
        .def_readwrite("continue_training", &msg::GlobalModelUpdate::continue_training)
        .def("__eq__", [](const msg::GlobalModelUpdate& a, const msg::GlobalModelUpdate& b) { return a == b; })
        .def("describe", [](const msg::GlobalModelUpdate& m) { return msg::describe(m); });

    py::class_<msg::LocalDataSetUpdate>(m, "LocalDataSetUpdate")
        .def(py::init([](uint64_t size, const py::object& metadata) {
                 msg::LocalDataSetUpdate m;
                 m.local_dataset_size = size;
                 if (!metadata.is_none()) m.metadata = metadata.cast<msg::ModelMetadata>();
                 return m;
             }),
             py::arg("size"), py::arg("metadata") = py::none())
        .def_readwrite("size", &msg::LocalDataSetUpdate::local_dataset_size)
        .def_property_readonly("metadata",
                               [](const msg::LocalDataSetUpdate& m) -> py::object {
                                   return m.metadata ? py::cast(*m.metadata) : py::none();
                               })
        .def("__eq__", [](const msg::LocalDataSetUpdate& a, const msg::LocalDataSetUpdate& b) { return a == b; })
        .def("describe", [](const msg::LocalDataSetUpdate& m) { return msg::describe(m); });

    py::class_<msg::LocalModelUpdate>(m, "LocalModelUpdate")
        .def(py::init([](const py::object& uuid, uint64_t round, const std::vector<double>& params,
                         const msg::ModelMetadata& metadata) {
                 return msg::LocalModelUpdate{identifier_from_py(uuid), round,
                                              params_from_values(params, cbor::Profile::Compact), metadata};
             }),
             py::arg("uuid"), py::arg("round"), py::arg("params"), py::arg("metadata"))
        .def_property_readonly("uuid", [](const msg::LocalModelUpdate& m) { return m.model_identifier.to_string(); })
        .def_readwrite("round", &msg::LocalModelUpdate::model_round)
        .def_property_readonly("params", [](const msg::LocalModelUpdate& m) { return m.model_params.values; })
        .def_property_readonly("params_width",
                               [](const msg::LocalModelUpdate& m) { return params_width_name(m.model_params); })
        .def_readwrite("metadata", &msg::LocalModelUpdate::metadata)
        .def("__eq__", [](const msg::LocalModelUpdate& a, const msg::LocalModelUpdate& b) { return a == b; })
        .def("describe", [](const msg::LocalModelUpdate& m) { return msg::describe(m); });

    // CBOR message codec. The profile resolves parameter/float widths the
    // same way the C++ encoders do.
    m.def(
        "encode_global",
        [](const msg::GlobalModelUpdate& message, const std::string& profile) {
            msg::GlobalModelUpdate wire = message;
            const cbor::Profile p = profile_from_name(profile);
            wire.model_params.encoding = msg::choose_params_encoding(wire.model_params.values, p);
            return to_py_bytes(msg::encode_global(wire, p));
        },
        py::arg("message"), py::arg("profile") = "compact");
    m.def(
        "encode_dataset_update",
        [](const msg::LocalDataSetUpdate& message, const std::string& profile) {
            return to_py_bytes(msg::encode_dataset_update(message, profile_from_name(profile)));
        },
        py::arg("message"), py::arg("profile") = "compact");
    m.def(
        "encode_local_model",
        [](const msg::LocalModelUpdate& message, const std::string& profile) {
            msg::LocalModelUpdate wire = message;
            const cbor::Profile p = profile_from_name(profile);
            wire.model_params.encoding = msg::choose_params_encoding(wire.model_params.values, p);
            return to_py_bytes(msg::encode_local_model(wire, p));
        },
        py::arg("message"), py::arg("profile") = "compact");
    m.def("decode_global", [](const py::bytes& buf) { return msg::decode_global(from_py_bytes(buf)); });
    m.def("decode_dataset_update",
          [](const py::bytes& buf) { return msg::decode_dataset_update(from_py_bytes(buf)); });
    m.def("decode_local_model", [](const py::bytes& buf) { return msg::decode_local_model(from_py_bytes(buf)); });

    // JSON / Protobuf parity codecs.
    m.def("json_encode_global", [](const msg::GlobalModelUpdate& m_) { return alt::json_encode(m_); });
    m.def("json_encode_dataset_update", [](const msg::LocalDataSetUpdate& m_) { return alt::json_encode(m_); });
    m.def("json_encode_local_model", [](const msg::LocalModelUpdate& m_) { return alt::json_encode(m_); });
    m.def("json_decode_global", &alt::json_decode_global);
    m.def("json_decode_dataset_update", &alt::json_decode_dataset_update);
    m.def("json_decode_local_model", &alt::json_decode_local_model);
    m.def("pb_encode_global", [](const msg::GlobalModelUpdate& m_) { return to_py_bytes(alt::pb_encode(m_)); });
    m.def("pb_encode_dataset_update",
          [](const msg::LocalDataSetUpdate& m_) { return to_py_bytes(alt::pb_encode(m_)); });
    m.def("pb_encode_local_model", [](const msg::LocalModelUpdate& m_) { return to_py_bytes(alt::pb_encode(m_)); });
    m.def("pb_decode_global", [](const py::bytes& buf) { return alt::pb_decode_global(from_py_bytes(buf)); });
    m.def("pb_decode_dataset_update",
          [](const py::bytes& buf) { return alt::pb_decode_dataset_update(from_py_bytes(buf)); });
    m.def("pb_decode_local_model", [](const py::bytes& buf) { return alt::pb_decode_local_model(from_py_bytes(buf)); });

    // CBOR primitives.
    m.def("min_float_width", [](double x) {
        switch (cbor::min_float_width(x)) {
            case cbor::FloatWidth::Half: return "f16";
            case cbor::FloatWidth::Single: return "f32";
            default: return "f64";
        }
    });

    // Benchmark and frame accounting.
    m.def("frame_count", &bench::frame_count, py::arg("payload_octets"),
          py::arg("frame_budget") = bench::kDefaultFrameBudget, py::arg("block_size") = bench::kDefaultBlockSize);
    m.def("run_table1", [] { return report_rows(bench::run_table1()); });
    m.def("run_table2", [](uint64_t seed) { return report_rows(bench::run_table2(seed)); }, py::arg("seed") = 1);
    m.def("lenet_standin_values", &bench::lenet_standin_values, py::arg("seed") = 1);

    // Simulation: config in, full report out, both as JSON strings.
    m.def(
        "run_simulation_json",
        [](const std::string& config_json) {
            const sim::Config cfg = sim::config_from_json(nlohmann::json::parse(config_json));
            return sim::run_simulation(cfg).to_json().dump();
        },
        py::arg("config_json") = "{}");

    py::register_exception<cbor::DecodeError>(m, "DecodeError");
    py::register_exception<msg::SchemaError>(m, "SchemaError");
    py::register_exception<alt::ParseError>(m, "ParseError");
}
