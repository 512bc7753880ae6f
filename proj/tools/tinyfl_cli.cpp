// tinyfl - encode/decode the TinyFL messages, reproduce the size benchmark
// tables and run the deterministic federated-learning round simulator.

#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tinyfl/benchmark.hpp"
#include "tinyfl/flsim.hpp"
#include "tinyfl/json_codec.hpp"
#include "tinyfl/messages.hpp"
#include "tinyfl/pb_codec.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitUnreadableInput = 3;
constexpr int kExitDecodeFailure = 4;
constexpr int kExitBenchMismatch = 5;
constexpr int kExitInsufficientClients = 6;

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::vector<uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<uint8_t> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("failed reading " + path);
    return data;
}

void write_file(const std::string& path, const void* data, size_t size) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) throw IoError("failed writing " + path);
}

bool has_suffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Text params: one decimal per line. Raw params (.f32/.bin): little-endian
// binary32 sequence.
std::vector<double> read_params_file(const std::string& path) {
    std::vector<double> values;
    if (has_suffix(path, ".f32") || has_suffix(path, ".bin")) {
        const std::vector<uint8_t> raw = read_file_bytes(path);
        if (raw.size() % 4 != 0) throw IoError(path + ": raw parameter file size is not a multiple of 4");
        for (size_t i = 0; i < raw.size(); i += 4) {
            uint32_t le = 0;
            for (size_t j = 0; j < 4; ++j) le |= static_cast<uint32_t>(raw[i + j]) << (8 * j);
            float f;
            std::memcpy(&f, &le, sizeof(f));
            values.push_back(f);
        }
        return values;
    }
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            size_t used = 0;
            const double v = std::stod(line, &used);
            while (used < line.size() && std::isspace(static_cast<unsigned char>(line[used]))) ++used;
            if (used != line.size()) throw std::invalid_argument("trailing characters");
            values.push_back(v);
        } catch (const std::exception&) {
            throw IoError(path + ":" + std::to_string(line_no) + ": not a number: '" + line + "'");
        }
    }
    if (in.bad()) throw IoError("failed reading " + path);
    return values;
}

struct EncodeOptions {
    std::string kind;
    std::string codec;
    std::string profile = "compact";
    bool profile_given = false;
    std::string out_path;
    std::string uuid;
    uint64_t round = 0;
    std::string params_path;
    bool continue_training = true;
    uint64_t dataset_size = 0;
    std::optional<double> train_loss;
    std::optional<double> val_loss;
};

tinyfl::cbor::Profile parse_profile(const std::string& name) {
    return name == "verbose" ? tinyfl::cbor::Profile::Verbose : tinyfl::cbor::Profile::Compact;
}

tinyfl::msg::ModelParams build_params(const std::vector<double>& values, tinyfl::cbor::Profile profile) {
    tinyfl::msg::ModelParams params;
    params.encoding = tinyfl::msg::choose_params_encoding(values, profile);
    params.values = values;
    return params;
}

int run_encode(const EncodeOptions& opt) {
    if (opt.codec != "cbor" && opt.profile_given) {
        throw UsageError("--profile applies to the cbor codec only");
    }
    const tinyfl::cbor::Profile profile = parse_profile(opt.profile);

    std::optional<tinyfl::msg::ModelMetadata> metadata;
    if (opt.train_loss.has_value() != opt.val_loss.has_value()) {
        throw UsageError("--train-loss and --val-loss must be given together");
    }
    if (opt.train_loss) metadata = tinyfl::msg::ModelMetadata{*opt.train_loss, *opt.val_loss};

    std::vector<uint8_t> encoded;
    std::string encoded_text;
    const bool text_codec = opt.codec == "json";

    if (opt.kind == "dataset") {
        const tinyfl::msg::LocalDataSetUpdate m{opt.dataset_size, metadata};
        if (opt.codec == "cbor") {
            encoded = tinyfl::msg::encode_dataset_update(m, profile);
        } else if (opt.codec == "pb") {
            encoded = tinyfl::alt::pb_encode(m);
        } else {
            encoded_text = tinyfl::alt::json_encode(m);
        }
    } else {
        if (opt.uuid.empty()) throw UsageError("--uuid is required for kind=" + opt.kind);
        tinyfl::msg::ModelIdentifier id;
        try {
            id = tinyfl::msg::ModelIdentifier::parse(opt.uuid);
        } catch (const std::invalid_argument& e) {
            throw UsageError(std::string("--uuid: ") + e.what());
        }
        std::vector<double> values;
        if (!opt.params_path.empty()) values = read_params_file(opt.params_path);
        const tinyfl::msg::ModelParams params = build_params(values, profile);

        if (opt.kind == "global") {
            const tinyfl::msg::GlobalModelUpdate m{id, opt.round, params, opt.continue_training};
            if (opt.codec == "cbor") {
                encoded = tinyfl::msg::encode_global(m, profile);
            } else if (opt.codec == "pb") {
                encoded = tinyfl::alt::pb_encode(m);
            } else {
                encoded_text = tinyfl::alt::json_encode(m);
            }
        } else {  // local
            if (!metadata) throw UsageError("--train-loss/--val-loss are required for kind=local");
            const tinyfl::msg::LocalModelUpdate m{id, opt.round, params, *metadata};
            if (opt.codec == "cbor") {
                encoded = tinyfl::msg::encode_local_model(m, profile);
            } else if (opt.codec == "pb") {
                encoded = tinyfl::alt::pb_encode(m);
            } else {
                encoded_text = tinyfl::alt::json_encode(m);
            }
        }
    }

    const size_t octets = text_codec ? encoded_text.size() : encoded.size();
    if (!opt.out_path.empty()) {
        if (text_codec) {
            write_file(opt.out_path, encoded_text.data(), encoded_text.size());
        } else {
            write_file(opt.out_path, encoded.data(), encoded.size());
        }
    }
    std::cout << octets << " " << tinyfl::bench::frame_count(octets) << "\n";
    return kExitOk;
}

// Message kind from the buffer shape when --kind was not given: the CBOR
// and JSON layouts are distinguished by arity, the Protobuf ones by the
// wire type of their required fields.
std::string infer_kind_cbor(std::span<const uint8_t> buf) {
    const auto [value, consumed] = tinyfl::cbor::decode_value(buf);
    (void)consumed;
    const auto* arr = value.get_if<tinyfl::cbor::Value::Array>();
    if (arr == nullptr) throw tinyfl::msg::SchemaError("message", "expected CBOR array");
    switch (arr->items.size()) {
        case 1:
        case 3: return "dataset";
        case 4: return "global";
        case 5: return "local";
        default: throw tinyfl::msg::SchemaError("message", "no TinyFL message has " +
                                                               std::to_string(arr->items.size()) + " elements");
    }
}

std::string infer_kind_json(const std::string& text) {
    const auto doc = nlohmann::json::parse(text);
    if (!doc.is_array()) throw tinyfl::msg::SchemaError("message", "expected positional JSON array");
    switch (doc.size()) {
        case 1:
        case 3: return "dataset";
        case 4: return "global";
        case 5: return "local";
        default: throw tinyfl::msg::SchemaError("message", "no TinyFL message has " + std::to_string(doc.size()) +
                                                               " elements");
    }
}

std::string infer_kind_pb(std::span<const uint8_t> buf) {
    try {
        (void)tinyfl::alt::pb_decode_global(buf);
        return "global";
    } catch (const tinyfl::alt::ParseError&) {
    }
    try {
        (void)tinyfl::alt::pb_decode_local_model(buf);
        return "local";
    } catch (const tinyfl::alt::ParseError&) {
    }
    (void)tinyfl::alt::pb_decode_dataset_update(buf);
    return "dataset";
}

int run_decode(const std::string& codec, std::string kind, const std::string& path) {
    const std::vector<uint8_t> raw = read_file_bytes(path);
    const std::string text(raw.begin(), raw.end());

    if (kind.empty()) {
        if (codec == "cbor") {
            kind = infer_kind_cbor(raw);
        } else if (codec == "json") {
            kind = infer_kind_json(text);
        } else {
            kind = infer_kind_pb(raw);
        }
    }

    std::string description;
    if (kind == "global") {
        description = codec == "cbor"   ? tinyfl::msg::describe(tinyfl::msg::decode_global(raw))
                      : codec == "json" ? tinyfl::msg::describe(tinyfl::alt::json_decode_global(text))
                                        : tinyfl::msg::describe(tinyfl::alt::pb_decode_global(raw));
    } else if (kind == "local") {
        description = codec == "cbor"   ? tinyfl::msg::describe(tinyfl::msg::decode_local_model(raw))
                      : codec == "json" ? tinyfl::msg::describe(tinyfl::alt::json_decode_local_model(text))
                                        : tinyfl::msg::describe(tinyfl::alt::pb_decode_local_model(raw));
    } else {
        description = codec == "cbor"   ? tinyfl::msg::describe(tinyfl::msg::decode_dataset_update(raw))
                      : codec == "json" ? tinyfl::msg::describe(tinyfl::alt::json_decode_dataset_update(text))
                                        : tinyfl::msg::describe(tinyfl::alt::pb_decode_dataset_update(raw));
    }
    std::cout << description;
    return kExitOk;
}

int run_bench(int table, const std::string& format, uint64_t seed) {
    const tinyfl::bench::SizeReport report =
        table == 1 ? tinyfl::bench::run_table1() : tinyfl::bench::run_table2(seed);
    std::cout << (format == "csv" ? report.to_csv() : report.to_text());
    if (!report.all_match()) {
        std::cerr << "size mismatches against the expected table:\n";
        for (const std::string& line : report.mismatches()) std::cerr << "  " << line << "\n";
        return kExitBenchMismatch;
    }
    return kExitOk;
}

int run_simulate(const tinyfl::sim::Config& cfg, const std::string& out_path, const std::string& trace_path) {
    std::ofstream trace_file;
    tinyfl::sim::MessageTrace trace;
    if (!trace_path.empty()) {
        trace_file.open(trace_path);
        if (!trace_file) throw IoError("cannot open " + trace_path + " for writing");
        trace = [&trace_file](std::string_view direction, std::span<const uint8_t> payload) {
            trace_file << direction << " " << tinyfl::cbor::to_hex(payload) << "\n";
        };
    }
    const tinyfl::sim::SimulationResult result = tinyfl::sim::run_simulation(cfg, trace);

    const std::string report = result.to_json().dump(2) + "\n";
    write_file(out_path, report.data(), report.size());

    bool any_completed = false;
    for (const auto& round : result.rounds) {
        uint64_t halted = 0;
        for (const auto& c : round.clients) halted += c.halted ? 1 : 0;
        std::cout << "round " << round.round << ": down " << round.bytes_down << "B/" << round.frames_down
                  << "f up " << round.bytes_up << "B/" << round.frames_up << "f selected " << round.selected.size()
                  << " halted " << halted;
        if (round.aborted) std::cout << " (aborted: insufficient clients)";
        std::cout << "\n";
        any_completed = any_completed || !round.aborted;
    }
    if (!any_completed) {
        std::cerr << "insufficient-clients: no round reached the required fraction\n";
        return kExitInsufficientClients;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"TinyFL message framework: CBOR/JSON/Protobuf codecs, size benchmarks and round simulator"};
    app.require_subcommand(1);

    // encode
    EncodeOptions enc;
    auto* encode_cmd = app.add_subcommand("encode", "Encode a message and print `<bytes> <frames>`");
    encode_cmd->add_option("--kind", enc.kind, "Message kind")
        ->required()
        ->check(CLI::IsMember({"global", "dataset", "local"}));
    encode_cmd->add_option("--codec", enc.codec, "Wire format")
        ->required()
        ->check(CLI::IsMember({"cbor", "json", "pb"}));
    encode_cmd->add_option("--profile", enc.profile, "CBOR encoding profile")
        ->check(CLI::IsMember({"compact", "verbose"}));
    encode_cmd->add_option("--out", enc.out_path, "Write the encoded message to this path");
    encode_cmd->add_option("--uuid", enc.uuid, "Model identifier, 32 hex digits (hyphens allowed)");
    encode_cmd->add_option("--round", enc.round, "Model round");
    encode_cmd->add_option("--params", enc.params_path, "Parameter file: text (one value per line) or .f32/.bin raw");
    encode_cmd->add_flag("--continue,!--no-continue", enc.continue_training, "continue_training flag (global)");
    encode_cmd->add_option("--size", enc.dataset_size, "Local dataset size (dataset)");
    encode_cmd->add_option("--train-loss", enc.train_loss, "Training loss");
    encode_cmd->add_option("--val-loss", enc.val_loss, "Validation loss");

    // decode
    std::string dec_codec;
    std::string dec_kind;
    std::string dec_file;
    auto* decode_cmd = app.add_subcommand("decode", "Decode a message file and print one field per line");
    decode_cmd->add_option("--codec", dec_codec, "Wire format")
        ->required()
        ->check(CLI::IsMember({"cbor", "json", "pb"}));
    decode_cmd->add_option("--kind", dec_kind, "Message kind (inferred when omitted)")
        ->check(CLI::IsMember({"global", "dataset", "local"}));
    decode_cmd->add_option("file", dec_file, "Encoded message file")->required();

    // bench
    int bench_table = 0;
    std::string bench_format = "text";
    uint64_t bench_seed = 1;
    auto* bench_cmd = app.add_subcommand("bench", "Reproduce the message-size tables");
    bench_cmd->add_option("--table", bench_table, "Which table to reproduce")->required()->check(CLI::Range(1, 2));
    bench_cmd->add_option("--format", bench_format, "Output format")->check(CLI::IsMember({"csv", "text"}));
    bench_cmd->add_option("--seed", bench_seed, "Seed for the large-model parameter values (table 2)");

    // simulate
    tinyfl::sim::Config sim_cfg;
    std::string sim_config_path;
    std::string sim_out = "report.json";
    std::string sim_profile;
    auto* sim_cmd = app.add_subcommand("simulate", "Run the deterministic FL round simulation");
    sim_cmd->add_option("--config", sim_config_path, "JSON config file (same schema as the report's config block)");
    auto* opt_clients = sim_cmd->add_option("--clients", sim_cfg.num_clients, "Number of clients");
    auto* opt_fraction = sim_cmd->add_option("--min-fraction", sim_cfg.min_fraction, "Fraction required to aggregate");
    auto* opt_rounds = sim_cmd->add_option("--rounds", sim_cfg.rounds, "Number of rounds");
    auto* opt_threshold = sim_cmd->add_option("--min-dataset-size", sim_cfg.min_dataset_size,
                                              "Samples a client must see before notifying");
    auto* opt_params = sim_cmd->add_option("--params", sim_cfg.param_count, "Model parameter count");
    auto* opt_seed = sim_cmd->add_option("--seed", sim_cfg.seed, "Simulation seed");
    auto* opt_profile = sim_cmd->add_option("--profile", sim_profile, "CBOR profile for all traffic")
                            ->check(CLI::IsMember({"compact", "verbose"}));
    auto* opt_epochs = sim_cmd->add_option("--epochs", sim_cfg.local_epochs, "Local training epochs per round");
    auto* opt_lr = sim_cmd->add_option("--lr", sim_cfg.learning_rate, "Learning rate");
    auto* opt_batch = sim_cmd->add_option("--batch-size", sim_cfg.batch_size, "Mini-batch size (0 = full batch)");
    auto* opt_multicast = sim_cmd->add_flag("--multicast", sim_cfg.multicast,
                                            "Count the round-start dissemination once instead of per client");
    auto* opt_drop = sim_cmd->add_option("--drop-rate", sim_cfg.drop_rate, "Notification loss probability");
    sim_cmd->add_option("--out", sim_out, "Report output path");
    std::string sim_trace;
    sim_cmd->add_option("--trace", sim_trace, "Write every message as `<direction> <hex>` to this file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (encode_cmd->parsed()) {
            enc.profile_given = encode_cmd->count("--profile") > 0;
            return run_encode(enc);
        }
        if (decode_cmd->parsed()) {
            return run_decode(dec_codec, dec_kind, dec_file);
        }
        if (bench_cmd->parsed()) {
            return run_bench(bench_table, bench_format, bench_seed);
        }
        if (sim_cmd->parsed()) {
            tinyfl::sim::Config cfg;
            if (!sim_config_path.empty()) {
                const std::vector<uint8_t> raw = read_file_bytes(sim_config_path);
                try {
                    cfg = tinyfl::sim::config_from_json(nlohmann::json::parse(std::string(raw.begin(), raw.end())));
                } catch (const nlohmann::json::exception& e) {
                    throw UsageError(sim_config_path + ": " + e.what());
                }
            }
            // Explicit flags override the config file.
            if (opt_clients->count()) cfg.num_clients = sim_cfg.num_clients;
            if (opt_fraction->count()) cfg.min_fraction = sim_cfg.min_fraction;
            if (opt_rounds->count()) cfg.rounds = sim_cfg.rounds;
            if (opt_threshold->count()) cfg.min_dataset_size = sim_cfg.min_dataset_size;
            if (opt_params->count()) cfg.param_count = sim_cfg.param_count;
            if (opt_seed->count()) cfg.seed = sim_cfg.seed;
            if (opt_profile->count()) cfg.profile = parse_profile(sim_profile);
            if (opt_epochs->count()) cfg.local_epochs = sim_cfg.local_epochs;
            if (opt_lr->count()) cfg.learning_rate = sim_cfg.learning_rate;
            if (opt_batch->count()) cfg.batch_size = sim_cfg.batch_size;
            if (opt_multicast->count()) cfg.multicast = sim_cfg.multicast;
            if (opt_drop->count()) cfg.drop_rate = sim_cfg.drop_rate;
            return run_simulate(cfg, sim_out, sim_trace);
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUnreadableInput;
    } catch (const tinyfl::cbor::DecodeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDecodeFailure;
    } catch (const tinyfl::msg::SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDecodeFailure;
    } catch (const tinyfl::alt::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDecodeFailure;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDecodeFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
