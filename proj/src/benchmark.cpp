#include "tinyfl/benchmark.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "tinyfl/json_codec.hpp"
#include "tinyfl/pb_codec.hpp"
#include "tinyfl/text_format.hpp"

namespace tinyfl::bench {

namespace {

constexpr const char* kDataset = "FL_Local_DataSet_Update";
constexpr const char* kGlobal = "FL_Global_Model_Update";
constexpr const char* kLocal = "FL_Local_Model_Update";

msg::ModelIdentifier bench_identifier() {
    // Any 16 octets give the same CBOR/Protobuf/JSON sizes.
    msg::ModelIdentifier id;
    for (size_t i = 0; i < id.uuid.size(); ++i) id.uuid[i] = static_cast<uint8_t>(i);
    return id;
}

msg::ModelParams make_params(std::vector<double> values, cbor::Profile profile) {
    msg::ModelParams p;
    p.encoding = msg::choose_params_encoding(values, profile);
    p.values = std::move(values);
    return p;
}

struct MessageSet {
    msg::LocalDataSetUpdate dataset;
    msg::GlobalModelUpdate global;
    msg::LocalModelUpdate local;
};

MessageSet synthetic_messages(uint64_t param_count, double fill_value, cbor::Profile profile) {
    const std::vector<double> values(param_count, fill_value);
    MessageSet set;
    set.dataset = msg::LocalDataSetUpdate{1, msg::ModelMetadata{1.0, 1.0}};
    set.global = msg::GlobalModelUpdate{bench_identifier(), 1, make_params(values, profile), true};
    set.local = msg::LocalModelUpdate{bench_identifier(), 1, make_params(values, profile), msg::ModelMetadata{1.0, 1.0}};
    return set;
}

ReportRow make_row(const char* message, std::optional<uint64_t> model_size, const char* codec, const char* profile,
                   uint64_t octets, std::optional<uint64_t> expected, uint64_t tolerance = 0) {
    ReportRow row;
    row.message = message;
    row.model_size = model_size;
    row.codec = codec;
    row.profile = profile;
    row.octets = octets;
    row.frames = frame_count(octets);
    row.expected = expected;
    row.tolerance = tolerance;
    return row;
}

bool row_matches(const ReportRow& row) {
    if (!row.expected) return true;
    const uint64_t diff = row.octets > *row.expected ? row.octets - *row.expected : *row.expected - row.octets;
    return diff <= row.tolerance;
}

std::string model_size_str(const ReportRow& row) {
    return row.model_size ? format_uint(*row.model_size) : std::string();
}

}  // namespace

uint64_t frame_count(uint64_t payload_octets, uint64_t frame_budget, uint64_t block_size) {
    if (block_size == 0) throw InvalidConfig("block size must be positive");
    if (block_size > frame_budget) throw InvalidConfig("block size exceeds the frame budget");
    if (payload_octets <= frame_budget) return 1;
    return (payload_octets + block_size - 1) / block_size;
}

bool SizeReport::all_match() const {
    return std::all_of(rows.begin(), rows.end(), row_matches);
}

std::vector<std::string> SizeReport::mismatches() const {
    std::vector<std::string> out;
    for (const auto& row : rows) {
        if (row_matches(row)) continue;
        out.push_back(row.message + "/" + (row.model_size ? format_uint(*row.model_size) : "-") + "/" + row.codec +
                      (row.profile.empty() ? "" : "-" + row.profile) + ": got " + format_uint(row.octets) +
                      ", expected " + format_uint(*row.expected) +
                      (row.tolerance ? " (tolerance " + format_uint(row.tolerance) + ")" : ""));
    }
    return out;
}

std::string SizeReport::to_csv() const {
    std::string out = "message,model_size,codec,profile,bytes,frames\n";
    for (const auto& row : rows) {
        out += row.message + "," + model_size_str(row) + "," + row.codec + "," + row.profile + "," +
               format_uint(row.octets) + "," + format_uint(row.frames) + "\n";
    }
    return out;
}

// One line per (message, model size), one column per codec, mirroring the
// published tables.
std::string SizeReport::to_text() const {
    const auto column_title = [](const ReportRow& row) -> std::string {
        if (row.codec == "cbor") return row.profile == "verbose" ? "CBOR Worst" : "CBOR Best";
        if (row.codec == "protobuf") return "Protobuf";
        return "JSON";
    };

    std::vector<std::string> columns;
    std::vector<std::pair<std::string, std::string>> lines;  // (message, model size)
    for (const auto& row : rows) {
        const std::string title = column_title(row);
        if (std::find(columns.begin(), columns.end(), title) == columns.end()) columns.push_back(title);
        const std::pair<std::string, std::string> key{row.message, model_size_str(row)};
        if (std::find(lines.begin(), lines.end(), key) == lines.end()) lines.push_back(key);
    }

    constexpr size_t kMessageWidth = 26;
    constexpr size_t kCellWidth = 12;
    std::ostringstream out;
    const auto pad = [&](const std::string& text, size_t width) {
        out << text << std::string(text.size() < width ? width - text.size() : 1, ' ');
    };
    pad("Message", kMessageWidth);
    pad("Model Size", kCellWidth);
    for (const auto& column : columns) pad(column, kCellWidth);
    out << "\n";
    for (const auto& [message, size] : lines) {
        pad(message, kMessageWidth);
        pad(size.empty() ? "-" : size, kCellWidth);
        for (const auto& column : columns) {
            std::string cell = "-";
            for (const auto& row : rows) {
                if (row.message == message && model_size_str(row) == size && column_title(row) == column) {
                    cell = format_uint(row.octets);
                }
            }
            pad(cell, kCellWidth);
        }
        out << "\n";
    }

    // The compression claim at a glance.
    for (const auto& cbor_row : rows) {
        if (cbor_row.codec != "cbor" || cbor_row.profile == "verbose") continue;
        for (const auto& json_row : rows) {
            if (json_row.codec == "json" && json_row.message == cbor_row.message &&
                json_row.model_size == cbor_row.model_size) {
                out << cbor_row.message << (cbor_row.model_size ? "/" + format_uint(*cbor_row.model_size) : "")
                    << ": cbor/json = " << format_double(static_cast<double>(cbor_row.octets) / json_row.octets)
                    << "\n";
            }
        }
    }
    return out.str();
}

const std::vector<ReportRow>& table1_expected() {
    static const std::vector<ReportRow> kRows = [] {
        std::vector<ReportRow> rows;
        auto add = [&](const char* message, std::optional<uint64_t> n, const char* codec, const char* profile,
                       uint64_t expected, uint64_t tolerance = 0) {
            ReportRow row;
            row.message = message;
            row.model_size = n;
            row.codec = codec;
            row.profile = profile;
            row.expected = expected;
            row.tolerance = tolerance;
            rows.push_back(row);
        };
        add(kDataset, std::nullopt, "cbor", "compact", 8);
        add(kDataset, std::nullopt, "cbor", "verbose", 28);
        add(kDataset, std::nullopt, "protobuf", "", 22);
        add(kDataset, std::nullopt, "json", "", 11);
        add(kGlobal, 4, "cbor", "compact", 33);
        add(kGlobal, 4, "cbor", "verbose", 67);
        add(kGlobal, 4, "protobuf", "", 40);
        add(kGlobal, 4, "json", "", 65);
        add(kGlobal, 1000, "cbor", "compact", 2027);
        add(kGlobal, 1000, "cbor", "verbose", 9033);
        add(kGlobal, 1000, "protobuf", "", 4025);
        add(kGlobal, 1000, "json", "", 4049);
        // The published table prints 20025 here; the byte layout that
        // reproduces every other cell gives 20027 (1+19+1+20005+1), so this
        // one cell carries a +-2 octet tolerance.
        add(kGlobal, 10000, "cbor", "compact", 20025, 2);
        add(kGlobal, 10000, "cbor", "verbose", 90033);
        add(kGlobal, 10000, "protobuf", "", 40026);
        add(kGlobal, 10000, "json", "", 40049);
        add(kLocal, 4, "cbor", "compact", 38);
        add(kLocal, 4, "cbor", "verbose", 84);
        add(kLocal, 4, "protobuf", "", 58);
        add(kLocal, 4, "json", "", 68);
        add(kLocal, 1000, "cbor", "compact", 2032);
        add(kLocal, 1000, "cbor", "verbose", 9050);
        add(kLocal, 1000, "protobuf", "", 4043);
        add(kLocal, 1000, "json", "", 4052);
        add(kLocal, 10000, "cbor", "compact", 20032);
        add(kLocal, 10000, "cbor", "verbose", 90050);
        add(kLocal, 10000, "protobuf", "", 40044);
        add(kLocal, 10000, "json", "", 40052);
        return rows;
    }();
    return kRows;
}

SizeReport run_table1() {
    SizeReport report;
    auto expected_cell = [](const char* message, std::optional<uint64_t> n, const char* codec,
                            const char* profile) -> std::pair<std::optional<uint64_t>, uint64_t> {
        for (const auto& row : table1_expected()) {
            if (row.message == message && row.model_size == n && row.codec == codec && row.profile == profile) {
                return {row.expected, row.tolerance};
            }
        }
        return {std::nullopt, 0};
    };
    auto add = [&](const char* message, std::optional<uint64_t> n, const char* codec, const char* profile,
                   uint64_t octets) {
        const auto [expected, tolerance] = expected_cell(message, n, codec, profile);
        report.rows.push_back(make_row(message, n, codec, profile, octets, expected, tolerance));
    };

    {
        const MessageSet compact = synthetic_messages(0, 1.0, cbor::Profile::Compact);
        add(kDataset, std::nullopt, "cbor", "compact",
            msg::encode_dataset_update(compact.dataset, cbor::Profile::Compact).size());
        add(kDataset, std::nullopt, "cbor", "verbose",
            msg::encode_dataset_update(compact.dataset, cbor::Profile::Verbose).size());
        add(kDataset, std::nullopt, "protobuf", "", alt::pb_encode(compact.dataset).size());
        add(kDataset, std::nullopt, "json", "", alt::json_encode(compact.dataset).size());
    }

    for (const uint64_t n : {uint64_t{4}, uint64_t{1000}, uint64_t{10000}}) {
        const MessageSet compact = synthetic_messages(n, 1.0, cbor::Profile::Compact);
        const MessageSet verbose = synthetic_messages(n, 1.0, cbor::Profile::Verbose);
        add(kGlobal, n, "cbor", "compact", msg::encode_global(compact.global, cbor::Profile::Compact).size());
        add(kGlobal, n, "cbor", "verbose", msg::encode_global(verbose.global, cbor::Profile::Verbose).size());
        add(kGlobal, n, "protobuf", "", alt::pb_encode(compact.global).size());
        add(kGlobal, n, "json", "", alt::json_encode(compact.global).size());
        add(kLocal, n, "cbor", "compact", msg::encode_local_model(compact.local, cbor::Profile::Compact).size());
        add(kLocal, n, "cbor", "verbose", msg::encode_local_model(verbose.local, cbor::Profile::Verbose).size());
        add(kLocal, n, "protobuf", "", alt::pb_encode(compact.local).size());
        add(kLocal, n, "json", "", alt::json_encode(compact.local).size());
    }
    return report;
}

std::vector<double> lenet_standin_values(uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> values(kLeNetParamCount);
    for (double& v : values) {
        // 24 high-entropy bits mapped into the open interval (0,1), then
        // stretched to (-1,1); the float cast makes every value binary32.
        const double unit = (static_cast<double>(rng() >> 40) + 0.5) * 0x1p-24;
        v = static_cast<float>(2.0 * unit - 1.0);
    }
    return values;
}

SizeReport run_table2(uint64_t seed) {
    SizeReport report;
    std::vector<double> values = lenet_standin_values(seed);
    // Binary16-exact losses keep the local update at the published size.
    const msg::ModelMetadata losses{0.5, 0.25};

    msg::GlobalModelUpdate global{bench_identifier(), 1, make_params(values, cbor::Profile::Compact), true};
    msg::LocalModelUpdate local{bench_identifier(), 1, global.model_params, losses};

    report.rows.push_back(make_row(kGlobal, kLeNetParamCount, "cbor", "compact",
                                   msg::encode_global(global, cbor::Profile::Compact).size(), 177733));
    report.rows.push_back(make_row(kGlobal, kLeNetParamCount, "protobuf", "", alt::pb_encode(global).size(), 177730));
    report.rows.push_back(
        make_row(kGlobal, kLeNetParamCount, "json", "", alt::json_encode(global).size(), std::nullopt));
    report.rows.push_back(make_row(kLocal, kLeNetParamCount, "cbor", "compact",
                                   msg::encode_local_model(local, cbor::Profile::Compact).size(), 177738));
    report.rows.push_back(make_row(kLocal, kLeNetParamCount, "protobuf", "", alt::pb_encode(local).size(), 177748));
    report.rows.push_back(make_row(kLocal, kLeNetParamCount, "json", "", alt::json_encode(local).size(), std::nullopt));
    return report;
}

}  // namespace tinyfl::bench
