#ifndef TINYFL_BENCHMARK_HPP
#define TINYFL_BENCHMARK_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tinyfl/messages.hpp"

// Size benchmark for the three messages across CBOR (both profiles),
// Protobuf and minified JSON, plus the frame accounting used for the
// constrained-link analysis (IEEE 802.15.4 style 127-octet frames,
// 64-octet blockwise transfer above that).

namespace tinyfl::bench {

constexpr size_t kDefaultFrameBudget = 127;
constexpr size_t kDefaultBlockSize = 64;

// Parameter count of the LeNet-5 stand-in model used by the large-model
// table: 44426 binary32 values reproducible from a seed.
constexpr uint32_t kLeNetParamCount = 44426;

struct ReportRow {
    std::string message;
    std::optional<uint64_t> model_size;  // absent for the dataset update
    std::string codec;                   // cbor | protobuf | json
    std::string profile;                 // compact | verbose, empty for non-CBOR
    uint64_t octets = 0;
    uint64_t frames = 0;
    std::optional<uint64_t> expected;    // golden cell, when asserted
    uint64_t tolerance = 0;              // |octets - expected| allowed
};

struct SizeReport {
    std::vector<ReportRow> rows;

    bool all_match() const;
    std::vector<std::string> mismatches() const;
    // `message,model_size,codec,profile,bytes,frames` with a header line.
    std::string to_csv() const;
    // Aligned columns mirroring the paper's row/column structure.
    std::string to_text() const;
};

class InvalidConfig : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One frame when the payload fits the link budget, otherwise the number of
// blockwise-transfer blocks.
uint64_t frame_count(uint64_t payload_octets, uint64_t frame_budget = kDefaultFrameBudget,
                     uint64_t block_size = kDefaultBlockSize);

// All synthetic-model cells: the dataset update plus both model messages
// at 4 / 1000 / 10000 parameters of value 1.0, under CBOR compact, CBOR
// verbose, Protobuf and JSON. Every row carries its golden expectation.
SizeReport run_table1();

// LeNet-5 stand-in cells: both model messages under compact CBOR, Protobuf
// and JSON. CBOR and Protobuf sizes are value-independent and asserted;
// the JSON size depends on the random parameter values and is only
// reported (with the CBOR/JSON ratio in the text rendering).
SizeReport run_table2(uint64_t seed);

// 44426 pseudorandom binary32 values in (-1, 1), reproducible from seed.
std::vector<double> lenet_standin_values(uint64_t seed);

// The golden rows shipped as data/table1_expected.csv.
const std::vector<ReportRow>& table1_expected();

}  // namespace tinyfl::bench

#endif
