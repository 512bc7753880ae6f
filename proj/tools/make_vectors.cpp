// Regenerates the committed CBOR conformance vectors: one `<hex> <diag>`
// line per value, covering every supported item kind, both encoding
// profiles and all integer head-size bands. The decoder's view of each
// vector is what gets written, so the file doubles as the expected output
// of decode + diagnostic printing.

#include <bit>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <random>
#include <vector>

#include "tinyfl/cbor.hpp"

using tinyfl::cbor::Value;

namespace {

std::mt19937_64 rng(0x7f5e21u);

uint64_t pick(uint64_t bound) { return rng() % bound; }

uint64_t random_uint() {
    switch (pick(5)) {
        case 0: return pick(24);
        case 1: return 24 + pick(232);
        case 2: return 256 + pick(65536 - 256);
        case 3: return 65536 + pick(0x100000000ull - 65536);
        default: return rng() | 0x100000000ull;
    }
}

double random_float() {
    switch (pick(8)) {
        case 0: return tinyfl::cbor::decode_half(static_cast<uint16_t>(rng()));
        case 1: return static_cast<double>(std::bit_cast<float>(static_cast<uint32_t>(rng())));
        case 2: return std::bit_cast<double>(rng());
        case 3: return 0.0;
        case 4: return -0.0;
        case 5: return 1.0;
        case 6: return 65504.0;
        default: return 0.1 * static_cast<double>(pick(1000));
    }
}

Value random_value(unsigned depth) {
    const uint64_t kind = depth >= 3 ? pick(5) : pick(7);
    switch (kind) {
        case 0: return Value::uint(random_uint());
        case 1: return Value::real(random_float());
        case 2: return Value::boolean(pick(2) == 0);
        case 3: {
            std::vector<uint8_t> bytes(pick(25));
            for (auto& b : bytes) b = static_cast<uint8_t>(rng());
            return Value::bytes(std::move(bytes));
        }
        case 4: {
            static constexpr char kCharset[] = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 _-.";
            std::string text;
            const uint64_t len = pick(17);
            for (uint64_t i = 0; i < len; ++i) text += kCharset[pick(sizeof(kCharset) - 1)];
            return Value::text(std::move(text));
        }
        case 5: {
            std::vector<Value> items;
            const uint64_t count = pick(6);
            for (uint64_t i = 0; i < count; ++i) items.push_back(random_value(depth + 1));
            return Value::array(std::move(items));
        }
        default: {
            // Tags below 6 collide with nlohmann's special-cased datetime
            // and bignum handling, which the conformance cross-check uses.
            static constexpr uint64_t kTags[] = {37, 84, 85, 86, 6, 20, 1000, 999999999999ull};
            return Value::tagged(kTags[pick(8)], random_value(depth + 1));
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    const std::string out_path = argc > 1 ? argv[1] : "tests/data/golden_vectors.txt";
    std::ofstream out(out_path);
    if (!out) {
        std::cerr << "cannot open " << out_path << "\n";
        return 1;
    }
    for (int i = 0; i < 1000; ++i) {
        const Value v = random_value(0);
        const auto profile = i % 2 == 0 ? tinyfl::cbor::Profile::Compact : tinyfl::cbor::Profile::Verbose;
        const std::vector<uint8_t> encoded = tinyfl::cbor::encode_value(v, profile);
        const auto decoded = tinyfl::cbor::decode_value(encoded);
        out << tinyfl::cbor::to_hex(encoded) << " " << tinyfl::cbor::diagnostic(decoded.value) << "\n";
    }
    std::cout << "wrote 1000 vectors to " << out_path << "\n";
    return 0;
}
