#include "tinyfl/cbor.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <doctest.h>

using namespace tinyfl::cbor;

namespace {

std::vector<uint8_t> hex(std::string s) {
    std::erase(s, ' ');
    return from_hex(s);
}

Value roundtrip(const Value& v, Profile p) {
    const auto encoded = encode_value(v, p);
    const auto decoded = decode_value(encoded);
    REQUIRE(decoded.consumed == encoded.size());
    return decoded.value;
}

// Random values spanning all item kinds and head-size bands.
Value random_value(std::mt19937_64& rng, unsigned depth = 0) {
    const auto pick = [&](uint64_t bound) { return rng() % bound; };
    switch (depth >= 3 ? pick(5) : pick(7)) {
        case 0:
            switch (pick(5)) {
                case 0: return Value::uint(pick(24));
                case 1: return Value::uint(24 + pick(232));
                case 2: return Value::uint(256 + pick(65280));
                case 3: return Value::uint(65536 + pick(0xffff0000ull));
                default: return Value::uint(rng() | 0x100000000ull);
            }
        case 1:
            switch (pick(4)) {
                case 0: return Value::real(decode_half(static_cast<uint16_t>(rng())));
                case 1: return Value::real(std::bit_cast<float>(static_cast<uint32_t>(rng())));
                case 2: return Value::real(std::bit_cast<double>(rng()));
                default: return Value::real(static_cast<double>(pick(1000)) * 0.1);
            }
        case 2: return Value::boolean(pick(2) == 0);
        case 3: {
            std::vector<uint8_t> bytes(pick(40));
            for (auto& b : bytes) b = static_cast<uint8_t>(rng());
            return Value::bytes(std::move(bytes));
        }
        case 4: {
            std::string text;
            for (uint64_t i = pick(20); i > 0; --i) text += static_cast<char>('a' + pick(26));
            return Value::text(std::move(text));
        }
        case 5: {
            std::vector<Value> items;
            for (uint64_t i = pick(5); i > 0; --i) items.push_back(random_value(rng, depth + 1));
            return Value::array(std::move(items));
        }
        default: return Value::tagged(pick(2) == 0 ? 37 : rng() % 100000, random_value(rng, depth + 1));
    }
}

}  // namespace

TEST_CASE("integer heads follow the RFC layout") {
    CHECK(encode_value(Value::uint(0), Profile::Compact) == hex("00"));
    CHECK(encode_value(Value::uint(23), Profile::Compact) == hex("17"));
    CHECK(encode_value(Value::uint(24), Profile::Compact) == hex("1818"));
    CHECK(encode_value(Value::uint(255), Profile::Compact) == hex("18ff"));
    CHECK(encode_value(Value::uint(256), Profile::Compact) == hex("190100"));
    CHECK(encode_value(Value::uint(65535), Profile::Compact) == hex("19ffff"));
    CHECK(encode_value(Value::uint(65536), Profile::Compact) == hex("1a00010000"));
    CHECK(encode_value(Value::uint(0xffffffffull), Profile::Compact) == hex("1affffffff"));
    CHECK(encode_value(Value::uint(0x100000000ull), Profile::Compact) == hex("1b0000000100000000"));
    CHECK(encode_value(Value::uint(std::numeric_limits<uint64_t>::max()), Profile::Compact) ==
          hex("1bffffffffffffffff"));

    // Verbose pins every integer value to the 8-octet argument form.
    CHECK(encode_value(Value::uint(1), Profile::Verbose) == hex("1b0000000000000001"));
    CHECK(encode_value(Value::uint(0), Profile::Verbose).size() == 9);
}

TEST_CASE("compact head lengths are canonical across the five bands") {
    std::mt19937_64 rng(1);
    const auto head_len = [](uint64_t v) -> size_t {
        return v < 24 ? 1 : v <= 0xff ? 2 : v <= 0xffff ? 3 : v <= 0xffffffffull ? 5 : 9;
    };
    for (int i = 0; i < 10000; ++i) {
        uint64_t v;
        switch (i % 5) {
            case 0: v = rng() % 24; break;
            case 1: v = 24 + rng() % 232; break;
            case 2: v = 256 + rng() % 65280; break;
            case 3: v = 65536 + rng() % 0xffff0000ull; break;
            default: v = rng() | 0x100000000ull; break;
        }
        CHECK(encode_value(Value::uint(v), Profile::Compact).size() == head_len(v));
    }
}

TEST_CASE("floats encode at the minimal lossless width under compact") {
    CHECK(encode_value(Value::real(1.0), Profile::Compact) == hex("f93c00"));
    CHECK(encode_value(Value::real(0.5), Profile::Compact) == hex("f93800"));
    CHECK(encode_value(Value::real(65504.0), Profile::Compact) == hex("f97bff"));
    // Smallest binary16 subnormal.
    CHECK(encode_value(Value::real(std::ldexp(1.0, -24)), Profile::Compact) == hex("f90001"));
    CHECK(encode_value(Value::real(std::numeric_limits<double>::infinity()), Profile::Compact) == hex("f97c00"));
    CHECK(encode_value(Value::real(-std::numeric_limits<double>::infinity()), Profile::Compact) == hex("f9fc00"));
    CHECK(encode_value(Value::real(std::nan("")), Profile::Compact) == hex("f97e00"));
    // 65520 rounds to binary16 infinity, so it must widen to binary32.
    CHECK(encode_value(Value::real(65520.0), Profile::Compact) == hex("fa477ff000"));
    CHECK(encode_value(Value::real(0.1), Profile::Compact).size() == 9);
    CHECK(encode_value(Value::real(0.1), Profile::Verbose) == hex("fb3fb999999999999a"));
    // -0.0 keeps its sign bit.
    CHECK(encode_value(Value::real(-0.0), Profile::Compact) == hex("f98000"));
}

TEST_CASE("min_float_width picks the smallest exact representation") {
    CHECK(min_float_width(1.0) == FloatWidth::Half);
    CHECK(min_float_width(0.5) == FloatWidth::Half);
    CHECK(min_float_width(0.1) == FloatWidth::Double);
    CHECK(min_float_width(65504.0) == FloatWidth::Half);
    CHECK(min_float_width(65520.0) == FloatWidth::Single);
    CHECK(min_float_width(static_cast<double>(0.1f)) == FloatWidth::Single);
    CHECK(min_float_width(std::ldexp(1.0, -24)) == FloatWidth::Half);
    CHECK(min_float_width(std::ldexp(1.0, -25)) == FloatWidth::Single);
    CHECK(min_float_width(std::numeric_limits<double>::infinity()) == FloatWidth::Half);
    CHECK(min_float_width(std::nan("")) == FloatWidth::Half);
    CHECK(min_float_width(-0.0) == FloatWidth::Half);
    CHECK(min_float_width(1e300) == FloatWidth::Double);
}

TEST_CASE("half conversion round-trips every non-NaN bit pattern") {
    for (uint32_t bits = 0; bits <= 0xffff; ++bits) {
        const double v = decode_half(static_cast<uint16_t>(bits));
        if (std::isnan(v)) {
            CHECK(encode_half(v) == 0x7e00);
        } else {
            CHECK(encode_half(v) == bits);
        }
    }
}

TEST_CASE("tagged byte string layout") {
    // UUID form: 2-octet tag head + byte-string head + payload.
    const Value uuid = Value::tagged(37, Value::bytes(std::vector<uint8_t>(16, 0)));
    const auto encoded = encode_value(uuid, Profile::Compact);
    CHECK(encoded.size() == 19);
    CHECK(encoded[0] == 0xd8);
    CHECK(encoded[1] == 0x25);
    CHECK(encoded[2] == 0x50);
    // Structural heads stay minimal under verbose too.
    CHECK(encode_value(uuid, Profile::Verbose).size() == 19);
}

TEST_CASE("decoder accepts non-canonical integer heads") {
    auto one = decode_value(hex("1801"));
    CHECK(one.value == Value::uint(1));
    CHECK(one.consumed == 2);
    CHECK(decode_value(hex("1b0000000000000001")).value == Value::uint(1));
    CHECK(decode_value(hex("190001")).value == Value::uint(1));
    // Non-minimal length head on a byte string.
    CHECK(decode_value(hex("590002 6161")).value == Value::bytes({0x61, 0x61}));
}

TEST_CASE("decode reports truncation and unsupported items distinctly") {
    const auto kind_of = [](const std::string& h) {
        try {
            decode_value(hex(h));
        } catch (const DecodeError& e) {
            return e.kind();
        }
        FAIL("expected DecodeError");
        return DecodeError::Kind::TruncatedInput;
    };
    CHECK_THROWS_AS(decode_value({}), DecodeError);
    CHECK(kind_of("19") == DecodeError::Kind::TruncatedInput);       // missing argument octets
    CHECK(kind_of("62 61") == DecodeError::Kind::TruncatedInput);    // short text payload
    CHECK(kind_of("82 01") == DecodeError::Kind::TruncatedInput);    // short array
    CHECK(kind_of("fb 00") == DecodeError::Kind::TruncatedInput);    // short double
    CHECK(kind_of("a1 01 02") == DecodeError::Kind::UnsupportedItem);  // map
    CHECK(kind_of("9f ff") == DecodeError::Kind::UnsupportedItem);     // indefinite array
    CHECK(kind_of("5f ff") == DecodeError::Kind::UnsupportedItem);     // indefinite bytes
    CHECK(kind_of("f6") == DecodeError::Kind::UnsupportedItem);        // null
    CHECK(kind_of("f7") == DecodeError::Kind::UnsupportedItem);        // undefined
    CHECK(kind_of("f0") == DecodeError::Kind::UnsupportedItem);        // simple(16)
    CHECK(kind_of("20") == DecodeError::Kind::UnsupportedItem);        // negative integer
    CHECK(kind_of("1c") == DecodeError::Kind::UnsupportedItem);        // reserved additional info
}

TEST_CASE("decoded floats record their wire width") {
    const auto half = decode_value(hex("f93c00"));
    CHECK(half.value.get_if<Value::Float>()->width == FloatWidth::Half);
    CHECK(half.value.get_if<Value::Float>()->value == 1.0);
    CHECK(half.consumed == 3);
    CHECK(decode_value(hex("fa3f800000")).value.get_if<Value::Float>()->width == FloatWidth::Single);
    CHECK(decode_value(hex("fb3ff0000000000000")).value.get_if<Value::Float>()->width == FloatWidth::Double);
}

TEST_CASE("array decode") {
    const auto decoded = decode_value(hex("8101"));
    CHECK(decoded.consumed == 2);
    const auto* arr = decoded.value.get_if<Value::Array>();
    REQUIRE(arr != nullptr);
    REQUIRE(arr->items.size() == 1);
    CHECK(arr->items[0] == Value::uint(1));
}

TEST_CASE("trailing bytes are left to the caller") {
    const auto decoded = decode_value(hex("01ff"));
    CHECK(decoded.consumed == 1);
    CHECK(decoded.value == Value::uint(1));
}

TEST_CASE("round trip and size monotonicity over randomized values") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 2000; ++i) {
        const Value v = random_value(rng);
        const auto compact = encode_value(v, Profile::Compact);
        const auto verbose = encode_value(v, Profile::Verbose);
        CHECK(compact.size() <= verbose.size());
        CHECK(roundtrip(v, Profile::Compact) == v);
        CHECK(roundtrip(v, Profile::Verbose) == v);
    }
}

TEST_CASE("diagnostic notation") {
    CHECK(diagnostic(Value::uint(7)) == "7");
    CHECK(diagnostic(Value::real(1.0, FloatWidth::Half)) == "1.0f16");
    CHECK(diagnostic(Value::real(0.1, FloatWidth::Double)) == "0.1f64");
    CHECK(diagnostic(Value::boolean(true)) == "true");
    CHECK(diagnostic(Value::bytes({0x00, 0xff})) == "h'00ff'");
    CHECK(diagnostic(Value::text("a\"b\\c")) == "\"a\\\"b\\\\c\"");
    CHECK(diagnostic(Value::array({Value::uint(1), Value::boolean(false)})) == "[1, false]");
    CHECK(diagnostic(Value::tagged(37, Value::bytes({}))) == "37(h'')");
}

TEST_CASE("decoder survives arbitrary byte soup") {
    std::mt19937_64 rng(0xfeed);
    for (int i = 0; i < 50000; ++i) {
        std::vector<uint8_t> buf(rng() % 24);
        for (auto& b : buf) b = static_cast<uint8_t>(rng());
        try {
            const auto decoded = decode_value(buf);
            CHECK(decoded.consumed <= buf.size());
        } catch (const DecodeError&) {
            // fine: malformed input must land here, nowhere else
        }
    }
}

TEST_CASE("hex helpers") {
    CHECK(to_hex(std::vector<uint8_t>{0x00, 0xab, 0xff}) == "00abff");
    CHECK(from_hex("00abff") == std::vector<uint8_t>({0x00, 0xab, 0xff}));
    CHECK_THROWS_AS(from_hex("abc"), std::invalid_argument);
    CHECK_THROWS_AS(from_hex("zz"), std::invalid_argument);
}
