#ifndef TINYFL_CBOR_HPP
#define TINYFL_CBOR_HPP

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

// Minimal deterministic CBOR codec (RFC 8949 subset): unsigned integers,
// half/single/double floats, booleans, byte strings, text strings, arrays
// and tagged items. No maps, no negative integers, no indefinite lengths.
//
// Encoding is driven by a profile:
//   Compact  - integer heads are minimal length, floats use the smallest
//              IEEE 754 width that preserves the value exactly.
//   Verbose  - integer values carry an 8-octet argument (initial byte 0x1b)
//              and every float is encoded as a double (0xfb + 8 octets).
// Structural heads (byte/text string lengths, array counts, tag numbers)
// are always minimal; only integer values and floats widen under Verbose.
//
// The decoder is liberal: any legal head length is accepted for integers
// and lengths, canonical or not.

namespace tinyfl::cbor {

enum class FloatWidth : uint8_t { Half, Single, Double };
enum class Profile : uint8_t { Compact, Verbose };

constexpr size_t float_width_octets(FloatWidth w) {
    return w == FloatWidth::Half ? 2 : w == FloatWidth::Single ? 4 : 8;
}

class DecodeError : public std::runtime_error {
public:
    enum class Kind { TruncatedInput, UnsupportedItem };

    DecodeError(Kind kind, const std::string& detail)
        : std::runtime_error(slug(kind) + (detail.empty() ? "" : ": " + detail)),
          kind_(kind) {}

    Kind kind() const { return kind_; }

    static std::string slug(Kind kind) {
        return kind == Kind::TruncatedInput ? "truncated-input" : "unsupported-item";
    }

private:
    Kind kind_;
};

class Value;

// Deep-copying box so Value can hold a tagged child by value semantics.
template <typename T>
class Box {
public:
    Box(T v) : ptr_(std::make_unique<T>(std::move(v))) {}
    Box(const Box& other) : ptr_(std::make_unique<T>(*other.ptr_)) {}
    Box(Box&&) noexcept = default;
    Box& operator=(const Box& other) {
        ptr_ = std::make_unique<T>(*other.ptr_);
        return *this;
    }
    Box& operator=(Box&&) noexcept = default;

    T& operator*() { return *ptr_; }
    const T& operator*() const { return *ptr_; }
    T* operator->() { return ptr_.get(); }
    const T* operator->() const { return ptr_.get(); }

private:
    std::unique_ptr<T> ptr_;
};

class Value {
public:
    struct Uint {
        uint64_t value;
    };
    struct Float {
        double value;
        // Width the value was decoded with, or a hint for diagnostics.
        // Encoding ignores it: Compact picks the minimal lossless width,
        // Verbose always writes a double.
        FloatWidth width;
    };
    struct Bool {
        bool value;
    };
    struct Bytes {
        std::vector<uint8_t> bytes;
    };
    struct Text {
        std::string text;
    };
    struct Array {
        std::vector<Value> items;
    };
    struct Tagged {
        uint64_t tag;
        Box<Value> item;
    };

    using Variant = std::variant<Uint, Float, Bool, Bytes, Text, Array, Tagged>;

    Value(Variant v) : v_(std::move(v)) {}

    static Value uint(uint64_t u) { return Value(Uint{u}); }
    static Value real(double x, FloatWidth w = FloatWidth::Double) { return Value(Float{x, w}); }
    static Value boolean(bool b) { return Value(Bool{b}); }
    static Value bytes(std::vector<uint8_t> b) { return Value(Bytes{std::move(b)}); }
    static Value text(std::string s) { return Value(Text{std::move(s)}); }
    static Value array(std::vector<Value> items) { return Value(Array{std::move(items)}); }
    static Value tagged(uint64_t tag, Value item) { return Value(Tagged{tag, Box<Value>(std::move(item))}); }

    const Variant& variant() const { return v_; }

    template <typename T>
    const T* get_if() const {
        return std::get_if<T>(&v_);
    }
    template <typename T>
    bool is() const {
        return std::holds_alternative<T>(v_);
    }

private:
    Variant v_;
};

// Structural value equality. Float widths are ignored (Compact encoding
// canonicalizes them); NaN compares equal to NaN, and +0.0 == -0.0 follows
// IEEE semantics.
bool operator==(const Value& a, const Value& b);
inline bool operator!=(const Value& a, const Value& b) { return !(a == b); }

std::vector<uint8_t> encode_value(const Value& v, Profile profile);
void encode_value(const Value& v, Profile profile, std::vector<uint8_t>& out);

struct Decoded {
    Value value;
    size_t consumed;
};

// Decodes one data item from the front of `buf`. Trailing bytes are left
// to the caller (see `consumed`). Throws DecodeError on malformed input.
Decoded decode_value(std::span<const uint8_t> buf);

// Smallest IEEE 754 width whose encoding of x decodes back to exactly x.
// Any NaN maps to Half.
FloatWidth min_float_width(double x);

// Octets of a minimal head carrying this argument (1/2/3/5/9).
size_t head_octets(uint64_t argument);

// IEEE 754 binary16 conversions. Encoding rounds to nearest-even and
// overflows to infinity; NaN becomes the canonical quiet NaN 0x7e00.
uint16_t encode_half(double x);
double decode_half(uint16_t bits);

// Diagnostic notation used by the golden-vector files: uints as decimals,
// floats width-suffixed (`1.0f16`), `h'..'` byte strings, quoted text,
// `[a, b]` arrays and `tag(item)` for tagged items.
std::string diagnostic(const Value& v);

std::string to_hex(std::span<const uint8_t> bytes);
std::vector<uint8_t> from_hex(const std::string& hex);

}  // namespace tinyfl::cbor

#endif
