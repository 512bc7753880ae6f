#include "tinyfl/cbor.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>

#include "tinyfl/text_format.hpp"

namespace tinyfl::cbor {

namespace {

constexpr uint8_t kMajorUint = 0;
constexpr uint8_t kMajorBytes = 2;
constexpr uint8_t kMajorText = 3;
constexpr uint8_t kMajorArray = 4;
constexpr uint8_t kMajorMap = 5;
constexpr uint8_t kMajorTag = 6;
constexpr uint8_t kMajorSimple = 7;

constexpr size_t kMaxDepth = 512;

void write_be(std::vector<uint8_t>& out, uint64_t v, unsigned octets) {
    for (unsigned i = 0; i < octets; ++i) {
        out.push_back(static_cast<uint8_t>(v >> (8 * (octets - 1 - i))));
    }
}

// Minimal-length head: argument inline below 24, else the shortest of the
// 1/2/4/8-octet argument forms.
void write_head_minimal(std::vector<uint8_t>& out, uint8_t major, uint64_t arg) {
    const uint8_t base = static_cast<uint8_t>(major << 5);
    if (arg < 24) {
        out.push_back(base | static_cast<uint8_t>(arg));
    } else if (arg <= 0xff) {
        out.push_back(base | 24);
        write_be(out, arg, 1);
    } else if (arg <= 0xffff) {
        out.push_back(base | 25);
        write_be(out, arg, 2);
    } else if (arg <= 0xffffffffull) {
        out.push_back(base | 26);
        write_be(out, arg, 4);
    } else {
        out.push_back(base | 27);
        write_be(out, arg, 8);
    }
}

void write_uint_value(std::vector<uint8_t>& out, uint64_t v, Profile profile) {
    if (profile == Profile::Verbose) {
        out.push_back((kMajorUint << 5) | 27);
        write_be(out, v, 8);
    } else {
        write_head_minimal(out, kMajorUint, v);
    }
}

void write_float(std::vector<uint8_t>& out, double x, Profile profile) {
    const FloatWidth w = profile == Profile::Verbose ? FloatWidth::Double : min_float_width(x);
    switch (w) {
        case FloatWidth::Half:
            out.push_back(0xf9);
            write_be(out, encode_half(x), 2);
            break;
        case FloatWidth::Single:
            out.push_back(0xfa);
            write_be(out, std::bit_cast<uint32_t>(static_cast<float>(x)), 4);
            break;
        case FloatWidth::Double:
            out.push_back(0xfb);
            write_be(out, std::bit_cast<uint64_t>(x), 8);
            break;
    }
}

struct Cursor {
    std::span<const uint8_t> buf;
    size_t pos = 0;

    uint8_t take() {
        need(1);
        return buf[pos++];
    }

    void need(size_t n) const {
        if (buf.size() - pos < n) {
            throw DecodeError(DecodeError::Kind::TruncatedInput,
                              "need " + std::to_string(n) + " more octet(s) at offset " + std::to_string(pos));
        }
    }

    uint64_t take_be(unsigned octets) {
        need(octets);
        uint64_t v = 0;
        for (unsigned i = 0; i < octets; ++i) v = (v << 8) | buf[pos++];
        return v;
    }
};

// Head argument for majors 0/2/3/4/6; accepts non-minimal lengths.
uint64_t read_argument(Cursor& c, uint8_t ai) {
    if (ai < 24) return ai;
    switch (ai) {
        case 24: return c.take_be(1);
        case 25: return c.take_be(2);
        case 26: return c.take_be(4);
        case 27: return c.take_be(8);
        case 31:
            throw DecodeError(DecodeError::Kind::UnsupportedItem, "indefinite-length item");
        default:
            throw DecodeError(DecodeError::Kind::UnsupportedItem,
                              "reserved additional information " + std::to_string(ai));
    }
}

Value decode_item(Cursor& c, size_t depth) {
    if (depth > kMaxDepth) {
        throw DecodeError(DecodeError::Kind::UnsupportedItem, "nesting deeper than 512");
    }
    const uint8_t ib = c.take();
    const uint8_t major = ib >> 5;
    const uint8_t ai = ib & 0x1f;

    switch (major) {
        case kMajorUint:
            return Value::uint(read_argument(c, ai));
        case kMajorBytes: {
            const uint64_t len = read_argument(c, ai);
            c.need(len);
            std::vector<uint8_t> bytes(c.buf.begin() + c.pos, c.buf.begin() + c.pos + len);
            c.pos += len;
            return Value::bytes(std::move(bytes));
        }
        case kMajorText: {
            const uint64_t len = read_argument(c, ai);
            c.need(len);
            std::string text(reinterpret_cast<const char*>(c.buf.data()) + c.pos, len);
            c.pos += len;
            return Value::text(std::move(text));
        }
        case kMajorArray: {
            const uint64_t count = read_argument(c, ai);
            std::vector<Value> items;
            items.reserve(count < 4096 ? count : 4096);
            for (uint64_t i = 0; i < count; ++i) items.push_back(decode_item(c, depth + 1));
            return Value::array(std::move(items));
        }
        case kMajorTag: {
            const uint64_t tag = read_argument(c, ai);
            return Value::tagged(tag, decode_item(c, depth + 1));
        }
        case kMajorSimple:
            switch (ai) {
                case 20: return Value::boolean(false);
                case 21: return Value::boolean(true);
                case 25: return Value(Value::Float{decode_half(static_cast<uint16_t>(c.take_be(2))), FloatWidth::Half});
                case 26:
                    return Value(Value::Float{static_cast<double>(std::bit_cast<float>(static_cast<uint32_t>(c.take_be(4)))),
                                              FloatWidth::Single});
                case 27: return Value(Value::Float{std::bit_cast<double>(c.take_be(8)), FloatWidth::Double});
                default:
                    throw DecodeError(DecodeError::Kind::UnsupportedItem,
                                      "simple value " + std::to_string(ai) + " (only true/false supported)");
            }
        case kMajorMap:
            throw DecodeError(DecodeError::Kind::UnsupportedItem, "map");
        default:  // major 1, negative integers
            throw DecodeError(DecodeError::Kind::UnsupportedItem, "negative integer");
    }
}

struct EncodeVisitor {
    std::vector<uint8_t>& out;
    Profile profile;

    void operator()(const Value::Uint& u) const { write_uint_value(out, u.value, profile); }
    void operator()(const Value::Float& f) const { write_float(out, f.value, profile); }
    void operator()(const Value::Bool& b) const { out.push_back(b.value ? 0xf5 : 0xf4); }
    void operator()(const Value::Bytes& b) const {
        write_head_minimal(out, kMajorBytes, b.bytes.size());
        out.insert(out.end(), b.bytes.begin(), b.bytes.end());
    }
    void operator()(const Value::Text& t) const {
        write_head_minimal(out, kMajorText, t.text.size());
        out.insert(out.end(), t.text.begin(), t.text.end());
    }
    void operator()(const Value::Array& a) const {
        write_head_minimal(out, kMajorArray, a.items.size());
        for (const Value& item : a.items) encode_value(item, profile, out);
    }
    void operator()(const Value::Tagged& t) const {
        write_head_minimal(out, kMajorTag, t.tag);
        encode_value(*t.item, profile, out);
    }
};

bool float_equal(double a, double b) {
    if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
    return a == b;
}

}  // namespace

void encode_value(const Value& v, Profile profile, std::vector<uint8_t>& out) {
    std::visit(EncodeVisitor{out, profile}, v.variant());
}

std::vector<uint8_t> encode_value(const Value& v, Profile profile) {
    std::vector<uint8_t> out;
    encode_value(v, profile, out);
    return out;
}

Decoded decode_value(std::span<const uint8_t> buf) {
    if (buf.empty()) {
        throw DecodeError(DecodeError::Kind::TruncatedInput, "empty input");
    }
    Cursor c{buf};
    Value v = decode_item(c, 0);
    return Decoded{std::move(v), c.pos};
}

uint16_t encode_half(double x) {
    if (std::isnan(x)) return 0x7e00;
    const uint16_t sign = std::signbit(x) ? 0x8000 : 0;
    const double a = std::fabs(x);
    if (std::isinf(x)) return sign | 0x7c00;
    if (a == 0.0) return sign;
    if (a >= 65520.0) return sign | 0x7c00;  // rounds past the largest finite half
    int e;
    std::frexp(a, &e);  // a = m * 2^e, m in [0.5, 1)
    if (e - 1 >= -14) {
        // Normal range: 10-bit mantissa of the 1.x form, nearest-even.
        const int field = e + 14;
        const auto q = static_cast<uint32_t>(std::nearbyint(std::ldexp(a, 11 - e)));  // in [1024, 2048]
        return static_cast<uint16_t>(sign | ((field << 10) + (q - 1024)));
    }
    // Subnormal range: value is mant * 2^-24; a carry into bit 10 lands on
    // the smallest normal encoding by construction.
    const auto q = static_cast<uint32_t>(std::nearbyint(std::ldexp(a, 24)));
    return static_cast<uint16_t>(sign | q);
}

double decode_half(uint16_t bits) {
    const uint16_t exp = (bits >> 10) & 0x1f;
    const uint16_t mant = bits & 0x3ff;
    double val;
    if (exp == 0) {
        val = std::ldexp(mant, -24);
    } else if (exp != 31) {
        val = std::ldexp(mant + 1024, exp - 25);
    } else {
        val = mant == 0 ? std::numeric_limits<double>::infinity() : std::numeric_limits<double>::quiet_NaN();
    }
    return (bits & 0x8000) ? -val : val;
}

FloatWidth min_float_width(double x) {
    if (std::isnan(x)) return FloatWidth::Half;
    if (decode_half(encode_half(x)) == x) return FloatWidth::Half;
    if (static_cast<double>(static_cast<float>(x)) == x) return FloatWidth::Single;
    return FloatWidth::Double;
}

size_t head_octets(uint64_t argument) {
    return argument < 24 ? 1 : argument <= 0xff ? 2 : argument <= 0xffff ? 3 : argument <= 0xffffffffull ? 5 : 9;
}

bool operator==(const Value& a, const Value& b) {
    if (a.variant().index() != b.variant().index()) return false;
    if (const auto* u = a.get_if<Value::Uint>()) return u->value == b.get_if<Value::Uint>()->value;
    if (const auto* f = a.get_if<Value::Float>()) return float_equal(f->value, b.get_if<Value::Float>()->value);
    if (const auto* l = a.get_if<Value::Bool>()) return l->value == b.get_if<Value::Bool>()->value;
    if (const auto* y = a.get_if<Value::Bytes>()) return y->bytes == b.get_if<Value::Bytes>()->bytes;
    if (const auto* t = a.get_if<Value::Text>()) return t->text == b.get_if<Value::Text>()->text;
    if (const auto* r = a.get_if<Value::Array>()) {
        const auto& s = *b.get_if<Value::Array>();
        if (r->items.size() != s.items.size()) return false;
        for (size_t i = 0; i < r->items.size(); ++i) {
            if (!(r->items[i] == s.items[i])) return false;
        }
        return true;
    }
    const auto& ta = *a.get_if<Value::Tagged>();
    const auto& tb = *b.get_if<Value::Tagged>();
    return ta.tag == tb.tag && *ta.item == *tb.item;
}

namespace {

void escape_text(const std::string& text, std::string& out) {
    out += '"';
    for (const char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (ch == '"' || ch == '\\') {
            out += '\\';
            out += ch;
        } else if (c < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof(buf), "\\u%04x", c);
            out += buf;
        } else {
            out += ch;
        }
    }
    out += '"';
}

void diagnostic_rec(const Value& v, std::string& out) {
    if (const auto* u = v.get_if<Value::Uint>()) {
        out += format_uint(u->value);
    } else if (const auto* f = v.get_if<Value::Float>()) {
        out += format_double(f->value);
        out += f->width == FloatWidth::Half ? "f16" : f->width == FloatWidth::Single ? "f32" : "f64";
    } else if (const auto* b = v.get_if<Value::Bool>()) {
        out += b->value ? "true" : "false";
    } else if (const auto* y = v.get_if<Value::Bytes>()) {
        out += "h'";
        out += to_hex(y->bytes);
        out += '\'';
    } else if (const auto* t = v.get_if<Value::Text>()) {
        escape_text(t->text, out);
    } else if (const auto* a = v.get_if<Value::Array>()) {
        out += '[';
        for (size_t i = 0; i < a->items.size(); ++i) {
            if (i > 0) out += ", ";
            diagnostic_rec(a->items[i], out);
        }
        out += ']';
    } else {
        const auto& tg = *v.get_if<Value::Tagged>();
        out += format_uint(tg.tag);
        out += '(';
        diagnostic_rec(*tg.item, out);
        out += ')';
    }
}

}  // namespace

std::string diagnostic(const Value& v) {
    std::string out;
    diagnostic_rec(v, out);
    return out;
}

std::string to_hex(std::span<const uint8_t> bytes) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (const uint8_t b : bytes) {
        out += kDigits[b >> 4];
        out += kDigits[b & 0xf];
    }
    return out;
}

std::vector<uint8_t> from_hex(const std::string& hex) {
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    if (hex.size() % 2 != 0) throw std::invalid_argument("hex string has odd length");
    std::vector<uint8_t> out;
    out.reserve(hex.size() / 2);
    for (size_t i = 0; i < hex.size(); i += 2) {
        const int hi = nibble(hex[i]);
        const int lo = nibble(hex[i + 1]);
        if (hi < 0 || lo < 0) throw std::invalid_argument("invalid hex digit");
        out.push_back(static_cast<uint8_t>((hi << 4) | lo));
    }
    return out;
}

}  // namespace tinyfl::cbor
