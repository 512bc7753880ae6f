#include "tinyfl/pb_codec.hpp"

#include <bit>

namespace tinyfl::alt {

namespace {

enum WireType : uint32_t {
    kVarint = 0,
    kFixed64 = 1,
    kLengthDelimited = 2,
    kFixed32 = 5,
};

void write_varint(std::vector<uint8_t>& out, uint64_t v) {
    while (v >= 0x80) {
        out.push_back(static_cast<uint8_t>(v) | 0x80);
        v >>= 7;
    }
    out.push_back(static_cast<uint8_t>(v));
}

void write_tag(std::vector<uint8_t>& out, uint32_t field, WireType type) {
    write_varint(out, (static_cast<uint64_t>(field) << 3) | type);
}

void write_le(std::vector<uint8_t>& out, uint64_t v, unsigned octets) {
    for (unsigned i = 0; i < octets; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void write_identifier(std::vector<uint8_t>& out, const msg::ModelIdentifier& id) {
    write_tag(out, 1, kLengthDelimited);
    write_varint(out, id.uuid.size());
    out.insert(out.end(), id.uuid.begin(), id.uuid.end());
}

void write_packed_params(std::vector<uint8_t>& out, const msg::ModelParams& params) {
    if (params.values.empty()) return;
    write_tag(out, 3, kLengthDelimited);
    write_varint(out, params.values.size() * 4);
    for (const double v : params.values) {
        write_le(out, std::bit_cast<uint32_t>(static_cast<float>(v)), 4);
    }
}

void write_metadata(std::vector<uint8_t>& out, uint32_t field, const msg::ModelMetadata& meta) {
    write_tag(out, field, kLengthDelimited);
    write_varint(out, 18);  // two 9-octet double fields
    write_tag(out, 1, kFixed64);
    write_le(out, std::bit_cast<uint64_t>(meta.train_loss), 8);
    write_tag(out, 2, kFixed64);
    write_le(out, std::bit_cast<uint64_t>(meta.val_loss), 8);
}

struct Reader {
    std::span<const uint8_t> buf;
    size_t pos = 0;

    bool done() const { return pos >= buf.size(); }

    void need(size_t n) const {
        if (buf.size() - pos < n) throw ParseError("truncated field", pos);
    }

    uint64_t varint() {
        uint64_t v = 0;
        for (unsigned shift = 0; shift < 64; shift += 7) {
            need(1);
            const uint8_t b = buf[pos++];
            v |= static_cast<uint64_t>(b & 0x7f) << shift;
            if ((b & 0x80) == 0) return v;
        }
        throw ParseError("varint longer than 10 octets", pos);
    }

    uint64_t fixed(unsigned octets) {
        need(octets);
        uint64_t v = 0;
        for (unsigned i = 0; i < octets; ++i) v |= static_cast<uint64_t>(buf[pos++]) << (8 * i);
        return v;
    }

    std::span<const uint8_t> bytes(size_t n) {
        need(n);
        auto s = buf.subspan(pos, n);
        pos += n;
        return s;
    }

    void skip(uint32_t wire_type) {
        switch (wire_type) {
            case kVarint: varint(); break;
            case kFixed64: fixed(8); break;
            case kLengthDelimited: bytes(varint()); break;
            case kFixed32: fixed(4); break;
            default: throw ParseError("unsupported wire type " + std::to_string(wire_type), pos);
        }
    }
};

void expect_wire_type(const Reader& r, uint32_t got, uint32_t want, const char* field) {
    if (got != want) {
        throw ParseError(std::string(field) + " has wire type " + std::to_string(got) + ", expected " +
                             std::to_string(want),
                         r.pos);
    }
}

msg::ModelIdentifier read_identifier(Reader& r) {
    const uint64_t len = r.varint();
    if (len != 16) throw ParseError("model_identifier must be 16 octets, got " + std::to_string(len), r.pos);
    const auto raw = r.bytes(16);
    msg::ModelIdentifier id;
    std::copy(raw.begin(), raw.end(), id.uuid.begin());
    return id;
}

void read_packed_params(Reader& r, msg::ModelParams& params) {
    const uint64_t len = r.varint();
    if (len % 4 != 0) throw ParseError("packed float payload not a multiple of 4 octets", r.pos);
    const auto raw = r.bytes(len);
    for (size_t i = 0; i < raw.size(); i += 4) {
        uint32_t le = 0;
        for (size_t j = 0; j < 4; ++j) le |= static_cast<uint32_t>(raw[i + j]) << (8 * j);
        params.values.push_back(std::bit_cast<float>(le));
    }
}

msg::ModelMetadata read_metadata(Reader& outer) {
    const uint64_t len = outer.varint();
    Reader r{outer.bytes(len)};
    msg::ModelMetadata meta;
    bool have_train = false;
    bool have_val = false;
    while (!r.done()) {
        const uint64_t key = r.varint();
        const auto field = static_cast<uint32_t>(key >> 3);
        const auto wire_type = static_cast<uint32_t>(key & 7);
        switch (field) {
            case 1:
                expect_wire_type(r, wire_type, kFixed64, "train_loss");
                meta.train_loss = std::bit_cast<double>(r.fixed(8));
                have_train = true;
                break;
            case 2:
                expect_wire_type(r, wire_type, kFixed64, "val_loss");
                meta.val_loss = std::bit_cast<double>(r.fixed(8));
                have_val = true;
                break;
            default:
                r.skip(wire_type);
        }
    }
    if (!have_train) throw ParseError("missing required field train_loss", outer.pos);
    if (!have_val) throw ParseError("missing required field val_loss", outer.pos);
    return meta;
}

void require(bool present, const char* field, const Reader& r) {
    if (!present) throw ParseError(std::string("missing required field ") + field, r.pos);
}

}  // namespace

std::vector<uint8_t> pb_encode(const msg::GlobalModelUpdate& m) {
    std::vector<uint8_t> out;
    write_identifier(out, m.model_identifier);
    write_tag(out, 2, kVarint);
    write_varint(out, m.model_round);
    write_packed_params(out, m.model_params);
    write_tag(out, 4, kVarint);
    out.push_back(m.continue_training ? 1 : 0);
    return out;
}

std::vector<uint8_t> pb_encode(const msg::LocalDataSetUpdate& m) {
    std::vector<uint8_t> out;
    write_tag(out, 1, kVarint);
    write_varint(out, m.local_dataset_size);
    if (m.metadata) write_metadata(out, 2, *m.metadata);
    return out;
}

std::vector<uint8_t> pb_encode(const msg::LocalModelUpdate& m) {
    std::vector<uint8_t> out;
    write_identifier(out, m.model_identifier);
    write_tag(out, 2, kVarint);
    write_varint(out, m.model_round);
    write_packed_params(out, m.model_params);
    write_metadata(out, 4, m.metadata);
    return out;
}

msg::GlobalModelUpdate pb_decode_global(std::span<const uint8_t> buf) {
    Reader r{buf};
    msg::GlobalModelUpdate m;
    m.model_params.encoding = msg::TypedArray{cbor::FloatWidth::Single};
    bool have_id = false;
    bool have_flag = false;
    while (!r.done()) {
        const uint64_t key = r.varint();
        const auto field = static_cast<uint32_t>(key >> 3);
        const auto wire_type = static_cast<uint32_t>(key & 7);
        switch (field) {
            case 1:
                expect_wire_type(r, wire_type, kLengthDelimited, "model_identifier");
                m.model_identifier = read_identifier(r);
                have_id = true;
                break;
            case 2:
                expect_wire_type(r, wire_type, kVarint, "model_round");
                m.model_round = r.varint();
                break;
            case 3:
                if (wire_type == kFixed32) {  // non-packed repeated entry
                    m.model_params.values.push_back(std::bit_cast<float>(static_cast<uint32_t>(r.fixed(4))));
                } else {
                    expect_wire_type(r, wire_type, kLengthDelimited, "model_params");
                    read_packed_params(r, m.model_params);
                }
                break;
            case 4:
                expect_wire_type(r, wire_type, kVarint, "continue_training");
                m.continue_training = r.varint() != 0;
                have_flag = true;
                break;
            default:
                r.skip(wire_type);
        }
    }
    require(have_id, "model_identifier", r);
    require(have_flag, "continue_training", r);
    return m;
}

msg::LocalDataSetUpdate pb_decode_dataset_update(std::span<const uint8_t> buf) {
    Reader r{buf};
    msg::LocalDataSetUpdate m;
    bool have_size = false;
    while (!r.done()) {
        const uint64_t key = r.varint();
        const auto field = static_cast<uint32_t>(key >> 3);
        const auto wire_type = static_cast<uint32_t>(key & 7);
        switch (field) {
            case 1:
                expect_wire_type(r, wire_type, kVarint, "local_dataset_size");
                m.local_dataset_size = r.varint();
                have_size = true;
                break;
            case 2:
                expect_wire_type(r, wire_type, kLengthDelimited, "metadata");
                m.metadata = read_metadata(r);
                break;
            default:
                r.skip(wire_type);
        }
    }
    require(have_size, "local_dataset_size", r);
    return m;
}

msg::LocalModelUpdate pb_decode_local_model(std::span<const uint8_t> buf) {
    Reader r{buf};
    msg::LocalModelUpdate m;
    m.model_params.encoding = msg::TypedArray{cbor::FloatWidth::Single};
    bool have_id = false;
    bool have_meta = false;
    while (!r.done()) {
        const uint64_t key = r.varint();
        const auto field = static_cast<uint32_t>(key >> 3);
        const auto wire_type = static_cast<uint32_t>(key & 7);
        switch (field) {
            case 1:
                expect_wire_type(r, wire_type, kLengthDelimited, "model_identifier");
                m.model_identifier = read_identifier(r);
                have_id = true;
                break;
            case 2:
                expect_wire_type(r, wire_type, kVarint, "model_round");
                m.model_round = r.varint();
                break;
            case 3:
                if (wire_type == kFixed32) {
                    m.model_params.values.push_back(std::bit_cast<float>(static_cast<uint32_t>(r.fixed(4))));
                } else {
                    expect_wire_type(r, wire_type, kLengthDelimited, "model_params");
                    read_packed_params(r, m.model_params);
                }
                break;
            case 4:
                expect_wire_type(r, wire_type, kLengthDelimited, "metadata");
                m.metadata = read_metadata(r);
                have_meta = true;
                break;
            default:
                r.skip(wire_type);
        }
    }
    require(have_id, "model_identifier", r);
    require(have_meta, "metadata", r);
    return m;
}

}  // namespace tinyfl::alt
