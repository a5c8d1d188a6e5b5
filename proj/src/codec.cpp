#include "dski/codec.hpp"

#include <array>
#include <cstring>

namespace dski {

namespace {

std::array<uint32_t, 256> make_crc_table() {
    std::array<uint32_t, 256> table{};
    for (uint32_t i = 0; i < 256; ++i) {
        uint32_t c = i;
        for (int k = 0; k < 8; ++k) {
            c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : (c >> 1);
        }
        table[i] = c;
    }
    return table;
}

const std::array<uint32_t, 256>& crc_table() {
    static const auto table = make_crc_table();
    return table;
}

}  // namespace

uint32_t crc32(std::span<const uint8_t> data) {
    const auto& table = crc_table();
    uint32_t c = 0xFFFFFFFFu;
    for (uint8_t byte : data) {
        c = table[(c ^ byte) & 0xFFu] ^ (c >> 8);
    }
    return c ^ 0xFFFFFFFFu;
}

void put_uvarint(std::vector<uint8_t>& out, uint64_t value) {
    while (value >= 0x80) {
        out.push_back(static_cast<uint8_t>((value & 0x7F) | 0x80));
        value >>= 7;
    }
    out.push_back(static_cast<uint8_t>(value));
}

uint64_t get_uvarint(const uint8_t*& p, const uint8_t* end) {
    uint64_t value = 0;
    unsigned shift = 0;
    while (true) {
        if (p == end) {
            throw load_error(load_error::reason::truncated,
                             "varint runs past end of buffer");
        }
        if (shift >= 64) {
            throw load_error(load_error::reason::corrupt, "varint too long");
        }
        const uint8_t byte = *p++;
        value |= static_cast<uint64_t>(byte & 0x7F) << shift;
        if ((byte & 0x80) == 0) {
            return value;
        }
        shift += 7;
    }
}

std::vector<uint8_t> encode_block(std::span<const posting_record> records) {
    std::vector<uint8_t> body;
    body.reserve(records.size() * 4);
    uint32_t prev = 0;
    bool first = true;
    for (const posting_record& r : records) {
        // First gap is doc_id + 1 so that doc 0 stays distinguishable from
        // an empty run; later gaps are strictly positive by sortedness.
        const uint64_t gap = first ? static_cast<uint64_t>(r.doc_id) + 1
                                   : static_cast<uint64_t>(r.doc_id) - prev;
        if (!first && r.doc_id <= prev) {
            throw data_error("encode_block: doc ids must be strictly increasing");
        }
        put_uvarint(body, gap);
        put_uvarint(body, r.w_bm25);
        put_uvarint(body, r.w_learned);
        prev = r.doc_id;
        first = false;
    }

    std::vector<uint8_t> out;
    out.reserve(body.size() + 12);
    put_uvarint(out, records.size());
    put_uvarint(out, body.size());
    const uint32_t crc = crc32(body);
    out.push_back(static_cast<uint8_t>(crc));
    out.push_back(static_cast<uint8_t>(crc >> 8));
    out.push_back(static_cast<uint8_t>(crc >> 16));
    out.push_back(static_cast<uint8_t>(crc >> 24));
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

namespace {

void decode_body(const uint8_t* p, const uint8_t* end, uint64_t count,
                 std::vector<posting_record>& records) {
    records.clear();
    records.reserve(count);
    uint64_t prev = 0;
    for (uint64_t i = 0; i < count; ++i) {
        const uint64_t gap = get_uvarint(p, end);
        const uint64_t wb = get_uvarint(p, end);
        const uint64_t wl = get_uvarint(p, end);
        const uint64_t doc = (i == 0) ? gap - 1 : prev + gap;
        if (gap == 0 || doc > 0xFFFFFFFFull || wb > 0xFFFF || wl > 0xFFFF) {
            throw load_error(load_error::reason::corrupt,
                             "block record out of range");
        }
        records.push_back({static_cast<uint32_t>(doc),
                           static_cast<uint16_t>(wb),
                           static_cast<uint16_t>(wl)});
        prev = doc;
    }
    if (p != end) {
        throw load_error(load_error::reason::corrupt,
                         "trailing bytes after block body");
    }
}

struct payload_header {
    uint64_t count;
    const uint8_t* body;
    const uint8_t* end;
    uint32_t crc;
};

payload_header parse_header(std::span<const uint8_t> payload) {
    const uint8_t* p = payload.data();
    const uint8_t* end = p + payload.size();
    payload_header h{};
    h.count = get_uvarint(p, end);
    const uint64_t body_size = get_uvarint(p, end);
    if (end - p < 4) {
        throw load_error(load_error::reason::truncated,
                         "block payload too short for checksum");
    }
    h.crc = static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
            static_cast<uint32_t>(p[2]) << 16 |
            static_cast<uint32_t>(p[3]) << 24;
    p += 4;
    if (static_cast<uint64_t>(end - p) != body_size) {
        throw load_error(load_error::reason::truncated,
                         "block body size mismatch");
    }
    h.body = p;
    h.end = end;
    return h;
}

}  // namespace

std::vector<posting_record> decode_block(std::span<const uint8_t> payload) {
    const payload_header h = parse_header(payload);
    if (crc32({h.body, static_cast<size_t>(h.end - h.body)}) != h.crc) {
        throw load_error(load_error::reason::checksum_mismatch,
                         "block checksum mismatch");
    }
    std::vector<posting_record> records;
    decode_body(h.body, h.end, h.count, records);
    return records;
}

void decode_block_trusted(std::span<const uint8_t> payload,
                          std::vector<posting_record>& out) {
    const payload_header h = parse_header(payload);
    decode_body(h.body, h.end, h.count, out);
}

}  // namespace dski
