#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dski/error.hpp"
#include "dski/posting.hpp"

namespace dski {

// LEB128-style variable-byte encoding, little-endian groups of 7 bits.
void put_uvarint(std::vector<uint8_t>& out, uint64_t value);

// Reads one varint from [p, end); advances p. Throws load_error(truncated)
// when the buffer ends mid-value and load_error(corrupt) on overlong input.
uint64_t get_uvarint(const uint8_t*& p, const uint8_t* end);

// CRC-32 (IEEE 802.3, reflected polynomial 0xEDB88320).
uint32_t crc32(std::span<const uint8_t> data);

// Block payload layout:
//   varint record_count
//   varint body_size
//   u32le  crc32(body)
//   body:  per record varint doc gap (first record: doc_id + 1, then
//          doc_id - prev_doc_id), varint w_bm25, varint w_learned
//
// decode_block(encode_block(r)) == r for any strictly doc-id-sorted run.
// Corrupt payloads fail with a checksum or corruption error, never a
// silent misread.
std::vector<uint8_t> encode_block(std::span<const posting_record> records);
std::vector<posting_record> decode_block(std::span<const uint8_t> payload);

// Query-time decode into a reused buffer for payloads that were already
// verified at load time; structural bounds are still checked but the
// checksum is not recomputed.
void decode_block_trusted(std::span<const uint8_t> payload,
                          std::vector<posting_record>& out);

}  // namespace dski
