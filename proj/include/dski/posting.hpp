#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace dski {

// Dual-weight posting record: one quantized weight per channel. A record
// exists only if the term touches the document in at least one channel.
struct posting_record {
    uint32_t doc_id = 0;
    uint16_t w_bm25 = 0;
    uint16_t w_learned = 0;

    bool operator==(const posting_record&) const = default;
};

// The skipping unit: a contiguous run of records with per-channel maxima
// available without decoding the payload.
struct posting_block {
    uint32_t max_doc_id = 0;
    uint16_t max_bm25 = 0;
    uint16_t max_learned = 0;
    uint32_t record_count = 0;
    std::vector<uint8_t> payload;

    bool operator==(const posting_block&) const = default;
};

struct posting_list {
    uint32_t term_id = 0;
    uint32_t doc_count = 0;
    uint16_t list_max_bm25 = 0;
    uint16_t list_max_learned = 0;
    std::vector<posting_block> blocks;

    bool operator==(const posting_list&) const = default;
};

enum class partition_strategy { fixed, variable };

struct partition_config {
    partition_strategy strategy = partition_strategy::variable;
    uint32_t target_size = 128;
    // Variable strategy: a block is closed once (block max - block mean) of
    // the learned channel would exceed slack_frac * (run learned max),
    // subject to size bounds of [0.9, 1.2] * target_size. The bounds keep
    // the mean block size within the +/-20% contract on long runs.
    double slack_frac = 0.15;
};

// Splits a doc-id-sorted record run into encoded blocks. Concatenating the
// decoded blocks reproduces the input exactly.
std::vector<posting_block> partition_blocks(std::span<const posting_record> records,
                                            const partition_config& config);

}  // namespace dski
