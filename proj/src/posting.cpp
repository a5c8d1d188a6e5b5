#include "dski/posting.hpp"

#include <algorithm>

#include "dski/codec.hpp"
#include "dski/error.hpp"

namespace dski {

namespace {

posting_block make_block(std::span<const posting_record> run) {
    posting_block block;
    block.record_count = static_cast<uint32_t>(run.size());
    block.max_doc_id = run.back().doc_id;
    for (const posting_record& r : run) {
        block.max_bm25 = std::max(block.max_bm25, r.w_bm25);
        block.max_learned = std::max(block.max_learned, r.w_learned);
    }
    block.payload = encode_block(run);
    return block;
}

std::vector<posting_block> partition_fixed(std::span<const posting_record> records,
                                           uint32_t target) {
    std::vector<posting_block> blocks;
    blocks.reserve(records.size() / target + 1);
    for (size_t begin = 0; begin < records.size(); begin += target) {
        const size_t len = std::min<size_t>(target, records.size() - begin);
        blocks.push_back(make_block(records.subspan(begin, len)));
    }
    return blocks;
}

std::vector<posting_block> partition_variable(std::span<const posting_record> records,
                                              const partition_config& config) {
    const uint32_t target = config.target_size;
    const size_t min_size = std::max<size_t>(1, (target * 9 + 9) / 10);
    const size_t max_size = std::max<size_t>(min_size, (target * 12) / 10);

    uint16_t run_max = 0;
    for (const posting_record& r : records) {
        run_max = std::max(run_max, r.w_learned);
    }
    const double slack = config.slack_frac * static_cast<double>(run_max);

    std::vector<posting_block> blocks;
    size_t begin = 0;
    size_t len = 0;
    uint16_t cur_max = 0;
    double cur_sum = 0.0;
    auto flush = [&] {
        blocks.push_back(make_block(records.subspan(begin, len)));
        begin += len;
        len = 0;
        cur_max = 0;
        cur_sum = 0.0;
    };
    for (const posting_record& r : records) {
        if (len >= min_size) {
            const uint16_t next_max = std::max(cur_max, r.w_learned);
            const double next_mean = (cur_sum + r.w_learned) / (len + 1);
            if (len >= max_size || next_max - next_mean > slack) {
                flush();
            }
        }
        ++len;
        cur_max = std::max(cur_max, r.w_learned);
        cur_sum += r.w_learned;
    }
    if (len > 0) {
        flush();
    }
    return blocks;
}

}  // namespace

std::vector<posting_block> partition_blocks(std::span<const posting_record> records,
                                            const partition_config& config) {
    if (config.target_size < 1) {
        throw config_error("partition_blocks: target_size must be >= 1");
    }
    if (records.empty()) {
        return {};
    }
    for (size_t i = 1; i < records.size(); ++i) {
        if (records[i].doc_id <= records[i - 1].doc_id) {
            throw data_error("partition_blocks: records must be sorted by doc id");
        }
    }
    if (config.strategy == partition_strategy::fixed) {
        return partition_fixed(records, config.target_size);
    }
    return partition_variable(records, config);
}

}  // namespace dski
