#include "dski/retrieval.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include "dski/codec.hpp"
#include "dski/error.hpp"

namespace dski {

namespace {

constexpr uint32_t kNoDoc = std::numeric_limits<uint32_t>::max();

std::string lowercase(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

// Per-list traversal state. A cursor is either loaded (current block
// decoded, `doc` exact) or pending: the block index is known from metadata
// but the payload has not been decoded, and the true current doc id is the
// first doc >= pending_lb inside that block. Pending moves cost no block
// load; decoding happens only on materialization.
struct cursor {
    const posting_list* list = nullptr;
    double term_weight = 1.0;
    uint32_t slot = 0;  // canonical position among resolved query terms
    double pivot_bound = 0.0;  // weight-scaled mixed list maximum

    uint32_t block = 0;
    uint32_t pos = 0;
    uint32_t doc = 0;
    uint32_t pending_lb = 0;
    bool loaded = false;
    bool in_prefix = false;
    std::vector<posting_record> decoded;

    bool exhausted() const { return loaded && doc == kNoDoc; }

    // Sort key: exact doc when loaded, else a lower bound on it.
    uint32_t key() const { return loaded ? doc : pending_lb; }

    void set_exhausted() {
        loaded = true;
        doc = kNoDoc;
        decoded.clear();
    }

    void load(query_trace& trace) {
        decode_block_trusted(list->blocks[block].payload, decoded);
        ++trace.blocks_loaded;
        pos = 0;
        while (decoded[pos].doc_id < pending_lb) {
            ++pos;  // guaranteed in range: block max >= pending_lb
        }
        doc = decoded[pos].doc_id;
        loaded = true;
    }

    // Positions the cursor at the first doc >= lb without decoding anything.
    void seek_shallow(uint32_t lb) {
        if (exhausted() || key() >= lb) {
            return;
        }
        if (loaded && lb <= list->blocks[block].max_doc_id) {
            while (decoded[pos].doc_id < lb) {
                ++pos;
            }
            doc = decoded[pos].doc_id;
            return;
        }
        uint32_t b = block;
        const uint32_t nblocks = static_cast<uint32_t>(list->blocks.size());
        while (b < nblocks && list->blocks[b].max_doc_id < lb) {
            ++b;
        }
        if (b == nblocks) {
            set_exhausted();
            return;
        }
        block = b;
        loaded = false;
        pending_lb = lb;
    }

    void seek(uint32_t lb, query_trace& trace) {
        seek_shallow(lb);
        if (!exhausted() && !loaded) {
            load(trace);
        }
    }

    // Steps past the current record; entering the next block stays pending.
    void advance() {
        if (pos + 1 < decoded.size()) {
            ++pos;
            doc = decoded[pos].doc_id;
            return;
        }
        const uint32_t next_lb = list->blocks[block].max_doc_id + 1;
        if (++block >= list->blocks.size()) {
            set_exhausted();
            return;
        }
        loaded = false;
        pending_lb = next_lb;
    }

    // First block (at or after the current one) whose range covers `target`;
    // nullopt when the list ends before target. Metadata only.
    std::optional<uint32_t> block_for(uint32_t target) const {
        uint32_t b = block;
        const uint32_t nblocks = static_cast<uint32_t>(list->blocks.size());
        while (b < nblocks && list->blocks[b].max_doc_id < target) {
            ++b;
        }
        if (b == nblocks) {
            return std::nullopt;
        }
        return b;
    }
};

struct resolved_query {
    std::vector<cursor> cursors;  // canonical slot order
    uint64_t blocks_total = 0;
    uint64_t unknown_terms = 0;
};

resolved_query resolve_terms(const inverted_index& index, const query& q,
                             double mix_for_pivot) {
    // Duplicate terms merge with summed weights; order of first occurrence
    // is the canonical accumulation order.
    std::vector<std::pair<std::string, double>> merged;
    for (const query_term& t : q.terms) {
        const std::string term = lowercase(t.term);
        auto it = std::find_if(merged.begin(), merged.end(),
                               [&](const auto& m) { return m.first == term; });
        if (it == merged.end()) {
            merged.emplace_back(term, t.weight);
        } else {
            it->second += t.weight;
        }
    }

    resolved_query out;
    for (const auto& [term, weight] : merged) {
        const posting_list* list = index.find_list(term);
        if (list == nullptr || list->blocks.empty()) {
            ++out.unknown_terms;
            continue;
        }
        cursor c;
        c.list = list;
        c.term_weight = weight;
        c.slot = static_cast<uint32_t>(out.cursors.size());
        const score_pair list_max{
            weight * dequantize_weight(list->list_max_bm25, index.scale),
            weight * dequantize_weight(list->list_max_learned, index.scale)};
        c.pivot_bound = mix_bound(list_max, mix_for_pivot);
        out.blocks_total += list->blocks.size();
        out.cursors.push_back(std::move(c));
    }
    return out;
}

// Block-refined upper bound for `pivot`, accumulated per channel in
// canonical slot order over the cursors marked in_prefix. Evaluation walks
// the same slots in the same order, so channel-wise score <= bound holds
// exactly, including under floating-point rounding.
score_pair refined_bound(const std::vector<cursor>& cursors, uint32_t pivot,
                         double scale) {
    score_pair bound;
    for (const cursor& c : cursors) {
        if (!c.in_prefix || c.exhausted()) {
            continue;
        }
        const auto b = c.block_for(pivot);
        if (!b) {
            continue;  // list ends before pivot: cannot contain it
        }
        const posting_block& blk = c.list->blocks[*b];
        bound.bm25 += c.term_weight * dequantize_weight(blk.max_bm25, scale);
        bound.learned +=
            c.term_weight * dequantize_weight(blk.max_learned, scale);
    }
    return bound;
}

}  // namespace

void retrieval_config::validate() const {
    if (k < 1) {
        throw config_error("retrieval: k must be >= 1");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw config_error("retrieval: alpha must lie in [0, 1]");
    }
    if (!(beta >= 0.0 && beta <= 1.0)) {
        throw config_error("retrieval: beta must lie in [0, 1]");
    }
    if (!(f_s >= 1.0) || !(f_f >= 1.0)) {
        throw config_error("retrieval: over-estimation factors must be >= 1");
    }
}

bool skip_decision(score_pair bound, const dual_queue_state& state,
                   const retrieval_config& config) {
    if (mix_bound(bound, config.alpha) < config.f_s * state.q_s.threshold()) {
        return true;
    }
    if (config.skip == skip_mode::dt &&
        mix_bound(bound, config.beta) < config.f_f * state.q_f.threshold()) {
        return true;
    }
    return false;
}

query parse_query_line(std::string_view line, size_t line_no) {
    const size_t tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0) {
        std::ostringstream msg;
        msg << "query line " << line_no << ": expected \"qid<TAB>terms\"";
        throw data_error(msg.str());
    }
    query q;
    q.id = std::string(line.substr(0, tab));
    std::istringstream terms(std::string(line.substr(tab + 1)));
    std::string token;
    while (terms >> token) {
        query_term t;
        const size_t colon = token.rfind(':');
        if (colon != std::string::npos && colon + 1 < token.size()) {
            const char* first = token.data() + colon + 1;
            const char* last = token.data() + token.size();
            double w = 0.0;
            const auto [ptr, ec] = std::from_chars(first, last, w);
            if (ec == std::errc() && ptr == last && w >= 0.0) {
                t.term = lowercase(token.substr(0, colon));
                t.weight = w;
                q.terms.push_back(std::move(t));
                continue;
            }
        }
        t.term = lowercase(token);
        q.terms.push_back(std::move(t));
    }
    return q;
}

std::vector<query> parse_queries(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw io_error("cannot open queries file: " + path);
    }
    std::vector<query> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        out.push_back(parse_query_line(line, line_no));
    }
    return out;
}

query_trace run_query(const inverted_index& index, const query& q,
                      const retrieval_config& config, traversal_probe* probe) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();

    const bool dual = config.algo == algorithm::dths;
    const bool prune = config.algo != algorithm::exhaustive;
    // Single-queue algorithms rank and bound with the beta combination and
    // over-estimate via f_s; plain blockmax is pinned rank-safe.
    const double single_factor =
        config.algo == algorithm::blockmax_overest ? config.f_s : 1.0;
    const double pivot_mix = dual ? config.alpha : config.beta;

    query_trace trace;
    resolved_query rq = resolve_terms(index, q, pivot_mix);
    trace.blocks_total = rq.blocks_total;
    trace.unknown_terms = rq.unknown_terms;

    dual_queue_state queues(config.k);
    top_k_queue& q_f = queues.q_f;

    std::vector<cursor*> order;
    order.reserve(rq.cursors.size());
    for (cursor& c : rq.cursors) {
        order.push_back(&c);
    }

    const auto by_key = [](const cursor* a, const cursor* b) {
        if (a->key() != b->key()) {
            return a->key() < b->key();
        }
        return a->slot < b->slot;
    };
    // Insertion sort: the array stays nearly sorted between iterations and
    // rarely holds more than a handful of cursors.
    const auto sort_order = [&] {
        for (size_t i = 1; i < order.size(); ++i) {
            cursor* c = order[i];
            size_t j = i;
            while (j > 0 && by_key(c, order[j - 1])) {
                order[j] = order[j - 1];
                --j;
            }
            order[j] = c;
        }
    };

    while (!order.empty()) {
        std::erase_if(order, [](const cursor* c) { return c->exhausted(); });
        if (order.empty()) {
            break;
        }
        sort_order();

        const double need_s = dual ? config.f_s * queues.q_s.threshold()
                                   : single_factor * q_f.threshold();
        const double need_f = config.f_f * q_f.threshold();

        size_t pivot_idx = 0;
        if (prune) {
            double acc = 0.0;
            bool found = false;
            for (size_t i = 0; i < order.size(); ++i) {
                acc += order[i]->pivot_bound;
                if (acc >= need_s) {
                    pivot_idx = i;
                    found = true;
                    break;
                }
            }
            if (!found) {
                // No remaining document can reach the skip threshold; the
                // tail of every list is discarded.
                if (probe != nullptr) {
                    score_pair total;
                    for (const cursor& c : rq.cursors) {
                        if (c.exhausted()) {
                            continue;
                        }
                        total.bm25 +=
                            c.term_weight *
                            dequantize_weight(c.list->list_max_bm25, index.scale);
                        total.learned +=
                            c.term_weight *
                            dequantize_weight(c.list->list_max_learned,
                                              index.scale);
                    }
                    probe->on_jump(order.front()->key(),
                                   traversal_probe::kNoDoc, total);
                }
                break;
            }
        }
        if (!order[pivot_idx]->loaded) {
            order[pivot_idx]->load(trace);
            continue;  // key may have grown; re-sort and retry
        }
        const uint32_t pivot = order[pivot_idx]->doc;
        while (pivot_idx + 1 < order.size() &&
               order[pivot_idx + 1]->key() == pivot) {
            ++pivot_idx;
        }
        if (probe != nullptr && prune && order[0]->key() < pivot) {
            // Docs below the pivot are covered only by cursors whose keys
            // precede it; their summed list maxima could not reach the
            // threshold, which is what made them skippable.
            score_pair jumped;
            for (const cursor* c : order) {
                if (c->key() >= pivot) {
                    break;
                }
                jumped.bm25 += c->term_weight *
                               dequantize_weight(c->list->list_max_bm25,
                                                 index.scale);
                jumped.learned += c->term_weight *
                                  dequantize_weight(c->list->list_max_learned,
                                                    index.scale);
            }
            probe->on_jump(order[0]->key(), pivot, jumped);
        }
        for (size_t i = 0; i <= pivot_idx; ++i) {
            order[i]->in_prefix = true;
        }

        score_pair bound;
        bool skip = false;
        bool by_s = true;
        if (prune) {
            bound = refined_bound(rq.cursors, pivot, index.scale);
            if (dual) {
                const bool s_fires =
                    mix_bound(bound, config.alpha) < need_s;
                const bool f_fires =
                    config.skip == skip_mode::dt &&
                    mix_bound(bound, config.beta) < need_f;
                skip = s_fires || f_fires;
                by_s = s_fires;
            } else {
                skip = mix_bound(bound, config.beta) < need_s;
            }
        }

        if (skip) {
            uint32_t next_doc = kNoDoc;
            for (size_t i = 0; i <= pivot_idx; ++i) {
                const auto b = order[i]->block_for(pivot);
                if (b) {
                    next_doc = std::min(
                        next_doc, order[i]->list->blocks[*b].max_doc_id + 1);
                }
            }
            if (pivot_idx + 1 < order.size()) {
                next_doc = std::min(next_doc, order[pivot_idx + 1]->key());
            }
            if (probe != nullptr) {
                probe->on_skip(pivot, next_doc, bound, need_s, need_f, by_s);
            }
            if (by_s) {
                ++trace.skipped_by_s;
            } else {
                ++trace.skipped_by_f;
            }
            for (size_t i = 0; i <= pivot_idx; ++i) {
                order[i]->in_prefix = false;
                order[i]->seek_shallow(next_doc);
            }
            continue;
        }

        // Evaluate: materialize the prefix at the pivot, then accumulate
        // both channels in canonical slot order (matching refined_bound).
        for (size_t i = 0; i <= pivot_idx; ++i) {
            order[i]->seek(pivot, trace);
        }
        score_pair score;
        for (const cursor& c : rq.cursors) {
            if (!c.in_prefix || c.exhausted() || c.doc != pivot) {
                continue;
            }
            const posting_record& rec = c.decoded[c.pos];
            score.bm25 +=
                c.term_weight * dequantize_weight(rec.w_bm25, index.scale);
            score.learned +=
                c.term_weight * dequantize_weight(rec.w_learned, index.scale);
        }
        if (prune &&
            (score.bm25 > bound.bm25 || score.learned > bound.learned)) {
            ++trace.bound_violations;
        }
        if (probe != nullptr) {
            probe->on_eval(pivot, score, bound);
        }
        ++trace.docs_evaluated;

        if (dual) {
            dual_insert(queues, pivot, score, {config.alpha, config.beta},
                        config.view);
        } else {
            q_f.insert(mix_score(score, config.beta), pivot);
            q_f.refresh_threshold();
        }

        for (size_t i = 0; i <= pivot_idx; ++i) {
            order[i]->in_prefix = false;
            if (!order[i]->exhausted() && order[i]->doc == pivot) {
                order[i]->advance();
            }
        }
    }

    trace.results.reserve(q_f.size());
    for (const topk_entry& e : q_f.ranked()) {
        trace.results.push_back({e.doc_id, e.score});
    }
    trace.elapsed = std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::steady_clock::now() - start);
    return trace;
}

query_trace exhaustive_topk(const inverted_index& index, const query& q,
                            size_t k, double beta) {
    retrieval_config config;
    config.k = k;
    config.beta = beta;
    config.alpha = beta;
    config.algo = algorithm::exhaustive;
    return run_query(index, q, config);
}

query_trace overest_traverse(const inverted_index& index, const query& q,
                             size_t k, double factor) {
    retrieval_config config;
    config.k = k;
    config.beta = 0.0;  // learned channel only
    config.alpha = 0.0;
    config.f_s = factor;
    config.algo = algorithm::blockmax_overest;
    return run_query(index, q, config);
}

}  // namespace dski
