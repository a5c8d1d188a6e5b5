#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "dski/index.hpp"
#include "dski/scoring.hpp"
#include "dski/topk.hpp"

namespace dski {

enum class skip_mode { st, dt };
enum class algorithm { exhaustive, blockmax, blockmax_overest, dths };

struct retrieval_config {
    size_t k = 1000;
    double alpha = 0.9;
    double beta = 0.2;
    double f_s = 1.0;
    double f_f = 1.0;
    skip_mode skip = skip_mode::dt;
    view_mode view = view_mode::independent;
    algorithm algo = algorithm::dths;

    // Throws config_error on invalid parameters.
    void validate() const;
};

struct query_term {
    std::string term;
    double weight = 1.0;
};

struct query {
    std::string id;
    std::vector<query_term> terms;
};

// Query file: one query per line, "qid<TAB>term[:weight] term[:weight] ...".
// A trailing ":number" on a token is its weight; otherwise the whole token
// is the term and the weight defaults to 1.
std::vector<query> parse_queries(const std::string& path);
query parse_query_line(std::string_view line, size_t line_no);

struct query_result {
    uint32_t doc_id = 0;
    double score = 0.0;

    bool operator==(const query_result&) const = default;
};

struct query_trace {
    uint64_t blocks_loaded = 0;
    uint64_t blocks_total = 0;
    uint64_t docs_evaluated = 0;
    uint64_t skipped_by_s = 0;
    uint64_t skipped_by_f = 0;
    uint64_t unknown_terms = 0;
    // Evaluations whose accumulated channel score exceeded the bound used
    // at the skip decision; always audited, must stay zero.
    uint64_t bound_violations = 0;
    std::chrono::microseconds elapsed{0};
    std::vector<query_result> results;
};

// Optional instrumentation hooks.
//
// on_skip fires for explicit skip decisions: the refined bound of `pivot`
// fell below a scaled threshold and docs in [pivot, next_doc) were dropped;
// next_doc == kNoDoc marks early termination (the rest of the lists).
// on_jump fires for ranges [lo, hi) discarded during pivot selection: no
// document there could reach the skip threshold even by the list maxima of
// the lists covering the range.
class traversal_probe {
  public:
    static constexpr uint32_t kNoDoc = 0xFFFFFFFFu;

    virtual ~traversal_probe() = default;
    virtual void on_skip(uint32_t /*pivot*/, uint32_t /*next_doc*/,
                         score_pair /*bound*/, double /*scaled_theta_s*/,
                         double /*scaled_theta_f*/, bool /*by_s*/) {}
    virtual void on_jump(uint32_t /*lo*/, uint32_t /*hi*/,
                         score_pair /*bound*/) {}
    virtual void on_eval(uint32_t /*doc*/, score_pair /*score*/,
                         score_pair /*bound*/) {}
};

// ST: skip iff Bound(d, alpha) < F_s * Theta_s.
// DT: skip iff Bound(d, alpha) < F_s * Theta_s
//           or Bound(d, beta)  < F_f * Theta_f.
bool skip_decision(score_pair bound, const dual_queue_state& state,
                   const retrieval_config& config);

// Runs one query against a loaded index. The index is shared read-only;
// every piece of traversal state is local, so any number of queries may run
// concurrently. Unknown query terms are dropped and counted in the trace;
// duplicated terms are merged with summed weights.
query_trace run_query(const inverted_index& index, const query& q,
                      const retrieval_config& config,
                      traversal_probe* probe = nullptr);

// Scores every candidate with RankScore(d, beta); no skipping.
query_trace exhaustive_topk(const inverted_index& index, const query& q,
                            size_t k, double beta);

// Single-queue learned-channel baseline with a threshold over-estimation
// factor; factor = 1 degenerates to rank-safe block-max pruning.
query_trace overest_traverse(const inverted_index& index, const query& q,
                             size_t k, double factor);

}  // namespace dski
