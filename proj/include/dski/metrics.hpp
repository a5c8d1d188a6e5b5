#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace dski {

// Relevance judgments: (query id, doc id) -> grade >= 0.
using qrels_data = std::map<std::string, std::unordered_map<std::string, int>>;

struct run_entry {
    std::string doc;
    double score = 0.0;
    uint32_t rank = 0;
};

// Per query: ranked result list with contiguous ranks 1..n and
// non-increasing scores (validated on parse).
using run_data = std::map<std::string, std::vector<run_entry>>;

// TREC formats: qrels lines "qid 0 docid grade", run lines
// "qid Q0 docid rank score tag"; whitespace-delimited.
qrels_data parse_qrels(std::istream& in);
qrels_data parse_qrels_file(const std::string& path);
run_data parse_run(std::istream& in);
run_data parse_run_file(const std::string& path);
void write_run(std::ostream& out, const run_data& run, const std::string& tag);
void write_qrels(std::ostream& out, const qrels_data& qrels);

struct metric_result {
    double value = 0.0;
    std::vector<std::string> warnings;  // run queries missing from qrels
};

// Mean over run queries of 1/rank of the first doc with grade >= 1 within
// the cutoff, else 0. Queries absent from the qrels contribute 0 and are
// listed in warnings.
metric_result mrr_at(const run_data& run, const qrels_data& qrels,
                     uint32_t cutoff);

// DCG with gain 2^grade - 1 and log2(rank + 1) discount, normalized by the
// ideal DCG; zero-ideal queries contribute 0.
metric_result ndcg_at(const run_data& run, const qrels_data& qrels,
                      uint32_t cutoff = 10);

// Mean over queries with >= 1 relevant label of
// |relevant in top-k| / |relevant|.
double recall_at(const run_data& run, const qrels_data& qrels, uint32_t k);

// Mean per-query top-k document overlap between two runs covering the same
// query ids. The denominator is the larger of the two (k-clamped) list
// sizes; two empty lists count as full overlap.
double overlap_ratio(const run_data& a, const run_data& b, uint32_t k);

// Fisher-Pearson standardized third moment g1 = m3 / m2^1.5 with biased
// central moments. Requires >= 3 samples and nonzero variance.
double skewness(std::span<const double> sample);

struct latency_summary {
    double mean_ms = 0.0;
    double p95_ms = 0.0;
    size_t count = 0;
};

// Mean and nearest-rank 95th percentile (1-based index ceil(0.95 * n) into
// the sorted times).
latency_summary summarize_latency(std::span<const double> times_ms);

}  // namespace dski
