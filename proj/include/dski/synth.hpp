#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "dski/index.hpp"
#include "dski/metrics.hpp"
#include "dski/retrieval.hpp"

namespace dski {

// Shape of the generated collection. The learned channel draws weights from
// Beta(beta_a, beta_b); term frequencies for the bm25 channel are driven by
// the mirrored Beta(beta_b, beta_a) so the two channels skew in opposite
// directions. Everything is deterministic under a fixed seed.
struct synth_spec {
    uint64_t num_docs = 10000;
    uint64_t vocab_size = 2000;
    double doc_len_mean = 60.0;       // tokens, i.e. sum of tf
    uint64_t query_count = 500;
    double query_len_mean = 5.0;      // lengths drawn uniformly around this
    double beta_a = 2.0;
    double beta_b = 8.0;
    double expansion_rate = 0.1;      // P(doc gains one expansion-only term)
    uint64_t seed = 42;

    // Secondary knobs.
    double zipf_s = 1.0;              // term popularity exponent
    double learned_scale = 10.0;      // impact = Beta draw * learned_scale
    uint32_t tf_max = 4;
    uint32_t rel_per_query = 3;       // planted judgments per query
    double plant_noise = 0.3;         // stddev of planting noise, as a
                                      // fraction of learned_scale
};

struct synth_output {
    std::vector<corpus_doc> docs;
    std::vector<query> queries;
    qrels_data qrels;
};

synth_output generate_corpus(const synth_spec& spec);

// File writers matching the build/query/eval input formats.
void write_corpus_jsonl(std::ostream& out, const std::vector<corpus_doc>& docs);
void write_queries_tsv(std::ostream& out, const std::vector<query>& queries);

// Deterministic samplers on top of mt19937_64. The standard distribution
// templates are implementation-defined, so these are hand-rolled to keep
// generated corpora byte-identical everywhere.
class sampler {
  public:
    explicit sampler(uint64_t seed) : engine_(seed) {}

    double uniform();                       // [0, 1)
    double gaussian();                      // standard normal
    double gamma(double shape);             // shape > 0, unit scale
    double beta(double a, double b);
    uint64_t poisson(double lambda);
    uint64_t uniform_int(uint64_t lo, uint64_t hi);  // inclusive

  private:
    std::mt19937_64 engine_;
};

}  // namespace dski
