#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dski/index.hpp"

namespace dski {

// Distribution summary of one weight channel of one posting list, computed
// over dequantized weights. The histogram is min-max scaled into 20 equal
// bins; skewness is absent for fewer than 3 postings or zero variance.
struct channel_stats {
    uint64_t count = 0;
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    std::optional<double> skew;
    std::array<uint64_t, 20> histogram{};
};

struct term_stats {
    std::string term;
    channel_stats bm25;
    channel_stats learned;
};

// Stats for the given terms (empty selection = whole vocabulary, in term id
// order). Unknown terms are reported through `unknown` and skipped.
std::vector<term_stats> index_term_stats(const inverted_index& index,
                                         const std::vector<std::string>& terms,
                                         std::vector<std::string>& unknown);

// CSV header:
//   term,channel,count,min,max,mean,skewness,h0,...,h19
// with channel in {bm25, learned} and "undefined" in the skewness column
// when it does not exist.
void write_stats_csv(std::ostream& out, const std::vector<term_stats>& stats);

}  // namespace dski
