#include "dski/stats.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "dski/codec.hpp"
#include "dski/metrics.hpp"

namespace dski {

namespace {

channel_stats compute_channel(const std::vector<double>& values) {
    channel_stats cs;
    cs.count = values.size();
    if (values.empty()) {
        return cs;
    }
    cs.min = *std::min_element(values.begin(), values.end());
    cs.max = *std::max_element(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    cs.mean = sum / static_cast<double>(values.size());
    if (values.size() >= 3) {
        try {
            cs.skew = skewness(values);
        } catch (const data_error&) {
            cs.skew.reset();
        }
    }
    const double range = cs.max - cs.min;
    for (double v : values) {
        size_t bin = 0;
        if (range > 0.0) {
            bin = static_cast<size_t>((v - cs.min) / range * 20.0);
            bin = std::min<size_t>(bin, 19);
        }
        ++cs.histogram[bin];
    }
    return cs;
}

term_stats compute_term(const inverted_index& index, const posting_list& list,
                        const std::string& term) {
    std::vector<double> bm25;
    std::vector<double> learned;
    bm25.reserve(list.doc_count);
    learned.reserve(list.doc_count);
    for (const posting_block& block : list.blocks) {
        for (const posting_record& rec : decode_block(block.payload)) {
            bm25.push_back(dequantize_weight(rec.w_bm25, index.scale));
            learned.push_back(dequantize_weight(rec.w_learned, index.scale));
        }
    }
    term_stats out;
    out.term = term;
    out.bm25 = compute_channel(bm25);
    out.learned = compute_channel(learned);
    return out;
}

}  // namespace

std::vector<term_stats> index_term_stats(const inverted_index& index,
                                         const std::vector<std::string>& terms,
                                         std::vector<std::string>& unknown) {
    std::vector<term_stats> out;
    if (terms.empty()) {
        out.reserve(index.terms.size());
        for (size_t t = 0; t < index.terms.size(); ++t) {
            out.push_back(compute_term(index, index.lists[t], index.terms[t]));
        }
        return out;
    }
    for (const std::string& term : terms) {
        const posting_list* list = index.find_list(term);
        if (list == nullptr) {
            unknown.push_back(term);
            continue;
        }
        out.push_back(compute_term(index, *list, term));
    }
    return out;
}

void write_stats_csv(std::ostream& out, const std::vector<term_stats>& stats) {
    out << "term,channel,count,min,max,mean,skewness";
    for (int i = 0; i < 20; ++i) {
        out << ",h" << i;
    }
    out << '\n';
    const auto row = [&](const std::string& term, const char* channel,
                         const channel_stats& cs) {
        out << term << ',' << channel << ',' << cs.count << ',' << cs.min
            << ',' << cs.max << ',' << cs.mean << ',';
        if (cs.skew) {
            out << *cs.skew;
        } else {
            out << "undefined";
        }
        for (uint64_t h : cs.histogram) {
            out << ',' << h;
        }
        out << '\n';
    };
    for (const term_stats& ts : stats) {
        row(ts.term, "bm25", ts.bm25);
        row(ts.term, "learned", ts.learned);
    }
}

}  // namespace dski
