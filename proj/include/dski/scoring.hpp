#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "dski/error.hpp"

namespace dski {

// Collection-level statistics persisted in the index header. Per-document
// lengths and per-term document frequencies are build-time inputs and are
// passed to bm25_weight explicitly.
struct corpus_stats {
    uint64_t num_docs = 0;
    double avg_doc_len = 0.0;

    bool operator==(const corpus_stats&) const = default;
};

// One accumulator (or bound) per weight channel.
struct score_pair {
    double bm25 = 0.0;
    double learned = 0.0;

    bool operator==(const score_pair&) const = default;
};

// Linear-combination parameters: alpha mixes the two bound channels for
// skipping judgment, beta mixes the two rank-score channels for final
// ranking. Both weight the bm25 channel; 0 is pure learned, 1 is pure bm25.
struct mix_params {
    double alpha = 0.9;
    double beta = 0.2;
};

inline void check_mix_param(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw config_error(std::string(name) + " must lie in [0, 1]");
    }
}

// Robertson BM25 with idf = ln(1 + (N - df + 0.5) / (df + 0.5)).
// Monotonically non-decreasing in tf, non-increasing in df; tf = 0 yields 0.
inline double bm25_weight(uint32_t tf, uint32_t df, uint32_t dl,
                          const corpus_stats& stats, double k1 = 0.9,
                          double b = 0.4) {
    if (df == 0 || dl == 0) {
        throw data_error("bm25_weight: df and dl must be >= 1");
    }
    if (stats.num_docs == 0 || !(stats.avg_doc_len > 0.0)) {
        throw data_error("bm25_weight: invalid corpus statistics");
    }
    if (df > stats.num_docs) {
        throw data_error("bm25_weight: df exceeds num_docs");
    }
    if (!(k1 > 0.0) || !(b >= 0.0 && b <= 1.0)) {
        throw config_error("bm25_weight: k1 must be > 0 and b in [0, 1]");
    }
    const double n = static_cast<double>(stats.num_docs);
    const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    const double norm = k1 * (1.0 - b + b * dl / stats.avg_doc_len);
    return idf * (tf * (k1 + 1.0)) / (tf + norm);
}

// Bound(d, alpha) = alpha * Bound_B(d) + (1 - alpha) * Bound_L(d).
inline double mix_bound(score_pair bounds, double alpha) {
    check_mix_param(alpha, "alpha");
    return alpha * bounds.bm25 + (1.0 - alpha) * bounds.learned;
}

// RankScore(d, beta) = beta * RankScore_B(d) + (1 - beta) * RankScore_L(d).
inline double mix_score(score_pair scores, double beta) {
    check_mix_param(beta, "beta");
    return beta * scores.bm25 + (1.0 - beta) * scores.learned;
}

// 16-bit fixed-point quantization. Order preserving up to ties; round-trip
// error bounded by half a quantization step.
inline uint16_t quantize_weight(double w, double scale) {
    if (!(scale > 0.0)) {
        throw config_error("quantize_weight: scale must be > 0");
    }
    if (std::isnan(w) || w < 0.0) {
        throw data_error("quantize_weight: negative weight");
    }
    const double q = std::round(w * scale);
    if (q >= 65535.0) {
        return 65535;
    }
    return static_cast<uint16_t>(q);
}

inline double dequantize_weight(uint16_t q, double scale) {
    if (!(scale > 0.0)) {
        throw config_error("dequantize_weight: scale must be > 0");
    }
    return static_cast<double>(q) / scale;
}

}  // namespace dski
