#include "dski/synth.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "dski/error.hpp"

namespace dski {

double sampler::uniform() {
    // 53-bit mantissa draw in [0, 1).
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double sampler::gaussian() {
    // Box-Muller; one value per call keeps the stream layout simple.
    double u1 = uniform();
    while (u1 <= 0.0) {
        u1 = uniform();
    }
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double sampler::gamma(double shape) {
    // Marsaglia-Tsang squeeze method; shape < 1 boosted via the power trick.
    if (shape < 1.0) {
        const double u = std::max(uniform(), 1e-300);
        return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
        double x = 0.0;
        double v = 0.0;
        do {
            x = gaussian();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) {
            return d * v;
        }
        if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
            return d * v;
        }
    }
}

double sampler::beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    return x / (x + y);
}

uint64_t sampler::poisson(double lambda) {
    if (lambda <= 0.0) {
        return 0;
    }
    // Knuth's product method; fine for the moderate lambdas used here.
    const double limit = std::exp(-lambda);
    uint64_t k = 0;
    double p = 1.0;
    do {
        ++k;
        p *= uniform();
    } while (p > limit);
    return k - 1;
}

uint64_t sampler::uniform_int(uint64_t lo, uint64_t hi) {
    const uint64_t span = hi - lo + 1;
    return lo + static_cast<uint64_t>(uniform() * static_cast<double>(span)) %
                    span;
}

namespace {

std::string padded_name(const char* prefix, uint64_t i, int width) {
    std::ostringstream out;
    out << prefix << std::setw(width) << std::setfill('0') << i;
    return out.str();
}

// Zipf-over-rank CDF for term popularity; drawing is a binary search.
std::vector<double> zipf_cdf(uint64_t n, double s) {
    std::vector<double> cdf(n);
    double total = 0.0;
    for (uint64_t i = 0; i < n; ++i) {
        total += 1.0 / std::pow(static_cast<double>(i + 1), s);
        cdf[i] = total;
    }
    for (double& c : cdf) {
        c /= total;
    }
    return cdf;
}

uint64_t draw_term(const std::vector<double>& cdf, sampler& rng) {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return static_cast<uint64_t>(
        std::min<std::ptrdiff_t>(it - cdf.begin(),
                                 static_cast<std::ptrdiff_t>(cdf.size()) - 1));
}

}  // namespace

synth_output generate_corpus(const synth_spec& spec) {
    if (spec.num_docs < 1 || spec.vocab_size < 1 || spec.query_count < 1) {
        throw config_error("generate_corpus: counts must be >= 1");
    }
    if (!(spec.expansion_rate >= 0.0 && spec.expansion_rate <= 1.0)) {
        throw config_error("generate_corpus: expansion_rate must lie in [0, 1]");
    }
    if (!(spec.beta_a > 0.0 && spec.beta_b > 0.0)) {
        throw config_error("generate_corpus: Beta parameters must be > 0");
    }

    sampler rng(spec.seed);
    synth_output out;
    const int term_width =
        static_cast<int>(std::to_string(spec.vocab_size - 1).size());
    std::vector<std::string> vocab(spec.vocab_size);
    for (uint64_t t = 0; t < spec.vocab_size; ++t) {
        vocab[t] = padded_name("t", t, term_width);
    }
    const std::vector<double> cdf = zipf_cdf(spec.vocab_size, spec.zipf_s);

    // tf is driven by the mirrored Beta so the computed bm25 weights skew
    // opposite to the learned weights.
    const double tf_latent_mean = spec.beta_b / (spec.beta_a + spec.beta_b);
    const double mean_tf = 1.0 + tf_latent_mean * (spec.tf_max - 1);
    const double distinct_mean = std::max(1.0, spec.doc_len_mean / mean_tf);

    const double impact_floor = 0.01 * spec.learned_scale;
    const int doc_width =
        static_cast<int>(std::to_string(spec.num_docs - 1).size());

    out.docs.reserve(spec.num_docs);
    for (uint64_t d = 0; d < spec.num_docs; ++d) {
        corpus_doc doc;
        doc.id = padded_name("d", d, doc_width);

        const uint64_t n_distinct = std::max<uint64_t>(1, rng.poisson(distinct_mean));
        std::unordered_set<uint64_t> present;
        while (present.size() < n_distinct && present.size() < spec.vocab_size) {
            present.insert(draw_term(cdf, rng));
        }
        std::vector<uint64_t> terms(present.begin(), present.end());
        std::sort(terms.begin(), terms.end());

        for (uint64_t t : terms) {
            const double latent = rng.beta(spec.beta_b, spec.beta_a);
            const uint32_t tf = 1 + static_cast<uint32_t>(std::lround(
                                        latent * (spec.tf_max - 1)));
            const double impact = std::max(
                impact_floor, rng.beta(spec.beta_a, spec.beta_b) * spec.learned_scale);
            doc.tf.emplace_back(vocab[t], tf);
            doc.impact.emplace_back(vocab[t], impact);
        }
        if (rng.uniform() < spec.expansion_rate) {
            uint64_t t = draw_term(cdf, rng);
            for (int tries = 0; tries < 16 && present.contains(t); ++tries) {
                t = draw_term(cdf, rng);
            }
            if (!present.contains(t)) {
                const double impact = std::max(
                    impact_floor,
                    rng.beta(spec.beta_a, spec.beta_b) * spec.learned_scale);
                doc.impact.emplace_back(vocab[t], impact);
                std::sort(doc.impact.begin(), doc.impact.end());
            }
        }
        out.docs.push_back(std::move(doc));
    }

    // Queries draw terms without replacement; lengths vary uniformly within
    // +/-20% of the requested mean.
    const uint64_t len_lo = std::max<uint64_t>(
        1, static_cast<uint64_t>(std::floor(spec.query_len_mean * 0.8)));
    const uint64_t len_hi = std::max(
        len_lo, static_cast<uint64_t>(std::ceil(spec.query_len_mean * 1.2)));
    const int query_width =
        static_cast<int>(std::to_string(spec.query_count - 1).size());
    out.queries.reserve(spec.query_count);
    for (uint64_t i = 0; i < spec.query_count; ++i) {
        query q;
        q.id = padded_name("q", i, query_width);
        const uint64_t len =
            std::min<uint64_t>(rng.uniform_int(len_lo, len_hi), spec.vocab_size);
        // Natural-query shape: one popularity-weighted term plus salient
        // terms drawn flat over the vocabulary (mostly tail ranks).
        std::unordered_set<uint64_t> chosen;
        for (uint64_t j = 0; j < len; ++j) {
            uint64_t t = j == 0 ? draw_term(cdf, rng)
                                : rng.uniform_int(0, spec.vocab_size - 1);
            while (chosen.contains(t)) {
                t = rng.uniform_int(0, spec.vocab_size - 1);
            }
            chosen.insert(t);
        }
        std::vector<uint64_t> terms(chosen.begin(), chosen.end());
        std::sort(terms.begin(), terms.end());
        for (uint64_t t : terms) {
            q.terms.push_back({vocab[t], 1.0});
        }
        out.queries.push_back(std::move(q));
    }

    // Plant relevance from the learned channel plus noise: bm25-style
    // ranking stays informative but imperfect.
    std::unordered_map<std::string, std::vector<std::pair<uint32_t, double>>>
        impact_lists;
    for (uint32_t d = 0; d < out.docs.size(); ++d) {
        for (const auto& [term, w] : out.docs[d].impact) {
            impact_lists[term].emplace_back(d, w);
        }
    }
    const double noise_sd = spec.plant_noise * spec.learned_scale;
    for (const query& q : out.queries) {
        std::unordered_map<uint32_t, double> scores;
        for (const query_term& t : q.terms) {
            const auto it = impact_lists.find(t.term);
            if (it == impact_lists.end()) {
                continue;
            }
            for (const auto& [doc, w] : it->second) {
                scores[doc] += w;
            }
        }
        std::vector<std::pair<uint32_t, double>> ranked(scores.begin(),
                                                        scores.end());
        for (auto& [doc, score] : ranked) {
            score += noise_sd * rng.gaussian();
        }
        std::sort(ranked.begin(), ranked.end(),
                  [](const auto& a, const auto& b) {
                      if (a.second != b.second) {
                          return a.second > b.second;
                      }
                      return a.first < b.first;
                  });
        const size_t n_rel =
            std::min<size_t>(spec.rel_per_query, ranked.size());
        for (size_t r = 0; r < n_rel; ++r) {
            const int grade = r == 0 ? 3 : (r == 1 ? 2 : 1);
            out.qrels[q.id][out.docs[ranked[r].first].id] = grade;
        }
    }
    return out;
}

void write_corpus_jsonl(std::ostream& out, const std::vector<corpus_doc>& docs) {
    for (const corpus_doc& doc : docs) {
        nlohmann::json j;
        j["id"] = doc.id;
        nlohmann::json tf = nlohmann::json::object();
        for (const auto& [term, count] : doc.tf) {
            tf[term] = count;
        }
        nlohmann::json impact = nlohmann::json::object();
        for (const auto& [term, w] : doc.impact) {
            impact[term] = w;
        }
        j["tf"] = std::move(tf);
        j["impact"] = std::move(impact);
        out << j.dump() << '\n';
    }
}

void write_queries_tsv(std::ostream& out, const std::vector<query>& queries) {
    for (const query& q : queries) {
        out << q.id << '\t';
        for (size_t i = 0; i < q.terms.size(); ++i) {
            if (i > 0) {
                out << ' ';
            }
            out << q.terms[i].term;
            if (q.terms[i].weight != 1.0) {
                out << ':' << q.terms[i].weight;
            }
        }
        out << '\n';
    }
}

}  // namespace dski
