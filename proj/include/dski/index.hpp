#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dski/posting.hpp"
#include "dski/scoring.hpp"

namespace dski {

struct build_config {
    double k1 = 0.9;
    double b = 0.4;
    partition_config partition;
};

// One parsed corpus record. "tf" feeds the bm25 channel, "impact" the
// learned channel; either map may omit terms present in the other.
// Term keys are lowercased on ingestion; entries are kept sorted by term.
struct corpus_doc {
    std::string id;
    std::vector<std::pair<std::string, uint32_t>> tf;
    std::vector<std::pair<std::string, double>> impact;
};

// Parses one newline-delimited JSON corpus record:
//   {"id": string, "tf": {term: int, ...}, "impact": {term: number, ...}}
// line_no is 1-based and is quoted in error messages.
corpus_doc parse_corpus_line(std::string_view line, size_t line_no);

std::vector<corpus_doc> read_corpus_file(const std::string& path);

class inverted_index {
  public:
    static constexpr uint32_t format_version = 1;

    corpus_stats stats;
    double scale = 1.0;
    std::vector<std::string> doc_names;   // internal doc id -> external id
    std::vector<std::string> terms;       // term id -> term, lexicographic
    std::vector<posting_list> lists;      // indexed by term id

    const posting_list* find_list(std::string_view term) const;
    uint64_t num_postings() const;
    uint64_t num_blocks() const;

    bool operator==(const inverted_index& other) const {
        return stats == other.stats && scale == other.scale &&
               doc_names == other.doc_names && terms == other.terms &&
               lists == other.lists;
    }

    // Rebuilds the term -> term_id map; called by build/load.
    void rebuild_vocabulary();

  private:
    std::unordered_map<std::string, uint32_t> vocab_;
};

inverted_index build_index(std::span<const corpus_doc> docs,
                           const build_config& config = {});
inverted_index build_index_from_file(const std::string& path,
                                     const build_config& config = {});

// Index file format (all integers little-endian): magic "DSKI", u32 format
// version, header (num_docs, avg_doc_len, scale), document table,
// vocabulary with posting data. Block payloads carry their own checksums.
void save_index(const inverted_index& index, const std::string& path);
inverted_index load_index(const std::string& path);

void save_index(const inverted_index& index, std::ostream& out);
inverted_index load_index(std::istream& in);

}  // namespace dski
