#include "dski/index.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "dski/codec.hpp"
#include "dski/error.hpp"

namespace dski {

namespace {

std::string lowercase(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

void write_u32(std::ostream& out, uint32_t v) {
    uint8_t buf[4] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8),
                      static_cast<uint8_t>(v >> 16),
                      static_cast<uint8_t>(v >> 24)};
    out.write(reinterpret_cast<const char*>(buf), 4);
}

void write_u64(std::ostream& out, uint64_t v) {
    uint8_t buf[8];
    for (int i = 0; i < 8; ++i) {
        buf[i] = static_cast<uint8_t>(v >> (8 * i));
    }
    out.write(reinterpret_cast<const char*>(buf), 8);
}

void write_u16(std::ostream& out, uint16_t v) {
    uint8_t buf[2] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8)};
    out.write(reinterpret_cast<const char*>(buf), 2);
}

void write_f64(std::ostream& out, double v) {
    write_u64(out, std::bit_cast<uint64_t>(v));
}

void write_string(std::ostream& out, const std::string& s) {
    if (s.size() > 0xFFFF) {
        throw data_error("string too long for index file: " + s.substr(0, 32));
    }
    write_u16(out, static_cast<uint16_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

class reader {
  public:
    explicit reader(std::istream& in) : in_(in) {}

    void read(void* dst, size_t n) {
        in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
        if (static_cast<size_t>(in_.gcount()) != n) {
            throw load_error(load_error::reason::truncated,
                             "index file truncated");
        }
    }

    uint16_t u16() {
        uint8_t b[2];
        read(b, 2);
        return static_cast<uint16_t>(b[0] | b[1] << 8);
    }

    uint32_t u32() {
        uint8_t b[4];
        read(b, 4);
        return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
               static_cast<uint32_t>(b[2]) << 16 |
               static_cast<uint32_t>(b[3]) << 24;
    }

    uint64_t u64() {
        uint8_t b[8];
        read(b, 8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<uint64_t>(b[i]) << (8 * i);
        }
        return v;
    }

    double f64() { return std::bit_cast<double>(u64()); }

    std::string string() {
        std::string s(u16(), '\0');
        read(s.data(), s.size());
        return s;
    }

  private:
    std::istream& in_;
};

}  // namespace

corpus_doc parse_corpus_line(std::string_view line, size_t line_no) {
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    const auto fail = [&](const std::string& what) -> data_error {
        std::ostringstream msg;
        msg << "corpus line " << line_no << ": " << what;
        return data_error(msg.str());
    };
    if (j.is_discarded() || !j.is_object()) {
        throw fail("not a JSON object");
    }
    if (!j.contains("id") || !j["id"].is_string()) {
        throw fail("missing string field \"id\"");
    }

    corpus_doc doc;
    doc.id = j["id"].get<std::string>();

    std::map<std::string, uint32_t> tf;
    if (j.contains("tf")) {
        if (!j["tf"].is_object()) {
            throw fail("\"tf\" must be an object");
        }
        for (const auto& [term, value] : j["tf"].items()) {
            if (!value.is_number_integer() || value.get<int64_t>() < 0) {
                throw fail("tf for term \"" + term +
                           "\" must be a non-negative integer");
            }
            const auto count = static_cast<uint32_t>(value.get<int64_t>());
            if (count > 0) {
                tf[lowercase(term)] += count;
            }
        }
    }
    std::map<std::string, double> impact;
    if (j.contains("impact")) {
        if (!j["impact"].is_object()) {
            throw fail("\"impact\" must be an object");
        }
        for (const auto& [term, value] : j["impact"].items()) {
            if (!value.is_number() || value.get<double>() < 0.0) {
                throw fail("impact for term \"" + term +
                           "\" must be a non-negative number");
            }
            const double w = value.get<double>();
            if (w > 0.0) {
                auto [it, inserted] = impact.emplace(lowercase(term), w);
                if (!inserted) {
                    it->second = std::max(it->second, w);
                }
            }
        }
    }
    doc.tf.assign(tf.begin(), tf.end());
    doc.impact.assign(impact.begin(), impact.end());
    return doc;
}

std::vector<corpus_doc> read_corpus_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw io_error("cannot open corpus file: " + path);
    }
    std::vector<corpus_doc> docs;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        docs.push_back(parse_corpus_line(line, line_no));
    }
    return docs;
}

const posting_list* inverted_index::find_list(std::string_view term) const {
    const auto it = vocab_.find(std::string(term));
    return it == vocab_.end() ? nullptr : &lists[it->second];
}

uint64_t inverted_index::num_postings() const {
    uint64_t n = 0;
    for (const posting_list& list : lists) {
        n += list.doc_count;
    }
    return n;
}

uint64_t inverted_index::num_blocks() const {
    uint64_t n = 0;
    for (const posting_list& list : lists) {
        n += list.blocks.size();
    }
    return n;
}

void inverted_index::rebuild_vocabulary() {
    vocab_.clear();
    vocab_.reserve(terms.size());
    for (uint32_t i = 0; i < terms.size(); ++i) {
        vocab_.emplace(terms[i], i);
    }
}

inverted_index build_index(std::span<const corpus_doc> docs,
                           const build_config& config) {
    if (config.partition.target_size < 1) {
        throw config_error("build_index: block target size must be >= 1");
    }

    inverted_index index;
    index.stats.num_docs = docs.size();
    index.doc_names.reserve(docs.size());

    // Pass 1: doc table, lengths, document frequencies.
    std::unordered_map<std::string, uint32_t> seen_ids;
    std::vector<uint32_t> doc_len(docs.size(), 0);
    std::unordered_map<std::string, uint32_t> doc_freq;
    uint64_t total_len = 0;
    for (uint32_t d = 0; d < docs.size(); ++d) {
        if (!seen_ids.emplace(docs[d].id, d).second) {
            throw data_error("duplicate document id: " + docs[d].id);
        }
        index.doc_names.push_back(docs[d].id);
        for (const auto& [term, count] : docs[d].tf) {
            doc_len[d] += count;
            ++doc_freq[term];
        }
        total_len += doc_len[d];
    }
    index.stats.avg_doc_len =
        docs.empty() ? 0.0
                     : static_cast<double>(total_len) / static_cast<double>(docs.size());

    // Pass 2: raw per-record weights; postings accumulate in doc id order.
    struct raw_record {
        uint32_t doc_id;
        double bm25;
        double learned;
    };
    std::unordered_map<std::string, std::vector<raw_record>> postings;
    double max_weight = 0.0;
    for (uint32_t d = 0; d < docs.size(); ++d) {
        std::map<std::string, raw_record> merged;
        for (const auto& [term, count] : docs[d].tf) {
            const double w = bm25_weight(count, doc_freq.at(term), doc_len[d],
                                         index.stats, config.k1, config.b);
            merged[term] = {d, w, 0.0};
        }
        for (const auto& [term, w] : docs[d].impact) {
            auto [it, inserted] = merged.emplace(term, raw_record{d, 0.0, w});
            if (!inserted) {
                it->second.learned = w;
            }
        }
        for (const auto& [term, rec] : merged) {
            postings[term].push_back(rec);
            max_weight = std::max({max_weight, rec.bm25, rec.learned});
        }
    }

    index.scale = max_weight > 0.0 ? 65535.0 / max_weight : 1.0;

    index.terms.reserve(postings.size());
    for (const auto& [term, run] : postings) {
        index.terms.push_back(term);
    }
    std::sort(index.terms.begin(), index.terms.end());

    index.lists.reserve(index.terms.size());
    std::vector<posting_record> run;
    for (uint32_t t = 0; t < index.terms.size(); ++t) {
        run.clear();
        for (const raw_record& rec : postings.at(index.terms[t])) {
            const posting_record q{rec.doc_id,
                                   quantize_weight(rec.bm25, index.scale),
                                   quantize_weight(rec.learned, index.scale)};
            if (q.w_bm25 == 0 && q.w_learned == 0) {
                continue;  // weight vanished under quantization
            }
            run.push_back(q);
        }
        posting_list list;
        list.term_id = t;
        list.doc_count = static_cast<uint32_t>(run.size());
        list.blocks = partition_blocks(run, config.partition);
        for (const posting_block& block : list.blocks) {
            list.list_max_bm25 = std::max(list.list_max_bm25, block.max_bm25);
            list.list_max_learned =
                std::max(list.list_max_learned, block.max_learned);
        }
        index.lists.push_back(std::move(list));
    }

    // Drop terms whose runs vanished entirely.
    std::vector<std::string> kept_terms;
    std::vector<posting_list> kept_lists;
    for (uint32_t t = 0; t < index.terms.size(); ++t) {
        if (index.lists[t].doc_count > 0) {
            index.lists[t].term_id = static_cast<uint32_t>(kept_lists.size());
            kept_terms.push_back(std::move(index.terms[t]));
            kept_lists.push_back(std::move(index.lists[t]));
        }
    }
    index.terms = std::move(kept_terms);
    index.lists = std::move(kept_lists);

    index.rebuild_vocabulary();
    return index;
}

inverted_index build_index_from_file(const std::string& path,
                                     const build_config& config) {
    const std::vector<corpus_doc> docs = read_corpus_file(path);
    return build_index(docs, config);
}

void save_index(const inverted_index& index, std::ostream& out) {
    out.write("DSKI", 4);
    write_u32(out, inverted_index::format_version);
    write_u64(out, index.stats.num_docs);
    write_f64(out, index.stats.avg_doc_len);
    write_f64(out, index.scale);

    write_u32(out, static_cast<uint32_t>(index.doc_names.size()));
    for (const std::string& name : index.doc_names) {
        write_string(out, name);
    }

    write_u32(out, static_cast<uint32_t>(index.terms.size()));
    for (uint32_t t = 0; t < index.terms.size(); ++t) {
        write_string(out, index.terms[t]);
        const posting_list& list = index.lists[t];
        write_u32(out, list.doc_count);
        write_u16(out, list.list_max_bm25);
        write_u16(out, list.list_max_learned);
        write_u32(out, static_cast<uint32_t>(list.blocks.size()));
        for (const posting_block& block : list.blocks) {
            write_u32(out, block.max_doc_id);
            write_u16(out, block.max_bm25);
            write_u16(out, block.max_learned);
            write_u32(out, block.record_count);
            write_u32(out, static_cast<uint32_t>(block.payload.size()));
            out.write(reinterpret_cast<const char*>(block.payload.data()),
                      static_cast<std::streamsize>(block.payload.size()));
        }
    }
    if (!out) {
        throw io_error("failed writing index stream");
    }
}

void save_index(const inverted_index& index, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw io_error("cannot open index file for writing: " + path);
    }
    save_index(index, out);
}

inverted_index load_index(std::istream& in) {
    reader r(in);
    char magic[4];
    r.read(magic, 4);
    if (std::string_view(magic, 4) != "DSKI") {
        throw load_error(load_error::reason::bad_magic,
                         "not an index file (bad magic)");
    }
    const uint32_t version = r.u32();
    if (version != inverted_index::format_version) {
        throw load_error(load_error::reason::bad_version,
                         "unsupported index format version " +
                             std::to_string(version));
    }

    inverted_index index;
    index.stats.num_docs = r.u64();
    index.stats.avg_doc_len = r.f64();
    index.scale = r.f64();

    const uint32_t doc_count = r.u32();
    index.doc_names.reserve(doc_count);
    for (uint32_t d = 0; d < doc_count; ++d) {
        index.doc_names.push_back(r.string());
    }

    const uint32_t term_count = r.u32();
    index.terms.reserve(term_count);
    index.lists.reserve(term_count);
    for (uint32_t t = 0; t < term_count; ++t) {
        index.terms.push_back(r.string());
        posting_list list;
        list.term_id = t;
        list.doc_count = r.u32();
        list.list_max_bm25 = r.u16();
        list.list_max_learned = r.u16();
        const uint32_t block_count = r.u32();
        list.blocks.reserve(block_count);
        for (uint32_t b = 0; b < block_count; ++b) {
            posting_block block;
            block.max_doc_id = r.u32();
            block.max_bm25 = r.u16();
            block.max_learned = r.u16();
            block.record_count = r.u32();
            const uint32_t payload_size = r.u32();
            block.payload.resize(payload_size);
            r.read(block.payload.data(), payload_size);
            list.blocks.push_back(std::move(block));
        }
        index.lists.push_back(std::move(list));
    }

    // Verify payload integrity up front so corruption surfaces at load time.
    for (const posting_list& list : index.lists) {
        for (const posting_block& block : list.blocks) {
            const auto records = decode_block(block.payload);
            if (records.size() != block.record_count ||
                (!records.empty() && records.back().doc_id != block.max_doc_id)) {
                throw load_error(load_error::reason::corrupt,
                                 "block metadata disagrees with payload");
            }
        }
    }

    index.rebuild_vocabulary();
    return index;
}

inverted_index load_index(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("cannot open index file: " + path);
    }
    return load_index(in);
}

}  // namespace dski
