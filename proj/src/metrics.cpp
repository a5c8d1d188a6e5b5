#include "dski/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "dski/error.hpp"

namespace dski {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> fields;
    std::string f;
    while (in >> f) {
        fields.push_back(std::move(f));
    }
    return fields;
}

[[noreturn]] void parse_fail(const char* what, size_t line_no,
                             const std::string& line) {
    std::ostringstream msg;
    msg << what << " at line " << line_no << ": " << line;
    throw data_error(msg.str());
}

int grade_of(const qrels_data& qrels, const std::string& qid,
             const std::string& doc) {
    const auto q = qrels.find(qid);
    if (q == qrels.end()) {
        return 0;
    }
    const auto d = q->second.find(doc);
    return d == q->second.end() ? 0 : d->second;
}

}  // namespace

qrels_data parse_qrels(std::istream& in) {
    qrels_data qrels;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto fields = split_ws(line);
        if (fields.size() != 4) {
            parse_fail("malformed qrels line", line_no, line);
        }
        int grade = 0;
        try {
            grade = std::stoi(fields[3]);
        } catch (const std::exception&) {
            parse_fail("bad qrels grade", line_no, line);
        }
        if (grade < 0) {
            parse_fail("negative qrels grade", line_no, line);
        }
        qrels[fields[0]][fields[2]] = grade;
    }
    return qrels;
}

qrels_data parse_qrels_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw io_error("cannot open qrels file: " + path);
    }
    return parse_qrels(in);
}

run_data parse_run(std::istream& in) {
    run_data run;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto fields = split_ws(line);
        if (fields.size() != 6) {
            parse_fail("malformed run line", line_no, line);
        }
        run_entry entry;
        entry.doc = fields[2];
        try {
            entry.rank = static_cast<uint32_t>(std::stoul(fields[3]));
            entry.score = std::stod(fields[4]);
        } catch (const std::exception&) {
            parse_fail("bad run rank or score", line_no, line);
        }
        run[fields[0]].push_back(std::move(entry));
    }
    for (auto& [qid, entries] : run) {
        std::sort(entries.begin(), entries.end(),
                  [](const run_entry& a, const run_entry& b) {
                      return a.rank < b.rank;
                  });
        for (size_t i = 0; i < entries.size(); ++i) {
            if (entries[i].rank != i + 1) {
                throw data_error("run ranks for query " + qid +
                                 " are not contiguous from 1");
            }
            if (i > 0 && entries[i].score > entries[i - 1].score) {
                throw data_error("run scores for query " + qid +
                                 " increase with rank");
            }
        }
    }
    return run;
}

run_data parse_run_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw io_error("cannot open run file: " + path);
    }
    return parse_run(in);
}

void write_run(std::ostream& out, const run_data& run, const std::string& tag) {
    for (const auto& [qid, entries] : run) {
        for (const run_entry& e : entries) {
            out << qid << " Q0 " << e.doc << ' ' << e.rank << ' '
                << std::fixed << std::setprecision(6) << e.score << ' ' << tag
                << '\n';
        }
    }
}

void write_qrels(std::ostream& out, const qrels_data& qrels) {
    for (const auto& [qid, docs] : qrels) {
        std::map<std::string, int> ordered(docs.begin(), docs.end());
        for (const auto& [doc, grade] : ordered) {
            out << qid << " 0 " << doc << ' ' << grade << '\n';
        }
    }
}

metric_result mrr_at(const run_data& run, const qrels_data& qrels,
                     uint32_t cutoff) {
    if (cutoff < 1) {
        throw config_error("mrr_at: cutoff must be >= 1");
    }
    metric_result res;
    if (run.empty()) {
        return res;
    }
    double sum = 0.0;
    for (const auto& [qid, entries] : run) {
        if (!qrels.contains(qid)) {
            res.warnings.push_back(qid);
            continue;
        }
        for (const run_entry& e : entries) {
            if (e.rank > cutoff) {
                break;
            }
            if (grade_of(qrels, qid, e.doc) >= 1) {
                sum += 1.0 / e.rank;
                break;
            }
        }
    }
    res.value = sum / static_cast<double>(run.size());
    return res;
}

metric_result ndcg_at(const run_data& run, const qrels_data& qrels,
                      uint32_t cutoff) {
    if (cutoff < 1) {
        throw config_error("ndcg_at: cutoff must be >= 1");
    }
    metric_result res;
    if (run.empty()) {
        return res;
    }
    double sum = 0.0;
    for (const auto& [qid, entries] : run) {
        const auto q = qrels.find(qid);
        if (q == qrels.end()) {
            res.warnings.push_back(qid);
            continue;
        }
        double dcg = 0.0;
        for (const run_entry& e : entries) {
            if (e.rank > cutoff) {
                break;
            }
            const int grade = grade_of(qrels, qid, e.doc);
            dcg += (std::exp2(grade) - 1.0) / std::log2(e.rank + 1.0);
        }
        std::vector<int> grades;
        grades.reserve(q->second.size());
        for (const auto& [doc, grade] : q->second) {
            grades.push_back(grade);
        }
        std::sort(grades.rbegin(), grades.rend());
        double idcg = 0.0;
        for (size_t i = 0; i < grades.size() && i < cutoff; ++i) {
            idcg += (std::exp2(grades[i]) - 1.0) / std::log2(i + 2.0);
        }
        if (idcg > 0.0) {
            sum += dcg / idcg;
        }
    }
    res.value = sum / static_cast<double>(run.size());
    return res;
}

double recall_at(const run_data& run, const qrels_data& qrels, uint32_t k) {
    if (k < 1) {
        throw config_error("recall_at: k must be >= 1");
    }
    double sum = 0.0;
    size_t counted = 0;
    for (const auto& [qid, entries] : run) {
        const auto q = qrels.find(qid);
        if (q == qrels.end()) {
            continue;
        }
        size_t relevant = 0;
        for (const auto& [doc, grade] : q->second) {
            if (grade >= 1) {
                ++relevant;
            }
        }
        if (relevant == 0) {
            continue;
        }
        size_t hit = 0;
        for (const run_entry& e : entries) {
            if (e.rank > k) {
                break;
            }
            if (grade_of(qrels, qid, e.doc) >= 1) {
                ++hit;
            }
        }
        sum += static_cast<double>(hit) / static_cast<double>(relevant);
        ++counted;
    }
    return counted == 0 ? 0.0 : sum / static_cast<double>(counted);
}

double overlap_ratio(const run_data& a, const run_data& b, uint32_t k) {
    if (k < 1) {
        throw config_error("overlap_ratio: k must be >= 1");
    }
    std::vector<std::string> only_a;
    std::vector<std::string> only_b;
    for (const auto& [qid, entries] : a) {
        if (!b.contains(qid)) {
            only_a.push_back(qid);
        }
    }
    for (const auto& [qid, entries] : b) {
        if (!a.contains(qid)) {
            only_b.push_back(qid);
        }
    }
    if (!only_a.empty() || !only_b.empty()) {
        std::ostringstream msg;
        msg << "overlap_ratio: query id mismatch;";
        if (!only_a.empty()) {
            msg << " only in first run:";
            for (const std::string& qid : only_a) {
                msg << ' ' << qid;
            }
            msg << ';';
        }
        if (!only_b.empty()) {
            msg << " only in second run:";
            for (const std::string& qid : only_b) {
                msg << ' ' << qid;
            }
        }
        throw data_error(msg.str());
    }
    if (a.empty()) {
        return 1.0;
    }

    double sum = 0.0;
    for (const auto& [qid, entries_a] : a) {
        const auto& entries_b = b.at(qid);
        std::set<std::string> top_a;
        for (const run_entry& e : entries_a) {
            if (e.rank <= k) {
                top_a.insert(e.doc);
            }
        }
        size_t inter = 0;
        size_t b_size = 0;
        for (const run_entry& e : entries_b) {
            if (e.rank > k) {
                continue;
            }
            ++b_size;
            inter += top_a.count(e.doc);
        }
        const size_t denom = std::max(top_a.size(), b_size);
        sum += denom == 0 ? 1.0
                          : static_cast<double>(inter) /
                                static_cast<double>(denom);
    }
    return sum / static_cast<double>(a.size());
}

double skewness(std::span<const double> sample) {
    if (sample.size() < 3) {
        throw data_error("skewness: need at least 3 samples");
    }
    const double n = static_cast<double>(sample.size());
    double mean = 0.0;
    for (double x : sample) {
        mean += x;
    }
    mean /= n;
    double m2 = 0.0;
    double m3 = 0.0;
    for (double x : sample) {
        const double d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= n;
    m3 /= n;
    if (m2 <= 0.0) {
        throw data_error("skewness: undefined for zero variance");
    }
    return m3 / std::pow(m2, 1.5);
}

latency_summary summarize_latency(std::span<const double> times_ms) {
    if (times_ms.empty()) {
        throw data_error("summarize_latency: empty input");
    }
    std::vector<double> sorted(times_ms.begin(), times_ms.end());
    std::sort(sorted.begin(), sorted.end());
    double sum = 0.0;
    for (double t : sorted) {
        sum += t;
    }
    const size_t n = sorted.size();
    const size_t idx = static_cast<size_t>(
        std::ceil(0.95 * static_cast<double>(n)));
    latency_summary out;
    out.count = n;
    out.mean_ms = sum / static_cast<double>(n);
    out.p95_ms = sorted[std::max<size_t>(idx, 1) - 1];
    return out;
}

}  // namespace dski
