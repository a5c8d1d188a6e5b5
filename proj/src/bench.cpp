#include "dski/bench.hpp"

#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "dski/error.hpp"

namespace dski {

namespace {

run_data to_run(const inverted_index& index, const std::vector<query>& queries,
                const std::vector<query_trace>& traces) {
    run_data run;
    for (size_t i = 0; i < queries.size(); ++i) {
        std::vector<run_entry>& entries = run[queries[i].id];
        entries.reserve(traces[i].results.size());
        uint32_t rank = 1;
        for (const query_result& r : traces[i].results) {
            entries.push_back({index.doc_names[r.doc_id], r.score, rank++});
        }
    }
    return run;
}

std::vector<query_trace> run_batch(const inverted_index& index,
                                   const std::vector<query>& queries,
                                   const retrieval_config& rc) {
    std::vector<query_trace> traces;
    traces.reserve(queries.size());
    for (const query& q : queries) {
        try {
            traces.push_back(run_query(index, q, rc));
        } catch (const error& e) {
            throw error("query " + q.id + " failed: " + e.what());
        }
    }
    return traces;
}

}  // namespace

experiment_report run_grid(const inverted_index& index,
                           const std::vector<query>& queries,
                           const qrels_data& qrels,
                           const std::vector<grid_config>& configs) {
    for (const grid_config& cfg : configs) {
        cfg.rc.validate();
    }

    experiment_report report;
    std::map<std::pair<double, size_t>, run_data> references;
    for (const grid_config& cfg : configs) {
        // Warm pass, untimed: posting data ends up decoded once so the timed
        // pass measures steady-state traversal.
        run_batch(index, queries, cfg.rc);
        const std::vector<query_trace> traces =
            run_batch(index, queries, cfg.rc);

        report_row row;
        row.label = cfg.label;
        std::vector<double> times_ms;
        times_ms.reserve(traces.size());
        for (const query_trace& t : traces) {
            row.blocks_loaded += t.blocks_loaded;
            row.blocks_total += t.blocks_total;
            row.evals += t.docs_evaluated;
            times_ms.push_back(
                static_cast<double>(t.elapsed.count()) / 1000.0);
        }
        row.bload = row.blocks_total == 0
                        ? 0.0
                        : static_cast<double>(row.blocks_loaded) /
                              static_cast<double>(row.blocks_total);
        const latency_summary lat = summarize_latency(times_ms);
        row.mrt_ms = lat.mean_ms;
        row.p95_ms = lat.p95_ms;

        const run_data run = to_run(index, queries, traces);
        row.mrr10 = mrr_at(run, qrels, 10).value;
        row.ndcg10 = ndcg_at(run, qrels, 10).value;
        row.recall = recall_at(run, qrels, static_cast<uint32_t>(cfg.rc.k));

        const std::pair<double, size_t> ref_key{cfg.rc.beta, cfg.rc.k};
        auto ref = references.find(ref_key);
        if (ref == references.end()) {
            std::vector<query_trace> ref_traces;
            ref_traces.reserve(queries.size());
            for (const query& q : queries) {
                ref_traces.push_back(
                    exhaustive_topk(index, q, cfg.rc.k, cfg.rc.beta));
            }
            ref = references
                      .emplace(ref_key, to_run(index, queries, ref_traces))
                      .first;
        }
        row.overlap =
            overlap_ratio(run, ref->second, static_cast<uint32_t>(cfg.rc.k));

        report.rows.push_back(std::move(row));
    }
    return report;
}

void print_report_table(std::ostream& out, const experiment_report& report) {
    size_t label_width = 8;
    for (const report_row& row : report.rows) {
        label_width = std::max(label_width, row.label.size() + 2);
    }
    out << std::left << std::setw(static_cast<int>(label_width)) << "config"
        << std::right << std::setw(14) << "time_ms" << std::setw(9) << "mrr@10"
        << std::setw(9) << "ndcg@10" << std::setw(9) << "recall"
        << std::setw(10) << "overlap" << std::setw(9) << "bload"
        << std::setw(12) << "evals" << '\n';
    for (const report_row& row : report.rows) {
        std::ostringstream time;
        time << std::fixed << std::setprecision(1) << row.mrt_ms << '('
             << row.p95_ms << ')';
        out << std::left << std::setw(static_cast<int>(label_width))
            << row.label << std::right << std::setw(14) << time.str()
            << std::fixed << std::setprecision(4) << std::setw(9) << row.mrr10
            << std::setw(9) << row.ndcg10 << std::setw(9) << row.recall
            << std::setw(10) << row.overlap << std::setprecision(2)
            << std::setw(8) << 100.0 * row.bload << '%' << std::setw(12)
            << row.evals << '\n';
    }
}

void write_report_csv(std::ostream& out, const experiment_report& report) {
    out << "config,mrt_ms,p95_ms,mrr10,ndcg10,recall,overlap,bload,"
           "blocks_loaded,blocks_total,evals\n";
    for (const report_row& row : report.rows) {
        out << row.label << ',' << row.mrt_ms << ',' << row.p95_ms << ','
            << row.mrr10 << ',' << row.ndcg10 << ',' << row.recall << ','
            << row.overlap << ',' << row.bload << ',' << row.blocks_loaded
            << ',' << row.blocks_total << ',' << row.evals << '\n';
    }
}

}  // namespace dski
