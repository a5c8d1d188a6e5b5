#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dski/index.hpp"
#include "dski/metrics.hpp"
#include "dski/retrieval.hpp"

namespace dski {

struct grid_config {
    std::string label;
    retrieval_config rc;
};

struct report_row {
    std::string label;
    double mrt_ms = 0.0;
    double p95_ms = 0.0;
    double mrr10 = 0.0;
    double ndcg10 = 0.0;
    double recall = 0.0;     // recall @ the row's k
    double overlap = 0.0;    // vs the exhaustive run with the row's beta/k
    double bload = 0.0;      // blocks loaded / blocks total over the batch
    uint64_t blocks_loaded = 0;
    uint64_t blocks_total = 0;
    uint64_t evals = 0;
};

struct experiment_report {
    std::vector<report_row> rows;
};

// Runs every configuration over the query batch. Per row the batch is run
// once untimed to warm caches, then once timed on the calling thread;
// counters come from the timed pass. Overlap compares against an exhaustive
// reference sharing the row's beta and k (cached across rows). A failing
// query aborts the grid with its id in the error.
experiment_report run_grid(const inverted_index& index,
                           const std::vector<query>& queries,
                           const qrels_data& qrels,
                           const std::vector<grid_config>& configs);

void print_report_table(std::ostream& out, const experiment_report& report);
void write_report_csv(std::ostream& out, const experiment_report& report);

}  // namespace dski
