#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "dski/bench.hpp"
#include "dski/synth.hpp"

using namespace dski;

namespace {

struct fixture {
    inverted_index index;
    std::vector<query> queries;
    qrels_data qrels;
};

const fixture& bench_fixture() {
    static const fixture fx = [] {
        synth_spec spec;
        spec.num_docs = 2500;
        spec.vocab_size = 250;
        spec.doc_len_mean = 40.0;
        spec.query_count = 30;
        spec.seed = 555;
        synth_output out = generate_corpus(spec);
        fixture f;
        f.index = build_index(out.docs);
        f.queries = std::move(out.queries);
        f.qrels = std::move(out.qrels);
        return f;
    }();
    return fx;
}

retrieval_config base_config(size_t k) {
    retrieval_config rc;
    rc.k = k;
    return rc;
}

}  // namespace

TEST_CASE("a single exhaustive row overlaps itself fully") {
    const fixture& fx = bench_fixture();
    grid_config g;
    g.label = "oracle";
    g.rc = base_config(50);
    g.rc.algo = algorithm::exhaustive;
    const experiment_report report =
        run_grid(fx.index, fx.queries, fx.qrels, {g});
    REQUIRE(report.rows.size() == 1);
    CHECK(report.rows[0].overlap == doctest::Approx(1.0));
    CHECK(report.rows[0].evals > 0);
}

TEST_CASE("grid produces one row per config with consistent counters") {
    const fixture& fx = bench_fixture();
    std::vector<grid_config> grid;
    {
        grid_config g;
        g.label = "dths";
        g.rc = base_config(20);
        grid.push_back(g);
    }
    {
        grid_config g;
        g.label = "blockmax";
        g.rc = base_config(20);
        g.rc.algo = algorithm::blockmax;
        g.rc.alpha = 0.0;
        g.rc.beta = 0.0;
        grid.push_back(g);
    }
    const experiment_report report =
        run_grid(fx.index, fx.queries, fx.qrels, grid);
    REQUIRE(report.rows.size() == 2);

    // Row counters must equal the sums of per-query traces.
    for (size_t row = 0; row < grid.size(); ++row) {
        uint64_t loaded = 0;
        uint64_t total = 0;
        uint64_t evals = 0;
        for (const query& q : fx.queries) {
            const query_trace t = run_query(fx.index, q, grid[row].rc);
            loaded += t.blocks_loaded;
            total += t.blocks_total;
            evals += t.docs_evaluated;
        }
        CHECK(report.rows[row].blocks_loaded == loaded);
        CHECK(report.rows[row].blocks_total == total);
        CHECK(report.rows[row].evals == evals);
        CHECK(report.rows[row].bload ==
              doctest::Approx(static_cast<double>(loaded) /
                              static_cast<double>(total)));
    }
}

TEST_CASE("evaluation counts drop as the over-estimation factor grows") {
    const fixture& fx = bench_fixture();
    std::vector<grid_config> grid;
    for (const double f : {1.0, 1.3, 1.5, 1.7}) {
        grid_config g;
        g.label = "fs=" + std::to_string(f);
        g.rc = base_config(50);
        g.rc.f_s = f;
        grid.push_back(g);
    }
    const experiment_report report =
        run_grid(fx.index, fx.queries, fx.qrels, grid);
    REQUIRE(report.rows.size() == 4);
    for (size_t i = 1; i < report.rows.size(); ++i) {
        CHECK(report.rows[i].evals <= report.rows[i - 1].evals);
        CHECK(report.rows[i].blocks_loaded <=
              report.rows[i - 1].blocks_loaded);
    }
}

TEST_CASE("uniform view evaluates at least as many docs as independent") {
    const fixture& fx = bench_fixture();
    std::vector<grid_config> grid(2);
    grid[0].label = "independent";
    grid[0].rc = base_config(50);
    grid[1].label = "uniform";
    grid[1].rc = base_config(50);
    grid[1].rc.view = view_mode::uniform;
    const experiment_report report =
        run_grid(fx.index, fx.queries, fx.qrels, grid);
    CHECK(report.rows[1].evals >= report.rows[0].evals);
}

TEST_CASE("report renders as table and csv") {
    const fixture& fx = bench_fixture();
    grid_config g;
    g.label = "default";
    g.rc = base_config(10);
    const experiment_report report =
        run_grid(fx.index, fx.queries, fx.qrels, {g});

    std::ostringstream table;
    print_report_table(table, report);
    CHECK(table.str().find("default") != std::string::npos);
    CHECK(table.str().find("ndcg@10") != std::string::npos);

    std::ostringstream csv;
    write_report_csv(csv, report);
    const std::string csv_text = csv.str();
    CHECK(csv_text.rfind("config,mrt_ms,p95_ms,", 0) == 0);
    // Header plus one row.
    CHECK(std::count(csv_text.begin(), csv_text.end(), '\n') == 2);
}
