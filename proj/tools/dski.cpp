#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "dski/bench.hpp"
#include "dski/error.hpp"
#include "dski/index.hpp"
#include "dski/metrics.hpp"
#include "dski/retrieval.hpp"
#include "dski/stats.hpp"
#include "dski/synth.hpp"

namespace {

using namespace dski;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

partition_strategy parse_strategy(const std::string& s) {
    if (s == "fixed") {
        return partition_strategy::fixed;
    }
    if (s == "variable") {
        return partition_strategy::variable;
    }
    throw config_error("unknown partition strategy: " + s);
}

algorithm parse_algorithm(const std::string& s) {
    if (s == "exhaustive") {
        return algorithm::exhaustive;
    }
    if (s == "blockmax") {
        return algorithm::blockmax;
    }
    if (s == "blockmax_overest") {
        return algorithm::blockmax_overest;
    }
    if (s == "dths") {
        return algorithm::dths;
    }
    throw config_error("unknown algorithm: " + s);
}

skip_mode parse_skip(const std::string& s) {
    if (s == "st") {
        return skip_mode::st;
    }
    if (s == "dt") {
        return skip_mode::dt;
    }
    throw config_error("unknown skip mode: " + s);
}

view_mode parse_view(const std::string& s) {
    if (s == "independent") {
        return view_mode::independent;
    }
    if (s == "uniform") {
        return view_mode::uniform;
    }
    throw config_error("unknown view mode: " + s);
}

run_data results_to_run(const inverted_index& index,
                        const std::vector<query>& queries,
                        const std::vector<query_trace>& traces) {
    run_data run;
    for (size_t i = 0; i < queries.size(); ++i) {
        std::vector<run_entry>& entries = run[queries[i].id];
        uint32_t rank = 1;
        for (const query_result& r : traces[i].results) {
            entries.push_back({index.doc_names[r.doc_id], r.score, rank++});
        }
    }
    return run;
}

struct build_args {
    std::string corpus;
    std::string out;
    uint32_t block_size = 128;
    std::string partition = "variable";
    double k1 = 0.9;
    double b = 0.4;
    double slack = 0.15;
};

int cmd_build(const build_args& args) {
    build_config config;
    config.k1 = args.k1;
    config.b = args.b;
    config.partition.strategy = parse_strategy(args.partition);
    config.partition.target_size = args.block_size;
    config.partition.slack_frac = args.slack;

    const inverted_index index = build_index_from_file(args.corpus, config);
    save_index(index, args.out);

    uint64_t bytes = 0;
    {
        std::ifstream in(args.out, std::ios::binary | std::ios::ate);
        bytes = static_cast<uint64_t>(in.tellg());
    }
    std::cout << "docs\t" << index.stats.num_docs << '\n'
              << "terms\t" << index.terms.size() << '\n'
              << "postings\t" << index.num_postings() << '\n'
              << "blocks\t" << index.num_blocks() << '\n'
              << "bytes\t" << bytes << '\n';
    return kExitOk;
}

struct query_args {
    std::string index;
    std::string queries;
    size_t k = 1000;
    double alpha = 0.9;
    double beta = 0.2;
    double fs = 1.0;
    double ff = 1.0;
    std::string skip = "dt";
    std::string view = "independent";
    std::string algo = "dths";
    std::string run_tag = "dski";
    std::string out;
    std::string trace;
};

int cmd_query(const query_args& args) {
    retrieval_config config;
    config.k = args.k;
    config.alpha = args.alpha;
    config.beta = args.beta;
    config.f_s = args.fs;
    config.f_f = args.ff;
    config.skip = parse_skip(args.skip);
    config.view = parse_view(args.view);
    config.algo = parse_algorithm(args.algo);
    config.validate();  // before touching the index

    const inverted_index index = load_index(args.index);
    const std::vector<query> queries = parse_queries(args.queries);

    std::vector<query_trace> traces;
    traces.reserve(queries.size());
    for (const query& q : queries) {
        traces.push_back(run_query(index, q, config));
    }

    const run_data run = results_to_run(index, queries, traces);
    if (!args.out.empty()) {
        std::ofstream out(args.out);
        if (!out) {
            throw io_error("cannot open run file for writing: " + args.out);
        }
        write_run(out, run, args.run_tag);
    } else {
        write_run(std::cout, run, args.run_tag);
    }

    if (!args.trace.empty()) {
        std::ofstream out(args.trace);
        if (!out) {
            throw io_error("cannot open trace file for writing: " + args.trace);
        }
        out << "qid,blocks_loaded,blocks_total,docs_evaluated,skipped_by_s,"
               "skipped_by_f,elapsed_us\n";
        for (size_t i = 0; i < queries.size(); ++i) {
            const query_trace& t = traces[i];
            out << queries[i].id << ',' << t.blocks_loaded << ','
                << t.blocks_total << ',' << t.docs_evaluated << ','
                << t.skipped_by_s << ',' << t.skipped_by_f << ','
                << t.elapsed.count() << '\n';
        }
    }
    return kExitOk;
}

struct eval_args {
    std::string run;
    std::string qrels;
    std::string metrics = "mrr@10,ndcg@10,recall@1000";
    std::string baseline_run;
};

int cmd_eval(const eval_args& args) {
    std::vector<std::pair<std::string, uint32_t>> requested;
    std::stringstream list(args.metrics);
    std::string item;
    while (std::getline(list, item, ',')) {
        if (item.empty()) {
            continue;
        }
        const size_t at = item.find('@');
        if (at == std::string::npos || at + 1 >= item.size()) {
            throw config_error("metric must look like name@cutoff: " + item);
        }
        const std::string name = item.substr(0, at);
        uint32_t cutoff = 0;
        try {
            cutoff = static_cast<uint32_t>(std::stoul(item.substr(at + 1)));
        } catch (const std::exception&) {
            throw config_error("bad metric cutoff: " + item);
        }
        if (name != "mrr" && name != "ndcg" && name != "recall" &&
            name != "overlap") {
            throw config_error("unknown metric: " + name);
        }
        requested.emplace_back(name, cutoff);
    }
    if (requested.empty()) {
        throw config_error("empty metric list");
    }
    const bool wants_overlap =
        std::any_of(requested.begin(), requested.end(),
                    [](const auto& m) { return m.first == "overlap"; });
    if (!args.baseline_run.empty() && !wants_overlap) {
        requested.emplace_back("overlap", 1000);
    }

    const run_data run = parse_run_file(args.run);
    const qrels_data qrels = parse_qrels_file(args.qrels);

    std::vector<std::string> warnings;
    for (const auto& [name, cutoff] : requested) {
        double value = 0.0;
        if (name == "mrr") {
            const metric_result r = mrr_at(run, qrels, cutoff);
            value = r.value;
            warnings.insert(warnings.end(), r.warnings.begin(),
                            r.warnings.end());
        } else if (name == "ndcg") {
            const metric_result r = ndcg_at(run, qrels, cutoff);
            value = r.value;
        } else if (name == "recall") {
            value = recall_at(run, qrels, cutoff);
        } else {
            if (args.baseline_run.empty()) {
                throw config_error("overlap requires --baseline-run");
            }
            value = overlap_ratio(run, parse_run_file(args.baseline_run),
                                  cutoff);
        }
        std::cout << name << '@' << cutoff << '\t' << std::fixed
                  << std::setprecision(4) << value << '\n';
    }
    std::sort(warnings.begin(), warnings.end());
    warnings.erase(std::unique(warnings.begin(), warnings.end()),
                   warnings.end());
    for (const std::string& qid : warnings) {
        std::cerr << "warning: query " << qid << " missing from qrels\n";
    }
    return kExitOk;
}

struct stats_args {
    std::string index;
    std::string terms = "all";
    std::string out;
};

int cmd_stats(const stats_args& args) {
    const inverted_index index = load_index(args.index);
    std::vector<std::string> selected;
    if (args.terms != "all") {
        std::stringstream list(args.terms);
        std::string term;
        while (std::getline(list, term, ',')) {
            if (!term.empty()) {
                selected.push_back(term);
            }
        }
    }
    std::vector<std::string> unknown;
    const std::vector<term_stats> stats =
        index_term_stats(index, selected, unknown);
    if (!args.out.empty()) {
        std::ofstream out(args.out);
        if (!out) {
            throw io_error("cannot open stats file for writing: " + args.out);
        }
        write_stats_csv(out, stats);
    } else {
        write_stats_csv(std::cout, stats);
    }
    for (const std::string& term : unknown) {
        std::cerr << "unknown term: " << term << '\n';
    }
    return kExitOk;
}

struct synth_args {
    std::string out_dir;
    uint64_t docs = 10000;
    uint64_t vocab = 2000;
    double doc_len = 60.0;
    uint64_t queries = 500;
    double query_len = 5.0;
    double beta_a = 2.0;
    double beta_b = 8.0;
    double expansion_rate = 0.1;
    uint64_t seed = 42;
};

int cmd_synth(const synth_args& args) {
    synth_spec spec;
    spec.num_docs = args.docs;
    spec.vocab_size = args.vocab;
    spec.doc_len_mean = args.doc_len;
    spec.query_count = args.queries;
    spec.query_len_mean = args.query_len;
    spec.beta_a = args.beta_a;
    spec.beta_b = args.beta_b;
    spec.expansion_rate = args.expansion_rate;
    spec.seed = args.seed;

    const synth_output out = generate_corpus(spec);
    std::filesystem::create_directories(args.out_dir);
    const auto open = [&](const char* name) {
        std::ofstream f(std::filesystem::path(args.out_dir) / name);
        if (!f) {
            throw io_error(std::string("cannot write ") + name + " in " +
                           args.out_dir);
        }
        return f;
    };
    {
        auto f = open("corpus.jsonl");
        write_corpus_jsonl(f, out.docs);
    }
    {
        auto f = open("queries.tsv");
        write_queries_tsv(f, out.queries);
    }
    {
        auto f = open("qrels.txt");
        write_qrels(f, out.qrels);
    }
    std::cout << "docs\t" << out.docs.size() << '\n'
              << "queries\t" << out.queries.size() << '\n'
              << "qrels\t" << out.qrels.size() << '\n';
    return kExitOk;
}

struct bench_args {
    std::string index;
    std::string queries;
    std::string qrels;
    size_t k = 1000;
    std::vector<std::string> configs;
    std::string csv;
};

retrieval_config parse_grid_config(const std::string& text, size_t k,
                                   std::string& label) {
    retrieval_config rc;
    rc.k = k;
    std::stringstream parts(text);
    std::string part;
    bool first = true;
    while (std::getline(parts, part, ';')) {
        if (part.empty()) {
            continue;
        }
        const size_t eq = part.find('=');
        if (eq == std::string::npos) {
            if (!first) {
                throw config_error("bad config entry (want key=value): " + part);
            }
            label = part;
            first = false;
            continue;
        }
        first = false;
        const std::string key = part.substr(0, eq);
        const std::string value = part.substr(eq + 1);
        try {
            if (key == "algo") {
                rc.algo = parse_algorithm(value);
            } else if (key == "alpha") {
                rc.alpha = std::stod(value);
            } else if (key == "beta") {
                rc.beta = std::stod(value);
            } else if (key == "fs") {
                rc.f_s = std::stod(value);
            } else if (key == "ff") {
                rc.f_f = std::stod(value);
            } else if (key == "skip") {
                rc.skip = parse_skip(value);
            } else if (key == "view") {
                rc.view = parse_view(value);
            } else if (key == "k") {
                rc.k = std::stoul(value);
            } else {
                throw config_error("unknown config key: " + key);
            }
        } catch (const std::invalid_argument&) {
            throw config_error("bad value for " + key + ": " + value);
        }
    }
    if (label.empty()) {
        label = text;
    }
    return rc;
}

int cmd_bench(const bench_args& args) {
    const inverted_index index = load_index(args.index);
    const std::vector<query> queries = parse_queries(args.queries);
    const qrels_data qrels = parse_qrels_file(args.qrels);

    std::vector<grid_config> grid;
    for (const std::string& text : args.configs) {
        grid_config g;
        g.rc = parse_grid_config(text, args.k, g.label);
        g.rc.validate();
        grid.push_back(std::move(g));
    }
    if (grid.empty()) {
        throw config_error("bench needs at least one --config");
    }

    const experiment_report report = run_grid(index, queries, qrels, grid);
    print_report_table(std::cout, report);
    if (!args.csv.empty()) {
        std::ofstream out(args.csv);
        if (!out) {
            throw io_error("cannot open csv for writing: " + args.csv);
        }
        write_report_csv(out, report);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dski: dual-weight block-max document retrieval engine"};
    app.require_subcommand(1);

    build_args build;
    CLI::App* build_cmd = app.add_subcommand("build", "build an index");
    build_cmd->add_option("--corpus", build.corpus, "corpus jsonl file")
        ->required();
    build_cmd->add_option("--out", build.out, "output index path")->required();
    build_cmd->add_option("--block-size", build.block_size,
                          "target records per block")
        ->check(CLI::PositiveNumber);
    build_cmd->add_option("--partition", build.partition, "fixed|variable");
    build_cmd->add_option("--k1", build.k1, "bm25 k1");
    build_cmd->add_option("--b", build.b, "bm25 b");
    build_cmd->add_option("--slack", build.slack,
                          "variable partition slack fraction");

    query_args query;
    CLI::App* query_cmd = app.add_subcommand("query", "run a query batch");
    query_cmd->add_option("--index", query.index, "index path")->required();
    query_cmd->add_option("--queries", query.queries, "queries tsv")
        ->required();
    query_cmd->add_option("--k", query.k, "results per query");
    query_cmd->add_option("--alpha", query.alpha, "bound mix");
    query_cmd->add_option("--beta", query.beta, "score mix");
    query_cmd->add_option("--fs", query.fs, "skip threshold factor");
    query_cmd->add_option("--ff", query.ff, "final threshold factor");
    query_cmd->add_option("--skip", query.skip, "st|dt");
    query_cmd->add_option("--view", query.view, "independent|uniform");
    query_cmd->add_option(
        "--algo", query.algo,
        "exhaustive|blockmax|blockmax_overest|dths");
    query_cmd->add_option("--run-tag", query.run_tag, "run tag");
    query_cmd->add_option("--out", query.out, "run file (stdout if absent)");
    query_cmd->add_option("--trace", query.trace, "per-query trace csv");

    eval_args eval;
    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a run file");
    eval_cmd->add_option("--run", eval.run, "run file")->required();
    eval_cmd->add_option("--qrels", eval.qrels, "qrels file")->required();
    eval_cmd->add_option("--metrics", eval.metrics,
                         "comma list, e.g. mrr@10,ndcg@10,recall@1000");
    eval_cmd->add_option("--baseline-run", eval.baseline_run,
                         "second run for overlap");

    stats_args stats;
    CLI::App* stats_cmd =
        app.add_subcommand("stats", "per-term weight distribution stats");
    stats_cmd->add_option("--index", stats.index, "index path")->required();
    stats_cmd->add_option("--terms", stats.terms, "all or comma list");
    stats_cmd->add_option("--out", stats.out, "csv path (stdout if absent)");

    synth_args synth;
    CLI::App* synth_cmd =
        app.add_subcommand("synth", "generate a synthetic collection");
    synth_cmd->add_option("--out-dir", synth.out_dir, "output directory")
        ->required();
    synth_cmd->add_option("--docs", synth.docs, "number of documents");
    synth_cmd->add_option("--vocab", synth.vocab, "vocabulary size");
    synth_cmd->add_option("--doc-len", synth.doc_len, "mean document length");
    synth_cmd->add_option("--queries", synth.queries, "number of queries");
    synth_cmd->add_option("--query-len", synth.query_len, "mean query length");
    synth_cmd->add_option("--beta-a", synth.beta_a, "learned Beta shape a");
    synth_cmd->add_option("--beta-b", synth.beta_b, "learned Beta shape b");
    synth_cmd->add_option("--expansion-rate", synth.expansion_rate,
                          "expansion-only term probability");
    synth_cmd->add_option("--seed", synth.seed, "random seed");

    bench_args bench;
    CLI::App* bench_cmd =
        app.add_subcommand("bench", "run a configuration grid");
    bench_cmd->add_option("--index", bench.index, "index path")->required();
    bench_cmd->add_option("--queries", bench.queries, "queries tsv")
        ->required();
    bench_cmd->add_option("--qrels", bench.qrels, "qrels file")->required();
    bench_cmd->add_option("--k", bench.k, "results per query");
    bench_cmd
        ->add_option("--config", bench.configs,
                     "label;key=value;... (repeatable); keys: algo, alpha, "
                     "beta, fs, ff, skip, view, k")
        ->required();
    bench_cmd->add_option("--csv", bench.csv, "also write csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (build_cmd->parsed()) {
            return cmd_build(build);
        }
        if (query_cmd->parsed()) {
            return cmd_query(query);
        }
        if (eval_cmd->parsed()) {
            return cmd_eval(eval);
        }
        if (stats_cmd->parsed()) {
            return cmd_stats(stats);
        }
        if (synth_cmd->parsed()) {
            return cmd_synth(synth);
        }
        if (bench_cmd->parsed()) {
            return cmd_bench(bench);
        }
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
