// Command-line front end: graph generation, spectra, simulation, checks and
// batch experiments. Exit status: 0 pass, 1 assertion failed, 2 usage error.

#include "twochoices/analysis.hpp"
#include "twochoices/csl.hpp"
#include "twochoices/harness.hpp"
#include "twochoices/spectral.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace twochoices;

namespace {

struct Common {
    std::uint64_t seed = 1;
    int trials = 100;
    std::string out_dir = ".";
    int workers = 1;
};

struct GraphSource {
    std::string path;
    int n = 1000;
    int a = 128;
    int b = 2;
    std::optional<std::uint64_t> graph_seed; ///< defaults to --seed
    std::string method = "pairing";
};

void add_common(CLI::App* app, Common& c)
{
    app->add_option("--seed", c.seed, "Master seed")->capture_default_str();
    app->add_option("--trials", c.trials, "Independent trials")->capture_default_str();
    app->add_option("--out-dir", c.out_dir, "Directory for output files")->capture_default_str();
    app->add_option("--workers", c.workers, "Worker threads; results do not depend on it")->capture_default_str();
}

void add_graph_source(CLI::App* app, GraphSource& g)
{
    app->add_option("--graph", g.path, "Graph file written by 'generate'");
    app->add_option("--n", g.n, "Community size")->capture_default_str();
    app->add_option("--a", g.a, "Intra-community degree")->capture_default_str();
    app->add_option("--b", g.b, "Cut degree")->capture_default_str();
    app->add_option("--graph-seed", g.graph_seed, "Seed of the generated graph (default: --seed)");
    app->add_option("--method", g.method, "pairing or circulant")->capture_default_str();
}

Json source_json(const GraphSource& s)
{
    if (!s.path.empty())
        return Json{{"graph", s.path}};
    return Json{{"n", s.n}, {"a", s.a}, {"b", s.b}, {"graph_seed", s.graph_seed.value_or(1)}, {"method", s.method}};
}

ClusteredRegularGraph obtain_graph(const GraphSource& s)
{
    ExperimentConfig cfg;
    if (!s.path.empty())
        cfg.graph_path = s.path;
    cfg.n = s.n;
    cfg.a = s.a;
    cfg.b = s.b;
    cfg.graph_seed = s.graph_seed;
    cfg.method = parse_generation_method(s.method);
    return config_graph(cfg);
}

// Writes to `path`, or to stdout when it is empty or "-".
template <class Fn>
void emit(const std::string& path, Fn&& write)
{
    if (path.empty() || path == "-") {
        write(std::cout);
        return;
    }
    if (const auto parent = fs::path(path).parent_path(); !parent.empty())
        fs::create_directories(parent);
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot write '" + path + "'");
    write(out);
}

Json spectrum_json(const ClusteredRegularGraph& g)
{
    const auto h = check_hypotheses(g);
    Json communities = Json::array();
    for (const auto& c : h.spectrum.community)
        communities.push_back(Json{{"lambda", c.lambda},
                                   {"iterations", c.iterations},
                                   {"residual", c.residual},
                                   {"converged", c.converged},
                                   {"disconnected", c.disconnected}});
    return Json{{"lambda", h.spectrum.lambda},
                {"communities", communities},
                {"c1", h.constants.c1},
                {"c2", h.constants.c2},
                {"h", h.constants.h},
                {"b_over_d", h.b_over_d},
                {"connected", h.connected},
                {"community_connected", h.community_connected},
                {"community_nonbipartite", h.community_nonbipartite},
                {"cut_sparse", h.cut_sparse},
                {"expander", h.expander},
                {"hypotheses_satisfied", h.satisfied()}};
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"2-Choices dynamics on clustered regular graphs"};
    app.require_subcommand(1);

    Common common;
    GraphSource source;

    auto* generate = app.add_subcommand("generate", "Generate a (2n,d,b)-clustered regular graph");
    std::string graph_out;
    add_common(generate, common);
    add_graph_source(generate, source);
    generate->add_option("--out", graph_out, "Graph file (default <out-dir>/graph.crg)");

    auto* spectrum = app.add_subcommand("spectrum", "Spectral parameter and hypothesis constants as JSON");
    add_common(spectrum, common);
    add_graph_source(spectrum, source);

    auto* simulate = app.add_subcommand("simulate", "Run one trajectory and write its per-round CSV");
    std::string rule = "two_choices", stop = "both", sim_out;
    int rounds = 200;
    double kappa = kDefaultKappa;
    std::optional<int> s1, s2;
    add_common(simulate, common);
    add_graph_source(simulate, source);
    simulate->add_option("--rule", rule, "two_choices or voter")->capture_default_str();
    simulate->add_option("--rounds", rounds, "Round cap")->capture_default_str();
    simulate->add_option("--stop", stop, "none, mono, clustered or both")->capture_default_str();
    simulate->add_option("--kappa", kappa, "Outlier scale factor")->capture_default_str();
    simulate->add_option("--s1", s1, "Planted bias of community 1 (random init when absent)");
    simulate->add_option("--s2", s2, "Planted bias of community 2");
    simulate->add_option("--out", sim_out, "CSV path, '-' for stdout");

    auto* verify = app.add_subcommand("verify", "Structural and bound checks, one JSON record per line");
    std::string verify_out;
    add_common(verify, common);
    add_graph_source(verify, source);
    verify->add_option("--out", verify_out, "JSONL path, '-' for stdout");

    auto* metastable = app.add_subcommand("metastable", "Metastability windows from a clustered start");
    int meta_rounds = 100000;
    double meta_kappa = 10.0;
    add_common(metastable, common);
    add_graph_source(metastable, source);
    metastable->add_option("--rounds", meta_rounds, "Rounds per trial")->capture_default_str();
    metastable->add_option("--kappa", meta_kappa, "Threshold factor")->capture_default_str();

    auto* csl = app.add_subcommand("csl", "Community-sensitive labeling and its pair score");
    int ell = 0, csl_rounds = 0;
    std::uint64_t pair_budget = 100000;
    std::size_t hamming = 0;
    std::string csl_out;
    add_common(csl, common);
    add_graph_source(csl, source);
    csl->add_option("--ell", ell, "Label length (default 4*ceil(log2 2n))");
    csl->add_option("--rounds", csl_rounds, "Snapshot round (default 6*ceil(ln 2n))");
    csl->add_option("--pair-budget", pair_budget, "Sampled pairs when 2n > 4000")->capture_default_str();
    csl->add_option("--max-hamming", hamming, "Tolerated differing positions")->capture_default_str();
    csl->add_option("--out", csl_out, "Label matrix CSV");

    auto* experiment = app.add_subcommand("experiment", "Run a configured experiment");
    std::string config_path;
    std::vector<std::string> overrides;
    experiment->add_option("--config", config_path, "key=value config file");
    experiment->add_option("overrides", overrides, "key=value overrides");
    experiment->add_option("--seed", common.seed, "Master seed");
    experiment->add_option("--trials", common.trials, "Independent trials");
    experiment->add_option("--out-dir", common.out_dir, "Directory for output files");
    experiment->add_option("--workers", common.workers, "Worker threads; results do not depend on it");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    if (!source.graph_seed)
        source.graph_seed = common.seed;

    try {
        if (*generate) {
            const auto method = parse_generation_method(source.method);
            const auto gen = generate_clustered_regular(source.n, source.a, source.b, *source.graph_seed, method);
            const auto path = graph_out.empty() ? fs::path(common.out_dir) / "graph.crg" : fs::path(graph_out);
            if (path.has_parent_path())
                fs::create_directories(path.parent_path());
            save_graph(gen.graph, path);
            const auto report = validate(gen.graph);
            std::cout << Json{{"version", kVersion},
                              {"config", source_json(source)},
                              {"path", path.string()},
                              {"valid", report.ok},
                              {"violations", report.violations.size()},
                              {"connected", gen.connected},
                              {"communities_connected", gen.communities_connected},
                              {"communities_nonbipartite", gen.communities_nonbipartite}}
                             .dump(2)
                      << '\n';
            return report.ok ? 0 : 1;
        }
        if (*spectrum) {
            const auto g = obtain_graph(source);
            Json out{{"version", kVersion}, {"config", source_json(source)}};
            out.update(spectrum_json(g));
            std::cout << out.dump(2) << '\n';
            return 0;
        }
        if (*simulate) {
            const auto g = obtain_graph(source);
            const RngContext ctx{common.seed, 0, 0};
            const Configuration c0 = s1 ? seeded_init(g, *s1, s2.value_or(-*s1)) : random_init(g, ctx);
            StopCriteria criteria;
            criteria.max_rounds = rounds;
            criteria.kappa = kappa;
            if (stop == "mono" || stop == "both")
                criteria.stop_on_monochromatic = true;
            if (stop == "clustered" || stop == "both")
                criteria.stop_on_almost_clustered = kappa;
            if (stop != "none" && stop != "mono" && stop != "clustered" && stop != "both")
                throw ConfigError("--stop must be none, mono, clustered or both");
            const auto t = run(g, c0, parse_rule(rule), criteria, ctx, RunOptions{common.workers, false});
            emit(sim_out, [&](std::ostream& out) { write_trajectory_csv(out, t); });
            return 0;
        }
        if (*verify) {
            const auto g = obtain_graph(source);
            bool all = true;
            emit(verify_out, [&](std::ostream& out) {
                for (const auto& record : verify_graph(g, common.seed, common.trials, common.workers)) {
                    out << record.to_json().dump() << '\n';
                    all = all && record.pass;
                }
            });
            return all ? 0 : 1;
        }
        if (*metastable) {
            ExperimentConfig cfg;
            cfg.kind = ExperimentKind::Metastability;
            if (!source.path.empty())
                cfg.graph_path = source.path;
            cfg.n = source.n;
            cfg.a = source.a;
            cfg.b = source.b;
            cfg.graph_seed = source.graph_seed;
            cfg.method = parse_generation_method(source.method);
            cfg.seed = common.seed;
            cfg.trials = common.trials;
            cfg.rounds = meta_rounds;
            cfg.kappa = meta_kappa;
            cfg.workers = common.workers;
            cfg.out_dir = common.out_dir;
            const auto result = run_experiment(cfg);
            write_result(cfg, result);
            std::cout << result.summary.dump(2) << '\n';
            return 0;
        }
        if (*csl) {
            const auto g = obtain_graph(source);
            const int k = ell > 0 ? ell : default_csl_ell(g.n());
            const int r = csl_rounds > 0 ? csl_rounds : default_csl_rounds(g.n());
            const auto labels = csl_run(g, k, r, common.seed, common.workers);
            const auto score = csl_score(g, labels, pair_budget, derive_seed(common.seed, 1), hamming);
            if (!csl_out.empty())
                emit(csl_out, [&](std::ostream& out) { write_labels_csv(out, labels); });
            Json config = source_json(source);
            config["ell"] = k;
            config["rounds"] = r;
            config["seed"] = common.seed;
            config["max_hamming"] = hamming;
            std::cout << Json{{"version", kVersion},
                              {"config", config},
                              {"intra_equal_rate", score.intra_equal_rate},
                              {"inter_diff_rate", score.inter_diff_rate},
                              {"outlier_pairs", score.outlier_pairs},
                              {"pairs_evaluated", score.pairs_evaluated}}
                             .dump(2)
                      << '\n';
            return 0;
        }
        if (*experiment) {
            ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
            for (const auto& o : overrides)
                cfg.apply_override(o);
            if (experiment->count("--seed"))
                cfg.seed = common.seed;
            if (experiment->count("--trials"))
                cfg.trials = common.trials;
            if (experiment->count("--out-dir"))
                cfg.out_dir = common.out_dir;
            if (experiment->count("--workers"))
                cfg.workers = common.workers;
            const auto result = run_experiment(cfg);
            write_result(cfg, result);
            std::cout << result.summary.dump(2) << '\n';
            return result.exit_code();
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
