#include "twochoices/csl.hpp"
#include "twochoices/harness.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace twochoices;

namespace {

ExperimentConfig small(ExperimentKind kind)
{
    ExperimentConfig cfg;
    cfg.kind = kind;
    cfg.n = 100;
    cfg.a = 20;
    cfg.b = 1;
    cfg.seed = 3;
    cfg.trials = 12;
    cfg.rounds = 40;
    return cfg;
}

constexpr ExperimentKind kAllKinds[] = {
    ExperimentKind::XiFrequency, ExperimentKind::Growth,     ExperimentKind::Convergence,
    ExperimentKind::Metastability, ExperimentKind::InitTail, ExperimentKind::Lemma2Scan,
    ExperimentKind::LecamScan,   ExperimentKind::CslAccuracy,
};

std::size_t line_count(const std::string& text)
{
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

} // namespace

TEST_CASE("config parsing")
{
    SUBCASE("keys, comments and blank lines")
    {
        std::istringstream in("# header\nkind = convergence\n\nn=500  # inline\na=64\nb=3\nseed=9\n"
                              "graph_seed=4\nrule=voter\nthresholds=0.5, 1.5\nassert=true\nmethod=circulant\n");
        const auto cfg = parse_config(in);
        CHECK(cfg.kind == ExperimentKind::Convergence);
        CHECK(cfg.n == 500);
        CHECK(cfg.a == 64);
        CHECK(cfg.b == 3);
        CHECK(cfg.seed == 9);
        CHECK(cfg.graph_seed == 4u);
        CHECK(cfg.rule == Rule::Voter);
        CHECK(cfg.thresholds == std::vector<double>{0.5, 1.5});
        CHECK(cfg.assert_result);
        CHECK(cfg.method == GenerationMethod::Circulant);
    }
    SUBCASE("errors name the line and the key")
    {
        std::istringstream unknown("n=10\nbogus=1\n");
        try {
            (void)parse_config(unknown, "x.cfg");
            FAIL("expected an error");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("x.cfg:2:") == 0);
            CHECK(std::string(e.what()).find("bogus") != std::string::npos);
        }
        std::istringstream bad_int("trials=ten\n");
        CHECK_THROWS_AS((void)parse_config(bad_int), ConfigError);
        std::istringstream no_equals("trials\n");
        CHECK_THROWS_AS((void)parse_config(no_equals), ConfigError);
        std::istringstream bad_kind("kind=nothing\n");
        CHECK_THROWS_AS((void)parse_config(bad_kind), ConfigError);
        CHECK_THROWS_AS((void)load_config("/nonexistent/x.cfg"), ConfigError);
    }
    SUBCASE("overrides")
    {
        ExperimentConfig cfg;
        cfg.apply_override("trials=7");
        cfg.apply_override(" kappa = 2.5 ");
        CHECK(cfg.trials == 7);
        CHECK(cfg.kappa == 2.5);
        CHECK_THROWS_AS(cfg.apply_override("kappa=fast"), ConfigError);
    }
    SUBCASE("kind names round-trip")
    {
        for (auto kind : kAllKinds)
            CHECK(parse_experiment_kind(to_string(kind)) == kind);
    }
}

TEST_CASE("resolved config")
{
    auto cfg = small(ExperimentKind::Growth);
    cfg.workers = 9;
    const auto j = cfg.resolved(100);
    CHECK(j["kind"] == "growth");
    CHECK(j["graph_seed"] == 3);
    // ⌈√100 ln 100⌉ = 47, bumped to even parity
    CHECK(j["s1"] == 48);
    CHECK(j["s2"] == -48);
    CHECK_FALSE(j.contains("workers"));
    CHECK_FALSE(j.contains("out_dir"));
    CHECK(small(ExperimentKind::CslAccuracy).resolved(100)["ell"] == default_csl_ell(100));
}

TEST_CASE("parity adjustment")
{
    CHECK(parity_adjusted(1000, 219) == 220);
    CHECK(parity_adjusted(1000, 220) == 220);
    CHECK(parity_adjusted(999, 220) == 221);
    CHECK(parity_adjusted(10, 50) == 10);
    CHECK(format_real(0.1) == "0.1");
    CHECK(format_real(1.0 / 3.0) == "0.333333333333");
}

TEST_CASE("every kind runs and is reproducible")
{
    for (auto kind : kAllKinds) {
        CAPTURE(to_string(kind));
        auto cfg = small(kind);
        const auto one = run_experiment(cfg);
        cfg.workers = 4;
        const auto four = run_experiment(cfg);
        CHECK(one.csv == four.csv);
        CHECK(one.summary.dump() == four.summary.dump());
        CHECK(one.summary["version"] == kVersion);
        CHECK(one.summary["config"]["kind"] == to_string(kind));
        CHECK(one.summary.contains("results"));
        CHECK(one.summary["pass"] == one.passed);
        CHECK(one.exit_code() == 0); // assert defaults to false
        const auto rows = line_count(one.csv);
        if (kind == ExperimentKind::Lemma2Scan)
            CHECK(rows <= 1 + 2 * 12);
        else
            CHECK(rows == 1 + 12);
        cfg.seed = 4;
        CHECK(run_experiment(cfg).csv != one.csv);
    }
}

TEST_CASE("csv headers")
{
    const std::pair<ExperimentKind, const char*> expected[] = {
        {ExperimentKind::XiFrequency, "trial,rounds,s1,s2,outcome"},
        {ExperimentKind::Growth, "trial,s1_next,s2_next,event"},
        {ExperimentKind::Convergence, "trial,rounds_to_converge,signs_preserved,success,s1,s2"},
        {ExperimentKind::Metastability, "trial,max_minority1,max_minority2,first_violation,first_sign_flip,ok"},
        {ExperimentKind::InitTail, "trial,s1,s2"},
        {ExperimentKind::Lemma2Scan, "trial,community,minority,other,exact,bound,pass"},
        {ExperimentKind::LecamScan, "trial,community,minority,sum_p,sum_p_sq,l1_distance,pass"},
        {ExperimentKind::CslAccuracy,
         "trial,intra_equal_rate,inter_diff_rate,outlier_pairs,pairs_evaluated,clustered_columns,success"},
    };
    for (const auto& [kind, header] : expected) {
        auto cfg = small(kind);
        cfg.trials = 2;
        const auto csv = run_experiment(cfg).csv;
        CHECK(csv.substr(0, csv.find('\n')) == header);
    }
}

TEST_CASE("exit codes follow assert")
{
    auto cfg = small(ExperimentKind::XiFrequency);
    cfg.min_clustered = 1.0; // unreachable unless every trial clusters
    cfg.min_mono = 1.0;
    auto r = run_experiment(cfg);
    CHECK_FALSE(r.passed);
    CHECK(r.exit_code() == 0);
    cfg.assert_result = true;
    r = run_experiment(cfg);
    CHECK(r.exit_code() == 1);
    CHECK(r.summary["config"]["assert"] == true);

    auto bad = small(ExperimentKind::Growth);
    bad.trials = 0;
    CHECK_THROWS_AS((void)run_experiment(bad), ConfigError);
    bad = small(ExperimentKind::Growth);
    bad.s1 = 7; // parity differs from n = 100
    CHECK_THROWS_AS((void)run_experiment(bad), ConfigError);
    bad = small(ExperimentKind::Growth);
    bad.a = 101;
    CHECK_THROWS_AS((void)run_experiment(bad), ConfigError);
}

TEST_CASE("planted experiments behave as expected")
{
    SUBCASE("metastability from a clustered start holds")
    {
        auto cfg = small(ExperimentKind::Metastability);
        cfg.n = 200;
        cfg.a = 60;
        cfg.rounds = 300;
        const auto r = run_experiment(cfg);
        CHECK(r.passed);
        CHECK(r.summary["results"]["s1"] == 200);
    }
    SUBCASE("convergence from the planted bias")
    {
        auto cfg = small(ExperimentKind::Convergence);
        cfg.n = 400;
        cfg.a = 80;
        cfg.rounds = 100;
        CHECK(run_experiment(cfg).passed);
    }
    SUBCASE("bound and le cam scans report no violations")
    {
        auto cfg = small(ExperimentKind::Lemma2Scan);
        cfg.n = 200;
        cfg.a = 60;
        cfg.trials = 30;
        CHECK(run_experiment(cfg).summary["results"]["violations"] == 0);
        cfg.kind = ExperimentKind::LecamScan;
        CHECK(run_experiment(cfg).summary["results"]["violations"] == 0);
    }
}

TEST_CASE("graph file source")
{
    const auto dir = std::filesystem::temp_directory_path() / "twochoices_harness_test";
    std::filesystem::create_directories(dir);
    const auto g = generate_clustered_regular(100, 20, 1, 3).graph;
    save_graph(g, dir / "g.crg");

    auto from_params = small(ExperimentKind::InitTail);
    auto from_file = from_params;
    from_file.graph_path = dir / "g.crg";
    CHECK(run_experiment(from_file).csv == run_experiment(from_params).csv);
    CHECK(run_experiment(from_file).summary["config"].contains("graph"));

    from_file.graph_path = dir / "missing.crg";
    CHECK_THROWS_AS((void)run_experiment(from_file), ConfigError);

    auto cfg = small(ExperimentKind::InitTail);
    cfg.out_dir = dir / "out";
    cfg.name = "tail";
    write_result(cfg, run_experiment(cfg));
    CHECK(std::filesystem::exists(dir / "out" / "tail.json"));
    std::ifstream csv(dir / "out" / "tail.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "trial,s1,s2");
    std::filesystem::remove_all(dir);
}

TEST_CASE("verify")
{
    const auto g = generate_clustered_regular(200, 60, 1, 2).graph;
    const auto records = verify_graph(g, 1, 20);
    std::vector<std::string> names;
    for (const auto& r : records) {
        names.push_back(r.check);
        CHECK(r.pass);
        CHECK(r.to_json()["check"] == r.check);
    }
    CHECK(names == std::vector<std::string>{"validate", "cut_sparsity_c1", "expansion_c2", "lemma2_dominance",
                                            "oracle_consistency", "le_cam", "init_tail"});
    const auto again = verify_graph(g, 1, 20, 4);
    for (std::size_t i = 0; i < records.size(); ++i)
        CHECK(records[i].to_json().dump() == again[i].to_json().dump());

    // a bipartite circulant graph fails expansion
    const auto ring = generate_clustered_regular(50, 2, 1, 0, GenerationMethod::Circulant).graph;
    const auto bad = verify_graph(ring, 1, 5);
    CHECK_FALSE(bad[2].pass);
}
