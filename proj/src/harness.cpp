#include "twochoices/harness.hpp"

#include "twochoices/analysis.hpp"
#include "twochoices/csl.hpp"
#include "twochoices/parallel.hpp"
#include "twochoices/spectral.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace twochoices {

namespace {

constexpr std::pair<ExperimentKind, std::string_view> kKindNames[] = {
    {ExperimentKind::XiFrequency, "xi_frequency"}, {ExperimentKind::Growth, "growth"},
    {ExperimentKind::Convergence, "convergence"},  {ExperimentKind::Metastability, "metastability"},
    {ExperimentKind::InitTail, "init_tail"},       {ExperimentKind::Lemma2Scan, "lemma2_scan"},
    {ExperimentKind::LecamScan, "lecam_scan"},     {ExperimentKind::CslAccuracy, "csl_accuracy"},
};

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <class T>
T parse_integer(std::string_view key, std::string_view value)
{
    T out{};
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        throw ConfigError("'" + std::string(key) + "' expects an integer, got '" + std::string(value) + "'");
    return out;
}

double parse_real(std::string_view key, std::string_view value)
{
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size() || !std::isfinite(out))
        throw ConfigError("'" + std::string(key) + "' expects a number, got '" + std::string(value) + "'");
    return out;
}

bool parse_bool(std::string_view key, std::string_view value)
{
    if (value == "true" || value == "1" || value == "yes")
        return true;
    if (value == "false" || value == "0" || value == "no")
        return false;
    throw ConfigError("'" + std::string(key) + "' expects true or false, got '" + std::string(value) + "'");
}

int default_planted_bias(int n) { return parity_adjusted(n, static_cast<long long>(std::ceil(std::sqrt(n) * std::log(n)))); }

std::pair<int, int> planted_biases(const ExperimentConfig& cfg, int n)
{
    const int fallback = cfg.kind == ExperimentKind::Metastability ? n : default_planted_bias(n);
    const int s1 = cfg.s1.value_or(fallback);
    return {s1, cfg.s2.value_or(-s1)};
}

std::uint64_t required_successes(double fraction, int trials)
{
    return static_cast<std::uint64_t>(std::ceil(fraction * trials - 1e-9));
}

// Trial results are produced concurrently and kept by index.
template <class Row, class Fn>
std::vector<Row> run_trials(const ExperimentConfig& cfg, Fn&& trial)
{
    std::vector<Row> rows(static_cast<std::size_t>(cfg.trials));
    parallel_for_index(rows.size(), cfg.workers, [&](std::size_t t) { rows[t] = trial(t); });
    return rows;
}

Json estimate_json(const EventEstimate& e)
{
    return Json{{"successes", e.successes}, {"trials", e.trials}, {"estimate", e.estimate},
                {"wilson_low", e.low},      {"wilson_high", e.high}};
}

// ---- experiment kinds ----------------------------------------------------

struct XiRow {
    int rounds = 0;
    BiasPair bias;
    Outcome outcome = Outcome::Mixed;
};

void xi_frequency(const ExperimentConfig& cfg, const ClusteredRegularGraph& g, ExperimentResult& r)
{
    StopCriteria stop;
    stop.max_rounds = cfg.rounds;
    stop.stop_on_monochromatic = true;
    stop.stop_on_almost_clustered = cfg.kappa;
    stop.kappa = cfg.kappa;
    const auto rows = run_trials<XiRow>(cfg, [&](std::size_t t) {
        const RngContext ctx{cfg.seed, t, 0};
        const auto traj = run(g, random_init(g, ctx), cfg.rule, stop, ctx);
        const auto& last = traj.records.back();
        return XiRow{traj.rounds_executed, {last.s1, last.s2}, traj.terminal};
    });

    std::ostringstream csv;
    csv << "trial,rounds,s1,s2,outcome\n";
    std::uint64_t clustered = 0, mono = 0;
    for (std::size_t t = 0; t < rows.size(); ++t) {
        const auto& row = rows[t];
        csv << t << ',' << row.rounds << ',' << row.bias.s1 << ',' << row.bias.s2 << ',' << to_string(row.outcome)
            << '\n';
        clustered += row.outcome == Outcome::AlmostClustered;
        mono += row.outcome == Outcome::Monochromatic;
    }
    const auto trials = rows.size();
    const auto c = wilson_interval(clustered, trials);
    const auto m = wilson_interval(mono, trials);
    r.csv = csv.str();
    r.passed = c.estimate >= cfg.min_clustered && c.estimate <= cfg.max_clustered && m.estimate >= cfg.min_mono;
    r.summary["results"] = Json{
        {"freq_clustered", c.estimate},
        {"freq_mono", m.estimate},
        {"freq_mixed", static_cast<double>(trials - clustered - mono) / static_cast<double>(trials)},
        {"wilson_low", c.low},
        {"wilson_high", c.high},
        {"mono_wilson_low", m.low},
        {"mono_wilson_high", m.high},
    };
}

struct GrowthRow {
    BiasPair next;
    bool event = false;
};

void growth(const ExperimentConfig& cfg, const ClusteredRegularGraph& g, ExperimentResult& r)
{
    const int n = g.n();
    const auto [s1, s2] = planted_biases(cfg, n);
    const Configuration c0 = seeded_init(g, s1, s2);
    const auto rows = run_trials<GrowthRow>(cfg, [&](std::size_t t) {
        Configuration next;
        const auto bias = step_into(g, c0, next, cfg.rule, RngContext{cfg.seed, t, 0});
        // s1' >= (17/16) s1 and s2' <= (17/16) s2, in integers.
        const bool event = 16LL * bias.s1 >= 17LL * s1 && 16LL * bias.s2 <= 17LL * s2;
        return GrowthRow{bias, event};
    });

    std::ostringstream csv;
    csv << "trial,s1_next,s2_next,event\n";
    std::uint64_t hits = 0;
    for (std::size_t t = 0; t < rows.size(); ++t) {
        csv << t << ',' << rows[t].next.s1 << ',' << rows[t].next.s2 << ',' << rows[t].event << '\n';
        hits += rows[t].event;
    }
    const auto e = wilson_interval(hits, rows.size());
    const double bound = 1.0 - std::exp(-2.0 * double(s1) * double(s1) / (32.0 * 32.0 * n));
    r.csv = csv.str();
    r.passed = e.estimate >= bound - e.half_width();
    r.summary["results"] = Json{{"s1", s1}, {"s2", s2}, {"event", estimate_json(e)}, {"bound", bound},
                                {"bound_minus_half_width", bound - e.half_width()}};
}

struct ConvergenceRow {
    std::optional<int> rounds_to_converge;
    bool signs_preserved = true;
    BiasPair last;
    [[nodiscard]] bool success() const noexcept { return rounds_to_converge && signs_preserved; }
};

void convergence(const ExperimentConfig& cfg, const ClusteredRegularGraph& g, ExperimentResult& r)
{
    const int n = g.n();
    const auto [s1, s2] = planted_biases(cfg, n);
    const Configuration c0 = seeded_init(g, s1, s2);
    const double target = n - std::log(static_cast<double>(n));
    const auto sign = [](int s) { return (s > 0) - (s < 0); };
    const auto rows = run_trials<ConvergenceRow>(cfg, [&](std::size_t t) {
        const RngContext ctx{cfg.seed, t, 0};
        ConvergenceRow row;
        Configuration current = c0, next;
        BiasPair bias{s1, s2};
        for (int round = 0;; ++round) {
            row.signs_preserved = row.signs_preserved && sign(bias.s1) == sign(s1) && sign(bias.s2) == sign(s2);
            if (std::abs(bias.s1) >= target && std::abs(bias.s2) >= target) {
                row.rounds_to_converge = round;
                break;
            }
            if (round == cfg.rounds)
                break;
            bias = step_into(g, current, next, cfg.rule, ctx.at_round(round));
            std::swap(current, next);
        }
        row.last = bias;
        return row;
    });

    std::ostringstream csv;
    csv << "trial,rounds_to_converge,signs_preserved,success,s1,s2\n";
    std::uint64_t ok = 0;
    double rounds_sum = 0.0;
    std::uint64_t converged = 0;
    for (std::size_t t = 0; t < rows.size(); ++t) {
        const auto& row = rows[t];
        csv << t << ',' << (row.rounds_to_converge ? *row.rounds_to_converge : -1) << ',' << row.signs_preserved
            << ',' << row.success() << ',' << row.last.s1 << ',' << row.last.s2 << '\n';
        ok += row.success();
        if (row.rounds_to_converge) {
            ++converged;
            rounds_sum += *row.rounds_to_converge;
        }
    }
    const auto e = wilson_interval(ok, rows.size());
    r.csv = csv.str();
    r.passed = ok >= required_successes(cfg.min_success, cfg.trials);
    r.summary["results"] = Json{{"s1", s1},
                                {"s2", s2},
                                {"target", target},
                                {"success", estimate_json(e)},
                                {"mean_rounds_converged", converged ? rounds_sum / double(converged) : 0.0}};
}

void metastability(const ExperimentConfig& cfg, const ClusteredRegularGraph& g, ExperimentResult& r)
{
    const auto [s1, s2] = planted_biases(cfg, g.n());
    const Configuration c0 = seeded_init(g, s1, s2);
    const auto rows = run_trials<MetastabilityReport>(cfg, [&](std::size_t t) {
        return metastability_window(g, c0, cfg.rounds, cfg.kappa, RngContext{cfg.seed, t, 0});
    });

    std::ostringstream csv;
    csv << "trial,max_minority1,max_minority2,first_violation,first_sign_flip,ok\n";
    std::uint64_t ok = 0;
    int worst = 0;
    for (std::size_t t = 0; t < rows.size(); ++t) {
        const auto& row = rows[t];
        const bool good = !row.first_violation && row.signs_preserved();
        csv << t << ',' << row.max_minority[0] << ',' << row.max_minority[1] << ','
            << row.first_violation.value_or(-1) << ',' << row.first_sign_flip.value_or(-1) << ',' << good << '\n';
        ok += good;
        worst = std::max({worst, row.max_minority[0], row.max_minority[1]});
    }
    const auto e = wilson_interval(ok, rows.size());
    r.csv = csv.str();
    r.passed = ok >= required_successes(cfg.min_success, cfg.trials);
    r.summary["results"] = Json{{"s1", s1},
                                {"s2", s2},
                                {"threshold", metastability_threshold(g.n(), cfg.kappa)},
                                {"max_minority", worst},
                                {"success", estimate_json(e)}};
}

void init_tail(const ExperimentConfig& cfg, const ClusteredRegularGraph& g, ExperimentResult& r)
{
    const auto rows = run_trials<BiasPair>(
        cfg, [&](std::size_t t) { return biases(g, random_init(g, RngContext{cfg.seed, t, 0})); });

    std::ostringstream csv;
    csv << "trial,s1,s2\n";
    for (std::size_t t = 0; t < rows.size(); ++t)
        csv << t << ',' << rows[t].s1 << ',' << rows[t].s2 << '\n';

    const double root_n = std::sqrt(static_cast<double>(g.n()));
    const double trials = static_cast<double>(rows.size());
    Json checks = Json::array();
    r.passed = true;
    for (double x : cfg.thresholds) {
        const auto hits = std::count_if(rows.begin(), rows.end(), [&](BiasPair b) { return b.s1 >= x * root_n; });
        const double empirical = static_cast<double>(hits) / trials;
        const double expected = normal_tail(x);
        const double sigma = std::sqrt(expected * (1.0 - expected) / trials);
        const double tolerance = 0.5 / root_n + 3.0 * sigma;
        const bool pass = std::abs(empirical - expected) <= tolerance;
        r.passed = r.passed && pass;
        checks.push_back(Json{{"x", x},
                              {"empirical", empirical},
                              {"normal_tail", expected},
                              {"deviation", std::abs(empirical - expected)},
                              {"tolerance", tolerance},
                              {"pass", pass}});
    }
    r.csv = csv.str();
    r.summary["results"] = Json{{"thresholds", checks}};
}

struct Lemma2Row {
    std::array<long long, 2> minority{};
    std::array<long long, 2> other{};
    std::array<double, 2> exact{};
    std::array<double, 2> bound{};
};

// Each community's blue share is uniform in [0, 1], then nodes are colored
// independently with that share.
Configuration random_density_configuration(const ClusteredRegularGraph& g, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double share[2] = {unit(rng), unit(rng)};
    Configuration c(g.node_count(), Color::Red);
    for (NodeId u = 0; u < g.node_count(); ++u)
        if (unit(rng) < share[g.community(u) - 1])
            c.set(u, Color::Blue);
    return c;
}

void lemma2_scan(const ExperimentConfig& cfg, const ClusteredRegularGraph& g, ExperimentResult& r)
{
    const int n = g.n();
    const auto spectrum = spectral_report(g);
    const auto k = hypothesis_constants(g, spectrum.lambda);
    const auto rows = run_trials<Lemma2Row>(cfg, [&](std::size_t t) {
        std::mt19937_64 rng(derive_seed(cfg.seed, t));
        const Configuration c = random_density_configuration(g, rng);
        const auto bias = biases(g, c);
        // Community 1 tracks blue against blue in V2, community 2 red against red in V1.
        Lemma2Row row;
        row.minority = {(n - bias.s1) / 2, (n + bias.s2) / 2};
        row.other = {(n - bias.s2) / 2, (n + bias.s1) / 2};
        for (int i = 0; i < 2; ++i) {
            row.exact[i] = exact_expected_minority(g, c, i + 1);
            row.bound[i] = row.minority[i] >= 1 ? lemma2_bound(n, row.minority[i], row.other[i], k.c1, k.c2) : 0.0;
        }
        return row;
    });

    std::ostringstream csv;
    csv << "trial,community,minority,other,exact,bound,pass\n";
    std::uint64_t cases = 0, violations = 0;
    double worst_ratio = 0.0;
    for (std::size_t t = 0; t < rows.size(); ++t) {
        for (int i = 0; i < 2; ++i) {
            const auto& row = rows[t];
            if (row.minority[i] < 1)
                continue; // the bound is undefined without a minority
            const bool pass = row.exact[i] < row.bound[i];
            ++cases;
            violations += !pass;
            worst_ratio = std::max(worst_ratio, row.exact[i] / row.bound[i]);
            csv << t << ',' << i + 1 << ',' << row.minority[i] << ',' << row.other[i] << ','
                << format_real(row.exact[i]) << ',' << format_real(row.bound[i]) << ',' << pass << '\n';
        }
    }
    r.csv = csv.str();
    r.passed = violations == 0;
    r.summary["results"] = Json{{"lambda", spectrum.lambda},         {"c1", k.c1},
                                {"c2", k.c2},                        {"cases", cases},
                                {"violations", violations},          {"max_exact_over_bound", worst_ratio}};
}

struct LecamRow {
    int community = 1;
    int minority = 0;
    PoissonApproximation approx;
};

void lecam_scan(const ExperimentConfig& cfg, const ClusteredRegularGraph& g, ExperimentResult& r)
{
    const int n = g.n();
    const int most = (n - 1) / 2; // strict minority
    const auto rows = run_trials<LecamRow>(cfg, [&](std::size_t t) {
        std::mt19937_64 rng(derive_seed(cfg.seed, t));
        // V1 leans red and V2 blue; minority sizes are log-uniform in [1, most].
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        Configuration c(g.node_count(), Color::Red);
        std::array<int, 2> minority{};
        for (int i = 0; i < 2; ++i) {
            const int k = most < 1 ? 0 : std::min(most, static_cast<int>(std::exp(unit(rng) * std::log(most + 1.0))));
            minority[i] = std::max(k, most < 1 ? 0 : 1);
            std::vector<NodeId> ids(static_cast<std::size_t>(n));
            std::iota(ids.begin(), ids.end(), static_cast<NodeId>(i * n));
            for (int j = 0; j < minority[i]; ++j) // partial Fisher-Yates
                std::swap(ids[j], ids[j + bounded64(rng(), n - j)]);
            const Color majority = i == 0 ? Color::Red : Color::Blue;
            for (int j = 0; j < n; ++j)
                c.set(ids[j], j < minority[i] ? opposite(majority) : majority);
        }
        const int community = 1 + static_cast<int>(t % 2);
        const auto profile = minority_flip_profile(g, c, community);
        return LecamRow{community, minority[community - 1], poisson_approximation(profile.p)};
    });

    std::ostringstream csv;
    csv << "trial,community,minority,sum_p,sum_p_sq,l1_distance,pass\n";
    std::uint64_t violations = 0;
    double worst_ratio = 0.0;
    for (std::size_t t = 0; t < rows.size(); ++t) {
        const auto& row = rows[t];
        const bool pass = row.approx.within_le_cam();
        violations += !pass;
        if (row.approx.sum_p_sq > 0.0)
            worst_ratio = std::max(worst_ratio, row.approx.l1_distance / (2.0 * row.approx.sum_p_sq));
        csv << t << ',' << row.community << ',' << row.minority << ',' << format_real(row.approx.sum_p) << ','
            << format_real(row.approx.sum_p_sq) << ',' << format_real(row.approx.l1_distance) << ',' << pass
            << '\n';
    }
    r.csv = csv.str();
    r.passed = violations == 0;
    r.summary["results"] =
        Json{{"profiles", rows.size()}, {"violations", violations}, {"max_distance_over_bound", worst_ratio}};
}

void csl_accuracy(const ExperimentConfig& cfg, const ClusteredRegularGraph& g, ExperimentResult& r)
{
    const int ell = cfg.ell > 0 ? cfg.ell : default_csl_ell(g.n());
    const int snapshot = cfg.snapshot > 0 ? cfg.snapshot : default_csl_rounds(g.n());
    struct Row {
        CslScore score;
        long clustered_columns = 0;
    };
    const auto rows = run_trials<Row>(cfg, [&](std::size_t t) {
        const std::uint64_t seed = derive_seed(cfg.seed, t);
        const auto labels = csl_run(g, ell, snapshot, seed);
        const auto outcomes = column_outcomes(g, labels, cfg.kappa);
        return Row{csl_score(g, labels, cfg.pair_budget, derive_seed(seed, 1)),
                   std::count(outcomes.begin(), outcomes.end(), Outcome::AlmostClustered)};
    });

    std::ostringstream csv;
    csv << "trial,intra_equal_rate,inter_diff_rate,outlier_pairs,pairs_evaluated,clustered_columns,success\n";
    std::uint64_t ok = 0;
    double accuracy_sum = 0.0;
    for (std::size_t t = 0; t < rows.size(); ++t) {
        const auto& s = rows[t].score;
        const bool success = s.accuracy() >= cfg.min_accuracy;
        ok += success;
        accuracy_sum += s.accuracy();
        csv << t << ',' << format_real(s.intra_equal_rate) << ',' << format_real(s.inter_diff_rate) << ','
            << s.outlier_pairs << ',' << s.pairs_evaluated << ',' << rows[t].clustered_columns << ',' << success
            << '\n';
    }
    const auto e = wilson_interval(ok, rows.size());
    r.csv = csv.str();
    r.passed = ok >= required_successes(cfg.min_success, cfg.trials);
    r.summary["results"] = Json{{"ell", ell},
                                {"snapshot", snapshot},
                                {"mean_accuracy", accuracy_sum / static_cast<double>(rows.size())},
                                {"success", estimate_json(e)}};
}

} // namespace

std::string_view to_string(ExperimentKind kind) noexcept
{
    for (const auto& [k, name] : kKindNames)
        if (k == kind)
            return name;
    return "unknown";
}

ExperimentKind parse_experiment_kind(std::string_view text)
{
    for (const auto& [k, name] : kKindNames)
        if (name == text)
            return k;
    std::string known;
    for (const auto& entry : kKindNames)
        known += (known.empty() ? "" : ", ") + std::string(entry.second);
    throw ConfigError("unknown experiment kind '" + std::string(text) + "' (known: " + known + ")");
}

GenerationMethod parse_generation_method(std::string_view text)
{
    if (text == "pairing")
        return GenerationMethod::Pairing;
    if (text == "circulant")
        return GenerationMethod::Circulant;
    throw ConfigError("unknown generation method '" + std::string(text) + "' (use pairing or circulant)");
}

std::string_view to_string(GenerationMethod method) noexcept
{
    return method == GenerationMethod::Pairing ? "pairing" : "circulant";
}

Rule parse_rule(std::string_view text)
{
    if (text == "two_choices" || text == "2choices")
        return Rule::TwoChoices;
    if (text == "voter")
        return Rule::Voter;
    throw ConfigError("unknown rule '" + std::string(text) + "' (use two_choices or voter)");
}

int parity_adjusted(int n, long long target)
{
    long long s = std::clamp<long long>(target, -n, n);
    if ((n - s) % 2 != 0)
        s += s < n ? 1 : -1;
    return static_cast<int>(s);
}

std::string format_real(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

void ExperimentConfig::set(std::string_view key, std::string_view value)
{
    value = trim(value);
    if (key == "kind")
        kind = parse_experiment_kind(value);
    else if (key == "n")
        n = parse_integer<int>(key, value);
    else if (key == "a")
        a = parse_integer<int>(key, value);
    else if (key == "b")
        b = parse_integer<int>(key, value);
    else if (key == "method")
        method = parse_generation_method(value);
    else if (key == "graph_seed")
        graph_seed = parse_integer<std::uint64_t>(key, value);
    else if (key == "graph")
        graph_path = value.empty() ? std::nullopt : std::optional<std::filesystem::path>(std::string(value));
    else if (key == "rule")
        rule = parse_rule(value);
    else if (key == "seed")
        seed = parse_integer<std::uint64_t>(key, value);
    else if (key == "trials")
        trials = parse_integer<int>(key, value);
    else if (key == "rounds")
        rounds = parse_integer<int>(key, value);
    else if (key == "kappa")
        kappa = parse_real(key, value);
    else if (key == "s1")
        s1 = parse_integer<int>(key, value);
    else if (key == "s2")
        s2 = parse_integer<int>(key, value);
    else if (key == "thresholds") {
        thresholds.clear();
        std::string_view rest = value;
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            thresholds.push_back(parse_real(key, trim(rest.substr(0, comma))));
            rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        }
    } else if (key == "ell")
        ell = parse_integer<int>(key, value);
    else if (key == "snapshot")
        snapshot = parse_integer<int>(key, value);
    else if (key == "pair_budget")
        pair_budget = parse_integer<std::uint64_t>(key, value);
    else if (key == "min_accuracy")
        min_accuracy = parse_real(key, value);
    else if (key == "assert")
        assert_result = parse_bool(key, value);
    else if (key == "min_success")
        min_success = parse_real(key, value);
    else if (key == "min_clustered")
        min_clustered = parse_real(key, value);
    else if (key == "max_clustered")
        max_clustered = parse_real(key, value);
    else if (key == "min_mono")
        min_mono = parse_real(key, value);
    else if (key == "workers")
        workers = parse_integer<int>(key, value);
    else if (key == "out_dir")
        out_dir = std::string(value);
    else if (key == "name")
        name = std::string(value);
    else
        throw ConfigError("unknown config key '" + std::string(key) +
                          "' (see README for the list of experiment keys)");
}

void ExperimentConfig::apply_override(std::string_view assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos)
        throw ConfigError("expected key=value, got '" + std::string(assignment) + "'");
    set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

Json ExperimentConfig::resolved(int graph_n) const
{
    Json j;
    j["kind"] = to_string(kind);
    if (graph_path) {
        j["graph"] = graph_path->string();
    } else {
        j["n"] = n;
        j["a"] = a;
        j["b"] = b;
        j["method"] = to_string(method);
        j["graph_seed"] = graph_seed.value_or(seed);
    }
    j["rule"] = to_string(rule);
    j["seed"] = seed;
    j["trials"] = trials;
    j["rounds"] = rounds;
    j["kappa"] = kappa;
    switch (kind) {
    case ExperimentKind::Growth:
    case ExperimentKind::Convergence:
    case ExperimentKind::Metastability: {
        const auto [p1, p2] = planted_biases(*this, graph_n);
        j["s1"] = p1;
        j["s2"] = p2;
        break;
    }
    case ExperimentKind::InitTail: j["thresholds"] = thresholds; break;
    case ExperimentKind::CslAccuracy:
        j["ell"] = ell > 0 ? ell : default_csl_ell(graph_n);
        j["snapshot"] = snapshot > 0 ? snapshot : default_csl_rounds(graph_n);
        j["pair_budget"] = pair_budget;
        j["min_accuracy"] = min_accuracy;
        break;
    default: break;
    }
    j["assert"] = assert_result;
    if (kind == ExperimentKind::XiFrequency) {
        j["min_clustered"] = min_clustered;
        j["max_clustered"] = max_clustered;
        j["min_mono"] = min_mono;
    } else if (kind == ExperimentKind::Convergence || kind == ExperimentKind::Metastability ||
               kind == ExperimentKind::CslAccuracy) {
        j["min_success"] = min_success;
    }
    return j;
}

ExperimentConfig parse_config(std::istream& in, std::string_view origin)
{
    ExperimentConfig cfg;
    std::string line;
    for (int number = 1; std::getline(in, line); ++number) {
        std::string_view text = line;
        if (const auto hash = text.find('#'); hash != std::string_view::npos)
            text = text.substr(0, hash);
        text = trim(text);
        if (text.empty())
            continue;
        try {
            cfg.apply_override(text);
        } catch (const ConfigError& e) {
            throw ConfigError(std::string(origin) + ":" + std::to_string(number) + ": " + e.what());
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config file '" + path.string() + "'");
    return parse_config(in, path.string());
}

ClusteredRegularGraph config_graph(const ExperimentConfig& cfg)
{
    if (cfg.graph_path) {
        if (!std::filesystem::exists(*cfg.graph_path))
            throw ConfigError("graph file '" + cfg.graph_path->string() + "' does not exist");
        try {
            return load_graph(*cfg.graph_path);
        } catch (const GraphFormatError& e) {
            throw ConfigError("graph file '" + cfg.graph_path->string() + "' is unreadable: " + e.what());
        }
    }
    try {
        return generate_clustered_regular(cfg.n, cfg.a, cfg.b, cfg.graph_seed.value_or(cfg.seed), cfg.method).graph;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid graph parameters: ") + e.what());
    }
}

ExperimentResult run_experiment(const ExperimentConfig& cfg)
{
    return run_experiment(cfg, config_graph(cfg));
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const ClusteredRegularGraph& g)
{
    if (cfg.trials < 1)
        throw ConfigError("trials must be at least 1");
    if (cfg.rounds < 0)
        throw ConfigError("rounds must be non-negative");
    if (!(cfg.kappa > 0.0))
        throw ConfigError("kappa must be positive");
    ExperimentResult r;
    r.summary["version"] = kVersion;
    r.summary["config"] = cfg.resolved(g.n());
    r.asserted = cfg.assert_result;
    try {
        switch (cfg.kind) {
        case ExperimentKind::XiFrequency: xi_frequency(cfg, g, r); break;
        case ExperimentKind::Growth: growth(cfg, g, r); break;
        case ExperimentKind::Convergence: convergence(cfg, g, r); break;
        case ExperimentKind::Metastability: metastability(cfg, g, r); break;
        case ExperimentKind::InitTail: init_tail(cfg, g, r); break;
        case ExperimentKind::Lemma2Scan: lemma2_scan(cfg, g, r); break;
        case ExperimentKind::LecamScan: lecam_scan(cfg, g, r); break;
        case ExperimentKind::CslAccuracy: csl_accuracy(cfg, g, r); break;
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string(to_string(cfg.kind)) + ": " + e.what());
    }
    r.summary["pass"] = r.passed;
    return r;
}

void write_result(const ExperimentConfig& cfg, const ExperimentResult& result)
{
    std::filesystem::create_directories(cfg.out_dir);
    const auto stem = cfg.stem();
    std::ofstream json(cfg.out_dir / (stem + ".json"));
    std::ofstream csv(cfg.out_dir / (stem + ".csv"));
    if (!json || !csv)
        throw ConfigError("cannot write results under '" + cfg.out_dir.string() + "'");
    json << result.summary.dump(2) << '\n';
    csv << result.csv;
}

Json CheckRecord::to_json() const
{
    return Json{{"check", check}, {"params", params}, {"observed", observed}, {"bound", bound}, {"pass", pass}};
}

std::vector<CheckRecord> verify_graph(const ClusteredRegularGraph& g, std::uint64_t seed, int trials, int workers)
{
    if (trials < 1)
        throw ConfigError("trials must be at least 1");
    std::vector<CheckRecord> out;
    const int n = g.n();
    const Json shape{{"n", n}, {"d", g.d()}, {"b", g.b()}};

    const auto report = validate(g);
    out.push_back({"validate", shape, static_cast<double>(report.violations.size()), 0.0, report.ok});

    const auto hyp = check_hypotheses(g);
    out.push_back({"cut_sparsity_c1", shape, hyp.constants.c1, HypothesisLimits{}.max_c1, hyp.cut_sparse});
    out.push_back({"expansion_c2", shape, hyp.constants.c2, HypothesisLimits{}.max_c2, hyp.expander});

    struct Sample {
        double lemma2_margin = -1.0; // exact - bound, max over both communities
        double oracle_gap = 0.0;
        double lecam_margin = -1.0;  // l1 - 2 Σp², max over tie-free communities
    };
    std::vector<Sample> samples(static_cast<std::size_t>(trials));
    parallel_for_index(samples.size(), workers, [&](std::size_t t) {
        std::mt19937_64 rng(derive_seed(seed, t));
        const Configuration c = random_density_configuration(g, rng);
        const auto bias = biases(g, c);
        const std::array<long long, 2> minority{(n - bias.s1) / 2, (n + bias.s2) / 2};
        const std::array<long long, 2> other{(n - bias.s2) / 2, (n + bias.s1) / 2};
        Sample s;
        for (int i = 0; i < 2; ++i) {
            const double exact = exact_expected_minority(g, c, i + 1);
            if (minority[i] >= 1)
                s.lemma2_margin = std::max(
                    s.lemma2_margin, exact - lemma2_bound(n, minority[i], other[i], hyp.constants.c1, hyp.constants.c2));
            const int si = i == 0 ? bias.s1 : bias.s2;
            if (si == 0)
                continue;
            const auto profile = minority_flip_profile(g, c, i + 1);
            const double direct = exact_expected_count(g, c, i + 1, profile.minority);
            s.oracle_gap = std::max(s.oracle_gap, std::abs(direct - profile.sum_p));
            const auto approx = poisson_approximation(profile.p);
            s.lecam_margin = std::max(s.lecam_margin, approx.l1_distance - 2.0 * approx.sum_p_sq);
        }
        samples[t] = s;
    });

    Sample worst{-std::numeric_limits<double>::infinity(), 0.0, -std::numeric_limits<double>::infinity()};
    for (const auto& s : samples) {
        worst.lemma2_margin = std::max(worst.lemma2_margin, s.lemma2_margin);
        worst.oracle_gap = std::max(worst.oracle_gap, s.oracle_gap);
        worst.lecam_margin = std::max(worst.lecam_margin, s.lecam_margin);
    }
    const Json sampled{{"n", n}, {"d", g.d()}, {"b", g.b()}, {"seed", seed}, {"trials", trials}};
    out.push_back({"lemma2_dominance", sampled, worst.lemma2_margin, 0.0, worst.lemma2_margin < 0.0});
    out.push_back({"oracle_consistency", sampled, worst.oracle_gap, 1e-9, worst.oracle_gap <= 1e-9});
    out.push_back({"le_cam", sampled, worst.lecam_margin, 0.0, worst.lecam_margin <= 0.0});

    const double x = 1.0;
    const double p = normal_tail(x);
    std::uint64_t hits = 0;
    const double root_n = std::sqrt(static_cast<double>(n));
    const auto init_trials = static_cast<std::uint64_t>(trials) * 100;
    for (std::uint64_t t = 0; t < init_trials; ++t)
        hits += biases(g, random_init(g, RngContext{seed, t, 0})).s1 >= x * root_n;
    const double empirical = static_cast<double>(hits) / static_cast<double>(init_trials);
    const double tol = 0.5 / root_n + 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(init_trials));
    out.push_back({"init_tail",
                   Json{{"n", n}, {"x", x}, {"trials", init_trials}},
                   std::abs(empirical - p),
                   tol,
                   std::abs(empirical - p) <= tol});
    return out;
}

} // namespace twochoices
