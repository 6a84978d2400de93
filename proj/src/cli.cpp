#include "linkcorr/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "linkcorr/analytics.hpp"
#include "linkcorr/errors.hpp"
#include "linkcorr/forecast.hpp"
#include "linkcorr/gibbs.hpp"
#include "linkcorr/ingest.hpp"
#include "linkcorr/matrix_io.hpp"
#include "linkcorr/niw.hpp"
#include "linkcorr/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace linkcorr {

std::vector<Index> parse_link_list(const std::string& text, int n_links) {
    std::vector<Index> out;
    std::stringstream ss(text);
    std::string part;
    auto to_int = [&](const std::string& s) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size()) throw std::invalid_argument("bad link list '" + text + "'");
        if (v < 1 || v > n_links)
            throw std::invalid_argument("link " + s + " outside 1.." + std::to_string(n_links));
        return v;
    };
    while (std::getline(ss, part, ',')) {
        if (part.empty()) continue;
        const auto dash = part.find('-');
        if (dash == std::string::npos) {
            out.push_back(to_int(part) - 1);
            continue;
        }
        const int a = to_int(part.substr(0, dash)), b = to_int(part.substr(dash + 1));
        if (b < a) throw std::invalid_argument("descending range '" + part + "'");
        for (int k = a; k <= b; ++k) out.push_back(k - 1);
    }
    if (out.empty()) throw std::invalid_argument("empty link list");
    if (std::set<Index>(out.begin(), out.end()).size() != out.size())
        throw std::invalid_argument("link list '" + text + "' repeats a link");
    return out;
}

namespace {

struct Common {
    bool json_out = false;
};

json load_config(const std::string& path) { return path.empty() ? json::object() : read_json_file(path); }

NIWParams prior_from_config(const json& cfg, Index n) {
    NIWParams p = default_prior(n);
    if (cfg.contains("prior")) {
        const json& j = cfg.at("prior");
        if (j.contains("mu0")) p.mu0 = vector_from_json(j.at("mu0"));
        if (j.contains("psi0")) p.psi0 = matrix_from_json(j.at("psi0"));
        p.lambda0 = j.value("lambda0", p.lambda0);
        p.nu0 = j.value("nu0", p.nu0);
    }
    p.validate();
    return p;
}

RopeSettings rope_from_config(const json& cfg) {
    RopeSettings r;
    if (cfg.contains("rope")) {
        const json& j = cfg.at("rope");
        r.low = j.value("low", r.low);
        r.high = j.value("high", r.high);
        r.reject_threshold = j.value("reject", r.reject_threshold);
        r.accept_threshold = j.value("accept", r.accept_threshold);
        r.level = j.value("level", r.level);
    }
    return r;
}

void emit(const Common& common, const json& summary, const std::string& human) {
    if (common.json_out)
        std::cout << summary.dump(2) << "\n";
    else
        std::cout << human << "\n";
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

// ---- synth

struct SynthArgs {
    std::string spec, out;
    std::uint64_t seed = 0;
};

int cmd_synth(const Common& common, const SynthArgs& a) {
    KernelSpec kernel = KernelSpec::benchmark_default();
    Vector mean = benchmark_mean();
    DatasetPlan plan = DatasetPlan::benchmark_default();
    if (!a.spec.empty()) {
        const json j = read_json_file(a.spec);
        if (j.contains("kernel")) kernel = KernelSpec::from_json(j.at("kernel"));
        if (j.contains("mean")) mean = vector_from_json(j.at("mean"));
        if (j.contains("plan")) plan = DatasetPlan::from_json(j.at("plan"));
    }
    Rng rng(a.seed);
    const SyntheticDataset data = generate_dataset(kernel, mean, plan, rng);
    fs::create_directories(a.out);
    write_dataset(a.out, data);
    // One complete draw per line, usable directly as forecast input.
    std::ostringstream complete;
    for (Index c = 0; c < data.complete.cols(); ++c)
        for (Index k = 0; k < data.complete.rows(); ++k)
            complete << format_double(data.complete(k, c)) << (k + 1 == data.complete.rows() ? '\n' : ',');
    write_text(fs::path(a.out) / "complete.csv", complete.str());
    write_json_file(fs::path(a.out) / "spec.json",
                    {{"kernel", kernel.to_json()}, {"mean", vector_to_json(mean)}, {"plan", plan.to_json()},
                     {"seed", a.seed}});

    std::map<std::string, std::size_t> kinds;
    for (const auto& o : data.observations) ++kinds[to_string(classify(o))];
    const json summary{{"command", "synth"},
                       {"out", a.out},
                       {"observations", data.observations.size()},
                       {"complete_draws", data.complete.cols()},
                       {"kinds", kinds}};
    emit(common, summary,
         "wrote " + std::to_string(data.observations.size()) + " observations to " + a.out);
    return 0;
}

// ---- estimate

struct EstimateArgs {
    std::string data, period, out, config, subset = "all";
    std::optional<std::size_t> k1, k2, thin;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    bool no_center = false;
    int chains = 4;
};

fs::path resolve_data(const EstimateArgs& a) {
    const fs::path base(a.data);
    if (!a.period.empty()) {
        const fs::path p = base / (a.period + ".jsonl");
        if (!fs::exists(p)) throw std::runtime_error("no observations for period '" + a.period + "' at " + p.string());
        return p;
    }
    if (fs::is_directory(base)) return base / "observations.jsonl";
    return base;
}

int cmd_estimate(const Common& common, const EstimateArgs& a) {
    const json cfg = load_config(a.config);
    GibbsConfig gc = gibbs_config_from_json(cfg.value("gibbs", json::object()));
    if (a.k1) gc.burn_in = *a.k1;
    if (a.k2) gc.retained = *a.k2;
    if (a.thin) gc.thin = *a.thin;
    if (a.seed) gc.seed = *a.seed;
    if (a.threads) gc.threads = *a.threads;
    if (a.no_center) gc.center = false;
    gc.validate();
    if (a.chains < 1) throw std::invalid_argument("--chains must be at least 1");

    const auto all = read_observations(resolve_data(a));
    if (all.empty()) throw std::invalid_argument("no observations to estimate from");
    std::vector<Observation> obs;
    for (const auto& o : all) {
        const auto kind = classify(o);
        if (a.subset == "all" || (a.subset == "full" && kind == ObservationKind::full) ||
            (a.subset == "full-missing" && kind != ObservationKind::ragged))
            obs.push_back(o);
    }
    if (obs.empty()) throw std::invalid_argument("subset '" + a.subset + "' selects no observations");
    const NIWParams prior = prior_from_config(cfg, obs.front().n_links());

    const PosteriorChain chain = run_gibbs(obs, prior, gc);
    save_chain(chain, a.out);

    json summary{{"command", "estimate"},      {"out", a.out},         {"observations", obs.size()},
                 {"draws", chain.size()},      {"k1", gc.burn_in},     {"k2", gc.retained},
                 {"thin", gc.thin},            {"seed", gc.seed},      {"center", gc.center},
                 {"chains", a.chains}};
    std::string human = "saved " + std::to_string(chain.size()) + " draws to " + a.out;

    if (a.chains > 1) {
        // Advisory only: split R̂ of every μ entry across independent chains.
        std::vector<PosteriorChain> extra;
        for (int c = 1; c < a.chains; ++c) {
            GibbsConfig other = gc;
            other.seed = mix64(gc.seed ^ mix64(static_cast<std::uint64_t>(c)));
            extra.push_back(run_gibbs(obs, prior, other));
        }
        double worst = 0.0;
        json per_link = json::array();
        for (Index k = 0; k < chain.dim(); ++k) {
            std::vector<std::vector<double>> series;
            auto collect = [&](const PosteriorChain& ch) {
                std::vector<double> s;
                for (const auto& m : ch.mean_samples) s.push_back(m(k));
                series.push_back(std::move(s));
            };
            collect(chain);
            for (const auto& ch : extra) collect(ch);
            const double r = split_rhat(series);
            per_link.push_back(r);
            worst = std::max(worst, r);
        }
        summary["rhat_mean"] = per_link;
        summary["rhat_max"] = worst;
        human += "; max split R-hat over " + std::to_string(a.chains) + " chains " + format_double(worst);
    }
    write_json_file(fs::path(a.out) / "summary.json", summary);
    emit(common, summary, human);
    return 0;
}

// ---- diagnose

struct DiagnoseArgs {
    std::string chain, out, truth, config;
    std::optional<double> level;
};

int cmd_diagnose(const Common& common, const DiagnoseArgs& a) {
    const json cfg = load_config(a.config);
    RopeSettings rope = rope_from_config(cfg);
    if (a.level) rope.level = *a.level;
    const PosteriorChain chain = load_chain(a.chain);
    if (chain.size() < 2) throw std::invalid_argument("chain needs at least 2 draws");

    const auto decisions = rope_decisions(chain, rope);
    const CorrelationMatrix mean_corr = posterior_mean_corr(chain);
    const GaussianParams est = posterior_mean_params(chain);
    const CorrelationMatrix shown = threshold_display(mean_corr, decisions);

    fs::create_directories(a.out);
    {
        std::ofstream out(fs::path(a.out) / "decisions.csv");
        write_decisions_csv(out, decisions);
    }
    write_matrix_csv(fs::path(a.out) / "corr_mean.csv", mean_corr.matrix());
    write_matrix_csv(fs::path(a.out) / "corr_thresholded.csv", shown.matrix());
    write_json_file(fs::path(a.out) / "estimate.json", gaussian_to_json(est));

    // μ summary: posterior mean and equal-tailed interval per link.
    std::ostringstream mu;
    mu << "link,mean,ci_low,ci_high\n";
    for (Index k = 0; k < chain.dim(); ++k) {
        std::vector<double> s;
        for (const auto& m : chain.mean_samples) s.push_back(m(k));
        const Interval ci = credible_interval(s, rope.level);
        mu << k + 1 << ',' << format_double(est.mean(k)) << ',' << format_double(ci.low) << ','
           << format_double(ci.high) << '\n';
    }
    write_text(fs::path(a.out) / "mean.csv", mu.str());

    std::map<std::string, int> verdicts;
    for (const auto& d : decisions) ++verdicts[to_string(d.verdict)];
    json summary{{"command", "diagnose"}, {"draws", chain.size()}, {"verdicts", verdicts}, {"out", a.out}};
    std::string human = "wrote diagnostics to " + a.out;
    if (!a.truth.empty()) {
        const GaussianParams truth = gaussian_from_json(read_json_file(a.truth));
        const double kl = kl_gaussian(truth, est);
        summary["kl"] = kl;
        human += "; KL(truth || estimate) = " + format_double(kl);
    }
    write_json_file(fs::path(a.out) / "summary.json", summary);
    emit(common, summary, human);
    return 0;
}

// ---- forecast

struct ForecastArgs {
    std::string chain, observe, predict, input, out, trip, mode = "mixture";
    std::uint64_t seed = 0;
};

std::vector<std::vector<double>> read_numeric_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<double> row;
        bool numeric = true;
        for (const auto& cell : split_csv_line(line)) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                if (used != cell.size()) numeric = false;
            } catch (const std::exception&) {
                numeric = false;
            }
        }
        if (!numeric) {
            if (rows.empty() && line_no == 1) continue;  // header
            throw FormatError(path + ":" + std::to_string(line_no) + ": non-numeric value");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

int cmd_forecast(const Common& common, const ForecastArgs& a) {
    const PosteriorChain chain = load_chain(a.chain);
    const int n = static_cast<int>(chain.dim());
    const auto observed = parse_link_list(a.observe, n);
    const auto predict = parse_link_list(a.predict, n);
    PredictiveMode mode;
    if (a.mode == "mixture")
        mode = PredictiveMode::mixture;
    else if (a.mode == "plugin")
        mode = PredictiveMode::plugin;
    else
        throw std::invalid_argument("--mode must be mixture or plugin");
    std::vector<Index> trip;
    if (!a.trip.empty()) trip = parse_link_list(a.trip, n);

    const Forecaster forecaster(chain, observed, predict, mode);
    const auto rows = read_numeric_rows(a.input);

    std::ostringstream csv;
    write_forecast_header(csv, true);
    for (std::size_t c = 0; c < rows.size(); ++c) {
        Vector vals(static_cast<Index>(observed.size()));
        if (rows[c].size() == observed.size()) {
            for (std::size_t k = 0; k < observed.size(); ++k) vals(static_cast<Index>(k)) = rows[c][k];
        } else if (rows[c].size() == static_cast<std::size_t>(n)) {
            for (std::size_t k = 0; k < observed.size(); ++k)
                vals(static_cast<Index>(k)) = rows[c][static_cast<std::size_t>(observed[k])];
        } else {
            throw FormatError("input row " + std::to_string(c + 1) + " has " + std::to_string(rows[c].size()) +
                              " values; expected " + std::to_string(observed.size()) + " or " + std::to_string(n));
        }
        Rng case_rng = Rng::substream(a.seed, {static_cast<std::uint64_t>(c)});
        const LinkForecast f = forecaster.forecast_links(vals, case_rng);
        write_forecast_rows(csv, f, static_cast<long>(c + 1));
        if (!trip.empty()) {
            const TripForecast t = forecaster.forecast_trip(vals, trip, case_rng);
            csv << c + 1 << ",trip," << format_double(t.mean) << ',' << format_double(std::sqrt(t.variance)) << ','
                << format_double(t.quantile(0.025)) << ',' << format_double(t.quantile(0.975)) << '\n';
        }
    }
    const fs::path out(a.out);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_text(out, csv.str());
    const json summary{{"command", "forecast"}, {"cases", rows.size()},  {"out", a.out},
                       {"mode", a.mode},        {"components", forecaster.components()}};
    emit(common, summary, "wrote forecasts for " + std::to_string(rows.size()) + " cases to " + a.out);
    return 0;
}

// ---- ingest

struct IngestArgs {
    std::string events, geometry, out, config, period_key = "first-link";
    int max_ragged_span = 3;
};

int cmd_ingest(const Common& common, const IngestArgs& a) {
    const json cfg = load_config(a.config);
    const PeriodSpec periods = cfg.contains("periods") ? PeriodSpec::from_json(cfg.at("periods")) : PeriodSpec::defaults();
    const RouteGeometry geometry = RouteGeometry::from_json(read_json_file(a.geometry));
    IngestOptions opts;
    opts.max_ragged_span = a.max_ragged_span;
    if (a.period_key == "first-link")
        opts.period_key = PeriodKey::first_link_entry;
    else if (a.period_key == "trip-start")
        opts.period_key = PeriodKey::trip_start;
    else
        throw std::invalid_argument("--period-key must be first-link or trip-start");

    const EventTable table = parse_events(fs::path(a.events));
    const IngestResult result = events_to_observations(table.events, geometry, periods, opts);

    fs::create_directories(a.out);
    json counts = json::object();
    for (const auto& [period, obs] : result.by_period) {
        write_observations(fs::path(a.out) / (period + ".jsonl"), obs);
        counts[period] = obs.size();
    }
    std::ostringstream rej;
    rej << "line,reason\n";
    for (const auto& r : table.rejects) rej << r.line << ",\"" << r.reason << "\"\n";
    write_text(fs::path(a.out) / "rejects.csv", rej.str());

    const json summary{{"command", "ingest"},
                       {"events", table.events.size()},
                       {"rejected_rows", table.rejects.size()},
                       {"trips", result.trips},
                       {"observations", counts},
                       {"dropped", result.dropped}};
    write_json_file(fs::path(a.out) / "summary.json", summary);
    emit(common, summary,
         "ingested " + std::to_string(result.trips) + " trips (" + std::to_string(table.rejects.size()) +
             " rejected rows) into " + a.out);
    return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"linkcorr: Bayesian link travel-time correlation from partial bus recordings"};
    app.require_subcommand(1);
    app.fallthrough();  // lets --json follow the subcommand
    Common common;
    app.add_flag("--json", common.json_out, "Print a JSON summary to stdout");

    SynthArgs synth;
    auto* s = app.add_subcommand("synth", "Generate a synthetic benchmark dataset");
    s->add_option("--spec", synth.spec, "JSON with optional kernel, mean and plan")->check(CLI::ExistingFile);
    s->add_option("--out", synth.out, "Output directory")->required();
    s->add_option("--seed", synth.seed, "Random seed");

    EstimateArgs est;
    auto* e = app.add_subcommand("estimate", "Run the Gibbs sampler and save the posterior chain");
    e->add_option("--data", est.data, "Observation JSONL file or directory")->required();
    e->add_option("--period", est.period, "Use <data>/<period>.jsonl");
    e->add_option("--out", est.out, "Chain directory")->required();
    e->add_option("--k1", est.k1, "Burn-in iterations");
    e->add_option("--k2", est.k2, "Retained iterations");
    e->add_option("--thin", est.thin, "Keep every thin-th retained draw");
    e->add_option("--seed", est.seed, "Random seed");
    e->add_option("--threads", est.threads, "Worker threads for imputation");
    e->add_option("--config", est.config, "JSON config (prior, gibbs)")->check(CLI::ExistingFile);
    e->add_option("--subset", est.subset, "Observation kinds to use")
        ->check(CLI::IsMember({"all", "full", "full-missing"}));
    e->add_flag("--no-center", est.no_center, "Let the prior mean act on raw travel times");
    e->add_option("--chains", est.chains, "Chains for the advisory split R-hat (1 disables)");

    DiagnoseArgs diag;
    auto* d = app.add_subcommand("diagnose", "Credible intervals, ROPE verdicts and KL for a chain");
    d->add_option("--chain", diag.chain, "Chain directory")->required()->check(CLI::ExistingDirectory);
    d->add_option("--out", diag.out, "Output directory")->required();
    d->add_option("--truth", diag.truth, "truth.json with mean and cov")->check(CLI::ExistingFile);
    d->add_option("--level", diag.level, "Credible level");
    d->add_option("--config", diag.config, "JSON config (rope)")->check(CLI::ExistingFile);

    ForecastArgs fc;
    auto* f = app.add_subcommand("forecast", "Conditional forecasts of unobserved links");
    f->add_option("--chain", fc.chain, "Chain directory")->required()->check(CLI::ExistingDirectory);
    f->add_option("--observe", fc.observe, "Observed links, e.g. 1-11")->required();
    f->add_option("--predict", fc.predict, "Links to forecast, e.g. 12-18")->required();
    f->add_option("--input", fc.input, "CSV of observed values, one case per row")->required()->check(CLI::ExistingFile);
    f->add_option("--out", fc.out, "Forecast CSV")->required();
    f->add_option("--trip", fc.trip, "Also forecast the total over these links");
    f->add_option("--mode", fc.mode, "mixture or plugin")->check(CLI::IsMember({"mixture", "plugin"}));
    f->add_option("--seed", fc.seed, "Random seed");

    IngestArgs ing;
    auto* g = app.add_subcommand("ingest", "Turn in-out-stop events into per-period observations");
    g->add_option("--events", ing.events, "Event CSV")->required()->check(CLI::ExistingFile);
    g->add_option("--geometry", ing.geometry, "Route geometry JSON")->required()->check(CLI::ExistingFile);
    g->add_option("--out", ing.out, "Output directory")->required();
    g->add_option("--max-ragged-span", ing.max_ragged_span, "Longest ragged span kept");
    g->add_option("--config", ing.config, "JSON config (periods)")->check(CLI::ExistingFile);
    g->add_option("--period-key", ing.period_key, "first-link or trip-start")
        ->check(CLI::IsMember({"first-link", "trip-start"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        return app.exit(err);
    }

    try {
        if (*s) return cmd_synth(common, synth);
        if (*e) return cmd_estimate(common, est);
        if (*d) return cmd_diagnose(common, diag);
        if (*f) return cmd_forecast(common, fc);
        if (*g) return cmd_ingest(common, ing);
    } catch (const std::exception& err) {
        std::cerr << "linkcorr: error: " << err.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace linkcorr
