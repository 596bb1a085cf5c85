// trimatch: match-outcome probabilities and calibration for trinomial-trial
// score models.  Subcommands: calibrate, predict, simulate, rate, vg-check.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <trimatch/trimatch.hpp>

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt7(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.7g", v);
    return buf;
}

void log_config(const std::vector<std::pair<std::string, std::string>>& kv) {
    std::ostringstream line;
    line << "config:";
    for (const auto& [k, v] : kv) line << " " << k << "=" << (v.empty() ? "-" : v);
    std::cerr << line.str() << "\n";
}

std::string on_off(bool v) { return v ? "on" : "off"; }

void print_kv(const std::string& key, const std::string& value) {
    std::printf("%-16s %s\n", key.c_str(), value.c_str());
}

trimatch::FittedModel require_model(const std::string& path) {
    if (path.empty()) throw UsageError("--model is required");
    return trimatch::load_model(path);
}

// Resolve an LSFE holder given as a team name or the literal team/opponent.
bool lsfe_with_team(const std::string& holder, const std::string& team, const std::string& opponent) {
    if (holder == team || holder == "team") return true;
    if (holder == opponent || holder == "opponent") return false;
    throw UsageError("--lsfe must name the team or the opponent (got '" + holder + "')");
}

struct CommonOpts {
    std::string input;
    std::string output;
    std::string model;
    std::uint64_t seed = 0;
    std::string method = "gaussian";
    double lambda = 0.0;
    double n_hat = 0.0;
    bool have_lambda = false;
    bool have_n_hat = false;
    std::string stepwise = "on";
    bool strict_paper_text = false;
    std::int64_t sims = 100000;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--input", o.input, "input file path");
    cmd->add_option("--output", o.output, "output file path");
    cmd->add_option("--model", o.model, "model file path");
    cmd->add_option("--seed", o.seed, "random seed (64-bit)");
    cmd->add_option("--method", o.method, "probability method: gaussian|exact|mc|vg")
        ->check(CLI::IsMember({"gaussian", "exact", "mc", "vg"}));
    cmd->add_option("--lambda", o.lambda, "gamma prior shape")->each([&](const std::string&) {
        o.have_lambda = true;
    });
    cmd->add_option("--n-hat", o.n_hat, "gamma prior mean trial count")->each([&](const std::string&) {
        o.have_n_hat = true;
    });
    cmd->add_option("--stepwise", o.stepwise, "stepwise selection: on|off")
        ->check(CLI::IsMember({"on", "off"}));
    cmd->add_flag("--strict-paper-text", o.strict_paper_text,
                  "use the printed-form VG(0.5) win probability");
    cmd->add_option("--sims", o.sims, "number of Monte Carlo simulations");
}

trimatch::GammaTrialPrior require_prior(const CommonOpts& o) {
    if (!o.have_lambda || !o.have_n_hat)
        throw UsageError("method=vg requires --lambda and --n-hat");
    return trimatch::GammaTrialPrior(o.lambda, o.n_hat);
}

int cmd_calibrate(const CommonOpts& o) {
    log_config({{"command", "calibrate"},
                {"input", o.input},
                {"output", o.output},
                {"stepwise", o.stepwise}});
    if (o.input.empty()) throw UsageError("calibrate requires --input");
    const auto records = trimatch::load_matches(o.input);
    const auto rows = trimatch::expand_observations(records);

    trimatch::FittedModel model;
    if (o.stepwise == "on") {
        model = trimatch::stepwise_select(rows);
    } else {
        const auto design = trimatch::build_design(trimatch::aggregate_observations(rows));
        model = trimatch::fit_glm_binomial_logit(design);
    }

    const std::size_t candidates = 2 + 2 * model.teams.size();
    std::printf("%-20s %12s %12s %12s %12s\n", "Term", "Estimate", "E.S.E.", "t-value", "p-value");
    for (std::size_t i = 0; i < model.terms.size(); ++i) {
        std::printf("%-20s %12s %12s %12s %12s\n", model.terms[i].c_str(),
                    fmt7(model.coefficients[i]).c_str(), fmt7(model.standard_errors[i]).c_str(),
                    fmt7(model.z_values[i]).c_str(), fmt7(model.p_values[i]).c_str());
    }
    print_kv("deviance", fmt7(model.deviance));
    print_kv("aic", fmt7(model.aic));
    print_kv("terms_retained", std::to_string(model.terms.size()));
    print_kv("candidate_terms", std::to_string(candidates) + " (including intercept; " +
                                    std::to_string(candidates - 1) + " predictors)");
    if (!o.output.empty()) {
        trimatch::save_model(model, o.output);
        std::cerr << "model written to " << o.output << "\n";
    }
    return 0;
}

int cmd_predict(const CommonOpts& o, const std::string& team, const std::string& opponent,
                const std::string& lsfe, int threads) {
    log_config({{"command", "predict"},
                {"model", o.model},
                {"team", team},
                {"opponent", opponent},
                {"lsfe", lsfe},
                {"method", o.method},
                {"seed", std::to_string(o.seed)},
                {"sims", std::to_string(o.sims)},
                {"lambda", o.have_lambda ? fmt7(o.lambda) : ""},
                {"n_hat", o.have_n_hat ? fmt7(o.n_hat) : ""},
                {"strict-paper-text", on_off(o.strict_paper_text)},
                {"threads", std::to_string(threads)}});
    if (team.empty() || opponent.empty()) throw UsageError("predict requires --team and --opponent");
    if (lsfe.empty()) throw UsageError("predict requires --lsfe (holder of last stone in first end)");
    const auto model = require_model(o.model);
    const bool lsfe_team = lsfe_with_team(lsfe, team, opponent);
    const auto params = trimatch::match_params_from_model(model, team, opponent, lsfe_team, &std::cerr);
    const double share = params.p_x / (params.p_x + params.p_y);

    double win10 = 0.0, draw10 = 0.0, loss10 = 0.0, overall = 0.0;
    if (o.method == "gaussian") {
        const auto out = trimatch::curling_outcomes(params);
        win10 = out.win_after_10;
        draw10 = out.draw_after_10;
        loss10 = 1.0 - win10 - draw10;
        overall = out.overall.win_x;
    } else if (o.method == "exact") {
        const auto out = trimatch::exact_outcomes(params, trimatch::kCurlingTrials, false);
        win10 = out.win_x;
        draw10 = out.draw;
        loss10 = out.win_y;
        overall = out.win_x + out.draw * share;
    } else if (o.method == "mc") {
        const auto rep = trimatch::monte_carlo_fixed_n(params, trimatch::kCurlingTrials, o.sims,
                                                       o.seed, false, threads);
        win10 = rep.win_x_hat;
        draw10 = rep.draw_hat;
        loss10 = rep.win_y_hat;
        overall = rep.win_x_hat + rep.draw_hat * share;
    } else {
        const auto prior = require_prior(o);
        const auto out = trimatch::vg_match_outcomes(params, prior, o.strict_paper_text);
        win10 = out.win_x;
        draw10 = out.draw;
        loss10 = out.win_y;
        overall = trimatch::vg_overall_win_x(params, prior, o.strict_paper_text);
    }
    print_kv("p_team", fmt7(params.p_x));
    print_kv("p_opponent", fmt7(params.p_y));
    print_kv("win_after_10", fmt7(win10));
    print_kv("draw", fmt7(draw10));
    print_kv("loss_after_10", fmt7(loss10));
    print_kv("overall_win", fmt7(overall));
    return 0;
}

int cmd_simulate(const CommonOpts& o, const std::string& team, const std::string& opponent,
                 const std::string& lsfe, double px, double py, bool have_p, int n, int threads,
                 const std::string& mode_name, bool tie_alloc) {
    log_config({{"command", "simulate"},
                {"model", o.model},
                {"team", team},
                {"opponent", opponent},
                {"lsfe", lsfe},
                {"px", have_p ? fmt7(px) : ""},
                {"py", have_p ? fmt7(py) : ""},
                {"method", o.method},
                {"n", std::to_string(n)},
                {"sims", std::to_string(o.sims)},
                {"seed", std::to_string(o.seed)},
                {"mode", mode_name},
                {"tie-alloc", on_off(tie_alloc)},
                {"threads", std::to_string(threads)},
                {"output", o.output}});
    std::optional<trimatch::MatchParams> params;
    if (have_p) {
        params = trimatch::MatchParams(px, py);
    } else {
        if (team.empty() || opponent.empty() || lsfe.empty())
            throw UsageError("simulate requires --px/--py or --model with --team/--opponent/--lsfe");
        const auto model = require_model(o.model);
        params = trimatch::match_params_from_model(model, team, opponent,
                                                   lsfe_with_team(lsfe, team, opponent), &std::cerr);
    }

    trimatch::SimulationReport rep;
    if (o.method == "vg") {
        const auto prior = require_prior(o);
        const auto mode = mode_name == "discrete" ? trimatch::VgSampleMode::discrete
                                                  : trimatch::VgSampleMode::continuous;
        rep = trimatch::monte_carlo_vg(*params, prior, mode, o.sims, o.seed, threads);
    } else if (o.method == "mc" || o.method == "gaussian") {
        rep = trimatch::monte_carlo_fixed_n(*params, n, o.sims, o.seed, tie_alloc, threads);
    } else {
        throw UsageError("simulate supports --method mc or vg");
    }
    print_kv("n_sims", std::to_string(rep.n_sims));
    print_kv("win_x_hat", fmt7(rep.win_x_hat));
    print_kv("draw_hat", fmt7(rep.draw_hat));
    print_kv("win_y_hat", fmt7(rep.win_y_hat));
    print_kv("se_win_x", fmt7(rep.se_win_x));
    print_kv("se_draw", fmt7(rep.se_draw));
    print_kv("se_win_y", fmt7(rep.se_win_y));
    print_kv("kurtosis_of_diff", fmt7(rep.sample_kurtosis_of_diff));
    print_kv("seed", std::to_string(rep.seed));
    std::cerr << "elapsed_seconds " << rep.elapsed_seconds << "\n";
    if (!o.output.empty()) {
        std::ofstream out(o.output);
        if (!out) throw trimatch::ParseError("cannot open report file for writing: " + o.output);
        out << trimatch::report_to_json(rep).dump(2) << "\n";
        std::cerr << "report written to " << o.output << "\n";
    }
    return 0;
}

int cmd_rate(const CommonOpts& o, double significance) {
    log_config({{"command", "rate"}, {"model", o.model}, {"significance", fmt7(significance)}});
    const auto model = require_model(o.model);
    const auto ratings = trimatch::rate_teams(model, significance);
    std::printf("%-16s %-9s %-9s %-6s\n", "Team", "Attack", "Defence", "Grade");
    for (const auto& r : ratings) {
        std::printf("%-16s %-9s %-9s %-6s\n", r.team.c_str(), trimatch::to_string(r.attack),
                    trimatch::to_string(r.defence), trimatch::to_string(r.grade));
    }
    return 0;
}

int cmd_vg_check(const CommonOpts& o) {
    log_config({{"command", "vg-check"}, {"input", o.input}});
    if (o.input.empty()) throw UsageError("vg-check requires --input");
    std::ifstream in(o.input);
    if (!in) throw trimatch::ParseError("cannot open input file: " + o.input);
    std::vector<int> diffs;
    double value = 0.0;
    while (in >> value) {
        const int d = static_cast<int>(value);
        if (static_cast<double>(d) != value)
            throw trimatch::ParseError("vg-check: point differences must be integers");
        diffs.push_back(d);
    }
    if (!in.eof()) throw trimatch::ParseError("vg-check: non-numeric entry in input");
    if (diffs.size() < 4)
        throw UsageError("vg-check needs at least 4 point differences (got " +
                         std::to_string(diffs.size()) + ")");
    trimatch::VgGateResult gate;
    try {
        gate = trimatch::vg_gate(diffs);
    } catch (const trimatch::DomainError&) {
        throw trimatch::DomainError("vg-check: degenerate sample (zero variance)");
    }
    print_kv("n", std::to_string(diffs.size()));
    print_kv("sample_kurtosis", fmt7(gate.kurtosis));
    print_kv("threshold", fmt7(trimatch::kVgKurtosisThreshold));
    print_kv("verdict", gate.vg_recommended ? "VG recommended" : "VG not recommended");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"trinomial-trial match outcome engine"};
    app.require_subcommand(1);

    CommonOpts calibrate_opts, predict_opts, simulate_opts, rate_opts, check_opts;
    std::string team, opponent, lsfe;
    std::string sim_team, sim_opponent, sim_lsfe, sim_mode = "continuous";
    double px = 0.0, py = 0.0, significance = 0.05;
    bool have_p = false;
    int n = trimatch::kCurlingTrials, threads = 1, sim_threads = 1;
    bool tie_alloc = true;

    auto* calibrate = app.add_subcommand("calibrate", "fit a scoring model from match results");
    add_common(calibrate, calibrate_opts);

    auto* predict = app.add_subcommand("predict", "match outcome probabilities for a pairing");
    add_common(predict, predict_opts);
    predict->add_option("--team", team, "team of interest");
    predict->add_option("--opponent", opponent, "opposing team");
    predict->add_option("--lsfe", lsfe, "holder of last stone in first end (team name)");
    predict->add_option("--threads", threads, "worker threads for method=mc");

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo outcome estimates");
    add_common(simulate, simulate_opts);
    simulate_opts.method = "mc";
    simulate->add_option("--team", sim_team, "team of interest");
    simulate->add_option("--opponent", sim_opponent, "opposing team");
    simulate->add_option("--lsfe", sim_lsfe, "holder of last stone in first end");
    simulate->add_option("--px", px, "per-trial scoring probability of X")->each([&](const std::string&) {
        have_p = true;
    });
    simulate->add_option("--py", py, "per-trial scoring probability of Y");
    simulate->add_option("--n", n, "trials per simulated match");
    simulate->add_option("--threads", sim_threads, "worker threads");
    simulate->add_option("--mode", sim_mode, "vg sampling mode: continuous|discrete")
        ->check(CLI::IsMember({"continuous", "discrete"}));
    simulate->add_option("--tie-alloc", tie_alloc, "resolve tied scores by the allocation rule");

    auto* rate = app.add_subcommand("rate", "grade teams from a fitted model");
    add_common(rate, rate_opts);
    rate->add_option("--significance", significance, "significance level for the rating interface");

    auto* check = app.add_subcommand("vg-check", "kurtosis gate for the VG model");
    add_common(check, check_opts);

    CLI11_PARSE(app, argc, argv);
    try {
        if (calibrate->parsed()) return cmd_calibrate(calibrate_opts);
        if (predict->parsed()) return cmd_predict(predict_opts, team, opponent, lsfe, threads);
        if (simulate->parsed())
            return cmd_simulate(simulate_opts, sim_team, sim_opponent, sim_lsfe, px, py, have_p, n,
                                sim_threads, sim_mode, tie_alloc);
        if (rate->parsed()) return cmd_rate(rate_opts, significance);
        if (check->parsed()) return cmd_vg_check(check_opts);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
