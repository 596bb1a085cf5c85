#pragma once

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "trimatch/csv.hpp"
#include "trimatch/errors.hpp"
#include "trimatch/glm.hpp"
#include "trimatch/match.hpp"
#include "trimatch/rng.hpp"

namespace trimatch {

enum class LsfeSide { A, B };

// One historical match as ingested.
struct MatchRecord {
    std::string match_id;
    std::string team_a;
    std::string team_b;
    LsfeSide lsfe_holder;
    int score_a;
    int score_b;
};

// One side of a match as a binomial observation: successes out of 80 trials.
struct ObservationRow {
    std::string team;
    std::string opponent;
    bool lsfe;
    int successes;
    int trials;
};

namespace detail {

inline std::optional<int> parse_count(const std::string& s) {
    int value = 0;
    const char* b = s.data();
    const char* e = b + s.size();
    auto [ptr, ec] = std::from_chars(b, e, value);
    if (ec != std::errc{} || ptr != e || value < 0) return std::nullopt;
    return value;
}

} // namespace detail

// Parse match records from CSV.  Header row required with columns match_id,
// team_a, team_b, lsfe_holder, score_a, score_b (any order; extras ignored).
// All malformed rows are reported together, each with its line number.
inline std::vector<MatchRecord> load_matches(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty input: missing header row");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const std::vector<std::string> header = split_csv_line(line);
    const std::vector<std::string> required = {"match_id", "team_a",  "team_b",
                                               "lsfe_holder", "score_a", "score_b"};
    std::unordered_map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col.emplace(header[i], i);
    std::vector<std::string> missing;
    for (const auto& name : required)
        if (!col.count(name)) missing.push_back(name);
    if (!missing.empty()) {
        std::ostringstream msg;
        msg << "missing required column(s):";
        for (const auto& name : missing) msg << " " << name;
        throw ParseError(msg.str());
    }

    std::vector<MatchRecord> records;
    std::vector<std::string> problems;
    std::unordered_map<std::string, int> first_line_of_id;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        auto complain = [&](const std::string& what) {
            problems.push_back("line " + std::to_string(line_no) + ": " + what);
        };
        if (fields.size() != header.size()) {
            complain("expected " + std::to_string(header.size()) + " fields, got " +
                     std::to_string(fields.size()));
            continue;
        }
        MatchRecord rec;
        rec.match_id = fields[col["match_id"]];
        rec.team_a = fields[col["team_a"]];
        rec.team_b = fields[col["team_b"]];
        const std::string holder = fields[col["lsfe_holder"]];
        const std::string score_a_text = fields[col["score_a"]];
        const std::string score_b_text = fields[col["score_b"]];

        bool ok = true;
        if (rec.match_id.empty()) {
            complain("empty match_id");
            ok = false;
        } else {
            const auto [it, inserted] = first_line_of_id.emplace(rec.match_id, line_no);
            if (!inserted) {
                complain("duplicate match_id '" + rec.match_id + "' (first seen at line " +
                         std::to_string(it->second) + ")");
                ok = false;
            }
        }
        if (rec.team_a.empty() || rec.team_b.empty()) {
            complain("empty team name");
            ok = false;
        } else if (rec.team_a == rec.team_b) {
            complain("team_a equals team_b ('" + rec.team_a + "')");
            ok = false;
        }
        if (holder == rec.team_a && !rec.team_a.empty())
            rec.lsfe_holder = LsfeSide::A;
        else if (holder == rec.team_b && !rec.team_b.empty())
            rec.lsfe_holder = LsfeSide::B;
        else if (holder == "A")
            rec.lsfe_holder = LsfeSide::A;
        else if (holder == "B")
            rec.lsfe_holder = LsfeSide::B;
        else {
            complain("lsfe_holder '" + holder + "' is neither team nor A/B");
            ok = false;
        }
        for (const auto* side : {&score_a_text, &score_b_text}) {
            const auto parsed = detail::parse_count(*side);
            if (!parsed) {
                complain("non-numeric or negative score '" + *side + "'");
                ok = false;
            } else if (*parsed > kCurlingTrials) {
                complain("score " + *side + " exceeds the trial budget of " +
                         std::to_string(kCurlingTrials));
                ok = false;
            } else if (side == &score_a_text) {
                rec.score_a = *parsed;
            } else {
                rec.score_b = *parsed;
            }
        }
        if (ok) records.push_back(std::move(rec));
    }
    if (!problems.empty()) {
        std::ostringstream msg;
        msg << problems.size() << " malformed row(s):";
        for (const auto& p : problems) msg << "\n  " << p;
        throw ParseError(msg.str());
    }
    return records;
}

inline std::vector<MatchRecord> load_matches(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open input file: " + path);
    return load_matches(in);
}

// Each match yields two observation rows, one per side.
inline std::vector<ObservationRow> expand_observations(const std::vector<MatchRecord>& records) {
    std::vector<ObservationRow> rows;
    rows.reserve(records.size() * 2);
    for (const auto& r : records) {
        rows.push_back({r.team_a, r.team_b, r.lsfe_holder == LsfeSide::A, r.score_a, kCurlingTrials});
        rows.push_back({r.team_b, r.team_a, r.lsfe_holder == LsfeSide::B, r.score_b, kCurlingTrials});
    }
    return rows;
}

// Collapse rows sharing a covariate pattern (team, opponent, lsfe).  The
// binomial likelihood factorizes over patterns, so coefficients, standard
// errors, and AIC differences are unchanged while fits get much cheaper.
inline std::vector<ObservationRow> aggregate_observations(const std::vector<ObservationRow>& rows) {
    std::map<std::tuple<std::string, std::string, bool>, std::pair<long long, long long>> acc;
    for (const auto& r : rows) {
        auto& slot = acc[{r.team, r.opponent, r.lsfe}];
        slot.first += r.successes;
        slot.second += r.trials;
    }
    std::vector<ObservationRow> out;
    out.reserve(acc.size());
    for (const auto& [key, counts] : acc) {
        out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key),
                       static_cast<int>(counts.first), static_cast<int>(counts.second)});
    }
    return out;
}

struct Design {
    Eigen::MatrixXd X;
    Eigen::VectorXd successes;
    Eigen::VectorXd trials;
    std::vector<std::string> terms;
    std::vector<std::string> teams;
};

inline std::string team_term(const std::string& name) { return "team:" + name; }
inline std::string opponent_term(const std::string& name) { return "opp:" + name; }

// Full dummy design: intercept, lsfe, one indicator per team (offense) and
// per opponent (defense).  No reference level is dropped; identifiability is
// left to selection or an explicit ridge.
inline Design build_design(const std::vector<ObservationRow>& rows,
                           const std::vector<std::string>* term_subset = nullptr) {
    if (rows.empty()) throw DomainError("build_design: no observation rows");
    std::set<std::string> team_set;
    for (const auto& r : rows) {
        team_set.insert(r.team);
        team_set.insert(r.opponent);
    }
    if (team_set.size() < 2) throw SingularFitError("build_design: single-team dataset has no contrasts");

    Design design;
    design.teams.assign(team_set.begin(), team_set.end());
    std::vector<std::string> all_terms = {"(Intercept)", "lsfe"};
    for (const auto& t : design.teams) all_terms.push_back(team_term(t));
    for (const auto& t : design.teams) all_terms.push_back(opponent_term(t));

    if (term_subset) {
        std::set<std::string> wanted(term_subset->begin(), term_subset->end());
        for (const auto& t : wanted)
            if (std::find(all_terms.begin(), all_terms.end(), t) == all_terms.end())
                throw DomainError("build_design: unknown term '" + t + "'");
        for (const auto& t : all_terms)
            if (wanted.count(t)) design.terms.push_back(t);
    } else {
        design.terms = all_terms;
    }

    const auto m = static_cast<Eigen::Index>(rows.size());
    const auto p = static_cast<Eigen::Index>(design.terms.size());
    design.X = Eigen::MatrixXd::Zero(m, p);
    design.successes.resize(m);
    design.trials.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& r = rows[i];
        design.successes[i] = r.successes;
        design.trials[i] = r.trials;
        for (Eigen::Index j = 0; j < p; ++j) {
            const std::string& term = design.terms[j];
            double v = 0.0;
            if (term == "(Intercept)")
                v = 1.0;
            else if (term == "lsfe")
                v = r.lsfe ? 1.0 : 0.0;
            else if (term.rfind("team:", 0) == 0)
                v = (term.substr(5) == r.team) ? 1.0 : 0.0;
            else
                v = (term.substr(4) == r.opponent) ? 1.0 : 0.0;
            design.X(i, j) = v;
        }
    }
    return design;
}

// Fitted scoring-probability model on the logit scale.
struct FittedModel {
    std::vector<std::string> terms;
    std::vector<double> coefficients;
    std::vector<double> standard_errors;
    std::vector<double> z_values;
    std::vector<double> p_values;
    double deviance = std::numeric_limits<double>::quiet_NaN();
    double aic = std::numeric_limits<double>::quiet_NaN();
    int trials_per_match = kCurlingTrials;
    std::vector<std::string> teams;

    int find(const std::string& term) const {
        const auto it = std::find(terms.begin(), terms.end(), term);
        return it == terms.end() ? -1 : static_cast<int>(it - terms.begin());
    }

    double coefficient_or_zero(const std::string& term) const {
        const int i = find(term);
        return i < 0 ? 0.0 : coefficients[i];
    }

    bool knows_team(const std::string& name) const {
        return std::find(teams.begin(), teams.end(), name) != teams.end();
    }
};

// Fit the design with optional fixed-coefficient (offset) terms; offset terms
// contribute to the linear predictor but are not re-estimated and do not
// appear in the returned model.
inline FittedModel fit_glm_binomial_logit(
    const Design& design, const std::vector<std::pair<std::string, double>>& offset_terms = {},
    const GlmOptions& options = {}) {
    const auto p = static_cast<Eigen::Index>(design.terms.size());
    std::vector<bool> fixed(design.terms.size(), false);
    Eigen::VectorXd offset = Eigen::VectorXd::Zero(design.X.rows());
    for (const auto& [term, value] : offset_terms) {
        const auto it = std::find(design.terms.begin(), design.terms.end(), term);
        if (it == design.terms.end())
            throw DomainError("fit_glm_binomial_logit: offset term '" + term + "' not in design");
        const auto j = static_cast<Eigen::Index>(it - design.terms.begin());
        fixed[j] = true;
        offset += value * design.X.col(j);
    }
    std::vector<std::string> free_terms;
    std::vector<Eigen::Index> free_cols;
    for (Eigen::Index j = 0; j < p; ++j) {
        if (!fixed[j]) {
            free_terms.push_back(design.terms[j]);
            free_cols.push_back(j);
        }
    }
    if (free_terms.empty()) throw DomainError("fit_glm_binomial_logit: no free terms");
    Eigen::MatrixXd x_free(design.X.rows(), static_cast<Eigen::Index>(free_cols.size()));
    for (std::size_t k = 0; k < free_cols.size(); ++k) x_free.col(k) = design.X.col(free_cols[k]);

    const GlmFit fit =
        fit_binomial_logit_irls(x_free, design.successes, design.trials, offset, free_terms, options);

    FittedModel model;
    model.terms = free_terms;
    model.coefficients.assign(fit.coefficients.data(), fit.coefficients.data() + fit.coefficients.size());
    if (fit.standard_errors.size() > 0) {
        model.standard_errors.assign(fit.standard_errors.data(),
                                     fit.standard_errors.data() + fit.standard_errors.size());
        model.z_values.assign(fit.z_values.data(), fit.z_values.data() + fit.z_values.size());
        model.p_values.assign(fit.p_values.data(), fit.p_values.data() + fit.p_values.size());
    }
    model.deviance = fit.deviance;
    model.aic = fit.aic;
    model.teams = design.teams;
    return model;
}

enum class StepwiseCriterion { aic };

// Bidirectional stepwise selection from the intercept+lsfe base model: each
// round takes the single add/drop most reducing AIC; the intercept is never
// dropped; exact ties break on the lexicographically smallest term name.
// Candidates whose fit is singular or non-convergent are skipped.
inline FittedModel stepwise_select(const std::vector<ObservationRow>& rows,
                                   StepwiseCriterion criterion = StepwiseCriterion::aic,
                                   const std::vector<std::string>* scope = nullptr,
                                   const GlmOptions& options = {}) {
    (void)criterion;  // single criterion; enum fixes the contract
    const auto aggregated = aggregate_observations(rows);
    const Design full = build_design(aggregated, scope);
    if (full.terms.size() < 2) throw DomainError("stepwise_select: needs at least 2 candidate terms");

    GlmOptions search_options = options;
    search_options.compute_inference = false;

    auto fit_subset = [&](const std::vector<std::string>& terms) -> double {
        Eigen::MatrixXd x(full.X.rows(), static_cast<Eigen::Index>(terms.size()));
        Eigen::Index k = 0;
        for (const auto& term : terms) {
            const auto it = std::find(full.terms.begin(), full.terms.end(), term);
            x.col(k++) = full.X.col(it - full.terms.begin());
        }
        const Eigen::VectorXd offset = Eigen::VectorXd::Zero(full.X.rows());
        return fit_binomial_logit_irls(x, full.successes, full.trials, offset, terms, search_options).aic;
    };

    std::vector<std::string> current;
    for (const auto& base : {std::string("(Intercept)"), std::string("lsfe")})
        if (std::find(full.terms.begin(), full.terms.end(), base) != full.terms.end())
            current.push_back(base);
    if (current.empty() || current.front() != "(Intercept)")
        throw DomainError("stepwise_select: scope must include (Intercept)");

    double current_aic = fit_subset(current);
    for (;;) {
        std::string best_term;
        bool best_is_add = false;
        double best_aic = current_aic;
        auto consider = [&](const std::string& term, bool is_add) {
            std::vector<std::string> trial = current;
            if (is_add)
                trial.push_back(term);
            else
                trial.erase(std::find(trial.begin(), trial.end(), term));
            double aic;
            try {
                aic = fit_subset(trial);
            } catch (const SingularFitError&) {
                return;
            } catch (const NonConvergenceError&) {
                return;
            }
            if (aic < best_aic - 1e-10 ||
                (best_term.size() && std::abs(aic - best_aic) <= 1e-10 && term < best_term)) {
                best_term = term;
                best_is_add = is_add;
                best_aic = aic;
            }
        };
        for (const auto& term : full.terms)
            if (std::find(current.begin(), current.end(), term) == current.end()) consider(term, true);
        for (const auto& term : current)
            if (term != "(Intercept)") consider(term, false);

        if (best_term.empty()) break;
        if (best_is_add)
            current.push_back(best_term);
        else
            current.erase(std::find(current.begin(), current.end(), best_term));
        current_aic = best_aic;
    }

    std::sort(current.begin(), current.end(), [&](const std::string& a, const std::string& b) {
        const auto ia = std::find(full.terms.begin(), full.terms.end(), a);
        const auto ib = std::find(full.terms.begin(), full.terms.end(), b);
        return ia < ib;
    });
    const Design selected = build_design(aggregated, &current);
    return fit_glm_binomial_logit(selected, {}, options);
}

// Per-trial scoring probability for team against opponent.  Teams absent
// from the model contribute 0 (they are average by selection); names the
// model has never seen also contribute 0 but are reported to `notices`.
inline double predict_scoring_prob(const FittedModel& model, const std::string& team,
                                   const std::string& opponent, bool has_lsfe,
                                   std::ostream* notices = nullptr) {
    double eta = model.coefficient_or_zero("(Intercept)");
    if (has_lsfe) eta += model.coefficient_or_zero("lsfe");
    eta += model.coefficient_or_zero(team_term(team));
    eta += model.coefficient_or_zero(opponent_term(opponent));
    if (notices) {
        if (!model.knows_team(team) && model.find(team_term(team)) < 0)
            *notices << "notice: unknown team '" << team << "', effect defaults to 0\n";
        if (!model.knows_team(opponent) && model.find(opponent_term(opponent)) < 0)
            *notices << "notice: unknown opponent '" << opponent << "', effect defaults to 0\n";
    }
    return 1.0 / (1.0 + std::exp(-eta));
}

// Both sides' scoring probabilities for one match; exactly one side holds the
// last stone in the first end.
inline MatchParams match_params_from_model(const FittedModel& model, const std::string& team_x,
                                           const std::string& team_y, bool lsfe_with_x,
                                           std::ostream* notices = nullptr) {
    const double px = predict_scoring_prob(model, team_x, team_y, lsfe_with_x, notices);
    const double py = predict_scoring_prob(model, team_y, team_x, !lsfe_with_x, notices);
    return MatchParams(px, py);
}

enum class StrengthLevel { above, average, below };
enum class TeamGrade { AAA, AAPlus, AA, AAMinus, APlus };

inline const char* to_string(StrengthLevel level) {
    switch (level) {
        case StrengthLevel::above: return "above";
        case StrengthLevel::average: return "average";
        default: return "below";
    }
}

inline const char* to_string(TeamGrade grade) {
    switch (grade) {
        case TeamGrade::AAA: return "AAA";
        case TeamGrade::AAPlus: return "AA+";
        case TeamGrade::AA: return "AA";
        case TeamGrade::AAMinus: return "AA-";
        default: return "A+";
    }
}

struct TeamRating {
    std::string team;
    StrengthLevel attack;
    StrengthLevel defence;
    TeamGrade grade;
};

namespace detail {

// Bond-style lattice: any below-average axis caps the grade at A+; defence
// outranks attack among the above-average grades.
inline TeamGrade grade_of(StrengthLevel attack, StrengthLevel defence) {
    if (attack == StrengthLevel::below || defence == StrengthLevel::below) return TeamGrade::APlus;
    if (attack == StrengthLevel::above && defence == StrengthLevel::above) return TeamGrade::AAA;
    if (defence == StrengthLevel::above) return TeamGrade::AAPlus;
    if (attack == StrengthLevel::above) return TeamGrade::AA;
    return TeamGrade::AAMinus;
}

} // namespace detail

// Grade every team the model knows.  Attack reads the team:<name> coefficient
// sign; defence reads the opponent coefficient (negative = suppresses
// opponents = above average).  Terms dropped by selection mean "average".
// significance_level is accepted for interface stability but retention by
// selection is the significance criterion (a p-threshold would contradict
// the retained-terms convention).
inline std::vector<TeamRating> rate_teams(const FittedModel& model, double significance_level = 0.05) {
    if (!(significance_level > 0.0 && significance_level < 1.0))
        throw DomainError("rate_teams: significance_level must lie in (0,1)");
    std::set<std::string> roster(model.teams.begin(), model.teams.end());
    for (const auto& term : model.terms) {
        if (term.rfind("team:", 0) == 0) roster.insert(term.substr(5));
        if (term.rfind("opp:", 0) == 0) roster.insert(term.substr(4));
    }
    auto level_of = [](double coef, bool negative_is_good) {
        if (coef == 0.0) return StrengthLevel::average;
        const bool good = negative_is_good ? coef < 0.0 : coef > 0.0;
        return good ? StrengthLevel::above : StrengthLevel::below;
    };
    std::vector<TeamRating> ratings;
    for (const auto& team : roster) {
        const int ti = model.find(team_term(team));
        const int oi = model.find(opponent_term(team));
        const StrengthLevel attack =
            ti < 0 ? StrengthLevel::average : level_of(model.coefficients[ti], false);
        const StrengthLevel defence =
            oi < 0 ? StrengthLevel::average : level_of(model.coefficients[oi], true);
        ratings.push_back({team, attack, defence, detail::grade_of(attack, defence)});
    }
    std::sort(ratings.begin(), ratings.end(), [](const TeamRating& a, const TeamRating& b) {
        if (a.grade != b.grade) return static_cast<int>(a.grade) < static_cast<int>(b.grade);
        return a.team < b.team;
    });
    return ratings;
}

struct Pairing {
    std::string team_a;
    std::string team_b;
    LsfeSide lsfe_holder;
};

// Draw synthetic match records from a model over a schedule.  Each match uses
// its own derived stream, so results are independent of evaluation order.
inline std::vector<MatchRecord> synthesize_dataset(const FittedModel& true_model,
                                                   const std::vector<Pairing>& schedule,
                                                   RngStream rng) {
    std::vector<MatchRecord> records;
    records.reserve(schedule.size());
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        const auto& pair = schedule[i];
        const bool lsfe_a = pair.lsfe_holder == LsfeSide::A;
        const MatchParams params =
            match_params_from_model(true_model, pair.team_a, pair.team_b, lsfe_a);
        RngStream match_rng = rng.substream(i);
        int a = 0, b = 0;
        const double cut = params.p_x + params.p_y;
        for (int t = 0; t < kCurlingTrials; ++t) {
            const double u = match_rng.next_double();
            if (u < params.p_x)
                ++a;
            else if (u < cut)
                ++b;
        }
        std::ostringstream id;
        id << "m" << i + 1;
        records.push_back({id.str(), pair.team_a, pair.team_b, pair.lsfe_holder, a, b});
    }
    return records;
}

} // namespace trimatch
