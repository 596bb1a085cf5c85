#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <trimatch/match.hpp>

using trimatch::MatchParams;

namespace {
const MatchParams kOp1(0.08160028, 0.06380454);  // scenario 1 operating point
const MatchParams kOp2(0.07258789, 0.07181085);  // scenario 2 operating point
} // namespace

TEST_CASE("MatchParams validation") {
    CHECK_THROWS_AS(MatchParams(0.0, 0.5), trimatch::DomainError);
    CHECK_THROWS_AS(MatchParams(0.5, 0.0), trimatch::DomainError);
    CHECK_THROWS_AS(MatchParams(-0.1, 0.5), trimatch::DomainError);
    CHECK_THROWS_AS(MatchParams(0.5, 0.5), trimatch::DomainError);
    CHECK_THROWS_AS(MatchParams(0.7, 0.4), trimatch::DomainError);
    CHECK_NOTHROW(MatchParams(0.499, 0.499));

    const MatchParams relaxed = MatchParams::unchecked(0.0, 0.5);
    CHECK(relaxed.p_x == 0.0);
    CHECK_THROWS_AS(MatchParams::unchecked(-0.1, 0.5), trimatch::DomainError);
    CHECK_NOTHROW(MatchParams::unchecked(0.5, 0.5));
}

TEST_CASE("score moments and the covariance law") {
    const auto m = trimatch::score_moments(MatchParams(0.1, 0.1), 80);
    CHECK(m.mean_x == Catch::Approx(8.0).margin(1e-13));
    CHECK(m.mean_y == Catch::Approx(8.0).margin(1e-13));
    CHECK(m.var_x == Catch::Approx(7.2).margin(1e-13));
    CHECK(m.var_y == Catch::Approx(7.2).margin(1e-13));
    CHECK(m.cov_xy == Catch::Approx(-0.8).margin(1e-13));

    // Var(X-Y) = n(p_x(1-p_x) + p_y(1-p_y) + 2 p_x p_y)
    for (const auto& p : {kOp1, kOp2, MatchParams(0.3, 0.2)}) {
        for (int n : {1, 10, 80}) {
            const auto mm = trimatch::score_moments(p, n);
            const double lhs = mm.var_x + mm.var_y - 2.0 * mm.cov_xy;
            const double rhs =
                n * (p.p_x * (1 - p.p_x) + p.p_y * (1 - p.p_y) + 2.0 * p.p_x * p.p_y);
            CHECK(lhs == Catch::Approx(rhs).epsilon(1e-13));
        }
    }
    CHECK_THROWS_AS(trimatch::score_moments(kOp1, 0), trimatch::DomainError);
}

TEST_CASE("trinomial joint pmf") {
    const MatchParams p(0.3, 0.25);
    for (int n : {1, 5, 20}) {
        double total = 0.0;
        for (int i = 0; i <= n; ++i)
            for (int j = 0; i + j <= n; ++j) total += trinomial_joint_pmf(i, j, n, p);
        CHECK(std::abs(total - 1.0) <= 1e-12);
    }
    // marginal of X is Binomial(n, p_x)
    const int n = 15;
    for (int i = 0; i <= n; ++i) {
        double marginal = 0.0;
        for (int j = 0; i + j <= n; ++j) marginal += trinomial_joint_pmf(i, j, n, p);
        CHECK(marginal == Catch::Approx(trimatch::binomial_pmf(i, n, p.p_x)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(trinomial_joint_pmf(8, 8, 15, p), trimatch::DomainError);
    CHECK_THROWS_AS(trinomial_joint_pmf(-1, 0, 15, p), trimatch::DomainError);
}

TEST_CASE("gaussian win and draw at the reference operating points") {
    CHECK(trimatch::win_prob_gaussian(kOp1, 80) ==
          Catch::Approx(0.606848053569773883).margin(1e-12));
    CHECK(trimatch::draw_prob_gaussian(kOp1, 80) ==
          Catch::Approx(0.106990654572348629).margin(1e-12));
    CHECK(trimatch::win_prob_gaussian(kOp2, 80) ==
          Catch::Approx(0.44874966677719050).margin(1e-12));
    CHECK(trimatch::draw_prob_gaussian(kOp2, 80) ==
          Catch::Approx(0.11693592425838761).margin(1e-12));
}

TEST_CASE("curling outcomes: overall allocation and tie-break fairness") {
    const auto out1 = trimatch::curling_outcomes(kOp1);
    CHECK(out1.overall.win_x == Catch::Approx(0.666890543017420312).margin(1e-12));
    CHECK(out1.overall.draw == 0.0);
    CHECK(out1.win_after_10 == Catch::Approx(0.606848053569773883).margin(1e-12));
    CHECK(out1.draw_after_10 == Catch::Approx(0.106990654572348629).margin(1e-12));
    const double share = kOp1.p_x / (kOp1.p_x + kOp1.p_y);
    CHECK(out1.overall.win_x ==
          Catch::Approx(out1.win_after_10 + out1.draw_after_10 * share).margin(1e-12));
    CHECK(out1.overall.win_x + out1.overall.win_y == Catch::Approx(1.0).margin(1e-12));

    const auto out2 = trimatch::curling_outcomes(kOp2);
    CHECK(out2.overall.win_x == Catch::Approx(0.50753225731167972).margin(1e-12));

    for (double p : {0.03, 0.08, 0.2}) {
        const auto sym = trimatch::curling_outcomes(MatchParams(p, p));
        CHECK(std::abs(sym.overall.win_x - 0.5) <= 1e-15);
    }
}

TEST_CASE("gaussian approximation properties on the grid") {
    const std::vector<double> grid = {0.02, 0.05, 0.08, 0.12, 0.15};
    for (double px : grid) {
        for (double py : grid) {
            const MatchParams p(px, py);
            const double win = trimatch::win_prob_gaussian(p, 80);
            const double draw = trimatch::draw_prob_gaussian(p, 80);
            CHECK(win >= 0.0);
            CHECK(win <= 1.0);
            CHECK(draw >= 0.0);

            // swap symmetry
            const MatchParams q(py, px);
            CHECK(trimatch::win_prob_gaussian(q, 80) ==
                  Catch::Approx(1.0 - win - draw).margin(1e-12));
            CHECK(trimatch::draw_prob_gaussian(q, 80) == Catch::Approx(draw).margin(1e-13));
        }
    }
    // strict monotonicity in p_x (and, reversed, in p_y)
    for (double py : grid) {
        double prev = -1.0;
        for (double px : grid) {
            const double w = trimatch::win_prob_gaussian(MatchParams(px, py), 80);
            CHECK(w > prev);
            prev = w;
        }
    }
    for (double px : grid) {
        double prev = 2.0;
        for (double py : grid) {
            const double w = trimatch::win_prob_gaussian(MatchParams(px, py), 80);
            CHECK(w < prev);
            prev = w;
        }
    }
}

TEST_CASE("exact enumeration oracle") {
    // single trial: outcomes are mutually exclusive
    const auto one = trimatch::exact_outcomes(MatchParams(0.3, 0.25), 1);
    CHECK(one.win_x == Catch::Approx(0.3).margin(1e-15));
    CHECK(one.win_y == Catch::Approx(0.25).margin(1e-15));
    CHECK(one.draw == Catch::Approx(0.45).margin(1e-15));

    const auto ex = trimatch::exact_outcomes(kOp1, 80);
    CHECK(ex.win_x == Catch::Approx(0.60660393836631).margin(1e-12));
    CHECK(ex.draw == Catch::Approx(0.10821154115766).margin(1e-12));
    CHECK(ex.win_y == Catch::Approx(0.28518452047603).margin(1e-12));
    CHECK(ex.win_x + ex.draw + ex.win_y == Catch::Approx(1.0).margin(1e-12));

    // tie allocation folds the draw mass into wins
    const auto alloc = trimatch::exact_outcomes(kOp1, 80, true);
    const double share = kOp1.p_x / (kOp1.p_x + kOp1.p_y);
    CHECK(alloc.draw == 0.0);
    CHECK(alloc.win_x == Catch::Approx(ex.win_x + ex.draw * share).margin(1e-12));
    CHECK(alloc.win_x + alloc.win_y == Catch::Approx(1.0).margin(1e-12));

    // symmetry
    for (int n : {5, 80}) {
        const auto s = trimatch::exact_outcomes(MatchParams(0.1, 0.1), n);
        CHECK(s.win_x == Catch::Approx(s.win_y).margin(1e-13));
    }

    CHECK_THROWS_AS(trimatch::exact_outcomes(kOp1, 201), trimatch::CapacityError);
    CHECK_THROWS_AS(trimatch::exact_outcomes(kOp1, 0), trimatch::DomainError);
}

TEST_CASE("exact vs gaussian at the operating point") {
    const auto ex = trimatch::exact_outcomes(kOp1, 80);
    CHECK(std::abs(ex.win_x - 0.6068481) <= 0.02);
    CHECK(std::abs(ex.win_x - trimatch::win_prob_gaussian(kOp1, 80)) <= 0.02);
    CHECK(std::abs(ex.draw - trimatch::draw_prob_gaussian(kOp1, 80)) <= 0.02);
}

TEST_CASE("simulate_match value-semantics reproducibility") {
    const trimatch::RngStream rng(404, 13);
    const auto a = trimatch::simulate_match(kOp1, 80, rng);
    const auto b = trimatch::simulate_match(kOp1, 80, rng);
    CHECK(a.score_x == b.score_x);
    CHECK(a.score_y == b.score_y);
    CHECK(a.winner == b.winner);
    CHECK(a.score_x >= 0);
    CHECK(a.score_x + a.score_y <= 80);
}

TEST_CASE("simulate_match degenerate team never scores") {
    const auto p = MatchParams::unchecked(0.0, 0.5);
    for (int i = 0; i < 200; ++i) {
        const auto r = trimatch::simulate_match(p, 10, trimatch::RngStream(7, i));
        CHECK(r.score_x == 0);
        CHECK(r.winner == trimatch::Winner::Y);
    }
    CHECK_THROWS_AS(trimatch::simulate_match(kOp1, 0, trimatch::RngStream(1, 1)),
                    trimatch::DomainError);
}
