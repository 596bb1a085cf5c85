#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include <json.hpp>

#include "trimatch/errors.hpp"
#include "trimatch/match.hpp"
#include "trimatch/rng.hpp"
#include "trimatch/stats.hpp"
#include "trimatch/variance_gamma.hpp"

namespace trimatch {

struct SimulationReport {
    std::int64_t n_sims = 0;
    double win_x_hat = 0.0;
    double draw_hat = 0.0;
    double win_y_hat = 0.0;
    double se_win_x = 0.0;
    double se_draw = 0.0;
    double se_win_y = 0.0;
    double sample_kurtosis_of_diff = 0.0;
    std::uint64_t seed = 0;
    double elapsed_seconds = 0.0;
};

namespace detail {

// Work is split into fixed-size chunks with independent, chunk-indexed RNG
// streams, so estimates are bitwise identical for any thread count.
inline constexpr std::int64_t kSimChunkSize = 8192;

struct SimChunk {
    std::int64_t wins_x = 0;
    std::int64_t draws = 0;
    std::int64_t wins_y = 0;
    MomentAccumulator diff;
};

inline double binomial_se(double p_hat, std::int64_t n) {
    return std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(n));
}

template <typename ChunkFn>
inline SimulationReport run_chunked(std::int64_t n_sims, std::uint64_t seed, int threads,
                                    ChunkFn&& run_chunk) {
    if (n_sims <= 0) throw DomainError("simulate: n_sims must be positive");
    if (threads < 1) throw DomainError("simulate: threads must be >= 1");
    const auto start = std::chrono::steady_clock::now();

    const std::int64_t n_chunks = (n_sims + kSimChunkSize - 1) / kSimChunkSize;
    std::vector<SimChunk> chunks(static_cast<std::size_t>(n_chunks));
    auto worker_body = [&](std::int64_t chunk_id) {
        const std::int64_t lo = chunk_id * kSimChunkSize;
        const std::int64_t hi = std::min(lo + kSimChunkSize, n_sims);
        run_chunk(chunk_id, lo, hi, chunks[static_cast<std::size_t>(chunk_id)]);
    };
    if (threads == 1 || n_chunks == 1) {
        for (std::int64_t c = 0; c < n_chunks; ++c) worker_body(c);
    } else {
        std::atomic<std::int64_t> next{0};
        auto loop = [&] {
            for (;;) {
                const std::int64_t c = next.fetch_add(1);
                if (c >= n_chunks) return;
                worker_body(c);
            }
        };
        std::vector<std::thread> pool;
        const int n_threads = static_cast<int>(std::min<std::int64_t>(threads, n_chunks));
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(loop);
        for (auto& t : pool) t.join();
    }

    SimChunk total;
    for (const auto& c : chunks) {
        total.wins_x += c.wins_x;
        total.draws += c.draws;
        total.wins_y += c.wins_y;
        total.diff.merge(c.diff);
    }
    SimulationReport report;
    report.n_sims = n_sims;
    report.seed = seed;
    const double n = static_cast<double>(n_sims);
    report.win_x_hat = static_cast<double>(total.wins_x) / n;
    report.draw_hat = static_cast<double>(total.draws) / n;
    report.win_y_hat = static_cast<double>(total.wins_y) / n;
    report.se_win_x = binomial_se(report.win_x_hat, n_sims);
    report.se_draw = binomial_se(report.draw_hat, n_sims);
    report.se_win_y = binomial_se(report.win_y_hat, n_sims);
    report.sample_kurtosis_of_diff = total.diff.kurtosis();
    report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

} // namespace detail

// Monte Carlo over n trinomial trials per simulated match.  With
// allocate_ties, tied scores are resolved by the extra-end allocation rule
// and the draw share is identically zero.
inline SimulationReport monte_carlo_fixed_n(const MatchParams& params, int n, std::int64_t n_sims,
                                            std::uint64_t seed, bool allocate_ties = true,
                                            int threads = 1) {
    if (n < 1) throw DomainError("monte_carlo_fixed_n: n must be >= 1");
    auto run_chunk = [&](std::int64_t chunk_id, std::int64_t lo, std::int64_t hi,
                         detail::SimChunk& out) {
        RngStream chunk_rng(seed, static_cast<std::uint64_t>(chunk_id));
        for (std::int64_t s = lo; s < hi; ++s) {
            RngStream sim_rng = chunk_rng.substream(static_cast<std::uint64_t>(s - lo));
            const MatchResult r = simulate_match(params, n, sim_rng);
            out.diff.add(static_cast<double>(r.score_x - r.score_y));
            if (allocate_ties) {
                if (r.winner == Winner::X)
                    ++out.wins_x;
                else
                    ++out.wins_y;
            } else {
                if (r.score_x > r.score_y)
                    ++out.wins_x;
                else if (r.score_x < r.score_y)
                    ++out.wins_y;
                else
                    ++out.draws;
            }
        }
    };
    return detail::run_chunked(n_sims, seed, threads, run_chunk);
}

// Monte Carlo from the randomized-trials (variance-gamma) model of the score
// difference.  Outcomes band the sampled difference: win for d > 0.5, draw
// for |d| <= 0.5 interior, loss for d < -0.5.
inline SimulationReport monte_carlo_vg(const MatchParams& params, const GammaTrialPrior& prior,
                                       VgSampleMode mode, std::int64_t n_sims, std::uint64_t seed,
                                       int threads = 1) {
    auto run_chunk = [&](std::int64_t chunk_id, std::int64_t lo, std::int64_t hi,
                         detail::SimChunk& out) {
        RngStream chunk_rng(seed, static_cast<std::uint64_t>(chunk_id));
        for (std::int64_t s = lo; s < hi; ++s) {
            const double d = sample_vg_match_diff(params, prior, chunk_rng, mode);
            out.diff.add(d);
            if (d > 0.5)
                ++out.wins_x;
            else if (d < -0.5)
                ++out.wins_y;
            else
                ++out.draws;
        }
    };
    return detail::run_chunked(n_sims, seed, threads, run_chunk);
}

// Serialized report omits wall-clock time, which is never reproducible.
inline nlohmann::json report_to_json(const SimulationReport& r) {
    nlohmann::json j;
    j["format"] = "trimatch-report";
    j["version"] = 1;
    j["n_sims"] = r.n_sims;
    j["win_x_hat"] = r.win_x_hat;
    j["draw_hat"] = r.draw_hat;
    j["win_y_hat"] = r.win_y_hat;
    j["se_win_x"] = r.se_win_x;
    j["se_draw"] = r.se_draw;
    j["se_win_y"] = r.se_win_y;
    j["sample_kurtosis_of_diff"] = r.sample_kurtosis_of_diff;
    j["seed"] = r.seed;
    return j;
}

} // namespace trimatch
