#include "qkdsift/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <thread>

#include "qkdsift/analytics.hpp"

namespace qkd {

namespace {

// Shortest round-trip decimal form, locale-free; CSV cells and summaries
// must not depend on global stream state.
std::string fmt(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

struct PointConfig {
    ProtocolConfig config;
    std::optional<BiasedAttackParams> attack;
};

PointConfig apply_param(const SweepSpec& spec, double value) {
    PointConfig pc{spec.base, spec.attack};
    const std::string& p = spec.axis.param;
    if (p == "epsilon") {
        pc.config.epsilon_alice = value;
        pc.config.epsilon_bob = value;
    } else if (p == "epsilon_alice") {
        pc.config.epsilon_alice = value;
    } else if (p == "epsilon_bob") {
        pc.config.epsilon_bob = value;
    } else if (p == "eta") {
        pc.config.eta = value;
    } else if (p == "e_max") {
        pc.config.e_max = value;
    } else if (p == "eve_p1") {
        if (!pc.attack) pc.attack = BiasedAttackParams{};
        pc.attack->p1 = value;
    } else if (p == "eve_p2") {
        if (!pc.attack) pc.attack = BiasedAttackParams{};
        pc.attack->p2 = value;
    } else {
        throw std::invalid_argument("sweep: unknown parameter '" + p + "'");
    }
    return pc;
}

void run_jobs(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& job) {
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                job(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace

unsigned resolve_threads(unsigned requested, std::size_t jobs) {
    unsigned cap = requested > 0 ? requested : std::thread::hardware_concurrency();
    if (cap == 0) cap = 1;
    if (const char* env = std::getenv("QKD_SIFT_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && v > 0) cap = static_cast<unsigned>(std::min<unsigned long>(cap, v));
    }
    return static_cast<unsigned>(std::min<std::size_t>(cap, std::max<std::size_t>(jobs, 1)));
}

std::vector<double> sweep_points(const SweepAxis& axis) {
    if (axis.steps < 2) throw std::invalid_argument("sweep: steps must be >= 2");
    std::vector<double> points(axis.steps);
    if (axis.scale == SweepScale::Log) {
        if (!(axis.start > 0.0 && axis.stop > 0.0)) {
            throw std::invalid_argument("sweep: log scale requires positive bounds");
        }
        const double la = std::log(axis.start), lb = std::log(axis.stop);
        for (int i = 0; i < axis.steps; ++i) {
            points[i] = std::exp(la + (lb - la) * i / (axis.steps - 1));
        }
    } else {
        for (int i = 0; i < axis.steps; ++i) {
            points[i] = axis.start + (axis.stop - axis.start) * i / (axis.steps - 1);
        }
    }
    return points;
}

const char* const kSweepCsvHeader =
    "param,value,trial,seed,n_photons,sift_fraction,e1_hat,e2_hat,e_bar_hat,"
    "verdict_naive,verdict_refined,raw_key_len,final_key_len,"
    "theory_sift_fraction,theory_e1,theory_e2,theory_e_bar";

void run_sweep(const SweepSpec& spec, std::ostream& out, unsigned max_threads) {
    if (spec.trials < 1) throw std::invalid_argument("sweep: trials must be >= 1");
    const std::vector<double> points = sweep_points(spec.axis);
    // Validate every point configuration up front so a bad axis fails before
    // any work is spent.
    for (const double v : points) {
        const PointConfig pc = apply_param(spec, v);
        pc.config.validate();
        if (pc.attack) pc.attack->validate();
    }

    const std::size_t jobs = points.size() * static_cast<std::size_t>(spec.trials);
    std::vector<std::string> rows(jobs);
    const RandomStream seeder = RandomStream(spec.base.seed).split("sweep");

    auto job = [&](std::size_t idx) {
        const std::size_t point_idx = idx / spec.trials;
        const std::size_t trial = idx % spec.trials;
        const double value = points[point_idx];
        PointConfig pc = apply_param(spec, value);
        pc.config.seed = seeder.split(static_cast<std::uint64_t>(idx)).next_u64();
        const SessionTranscript t = run_session(pc.config, pc.attack);

        const double p1 = pc.attack ? pc.attack->p1 : 0.0;
        const double p2 = pc.attack ? pc.attack->p2 : 0.0;
        const double theory_sift = sift_efficiency(pc.config.epsilon_alice, pc.config.epsilon_bob);
        const double theory_ebar =
            avg_error_pooled(pc.config.epsilon_alice, pc.config.epsilon_bob, p1, p2);

        std::string row;
        row.reserve(256);
        row += spec.axis.param;
        row += ',';
        row += fmt(value);
        row += ',';
        row += std::to_string(trial);
        row += ',';
        row += std::to_string(pc.config.seed);
        row += ',';
        row += std::to_string(pc.config.n_photons);
        row += ',';
        row += fmt(t.sift_fraction());
        row += ',';
        row += fmt(t.estimate ? t.estimate->e1_hat : 0.0);
        row += ',';
        row += fmt(t.estimate ? t.estimate->e2_hat : 0.0);
        row += ',';
        row += fmt(t.estimate ? t.estimate->e_bar_hat : 0.0);
        row += ',';
        row += to_string(t.verdict_naive);
        row += ',';
        row += to_string(t.verdict_refined);
        row += ',';
        row += std::to_string(t.raw_key_alice.size());
        row += ',';
        row += std::to_string(t.final_key ? t.final_key->size() : std::size_t{0});
        row += ',';
        row += fmt(theory_sift);
        row += ',';
        row += fmt(error_rate_rect(p1, p2));
        row += ',';
        row += fmt(error_rate_diag(p1, p2));
        row += ',';
        row += fmt(theory_ebar);
        rows[idx] = std::move(row);
    };

    run_jobs(jobs, resolve_threads(max_threads, jobs), job);

    out << kSweepCsvHeader << "\r\n";
    for (const std::string& row : rows) out << row << "\r\n";
}

const char* const kCompareCsvHeader =
    "p1,p2,epsilon_alice,epsilon_bob,e_max,seed,"
    "theory_naive,theory_refined,sim_naive,sim_refined,agree";

void run_compare(const CompareSpec& spec, std::ostream& out, unsigned max_threads) {
    if (spec.p1_values.empty() || spec.p2_values.empty()) {
        throw std::invalid_argument("compare: p1 and p2 value lists must be nonempty");
    }
    spec.base.validate();
    for (const double p1 : spec.p1_values) {
        for (const double p2 : spec.p2_values) {
            BiasedAttackParams{p1, p2}.validate();
        }
    }

    const std::size_t jobs = spec.p1_values.size() * spec.p2_values.size();
    std::vector<std::string> rows(jobs);
    const RandomStream seeder = RandomStream(spec.base.seed).split("compare");

    auto job = [&](std::size_t idx) {
        const double p1 = spec.p1_values[idx / spec.p2_values.size()];
        const double p2 = spec.p2_values[idx % spec.p2_values.size()];
        ProtocolConfig config = spec.base;
        config.seed = seeder.split(static_cast<std::uint64_t>(idx)).next_u64();
        const BiasedAttackParams attack{p1, p2};
        const SessionTranscript t = run_session(config, attack);
        // The closed form assumes a symmetric bias; evaluate it at Alice's.
        const DetectionVerdicts theory =
            detection_table(config.epsilon_alice, p1, p2, config.e_max);
        const bool agree =
            theory.naive == t.verdict_naive && theory.refined == t.verdict_refined;

        std::string row;
        row.reserve(160);
        row += fmt(p1);
        row += ',';
        row += fmt(p2);
        row += ',';
        row += fmt(config.epsilon_alice);
        row += ',';
        row += fmt(config.epsilon_bob);
        row += ',';
        row += fmt(config.e_max);
        row += ',';
        row += std::to_string(config.seed);
        row += ',';
        row += to_string(theory.naive);
        row += ',';
        row += to_string(theory.refined);
        row += ',';
        row += to_string(t.verdict_naive);
        row += ',';
        row += to_string(t.verdict_refined);
        row += ',';
        row += agree ? "yes" : "no";
        rows[idx] = std::move(row);
    };

    run_jobs(jobs, resolve_threads(max_threads, jobs), job);

    out << kCompareCsvHeader << "\r\n";
    for (const std::string& row : rows) out << row << "\r\n";
}

}  // namespace qkd
