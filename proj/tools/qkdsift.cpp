// qkdsift command line: single sessions, parameter sweeps, naive-vs-refined
// comparison tables and hash-family self-tests. Emits transcript JSON and
// RFC-4180 CSV; exit code 0 means success/Accept, 1 usage or configuration
// error, 2 protocol Abort.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qkdsift/analytics.hpp"
#include "qkdsift/privacy.hpp"
#include "qkdsift/protocol.hpp"
#include "qkdsift/sweep.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitAbort = 2;

struct ConfigCli {
    qkd::ProtocolConfig config;
    std::optional<qkd::BiasedAttackParams> attack;
    std::string config_path;
    bool require_seed = false;
    bool seed_set = false;

    double epsilon_both = 0.5;
    double p1 = 0.0, p2 = 0.0;

    CLI::Option* opt_n = nullptr;
    CLI::Option* opt_eps = nullptr;
    CLI::Option* opt_eps_a = nullptr;
    CLI::Option* opt_eps_b = nullptr;
    CLI::Option* opt_emax = nullptr;
    CLI::Option* opt_m1 = nullptr;
    CLI::Option* opt_m2 = nullptr;
    CLI::Option* opt_s = nullptr;
    CLI::Option* opt_eta = nullptr;
    CLI::Option* opt_seed = nullptr;
    CLI::Option* opt_conf = nullptr;
    CLI::Option* opt_block = nullptr;
    CLI::Option* opt_p1 = nullptr;
    CLI::Option* opt_p2 = nullptr;
};

void add_config_options(CLI::App* cmd, ConfigCli& c) {
    cmd->add_option("--config", c.config_path,
                    "JSON config file; flags override file values");
    c.opt_n = cmd->add_option("--n", c.config.n_photons, "number of photons N");
    c.opt_eps = cmd->add_option("--epsilon", c.epsilon_both,
                                "rectilinear-basis probability for both parties");
    c.opt_eps_a = cmd->add_option("--epsilon-alice", c.config.epsilon_alice,
                                  "Alice's rectilinear-basis probability");
    c.opt_eps_b = cmd->add_option("--epsilon-bob", c.config.epsilon_bob,
                                  "Bob's rectilinear-basis probability");
    c.opt_emax = cmd->add_option("--e-max", c.config.e_max, "maximal tolerable error rate");
    c.opt_m1 = cmd->add_option("--m1", c.config.m1, "rectilinear test-sample size");
    c.opt_m2 = cmd->add_option("--m2", c.config.m2, "diagonal test-sample size");
    c.opt_s = cmd->add_option("--s", c.config.s,
                              "privacy-amplification security parameter (bits)");
    c.opt_eta = cmd->add_option("--eta", c.config.eta, "channel bit-flip probability");
    c.opt_seed = cmd->add_option("--seed", c.config.seed, "master seed (64-bit)");
    c.opt_conf = cmd->add_option("--stat-confidence", c.config.stat_confidence,
                                 "confidence level for the Hoeffding leakage margin");
    c.opt_block = cmd->add_option("--recon-block", c.config.recon_block_len,
                                  "reconciliation first-pass block length (0 = auto)");
    c.opt_p1 = cmd->add_option("--eve-p1", c.p1, "Eve rectilinear-measurement probability");
    c.opt_p2 = cmd->add_option("--eve-p2", c.p2, "Eve diagonal-measurement probability");
    cmd->add_flag("--require-seed", c.require_seed,
                  "fail instead of drawing a seed from system entropy");
}

// File values first, then any flag the user actually passed on top.
void finalize_config(ConfigCli& c) {
    bool seed_from_file = false;
    if (!c.config_path.empty()) {
        std::ifstream in(c.config_path);
        if (!in) throw std::invalid_argument("config: cannot open " + c.config_path);
        nlohmann::json j = nlohmann::json::parse(in);
        static const char* known[] = {"n_photons",       "epsilon_alice",   "epsilon_bob",
                                      "e_max",           "m1",              "m2",
                                      "s",               "eta",             "seed",
                                      "stat_confidence", "recon_block_len", "attack"};
        for (const auto& [key, value] : j.items()) {
            (void)value;
            bool ok = false;
            for (const char* k : known) ok = ok || key == k;
            if (!ok) throw std::invalid_argument("config: unknown key '" + key + "'");
        }
        auto take = [&](const char* key, CLI::Option* opt, auto& dst) {
            using T = std::remove_reference_t<decltype(dst)>;
            if (j.contains(key) && !*opt) dst = j[key].get<T>();
        };
        take("n_photons", c.opt_n, c.config.n_photons);
        take("epsilon_alice", c.opt_eps_a, c.config.epsilon_alice);
        take("epsilon_bob", c.opt_eps_b, c.config.epsilon_bob);
        take("e_max", c.opt_emax, c.config.e_max);
        take("m1", c.opt_m1, c.config.m1);
        take("m2", c.opt_m2, c.config.m2);
        take("s", c.opt_s, c.config.s);
        take("eta", c.opt_eta, c.config.eta);
        take("seed", c.opt_seed, c.config.seed);
        take("stat_confidence", c.opt_conf, c.config.stat_confidence);
        take("recon_block_len", c.opt_block, c.config.recon_block_len);
        seed_from_file = j.contains("seed");
        if (j.contains("attack") && !j["attack"].is_null()) {
            c.attack = qkd::BiasedAttackParams{j["attack"].value("p1", 0.0),
                                               j["attack"].value("p2", 0.0)};
        }
    }

    if (*c.opt_eps) {
        if (!*c.opt_eps_a) c.config.epsilon_alice = c.epsilon_both;
        if (!*c.opt_eps_b) c.config.epsilon_bob = c.epsilon_both;
    }
    if (*c.opt_p1 || *c.opt_p2) {
        if (!c.attack) c.attack = qkd::BiasedAttackParams{};
        if (*c.opt_p1) c.attack->p1 = c.p1;
        if (*c.opt_p2) c.attack->p2 = c.p2;
    }

    c.seed_set = bool(*c.opt_seed) || seed_from_file;
    if (!c.seed_set) {
        if (c.require_seed) {
            throw std::invalid_argument("config: --seed is required (--require-seed)");
        }
        std::random_device rd;
        c.config.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
        std::cerr << "note: seed drawn from system entropy: " << c.config.seed << "\n";
    }
}

int cmd_run(ConfigCli& c, const std::string& out_path) {
    finalize_config(c);
    const qkd::SessionTranscript t = qkd::run_session(c.config, c.attack);
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw std::invalid_argument("run: cannot open output " + out_path);
        out << qkd::transcript_to_json(t) << "\n";
    }
    std::cout << qkd::transcript_summary(t) << "\n";
    return t.verdict_refined == qkd::Verdict::Accept ? kExitOk : kExitAbort;
}

int cmd_sweep(ConfigCli& c, qkd::SweepAxis& axis, int trials, const std::string& scale,
              const std::string& out_path) {
    finalize_config(c);
    if (scale == "log") {
        axis.scale = qkd::SweepScale::Log;
    } else if (scale != "linear") {
        throw std::invalid_argument("sweep: --scale must be linear or log");
    }
    qkd::SweepSpec spec{c.config, c.attack, axis, trials};
    std::ostringstream csv;
    qkd::run_sweep(spec, csv);  // validates before any work
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::invalid_argument("sweep: cannot open output " + out_path);
    out << csv.str();
    std::cout << "sweep: " << axis.steps << " points x " << trials << " trials -> "
              << out_path << "\n";
    return kExitOk;
}

int cmd_compare(ConfigCli& c, const std::vector<double>& p1_values,
                const std::vector<double>& p2_values, const std::string& out_path) {
    finalize_config(c);
    qkd::CompareSpec spec{c.config, p1_values, p2_values};
    std::ostringstream csv;
    qkd::run_compare(spec, csv);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::invalid_argument("compare: cannot open output " + out_path);
    out << csv.str();
    std::cout << "compare: " << p1_values.size() * p2_values.size() << " attack points -> "
              << out_path << "\n";
    return kExitOk;
}

// Worst-case collision fraction of the Toeplitz family at (n, k), by
// exhaustive enumeration over all diagonal strings and nonzero inputs
// (h(x) = h(y) iff h(x ^ y) = 0, so differences stand in for pairs).
double exhaustive_worst_collision(std::size_t n, std::size_t k) {
    const std::size_t dlen = n + k - 1;
    const std::uint64_t family = std::uint64_t{1} << dlen;
    double worst = 0.0;
    for (std::uint64_t z = 1; z < (std::uint64_t{1} << n); ++z) {
        std::uint64_t zero_images = 0;
        for (std::uint64_t d = 0; d < family; ++d) {
            bool all_zero = true;
            for (std::size_t i = 0; i < k && all_zero; ++i) {
                unsigned bit = 0;
                for (std::size_t j = 0; j < n; ++j) {
                    bit ^= static_cast<unsigned>((z >> j) & (d >> (i + n - 1 - j)) & 1);
                }
                all_zero = bit == 0;
            }
            if (all_zero) ++zero_images;
        }
        worst = std::max(worst, static_cast<double>(zero_images) / static_cast<double>(family));
    }
    return worst;
}

int cmd_hash_check(std::size_t n, std::size_t k, bool sampled, std::uint64_t samples,
                   std::uint64_t seed) {
    if (k < 1 || k > n) throw std::invalid_argument("hash-check: need 1 <= k <= n");
    const double bound = std::exp2(-static_cast<double>(k));
    if (!sampled) {
        if (n > 6 || k > 3) {
            std::cerr << "hash-check: exhaustive mode is limited to n <= 6, k <= 3; "
                         "use --sampled for larger sizes\n";
            return kExitUsage;
        }
        const double worst = exhaustive_worst_collision(n, k);
        std::cout << "hash-check exhaustive n=" << n << " k=" << k
                  << " worst_collision_fraction=" << worst << " bound=" << bound << "\n";
        return worst <= bound + 1e-12 ? kExitOk : kExitAbort;
    }

    qkd::RandomStream rng(seed);
    std::uint64_t collisions = 0;
    for (std::uint64_t i = 0; i < samples; ++i) {
        qkd::RandomStream draw = rng.split(i);
        const qkd::ToeplitzHash h = qkd::sample_toeplitz(n, k, draw);
        qkd::BitString z(n, 0);
        bool nonzero = false;
        while (!nonzero) {
            for (std::size_t b = 0; b < n; ++b) {
                z[b] = draw.next_bit();
                nonzero = nonzero || z[b];
            }
        }
        const qkd::BitString img = qkd::apply_hash(h, z);
        bool zero = true;
        for (const auto bit : img) zero = zero && bit == 0;
        if (zero) ++collisions;
    }
    const double frac = static_cast<double>(collisions) / static_cast<double>(samples);
    const double sigma = std::sqrt(bound * (1.0 - bound) / static_cast<double>(samples));
    std::cout << "hash-check sampled n=" << n << " k=" << k << " samples=" << samples
              << " collision_fraction=" << frac << " bound=" << bound << "\n";
    return frac <= bound + 4.0 * sigma ? kExitOk : kExitAbort;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Biased-basis quantum key distribution simulator"};
    app.set_version_flag("--version", "qkdsift 1.0.0");
    app.require_subcommand(1);

    ConfigCli run_cfg;
    std::string run_out = "transcript.json";
    CLI::App* run = app.add_subcommand("run", "run one session and write its transcript");
    add_config_options(run, run_cfg);
    run->add_option("--out", run_out, "transcript output path (empty = no file)");

    ConfigCli sweep_cfg;
    qkd::SweepAxis axis;
    int trials = 1;
    std::string scale = "linear";
    std::string sweep_out = "sweep.csv";
    CLI::App* sweep = app.add_subcommand("sweep", "sweep one parameter, one CSV row per trial");
    add_config_options(sweep, sweep_cfg);
    sweep->add_option("--param", axis.param, "swept parameter name")->required();
    sweep->add_option("--start", axis.start, "axis start")->required();
    sweep->add_option("--stop", axis.stop, "axis stop")->required();
    sweep->add_option("--steps", axis.steps, "number of points (>= 2)")->required();
    sweep->add_option("--scale", scale, "linear or log");
    sweep->add_option("--trials", trials, "sessions per point");
    sweep->add_option("--out", sweep_out, "CSV output path");

    ConfigCli cmp_cfg;
    std::vector<double> p1_values, p2_values;
    std::string cmp_out = "compare.csv";
    CLI::App* cmp = app.add_subcommand(
        "compare", "naive vs refined verdicts over an attack grid, theory and simulation");
    add_config_options(cmp, cmp_cfg);
    cmp->add_option("--p1-list", p1_values, "comma-separated p1 values")
        ->delimiter(',')
        ->required();
    cmp->add_option("--p2-list", p2_values, "comma-separated p2 values")
        ->delimiter(',')
        ->required();
    cmp->add_option("--out", cmp_out, "CSV output path");

    std::size_t hc_n = 4, hc_k = 2;
    bool hc_sampled = false;
    std::uint64_t hc_samples = 100000, hc_seed = 1;
    CLI::App* hc = app.add_subcommand("hash-check", "verify 2-universality of the hash family");
    hc->add_option("--n", hc_n, "input length in bits");
    hc->add_option("--k", hc_k, "output length in bits");
    hc->add_flag("--sampled", hc_sampled, "Monte Carlo mode for sizes beyond exhaustive reach");
    hc->add_option("--samples", hc_samples, "draws in sampled mode");
    hc->add_option("--seed", hc_seed, "seed for sampled mode");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (run->parsed()) return cmd_run(run_cfg, run_out);
        if (sweep->parsed()) return cmd_sweep(sweep_cfg, axis, trials, scale, sweep_out);
        if (cmp->parsed()) return cmd_compare(cmp_cfg, p1_values, p2_values, cmp_out);
        if (hc->parsed()) return cmd_hash_check(hc_n, hc_k, hc_sampled, hc_samples, hc_seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
