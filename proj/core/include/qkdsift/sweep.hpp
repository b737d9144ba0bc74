#pragma once

// Parameter sweeps and naive-vs-refined comparison grids over seeded
// sessions. Every (point, trial) job runs on an independent seed derived
// from the master seed by labeled split, and rows are emitted in job order,
// so the CSV bytes do not depend on thread count or completion order.
// Parallelism is capped by max_threads, by the QKD_SIFT_THREADS environment
// variable, and by the job count.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qkdsift/protocol.hpp"

namespace qkd {

enum class SweepScale : std::uint8_t { Linear, Log };

struct SweepAxis {
    std::string param;  // epsilon | epsilon_alice | epsilon_bob | eta | e_max |
                        // eve_p1 | eve_p2
    double start = 0.0;
    double stop = 0.0;
    int steps = 2;  // >= 2
    SweepScale scale = SweepScale::Linear;
};

struct SweepSpec {
    ProtocolConfig base;
    std::optional<BiasedAttackParams> attack;
    SweepAxis axis;
    int trials = 1;  // >= 1
};

extern const char* const kSweepCsvHeader;

// Writes the header plus one row per (point, trial). Throws on a malformed
// spec (unknown parameter, steps < 2, trials < 1, bad log range).
void run_sweep(const SweepSpec& spec, std::ostream& out, unsigned max_threads = 0);

std::vector<double> sweep_points(const SweepAxis& axis);

struct CompareSpec {
    ProtocolConfig base;
    std::vector<double> p1_values;
    std::vector<double> p2_values;
};

extern const char* const kCompareCsvHeader;

// Full (p1, p2) grid: theoretical and simulated verdicts side by side, with
// a disagreement flag per row.
void run_compare(const CompareSpec& spec, std::ostream& out, unsigned max_threads = 0);

// Thread cap resolution used by both drivers (env QKD_SIFT_THREADS).
unsigned resolve_threads(unsigned requested, std::size_t jobs);

}  // namespace qkd
