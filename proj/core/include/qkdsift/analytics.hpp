#pragma once

// Closed-form error rates, sifting efficiency and key-length planning for
// the biased-basis protocol under the intercept-resend attack family. These
// are the oracles the Monte Carlo engine is checked against.
//
// Conventions: epsilon is the probability of choosing the rectilinear basis,
// e1 is the error rate of the both-rectilinear subset, e2 of the
// both-diagonal subset. Interception in the wrong basis randomizes the
// photon, so e1 = p2/2 and e2 = p1/2 regardless of epsilon (both are
// conditional on the bases already having matched).

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace qkd {

enum class Verdict : std::uint8_t { Accept = 0, Abort = 1 };

constexpr const char* to_string(Verdict v) {
    return v == Verdict::Accept ? "Accept" : "Abort";
}

namespace detail {
inline void check_rate(double x, const char* name) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
    }
}
}  // namespace detail

inline double error_rate_rect(double /*p1*/, double p2) { return p2 / 2.0; }
inline double error_rate_diag(double p1, double /*p2*/) { return p1 / 2.0; }

// Single lumped error rate of the unbiased protocol: (p1 + p2) / 4.
inline double avg_error_bb84(double p1, double p2) {
    detail::check_rate(p1, "p1");
    detail::check_rate(p2, "p2");
    return (p1 + p2) / 4.0;
}

// Pooled error rate over the accepted data at bias epsilon:
//   (eps^2 p2 + (1-eps)^2 p1) / (2 [eps^2 + (1-eps)^2]).
// epsilon = 0 is rejected; the limit is singular (the scheme has no
// rectilinear data at all there).
inline double avg_error_biased(double epsilon, double p1, double p2) {
    if (!(epsilon > 0.0 && epsilon <= 0.5)) {
        throw std::invalid_argument("epsilon must lie in (0, 1/2]");
    }
    detail::check_rate(p1, "p1");
    detail::check_rate(p2, "p2");
    const double a = epsilon * epsilon;
    const double b = (1.0 - epsilon) * (1.0 - epsilon);
    return (a * p2 + b * p1) / (2.0 * (a + b));
}

// Pooled rate when the two parties use different biases. The accepted data
// splits into rectilinear and diagonal subsets with weights eps_a*eps_b and
// (1-eps_a)(1-eps_b); reduces to avg_error_biased when the biases agree.
inline double avg_error_pooled(double eps_a, double eps_b, double p1, double p2) {
    const double wr = eps_a * eps_b;
    const double wd = (1.0 - eps_a) * (1.0 - eps_b);
    if (!(wr + wd > 0.0)) {
        throw std::invalid_argument("degenerate biases: no data is ever accepted");
    }
    return (wr * (p2 / 2.0) + wd * (p1 / 2.0)) / (wr + wd);
}

// Probability that the two independently chosen bases agree.
inline double sift_efficiency(double eps_a, double eps_b) {
    if (!(eps_a > 0.0 && eps_a <= 0.5) || !(eps_b > 0.0 && eps_b <= 0.5)) {
        throw std::invalid_argument("biases must lie in (0, 1/2]");
    }
    return eps_a * eps_b + (1.0 - eps_a) * (1.0 - eps_b);
}

// Smallest usable bias: the expected both-rectilinear count N*eps^2 must
// reach the rectilinear test-sample size m1, so eps >= sqrt(m1 / N).
inline double min_epsilon(std::uint64_t m1, std::uint64_t n_photons) {
    if (m1 < 1 || m1 > n_photons) {
        throw std::invalid_argument("min_epsilon requires 1 <= m1 <= N");
    }
    return std::sqrt(static_cast<double>(m1) / static_cast<double>(n_photons));
}

// Two-sided Hoeffding deviation for an m-sample proportion estimate:
// with probability at least 1 - tail, |estimate - truth| <= delta.
inline double hoeffding_delta(std::uint64_t m, double tail) {
    if (m < 1 || !(tail > 0.0 && tail < 1.0)) {
        throw std::invalid_argument("hoeffding_delta requires m >= 1 and tail in (0, 1)");
    }
    return std::sqrt(std::log(2.0 / tail) / (2.0 * static_cast<double>(m)));
}

// Planning estimate of final key bits per transmitted photon,
//   max(0, a - 2 e_max - delta - s/N),  a = sift_efficiency * (1 - overhead).
// The overhead term stands in for test-sample sacrifice and reconciliation
// discards; accepted sessions report the realized fraction instead.
inline double expected_key_fraction(double eps, double e_max, double delta,
                                    std::uint64_t s, std::uint64_t n_photons,
                                    double a_overhead) {
    detail::check_rate(e_max, "e_max");
    detail::check_rate(delta, "delta");
    detail::check_rate(a_overhead, "a_overhead");
    if (s < 1 || n_photons < 1) {
        throw std::invalid_argument("expected_key_fraction requires s >= 1 and N >= 1");
    }
    const double a = sift_efficiency(eps, eps) * (1.0 - a_overhead);
    const double f = a - 2.0 * e_max - delta -
                     static_cast<double>(s) / static_cast<double>(n_photons);
    return f > 0.0 ? f : 0.0;
}

struct DetectionVerdicts {
    Verdict naive;
    Verdict refined;
};

// Theoretical counterpart of the simulator's two verdicts: the naive one
// thresholds the pooled rate, the refined one thresholds each per-basis rate.
inline DetectionVerdicts detection_table(double epsilon, double p1, double p2,
                                         double e_max) {
    const double pooled = avg_error_biased(epsilon, p1, p2);
    const bool naive_ok = pooled < e_max;
    const bool refined_ok = error_rate_rect(p1, p2) < e_max && error_rate_diag(p1, p2) < e_max;
    return {naive_ok ? Verdict::Accept : Verdict::Abort,
            refined_ok ? Verdict::Accept : Verdict::Abort};
}

struct TheoryPoint {
    double epsilon;
    double p1;
    double p2;
    double e1;
    double e2;
    double e_bar;
    double sift_fraction;
    double min_epsilon;
};

inline TheoryPoint theory_point(double epsilon, double p1, double p2,
                                std::uint64_t m1, std::uint64_t n_photons) {
    return TheoryPoint{epsilon,
                       p1,
                       p2,
                       error_rate_rect(p1, p2),
                       error_rate_diag(p1, p2),
                       avg_error_biased(epsilon, p1, p2),
                       sift_efficiency(epsilon, epsilon),
                       min_epsilon(m1, n_photons)};
}

}  // namespace qkd
