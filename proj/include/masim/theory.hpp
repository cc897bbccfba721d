#pragma once

#include <cstdint>
#include <string>

#include "masim/embedding_defense.hpp"

namespace masim {

struct TheoryReport {
    double lipschitz = 0.0;
    double margin = 0.0;
    double radius = 0.0;
    long samples_tested = 0;
    long violations = 0;
    bool passed = false;
    std::string note;
};

// Smallest score the scorer assigns to any support point.
double benign_margin(const AnyScorer& scorer, const SupportSet& support);

// Checks s(h) >= margin - L * dist(h, S) on random points drawn from a ball
// that comfortably covers the support. The bound is analytic; sampling is a
// defensive cross-check against scorer or distance bugs.
TheoryReport check_lemma_bound(const AnyScorer& scorer, const SupportSet& support, std::uint64_t seed,
                               long n_samples, double tol = 1e-7);

// Checks the certified-radius consequence: every h = z + r*u with z in the
// support and r <= margin / L still scores non-negative.
TheoryReport check_acceptance_inclusion(const AnyScorer& scorer, const SupportSet& support,
                                        std::uint64_t seed, long n_samples, double tol = 1e-7);

}  // namespace masim
