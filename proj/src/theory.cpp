#include "masim/theory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "masim/errors.hpp"
#include "masim/rng.hpp"

namespace masim {

double benign_margin(const AnyScorer& scorer, const SupportSet& support) {
    if (support.points.empty()) throw DomainError("benign_margin: empty support");
    double m = std::numeric_limits<double>::infinity();
    for (const auto& z : support.points) m = std::min(m, score(scorer, z));
    return m;
}

namespace {

Eigen::VectorXd support_centroid(const SupportSet& support) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(support.points.front().size());
    for (const auto& z : support.points) c += z;
    return c / static_cast<double>(support.points.size());
}

}  // namespace

TheoryReport check_lemma_bound(const AnyScorer& scorer, const SupportSet& support, std::uint64_t seed,
                               long n_samples, double tol) {
    if (support.points.empty()) throw DomainError("check_lemma_bound: empty support");
    if (n_samples < 1) throw DomainError("check_lemma_bound: n_samples must be positive");

    TheoryReport rep;
    rep.lipschitz = scorer_lipschitz(scorer);
    rep.margin = benign_margin(scorer, support);
    rep.radius = rep.lipschitz > 0.0 ? std::max(rep.margin, 0.0) / rep.lipschitz : 0.0;

    const int dim = static_cast<int>(support.points.front().size());
    const Eigen::VectorXd center = support_centroid(support);
    double ball = 0.0;
    for (const auto& z : support.points) ball = std::max(ball, (z - center).norm());
    ball += 2.0;

    RngStream rng(seed, 0, 0, Draw::theory_sample);
    long bad = 0;
    double worst = 0.0;
    for (long i = 0; i < n_samples; ++i) {
        const double r = ball * std::pow(rng.uniform01(), 1.0 / dim);
        const Eigen::VectorXd h = center + r * rng.unit_vector(dim);
        const double lhs = score(scorer, h);
        const double rhs = rep.margin - rep.lipschitz * dist_to_support(h, support);
        if (lhs < rhs - tol) {
            ++bad;
            worst = std::max(worst, rhs - lhs);
        }
    }
    rep.samples_tested = n_samples;
    rep.violations = bad;
    rep.passed = bad == 0;
    char buf[128];
    if (rep.passed)
        std::snprintf(buf, sizeof buf, "bound held on %ld samples (ball radius %.3f)", n_samples, ball);
    else
        std::snprintf(buf, sizeof buf, "%ld violations, worst gap %.3e", bad, worst);
    rep.note = buf;
    return rep;
}

TheoryReport check_acceptance_inclusion(const AnyScorer& scorer, const SupportSet& support,
                                        std::uint64_t seed, long n_samples, double tol) {
    if (support.points.empty()) throw DomainError("check_acceptance_inclusion: empty support");
    if (n_samples < 1) throw DomainError("check_acceptance_inclusion: n_samples must be positive");

    TheoryReport rep;
    rep.lipschitz = scorer_lipschitz(scorer);
    rep.margin = benign_margin(scorer, support);
    rep.radius = rep.lipschitz > 0.0 ? std::max(rep.margin, 0.0) / rep.lipschitz : 0.0;
    rep.samples_tested = n_samples;

    if (rep.margin <= 0.0) {
        rep.violations = 0;
        rep.passed = true;
        rep.note = "margin non-positive, certified ball is empty";
        return rep;
    }

    const int dim = static_cast<int>(support.points.front().size());
    RngStream rng(seed, 0, 0, Draw::theory_sample);
    long bad = 0;
    double worst = 0.0;
    for (long i = 0; i < n_samples; ++i) {
        const auto idx =
            static_cast<std::size_t>(rng.uniform01() * static_cast<double>(support.points.size()));
        const auto& z = support.points[std::min(idx, support.points.size() - 1)];
        const double r = rep.radius * rng.uniform01();
        const Eigen::VectorXd h = z + r * rng.unit_vector(dim);
        const double s = score(scorer, h);
        if (s < -tol) {
            ++bad;
            worst = std::max(worst, -s);
        }
    }
    rep.violations = bad;
    rep.passed = bad == 0;
    char buf[128];
    if (rep.passed)
        std::snprintf(buf, sizeof buf, "all %ld in-ball samples scored non-negative (radius %.4f)",
                      n_samples, rep.radius);
    else
        std::snprintf(buf, sizeof buf, "%ld in-ball samples pruned, worst score %.3e", bad, worst);
    rep.note = buf;
    return rep;
}

}  // namespace masim
