#include "masim/rng.hpp"

#include <cmath>

#include "masim/errors.hpp"

namespace masim {

// splitmix64 finalizer; good avalanche, cheap, stable across platforms
std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t agent, std::uint64_t round, Draw purpose) {
    std::uint64_t k = mix64(seed);
    k = mix64(k ^ (agent + 0x100ULL));
    k = mix64(k ^ (round + 0x10000ULL));
    k = mix64(k ^ static_cast<std::uint64_t>(purpose));
    return k;
}

double RngStream::uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform01() - 1.0;
        v = 2.0 * uniform01() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
}

double RngStream::gamma(double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0)) throw DomainError("gamma: shape and scale must be positive");
    if (shape < 1.0) {
        // boost trick: Gamma(a) = Gamma(a+1) * U^(1/a)
        const double u = uniform01();
        return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform01();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
        if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
}

Eigen::VectorXd RngStream::gaussian_vector(int dim, double sigma) {
    if (dim <= 0) throw DomainError("gaussian_vector: dim must be positive");
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = sigma * normal();
    return v;
}

Eigen::VectorXd RngStream::unit_vector(int dim) {
    for (;;) {
        Eigen::VectorXd v = gaussian_vector(dim, 1.0);
        const double n = v.norm();
        if (n > 1e-12) return v / n;
    }
}

}  // namespace masim
