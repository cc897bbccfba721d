#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace masim {

// Every random draw in a simulation comes from a stream keyed by
// (seed, agent, round, purpose). Streams are independent mt19937_64
// engines, so any sub-draw can be reproduced in isolation and episodes
// can be generated in any order without changing results.
//
// The raw engine output is fully specified by the standard; the
// distribution transforms below are pinned here (53-bit uniforms, polar
// normals, Marsaglia-Tsang gamma) instead of std::*_distribution so the
// byte stream does not depend on the standard library implementation.
enum class Draw : std::uint64_t {
    anchor = 1,
    label_dir,
    draft_noise,
    entropy,
    attack_dir,
    attack_entropy,
    obvious_dir,
    wrapper_dir,
    toy_data,
    theory_sample,
};

std::uint64_t mix64(std::uint64_t x);
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t agent, std::uint64_t round, Draw purpose);

class RngStream {
   public:
    explicit RngStream(std::uint64_t key) : engine_(key) {}
    RngStream(std::uint64_t seed, std::uint64_t agent, std::uint64_t round, Draw purpose)
        : engine_(stream_key(seed, agent, round, purpose)) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform on [0, 1) with 53-bit resolution
    double uniform01();
    // standard normal via the Marsaglia polar method
    double normal();
    // gamma with given shape and scale, Marsaglia-Tsang squeeze
    double gamma(double shape, double scale);

    Eigen::VectorXd gaussian_vector(int dim, double sigma);
    Eigen::VectorXd unit_vector(int dim);

   private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace masim
