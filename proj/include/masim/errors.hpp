#pragma once

#include <stdexcept>
#include <string>

namespace masim {

// Bad user-facing configuration (unknown keys, out-of-range values,
// inconsistent sections). CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad arguments at API level: dimension mismatches, empty inputs,
// labels out of range, degenerate metric inputs.
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem and serialization failures.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Remote generation backend failures (transport, protocol, missing
// capabilities such as absent logprobs).
struct BackendError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace masim
