#pragma once

#include <stdexcept>
#include <string>

namespace dski {

// Base for all library errors.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid parameters (out-of-range alpha/beta/F, k = 0, bad block size, ...).
// The CLI maps these to usage errors (exit 2).
struct config_error : error {
    using error::error;
};

// Malformed input data: corpus records, query files, run/qrels files,
// negative weights. Maps to exit 1.
struct data_error : error {
    using error::error;
};

// Filesystem-level failures (open/read/write).
struct io_error : error {
    using error::error;
};

// Index or block payload that cannot be loaded. `reason` distinguishes the
// failure modes so callers and tests can tell them apart.
struct load_error : error {
    enum class reason {
        bad_magic,
        bad_version,
        truncated,
        checksum_mismatch,
        corrupt,
    };

    load_error(reason r, const std::string& msg) : error(msg), why(r) {}

    reason why;
};

}  // namespace dski
