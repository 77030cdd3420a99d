#pragma once

#include <cmath>

#include "recon/errors.hpp"

namespace recon {

/// Pipeline phase timings in seconds, all non-negative.
struct LatencyReport {
    double scan = 0.0;
    double upload = 0.0;
    double download = 0.0;
    double signal = 0.0;
    double preprocessing = 0.0;
    double reconstruction = 0.0;
};

/// Full form:       scan + 2*upload + 2*signal + preprocessing +
///                  reconstruction + download.
/// Simplified form: scan + preprocessing + reconstruction (the upload,
/// signal, and download terms are negligible next to the rest).
inline double latency_total(const LatencyReport& r, bool simplified = false) {
    const double fields[] = {r.scan,   r.upload,        r.download,
                             r.signal, r.preprocessing, r.reconstruction};
    for (double f : fields)
        if (!(f >= 0.0) || !std::isfinite(f))
            throw ValidationError("latency: fields must be finite and non-negative");
    if (simplified) return r.scan + r.preprocessing + r.reconstruction;
    return r.scan + 2.0 * r.upload + 2.0 * r.signal + r.preprocessing +
           r.reconstruction + r.download;
}

} // namespace recon
