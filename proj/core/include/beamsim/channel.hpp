#pragma once

#include "beamsim/rng.hpp"
#include "beamsim/types.hpp"

namespace beamsim {

// An M x N fading realization together with its ordered SVD factors
// H = U diag(singular_values) V^H, singular values non-increasing.
// The sign/phase convention of U and V is whatever the decomposition
// returns; downstream BER math touches only the singular values.
struct ChannelRealization {
    CMatrix h;               // M x N
    RVector singular_values; // length min(M, N), non-increasing
    CMatrix u;               // M x M unitary
    CMatrix v;               // N x N unitary

    int rx_count() const { return static_cast<int>(h.rows()); }
    int tx_count() const { return static_cast<int>(h.cols()); }
};

// The first s columns of U and V plus the first s singular values.
struct Beamformers {
    CMatrix u_s;     // M x s
    CMatrix v_s;     // N x s
    RVector lambdas; // length s
};

// i.i.d. circularly-symmetric complex Gaussian entries, unit total variance
// (1/2 per real dimension). Throws std::invalid_argument on zero dimensions.
CMatrix sample_channel(int m, int n, RngStream& rng);

// Full SVD with singular values sorted in decreasing order.
// Throws std::invalid_argument if h has non-finite entries.
ChannelRealization svd_ordered(const CMatrix& h);

// Throws std::invalid_argument unless 1 <= s <= min(M, N).
Beamformers beamformers(const ChannelRealization& ch, int s);

} // namespace beamsim
