#include "beamsim/channel.hpp"

#include <stdexcept>

#include <Eigen/SVD>

namespace beamsim {

CMatrix sample_channel(int m, int n, RngStream& rng) {
    if (m < 1 || n < 1)
        throw std::invalid_argument("sample_channel: dimensions must be positive");
    CMatrix h(m, n);
    // Row-major fill order so the draw sequence is part of the contract.
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
            h(i, j) = rng.complex_gaussian(1.0);
    return h;
}

ChannelRealization svd_ordered(const CMatrix& h) {
    if (!h.allFinite())
        throw std::invalid_argument("svd_ordered: matrix has non-finite entries");

    Eigen::JacobiSVD<CMatrix> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);

    ChannelRealization ch;
    ch.h = h;
    ch.singular_values = svd.singularValues(); // Eigen returns them sorted decreasing
    ch.u = svd.matrixU();
    ch.v = svd.matrixV();
    return ch;
}

Beamformers beamformers(const ChannelRealization& ch, int s) {
    const int rank_limit = static_cast<int>(ch.singular_values.size());
    if (s < 1 || s > rank_limit)
        throw std::invalid_argument("beamformers: s out of range");
    Beamformers bf;
    bf.u_s = ch.u.leftCols(s);
    bf.v_s = ch.v.leftCols(s);
    bf.lambdas = ch.singular_values.head(s);
    return bf;
}

} // namespace beamsim
