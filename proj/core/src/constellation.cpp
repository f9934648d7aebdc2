#include "beamsim/constellation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace beamsim {

namespace {

// Binary-reflected Gray code of k.
inline int gray_encode(int k) { return k ^ (k >> 1); }

// Index of g in the Gray sequence (inverse of gray_encode).
inline int gray_decode(int g) {
    int k = 0;
    for (; g; g >>= 1)
        k ^= g;
    return k;
}

} // namespace

Constellation Constellation::qam(int bits_per_symbol) {
    const int m = bits_per_symbol;
    if (m != 2 && m != 4 && m != 6 && m != 8)
        throw std::invalid_argument("Constellation::qam: m must be one of {2, 4, 6, 8}");

    const int half = m / 2;
    const int levels = 1 << half; // amplitudes per axis
    // Average energy of levels {+-1, +-3, ...} on both axes is 2(L^2-1)/3.
    const double scale = std::sqrt(3.0 / (2.0 * (levels * levels - 1)));

    // Level index k (0 = most negative amplitude) carries Gray label
    // gray_encode(k); invert to go label -> amplitude.
    std::vector<cxd> points(1 << m);
    for (int label = 0; label < (1 << m); ++label) {
        const int gi = label >> half;            // first m/2 bits, MSB first
        const int gq = label & (levels - 1);     // last m/2 bits
        const int ki = gray_decode(gi);
        const int kq = gray_decode(gq);
        const double re = (2 * ki - (levels - 1)) * scale;
        const double im = (2 * kq - (levels - 1)) * scale;
        points[label] = cxd(re, im);
    }
    return Constellation(m, std::move(points));
}

Constellation::Constellation(int m, std::vector<cxd> points) : m_(m), points_(std::move(points)) {
    min_dist2_ = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points_.size(); ++i)
        for (std::size_t j = i + 1; j < points_.size(); ++j)
            min_dist2_ = std::min(min_dist2_, std::norm(points_[i] - points_[j]));
}

int Constellation::label_of(const cxd& symbol) const {
    int best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int label = 0; label < size(); ++label) {
        const double d = std::norm(symbol - points_[label]);
        if (d < best_dist) {
            best_dist = d;
            best = label;
        }
    }
    if (best_dist > 1e-18)
        throw std::invalid_argument("Constellation::label_of: symbol is not a constellation point");
    return best;
}

SymbolVector map_bits(const Constellation& c, const std::vector<std::uint8_t>& bits) {
    const int m = c.bits_per_symbol();
    if (bits.size() % m != 0)
        throw std::invalid_argument("map_bits: bit count must be a multiple of m");
    const int n_symbols = static_cast<int>(bits.size()) / m;
    SymbolVector v(n_symbols);
    for (int i = 0; i < n_symbols; ++i) {
        int label = 0;
        for (int b = 0; b < m; ++b)
            label = (label << 1) | (bits[i * m + b] & 1);
        v[i] = c.point(label);
    }
    return v;
}

std::vector<std::uint8_t> unmap_symbols(const Constellation& c, const SymbolVector& v) {
    const int m = c.bits_per_symbol();
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(v.size()) * m);
    for (int i = 0; i < v.size(); ++i) {
        const int label = c.label_of(v[i]);
        for (int b = 0; b < m; ++b)
            bits[i * m + b] = static_cast<std::uint8_t>((label >> (m - 1 - b)) & 1);
    }
    return bits;
}

} // namespace beamsim
