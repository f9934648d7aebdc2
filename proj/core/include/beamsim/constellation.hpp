#pragma once

#include <cstdint>
#include <vector>

#include "beamsim/types.hpp"

namespace beamsim {

// Gray-mapped square QAM with unit average energy.
//
// points()[label] is the symbol whose m-bit label equals `label` read
// MSB-first. The first m/2 bits select the I amplitude, the last m/2 the Q
// amplitude, each through a binary-reflected Gray code over the amplitude
// levels ordered from most negative to most positive. This pins the labeling
// the analysis leaves open; adjacent points always differ in exactly one bit.
class Constellation {
public:
    // Supported m: 2 (4-QAM), 4 (16-QAM), 6 (64-QAM), 8 (256-QAM).
    static Constellation qam(int bits_per_symbol);

    int bits_per_symbol() const { return m_; }
    int size() const { return static_cast<int>(points_.size()); }
    const std::vector<cxd>& points() const { return points_; }
    const cxd& point(int label) const { return points_[label]; }

    // Minimum squared Euclidean distance between distinct points.
    double min_squared_distance() const { return min_dist2_; }

    // Label of an exact (or nearly exact) constellation point.
    // Throws std::invalid_argument if the symbol is not a member.
    int label_of(const cxd& symbol) const;

private:
    Constellation(int m, std::vector<cxd> points);

    int m_ = 0;
    std::vector<cxd> points_;
    double min_dist2_ = 0.0;
};

// Consecutive m-bit groups (MSB first) map to symbols. Bit values are 0/1.
// Throws std::invalid_argument if bits.size() is not a multiple of m.
SymbolVector map_bits(const Constellation& c, const std::vector<std::uint8_t>& bits);

// Exact inverse of map_bits. Throws std::invalid_argument on non-members.
std::vector<std::uint8_t> unmap_symbols(const Constellation& c, const SymbolVector& v);

} // namespace beamsim
