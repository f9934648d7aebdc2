#pragma once

#include <array>
#include <string>
#include <vector>

#include "beamsim/constellation.hpp"
#include "beamsim/precoder.hpp"
#include "beamsim/types.hpp"

namespace beamsim {

// Which of the S subchannels carry precoded symbols (b_p) and which carry
// plain ones (b_n); both 1-based, increasing, disjoint union of {1..S}.
struct SubchannelAssignment {
    int s = 0;
    int r = 0;
    std::vector<int> b_p;
    std::vector<int> b_n;

    static SubchannelAssignment from_precoded(int s, std::vector<int> b_p);
};

// 1-based index of the first entry above tol. Throws std::invalid_argument
// if every entry is at or below tol (an identical pair).
int delta_for_pair(const std::vector<double>& dist2, double tol = 1e-12);

// Worst-case first-nonzero index over all symbol pairs:
// max(b_p(1), b_n(S-R)). Returns 1 for a fully precoded assignment (R = S),
// valid whenever the precoder keeps every pair's first coordinate nonzero.
int delta_max(const SubchannelAssignment& a);

// (M - delta + 1)(N - delta + 1), the error-rate slope exponent.
long diversity_order(int m, int n, int delta);

struct TableOneRow {
    int r;
    std::vector<int> b_p;
    std::vector<int> b_n;
    int bp_first;   // b_p(1)
    int bn_last;    // b_n(S-R)
    int delta_max;
    long order;
};

// All partial assignments (R = 2 .. S-1, subsets in lexicographic order)
// with their worst-case delta and diversity order.
std::vector<TableOneRow> table_one(int m = 4, int n = 4, int s = 4);

std::string render_table_text(const std::vector<TableOneRow>& rows);
std::string render_table_csv(const std::vector<TableOneRow>& rows);

// Brute-force worst delta over every nonzero difference vector, building the
// subchannel-ordered squared-distance vector (precoded coordinates through
// theta_tilde on b_p, plain differences on b_n). Requires s*m <= 16.
int delta_max_oracle(const SubchannelAssignment& a, const CMatrix& theta_tilde,
                     const Constellation& c);

struct DiversityReport {
    int delta_max = 0;
    long order = 0;
    // Worst delta restricted to each pair group: [0] precoded part equal,
    // [1] plain part equal, [2] both parts differ. 0 marks an empty group.
    std::array<int, 3> group_deltas{0, 0, 0};
};

// Oracle with per-group maxima and the slope exponent for an M x N channel.
DiversityReport analyze_diversity(const SubchannelAssignment& a, const CMatrix& theta_tilde,
                                  const Constellation& c, int m, int n);

// Chernoff-style pairwise error bound for precoded single beamforming:
//   (1/2) (dmin2 * snr / (4 n_tx))^{-(m_rx * n_tx)}.
// Throws std::invalid_argument when dmin2 <= 0 (the full-diversity condition
// fails) or snr <= 0.
double pep_bound_psb(double dmin2, int n_tx, double snr, int m_rx);

// Predicted BER slope of a precoded multiple beamforming system (full or
// partial): worst-case delta of the given precoder fed into diversity_order.
long pep_exponent_fpmb(const Precoder& p, const Constellation& c, int m, int n);

} // namespace beamsim
