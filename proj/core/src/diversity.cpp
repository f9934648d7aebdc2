#include "beamsim/diversity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace beamsim {

namespace {

void require_assignment(int s, const std::vector<int>& b_p) {
    if (s < 1) throw std::invalid_argument("subchannel count must be positive");
    if (b_p.empty() || static_cast<int>(b_p.size()) > s)
        throw std::invalid_argument("precoded set size must be in [1, s]");
    int prev = 0;
    for (int b : b_p) {
        if (b <= prev || b > s)
            throw std::invalid_argument("precoded indices must be increasing in [1, s]");
        prev = b;
    }
}

} // namespace

SubchannelAssignment SubchannelAssignment::from_precoded(int s, std::vector<int> b_p) {
    require_assignment(s, b_p);
    SubchannelAssignment a;
    a.s = s;
    a.r = static_cast<int>(b_p.size());
    a.b_p = std::move(b_p);
    for (int b = 1; b <= s; ++b)
        if (!std::binary_search(a.b_p.begin(), a.b_p.end(), b)) a.b_n.push_back(b);
    return a;
}

int delta_for_pair(const std::vector<double>& dist2, double tol) {
    for (std::size_t i = 0; i < dist2.size(); ++i)
        if (dist2[i] > tol) return static_cast<int>(i) + 1;
    throw std::invalid_argument("all squared distances are below tolerance");
}

int delta_max(const SubchannelAssignment& a) {
    require_assignment(a.s, a.b_p);
    if (a.r == a.s) return 1;
    if (static_cast<int>(a.b_n.size()) != a.s - a.r)
        throw std::invalid_argument("plain set size must be s - r");
    return std::max(a.b_p.front(), a.b_n.back());
}

long diversity_order(int m, int n, int delta) {
    if (m < 1 || n < 1) throw std::invalid_argument("antenna counts must be positive");
    if (delta < 1 || delta > std::min(m, n))
        throw std::invalid_argument("delta must be in [1, min(m, n)]");
    return static_cast<long>(m - delta + 1) * static_cast<long>(n - delta + 1);
}

std::vector<TableOneRow> table_one(int m, int n, int s) {
    if (s < 3) throw std::invalid_argument("need at least 3 subchannels for partial assignments");
    if (s > std::min(m, n)) throw std::invalid_argument("subchannel count exceeds channel rank");
    std::vector<TableOneRow> rows;
    for (int r = 2; r < s; ++r) {
        // Lexicographic subsets of {1..s} of size r.
        std::vector<int> pick(r);
        for (int i = 0; i < r; ++i) pick[i] = i + 1;
        while (true) {
            auto a = SubchannelAssignment::from_precoded(s, pick);
            TableOneRow row;
            row.r = r;
            row.b_p = a.b_p;
            row.b_n = a.b_n;
            row.bp_first = a.b_p.front();
            row.bn_last = a.b_n.back();
            row.delta_max = delta_max(a);
            row.order = diversity_order(m, n, row.delta_max);
            rows.push_back(std::move(row));
            int i = r - 1;
            while (i >= 0 && pick[i] == s - (r - 1 - i)) --i;
            if (i < 0) break;
            ++pick[i];
            for (int j = i + 1; j < r; ++j) pick[j] = pick[j - 1] + 1;
        }
    }
    return rows;
}

namespace {

std::string join_set(const std::vector<int>& v) {
    std::string out = "{";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(v[i]);
    }
    out += "}";
    return out;
}

} // namespace

std::string render_table_text(const std::vector<TableOneRow>& rows) {
    std::ostringstream os;
    char line[160];
    std::snprintf(line, sizeof(line), "%-2s  %-12s  %-12s  %6s  %8s  %9s  %5s\n",
                  "R", "b_p", "b_n", "b_p(1)", "b_n(S-R)", "delta_max", "order");
    os << line;
    for (const auto& row : rows) {
        std::snprintf(line, sizeof(line), "%-2d  %-12s  %-12s  %6d  %8d  %9d  %5ld\n",
                      row.r, join_set(row.b_p).c_str(), join_set(row.b_n).c_str(),
                      row.bp_first, row.bn_last, row.delta_max, row.order);
        os << line;
    }
    return os.str();
}

std::string render_table_csv(const std::vector<TableOneRow>& rows) {
    std::ostringstream os;
    os << "r,b_p,b_n,b_p_first,b_n_last,delta_max,order\n";
    auto join_bare = [](const std::vector<int>& v) {
        std::string out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out += " ";
            out += std::to_string(v[i]);
        }
        return out;
    };
    for (const auto& row : rows) {
        os << row.r << ",\"" << join_bare(row.b_p) << "\",\"" << join_bare(row.b_n) << "\","
           << row.bp_first << "," << row.bn_last << "," << row.delta_max << "," << row.order
           << "\n";
    }
    return os.str();
}

namespace {

// Shared walk over every nonzero composite difference vector. The visitor
// receives the subchannel-ordered squared-distance vector plus flags telling
// whether the precoded and plain parts are each nonzero.
template <typename Visit>
void for_each_difference(const SubchannelAssignment& a, const CMatrix& theta_tilde,
                         const Constellation& c, Visit visit) {
    require_assignment(a.s, a.b_p);
    if (static_cast<int>(a.b_n.size()) != a.s - a.r)
        throw std::invalid_argument("plain set size must be s - r");
    if (theta_tilde.rows() != a.r || theta_tilde.cols() != a.r)
        throw std::invalid_argument("precoder size must match precoded set size");

    const auto diff = coordinate_difference_set(c);
    const int d = static_cast<int>(diff.size());
    const int r = a.r;
    const int t = a.s - a.r;
    // diff[0] is zero, so counter == 0 is the all-equal pair; skip it.
    std::vector<int> digits(a.s, 0);
    CVector delta_p(r);
    CVector rotated(r);
    std::vector<double> dist2(a.s);
    bool done = false;
    // Enumerate composite vectors: digits 0..r-1 index the precoded part,
    // digits r.. index the plain part.
    while (!done) {
        // advance counter (skip initial all-zero state by advancing first)
        int pos = 0;
        while (pos < a.s) {
            if (++digits[pos] < d) break;
            digits[pos] = 0;
            ++pos;
        }
        if (pos == a.s) break;

        bool p_nonzero = false;
        for (int i = 0; i < r; ++i) {
            delta_p(i) = diff[digits[i]];
            if (digits[i] != 0) p_nonzero = true;
        }
        bool n_nonzero = false;
        for (int i = 0; i < t; ++i)
            if (digits[r + i] != 0) n_nonzero = true;

        if (p_nonzero)
            rotated.noalias() = theta_tilde * delta_p;
        else
            rotated.setZero();
        for (int i = 0; i < r; ++i) dist2[a.b_p[i] - 1] = std::norm(rotated(i));
        for (int i = 0; i < t; ++i) dist2[a.b_n[i] - 1] = std::norm(diff[digits[r + i]]);
        done = !visit(dist2, p_nonzero, n_nonzero);
    }
}

} // namespace

int delta_max_oracle(const SubchannelAssignment& a, const CMatrix& theta_tilde,
                     const Constellation& c) {
    if (a.s * c.bits_per_symbol() > 16)
        throw std::invalid_argument("difference enumeration limited to s*m <= 16");
    int worst = 0;
    for_each_difference(a, theta_tilde, c,
                        [&](const std::vector<double>& dist2, bool, bool) {
                            worst = std::max(worst, delta_for_pair(dist2));
                            return true;
                        });
    return worst;
}

DiversityReport analyze_diversity(const SubchannelAssignment& a, const CMatrix& theta_tilde,
                                  const Constellation& c, int m, int n) {
    if (a.s * c.bits_per_symbol() > 16)
        throw std::invalid_argument("difference enumeration limited to s*m <= 16");
    DiversityReport rep;
    for_each_difference(a, theta_tilde, c,
                        [&](const std::vector<double>& dist2, bool p_nz, bool n_nz) {
                            const int delta = delta_for_pair(dist2);
                            const int g = !p_nz ? 0 : (!n_nz ? 1 : 2);
                            rep.group_deltas[g] = std::max(rep.group_deltas[g], delta);
                            rep.delta_max = std::max(rep.delta_max, delta);
                            return true;
                        });
    rep.order = diversity_order(m, n, rep.delta_max);
    return rep;
}

double pep_bound_psb(double dmin2, int n_tx, double snr, int m_rx) {
    if (dmin2 <= 0.0) throw std::invalid_argument("minimum squared distance must be positive");
    if (snr <= 0.0) throw std::invalid_argument("snr must be positive");
    if (n_tx < 1 || m_rx < 1) throw std::invalid_argument("antenna counts must be positive");
    const double base = dmin2 * snr / (4.0 * n_tx);
    return 0.5 * std::pow(base, -static_cast<double>(m_rx) * n_tx);
}

long pep_exponent_fpmb(const Precoder& p, const Constellation& c, int m, int n) {
    const auto a = SubchannelAssignment::from_precoded(p.s, p.b_p);
    return diversity_order(m, n, delta_max_oracle(a, p.theta_tilde, c));
}

} // namespace beamsim
