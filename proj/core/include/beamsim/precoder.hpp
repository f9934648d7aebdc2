#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <utility>
#include <vector>

#include "beamsim/constellation.hpp"
#include "beamsim/types.hpp"

namespace beamsim {

// Thrown when no candidate in a design search yields a usable precoder.
class InfeasibleDesignError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Constellation precoder for S parallel subchannels. The assembled matrix is
//   theta = P * blockdiag(theta_tilde, I_{S-R})
// where the permutation P routes precoded output i to subchannel b_p[i] and
// non-precoded output i to subchannel b_n[i]. For R = S, theta == theta_tilde.
struct Precoder {
    int s = 0;                // total streams
    int r = 0;                // streams entering theta_tilde
    CMatrix theta_tilde;      // r x r
    std::vector<int> b_p;     // increasing, 1-based subchannels of precoded outputs
    std::vector<int> b_n;     // increasing, 1-based subchannels of the rest
    CMatrix theta;            // s x s assembled matrix
};

// Angles for the Givens product parameterization of an S x S unitary matrix.
// Pairs are ordered k = 1..S-1 ascending, l = k+1..S ascending within k;
// psi in [-pi, pi], rho in [-pi/2, pi/2]. The leading diagonal unitary factor
// is fixed to the identity: the objectives below depend only on coordinate
// magnitudes, which it cannot change.
struct GivensParams {
    int s = 0;
    std::vector<std::pair<double, double>> angles; // (psi, rho), s(s-1)/2 entries

    static GivensParams zero(int s);
};

// [1, e^{j phi}, e^{j 2 phi}, e^{j 4 phi}, ..., e^{j 2^{R-2} phi}]:
// the exponent doubles after the second entry.
CVector rotation_vector(double phi, int r);

struct RotationSearch {
    double phi = 0.0;   // maximizing rotation angle
    double dmin2 = 0.0; // min squared distance of the combined constellation at unit
                        // average energy (raw minimum divided by R)
};

// Grid search over (0, pi/2] with golden-section refinement of the best cell.
// Requires r * m <= 16 so the difference set is exhaustively enumerable.
RotationSearch optimize_rotation_angle(int r, const Constellation& c, int grid_points = 10000);

// Product of complex Givens factors in pair order; unitary by construction.
CMatrix givens_unitary(const GivensParams& p);

// Unitary S-point IFFT matrix, (l,m) entry exp(j 2 pi (l-1)(m-1) / S) / sqrt(S).
CMatrix ifft_matrix(int s);

// ---- difference-vector machinery ----
// Every design metric depends on x - x' only, so pairs collapse to the
// per-coordinate difference set (distinct values of chi - chi, zero included).

std::vector<cxd> coordinate_difference_set(const Constellation& c);

// s x K matrix whose columns are all nonzero difference vectors,
// K = |chi - chi|^s - 1. Requires s * m <= 16.
CMatrix difference_vectors(const Constellation& c, int s);

// min over columns and coordinates of |theta * delta|^2 (the Phi1 objective).
double min_coordinate_distance2(const CMatrix& theta, const CMatrix& deltas);
// min over columns of the first coordinate |(theta * delta)_1|^2 (Phi2).
double min_first_coordinate_distance2(const CMatrix& theta, const CMatrix& deltas);
// min over columns of prod_i |(theta * delta)_i|^{2/S} (Phi3).
double min_geometric_mean_distance2(const CMatrix& theta, const CMatrix& deltas);

// ---- designers ----

struct Phi1Budget {
    int starts = 64;       // random multi-starts
    int max_sweeps = 40;   // coordinate-descent sweeps per start
    int coarse_points = 24; // scan resolution of each line search
    double tol = 1e-6;     // angle-movement convergence threshold
    std::uint64_t seed = 20260823;
    int workers = 1;       // starts fan out across threads; result is
                           // independent of the worker count
};

// Maximize the minimum per-coordinate squared distance over all symbol pairs
// via multi-start cyclic coordinate descent on the Givens angles. R = S.
Precoder design_phi1(int s, const Constellation& c, const Phi1Budget& budget = {});

// First row proportional to the optimal rotation vector, completed to a
// unitary matrix through the IFFT: theta = F_S^T diag(rotation vector).
Precoder design_phi2(int s, const Constellation& c);

// theta = F_S^T diag(1, sigma, ..., sigma^{S-1}) with sigma = e^{j 2 pi / P},
// P picked from the candidate list by the geometric-mean objective.
// Empty list means the default candidates {2S, 4S, 4S+-1, 8S+-1}.
// Throws InfeasibleDesignError if every candidate scores zero.
Precoder design_phi3(int s, const Constellation& c, const std::vector<int>& p_candidates = {});

std::vector<int> default_p_candidates(int s);

// Assemble a (possibly partial) precoder from theta_tilde and the precoded
// subchannel list. theta_tilde is taken as given; no unitarity is enforced.
Precoder build_partial(const CMatrix& theta_tilde, const std::vector<int>& b_p, int s);

Precoder identity_precoder(int s);

// ---- persistence ----
// JSON schema: {"s": int, "r": int, "b_p": [int...],
//               "theta": [[re, im], ...] row-major}.
void save_precoder(const Precoder& p, const std::filesystem::path& path);
Precoder load_precoder(const std::filesystem::path& path);

} // namespace beamsim
