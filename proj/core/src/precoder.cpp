#include "beamsim/precoder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <thread>

#include <nlohmann/json.hpp>

#include "beamsim/errors.hpp"
#include "beamsim/rng.hpp"

namespace beamsim {

namespace {

constexpr double kPi = std::numbers::pi;

void require_enumerable(int s, const Constellation& c, const char* who) {
    if (s < 1)
        throw std::invalid_argument(std::string(who) + ": stream count must be positive");
    if (s * c.bits_per_symbol() > 16)
        throw std::invalid_argument(std::string(who) +
                                    ": s*m > 16, exhaustive difference enumeration infeasible");
}

} // namespace

GivensParams GivensParams::zero(int s) {
    GivensParams p;
    p.s = s;
    p.angles.assign(static_cast<std::size_t>(s) * (s - 1) / 2, {0.0, 0.0});
    return p;
}

CVector rotation_vector(double phi, int r) {
    if (r < 1)
        throw std::invalid_argument("rotation_vector: r must be positive");
    CVector theta(r);
    theta[0] = 1.0;
    double exponent = 1.0; // 1, 2, 4, ... doubling after the second entry
    for (int k = 1; k < r; ++k) {
        theta[k] = std::polar(1.0, exponent * phi);
        exponent *= 2.0;
    }
    return theta;
}

std::vector<cxd> coordinate_difference_set(const Constellation& c) {
    // Distinct values of chi - chi; keyed on a 1e-12 grid to merge
    // floating-point twins of the same lattice difference.
    std::map<std::pair<long long, long long>, cxd> distinct;
    for (const cxd& a : c.points())
        for (const cxd& b : c.points()) {
            const cxd d = a - b;
            const auto key = std::make_pair(std::llround(d.real() * 1e12),
                                            std::llround(d.imag() * 1e12));
            distinct.emplace(key, d);
        }
    std::vector<cxd> out;
    out.reserve(distinct.size());
    out.push_back(cxd(0.0, 0.0)); // zero first; enumeration counts on it
    for (const auto& [key, d] : distinct)
        if (key != std::make_pair(0LL, 0LL))
            out.push_back(d);
    return out;
}

CMatrix difference_vectors(const Constellation& c, int s) {
    require_enumerable(s, c, "difference_vectors");
    const std::vector<cxd> diffs = coordinate_difference_set(c);
    const std::size_t base = diffs.size();
    std::size_t total = 1;
    for (int i = 0; i < s; ++i)
        total *= base;

    CMatrix deltas(s, static_cast<Eigen::Index>(total - 1));
    std::vector<std::size_t> digit(s, 0); // digit 0 = coordinate 0
    for (std::size_t idx = 1; idx < total; ++idx) {
        // mixed-radix increment
        for (int d = 0; d < s; ++d) {
            if (++digit[d] < base)
                break;
            digit[d] = 0;
        }
        for (int d = 0; d < s; ++d)
            deltas(d, static_cast<Eigen::Index>(idx - 1)) = diffs[digit[d]];
    }
    return deltas;
}

double min_coordinate_distance2(const CMatrix& theta, const CMatrix& deltas) {
    return (theta * deltas).cwiseAbs2().minCoeff();
}

double min_first_coordinate_distance2(const CMatrix& theta, const CMatrix& deltas) {
    return (theta.row(0) * deltas).cwiseAbs2().minCoeff();
}

double min_geometric_mean_distance2(const CMatrix& theta, const CMatrix& deltas) {
    const int s = static_cast<int>(theta.rows());
    const Eigen::ArrayXXd abs2 = (theta * deltas).cwiseAbs2().array();
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < abs2.cols(); ++k) {
        double prod = 1.0;
        for (int i = 0; i < s; ++i)
            prod *= abs2(i, k);
        best = std::min(best, std::pow(prod, 1.0 / s));
    }
    return best;
}

RotationSearch optimize_rotation_angle(int r, const Constellation& c, int grid_points) {
    require_enumerable(r, c, "optimize_rotation_angle");
    if (grid_points < 8)
        throw std::invalid_argument("optimize_rotation_angle: grid too coarse");

    if (r == 1) // theta = [1]; the angle plays no role
        return {0.0, c.min_squared_distance()};

    const CMatrix deltas = difference_vectors(c, r);
    CMatrix scratch(1, deltas.cols());
    const auto value = [&](double phi) {
        scratch.noalias() = rotation_vector(phi, r).transpose() * deltas;
        return scratch.cwiseAbs2().minCoeff() / r;
    };

    // Coarse scan of (0, pi/2].
    const double step = (kPi / 2.0) / grid_points;
    double best_phi = step;
    double best_val = value(step);
    for (int i = 2; i <= grid_points; ++i) {
        const double phi = i * step;
        const double v = value(phi);
        if (v > best_val) {
            best_val = v;
            best_phi = phi;
        }
    }

    // Golden-section refinement inside the winning cell's neighborhood.
    const double invgold = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = std::max(best_phi - step, step * 1e-3);
    double hi = std::min(best_phi + step, kPi / 2.0);
    double x1 = hi - invgold * (hi - lo);
    double x2 = lo + invgold * (hi - lo);
    double f1 = value(x1), f2 = value(x2);
    while (hi - lo > 1e-10) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invgold * (hi - lo);
            f2 = value(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invgold * (hi - lo);
            f1 = value(x1);
        }
    }
    const double refined = (lo + hi) / 2.0;
    const double refined_val = value(refined);
    if (refined_val > best_val)
        return {refined, refined_val};
    return {best_phi, best_val};
}

CMatrix givens_unitary(const GivensParams& p) {
    const int s = p.s;
    if (s < 1)
        throw std::invalid_argument("givens_unitary: dimension must be positive");
    if (p.angles.size() != static_cast<std::size_t>(s) * (s - 1) / 2)
        throw std::invalid_argument("givens_unitary: expected s(s-1)/2 angle pairs");

    CMatrix acc = CMatrix::Identity(s, s);
    std::size_t idx = 0;
    for (int k = 0; k < s - 1; ++k) {
        for (int l = k + 1; l < s; ++l, ++idx) {
            const auto [psi, rho] = p.angles[idx];
            const double cp = std::cos(psi), sp = std::sin(psi);
            const cxd g_kl = std::polar(sp, -rho);  // e^{-j rho} sin psi
            const cxd g_lk = -std::polar(sp, rho);  // -e^{j rho} sin psi
            // acc <- acc * G_kl touches only columns k and l.
            for (int i = 0; i < s; ++i) {
                const cxd a = acc(i, k), b = acc(i, l);
                acc(i, k) = a * cp + b * g_lk;
                acc(i, l) = a * g_kl + b * cp;
            }
        }
    }
    return acc;
}

CMatrix ifft_matrix(int s) {
    if (s < 1)
        throw std::invalid_argument("ifft_matrix: dimension must be positive");
    CMatrix f(s, s);
    const double scale = 1.0 / std::sqrt(static_cast<double>(s));
    for (int l = 0; l < s; ++l)
        for (int m = 0; m < s; ++m)
            f(l, m) = std::polar(scale, 2.0 * kPi * l * m / s);
    return f;
}

// ---- Phi1 search ----

namespace {

// Objective evaluator with preallocated scratch; one per worker thread.
class Phi1Evaluator {
public:
    explicit Phi1Evaluator(const CMatrix& deltas)
        : deltas_(deltas), scratch_(deltas.rows(), deltas.cols()) {}

    double operator()(const CMatrix& theta) {
        scratch_.noalias() = theta * deltas_;
        return scratch_.cwiseAbs2().minCoeff();
    }

private:
    const CMatrix& deltas_;
    CMatrix scratch_;
};

struct Phi1Candidate {
    double objective = -1.0;
    GivensParams params;
};

// Maximize along one angle: full-range coarse scan plus golden-section
// refinement of the best cell. Returns the angle movement.
double line_search(GivensParams& params, std::size_t pair, bool is_psi, double lo, double hi,
                   Phi1Evaluator& eval, int coarse_points, double angle_tol, double& best_obj) {
    auto& slot = is_psi ? params.angles[pair].first : params.angles[pair].second;
    const double start = slot;

    auto value_at = [&](double x) {
        slot = x;
        return eval(givens_unitary(params));
    };

    double best_x = start;
    const double step = (hi - lo) / coarse_points;
    for (int i = 0; i <= coarse_points; ++i) {
        const double x = lo + i * step;
        const double v = value_at(x);
        if (v > best_obj) {
            best_obj = v;
            best_x = x;
        }
    }

    const double invgold = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = std::max(lo, best_x - step);
    double b = std::min(hi, best_x + step);
    double x1 = b - invgold * (b - a);
    double x2 = a + invgold * (b - a);
    double f1 = value_at(x1), f2 = value_at(x2);
    while (b - a > angle_tol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invgold * (b - a);
            f2 = value_at(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invgold * (b - a);
            f1 = value_at(x1);
        }
    }
    const double mid = (a + b) / 2.0;
    const double fm = value_at(mid);
    if (fm > best_obj) {
        best_obj = fm;
        best_x = mid;
    }

    slot = best_x;
    return std::abs(best_x - start);
}

Phi1Candidate run_phi1_start(int s, const CMatrix& deltas, const Phi1Budget& budget,
                             std::uint64_t start_index) {
    Phi1Evaluator eval(deltas);
    RngStream rng(budget.seed, start_index);

    GivensParams params = GivensParams::zero(s);
    for (auto& [psi, rho] : params.angles) {
        psi = (2.0 * rng.uniform() - 1.0) * kPi;
        rho = (2.0 * rng.uniform() - 1.0) * kPi / 2.0;
    }

    double best = eval(givens_unitary(params));
    for (int sweep = 0; sweep < budget.max_sweeps; ++sweep) {
        double max_move = 0.0;
        for (std::size_t pair = 0; pair < params.angles.size(); ++pair) {
            max_move = std::max(max_move, line_search(params, pair, true, -kPi, kPi, eval,
                                                      budget.coarse_points, budget.tol, best));
            max_move = std::max(max_move, line_search(params, pair, false, -kPi / 2.0, kPi / 2.0,
                                                      eval, budget.coarse_points, budget.tol, best));
        }
        if (max_move < budget.tol)
            break;
    }
    return {best, std::move(params)};
}

Precoder full_precoder(int s, CMatrix theta) {
    Precoder p;
    p.s = s;
    p.r = s;
    p.theta_tilde = theta;
    p.b_p.resize(s);
    for (int i = 0; i < s; ++i)
        p.b_p[i] = i + 1;
    p.theta = std::move(theta);
    return p;
}

} // namespace

Precoder design_phi1(int s, const Constellation& c, const Phi1Budget& budget) {
    require_enumerable(s, c, "design_phi1");
    if (budget.starts < 1 || budget.coarse_points < 2 || budget.workers < 1)
        throw std::invalid_argument("design_phi1: bad search budget");

    if (s == 1)
        return full_precoder(1, CMatrix::Identity(1, 1));

    const CMatrix deltas = difference_vectors(c, s);
    std::vector<Phi1Candidate> results(budget.starts);

    const int workers = std::min(budget.workers, budget.starts);
    if (workers == 1) {
        for (int i = 0; i < budget.starts; ++i)
            results[i] = run_phi1_start(s, deltas, budget, i);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (int i = w; i < budget.starts; i += workers)
                    results[i] = run_phi1_start(s, deltas, budget, i);
            });
        for (auto& t : pool)
            t.join();
    }

    // Best objective; ties resolve to the lowest start index.
    int best = 0;
    for (int i = 1; i < budget.starts; ++i)
        if (results[i].objective > results[best].objective)
            best = i;

    return full_precoder(s, givens_unitary(results[best].params));
}

Precoder design_phi2(int s, const Constellation& c) {
    require_enumerable(s, c, "design_phi2");
    if (s == 1)
        return full_precoder(1, CMatrix::Identity(1, 1));

    const RotationSearch rs = optimize_rotation_angle(s, c);
    const CVector theta_vec = rotation_vector(rs.phi, s);
    CMatrix theta = ifft_matrix(s).transpose() * theta_vec.asDiagonal();
    return full_precoder(s, std::move(theta));
}

std::vector<int> default_p_candidates(int s) {
    std::vector<int> out;
    for (int p : {2 * s, 4 * s, 4 * s - 1, 4 * s + 1, 8 * s - 1, 8 * s + 1})
        if (p >= 1 && std::find(out.begin(), out.end(), p) == out.end())
            out.push_back(p);
    return out;
}

Precoder design_phi3(int s, const Constellation& c, const std::vector<int>& p_candidates) {
    require_enumerable(s, c, "design_phi3");
    if (s == 1)
        return full_precoder(1, CMatrix::Identity(1, 1));

    const std::vector<int> candidates =
        p_candidates.empty() ? default_p_candidates(s) : p_candidates;
    for (int p : candidates)
        if (p < 1)
            throw std::invalid_argument("design_phi3: candidate P must be positive");

    const CMatrix deltas = difference_vectors(c, s);
    const CMatrix f_t = ifft_matrix(s).transpose();

    double best_obj = -1.0;
    CMatrix best_theta;
    for (int p : candidates) {
        CVector diag(s);
        for (int i = 0; i < s; ++i)
            diag[i] = std::polar(1.0, 2.0 * kPi * i / p); // sigma^i
        const CMatrix theta = f_t * diag.asDiagonal();
        const double obj = min_geometric_mean_distance2(theta, deltas);
        if (obj > best_obj) {
            best_obj = obj;
            best_theta = theta;
        }
    }
    if (best_obj <= 1e-12)
        throw InfeasibleDesignError("design_phi3: every candidate P scored zero");
    return full_precoder(s, std::move(best_theta));
}

Precoder build_partial(const CMatrix& theta_tilde, const std::vector<int>& b_p, int s) {
    const int r = static_cast<int>(theta_tilde.rows());
    if (theta_tilde.cols() != r || r < 1)
        throw std::invalid_argument("build_partial: theta_tilde must be square");
    if (static_cast<int>(b_p.size()) != r || r > s)
        throw std::invalid_argument("build_partial: need |b_p| = R <= S");
    for (std::size_t i = 0; i < b_p.size(); ++i) {
        if (b_p[i] < 1 || b_p[i] > s)
            throw std::invalid_argument("build_partial: subchannel index out of range");
        if (i > 0 && b_p[i] <= b_p[i - 1])
            throw std::invalid_argument("build_partial: b_p must be strictly increasing");
    }

    Precoder p;
    p.s = s;
    p.r = r;
    p.theta_tilde = theta_tilde;
    p.b_p = b_p;
    for (int ch = 1; ch <= s; ++ch)
        if (std::find(b_p.begin(), b_p.end(), ch) == b_p.end())
            p.b_n.push_back(ch);

    p.theta = CMatrix::Zero(s, s);
    for (int i = 0; i < r; ++i)
        p.theta.block(b_p[i] - 1, 0, 1, r) = theta_tilde.row(i);
    for (int i = 0; i < s - r; ++i)
        p.theta(p.b_n[i] - 1, r + i) = 1.0;
    return p;
}

Precoder identity_precoder(int s) {
    return full_precoder(s, CMatrix::Identity(s, s));
}

void save_precoder(const Precoder& p, const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    j["s"] = p.s;
    j["r"] = p.r;
    j["b_p"] = p.b_p;
    auto& theta = j["theta"] = nlohmann::ordered_json::array();
    for (int i = 0; i < p.s; ++i)
        for (int k = 0; k < p.s; ++k)
            theta.push_back({p.theta(i, k).real(), p.theta(i, k).imag()});

    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("save_precoder: cannot open " + path.string());
    out << j.dump(2) << '\n';
}

Precoder load_precoder(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("load_precoder: cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("load_precoder: " + path.string() + ": " + e.what());
    }
    for (const char* field : {"s", "r", "b_p", "theta"})
        if (!j.contains(field))
            throw ParseError("load_precoder: missing required field '" + std::string(field) + "'");

    const int s = j["s"].get<int>();
    const int r = j["r"].get<int>();
    const auto b_p = j["b_p"].get<std::vector<int>>();
    const auto& theta_json = j["theta"];
    if (s < 1 || r < 1 || r > s || static_cast<int>(b_p.size()) != r)
        throw ParseError("load_precoder: inconsistent s/r/b_p");
    if (theta_json.size() != static_cast<std::size_t>(s) * s)
        throw ParseError("load_precoder: theta must hold s*s [re, im] pairs");

    CMatrix theta(s, s);
    std::size_t flat = 0;
    for (int i = 0; i < s; ++i)
        for (int k = 0; k < s; ++k, ++flat) {
            const auto& entry = theta_json[flat];
            if (!entry.is_array() || entry.size() != 2)
                throw ParseError("load_precoder: theta entries must be [re, im] pairs");
            theta(i, k) = cxd(entry[0].get<double>(), entry[1].get<double>());
        }

    // Reassemble through build_partial so b_n and theta_tilde are rederived
    // from the stored rows.
    CMatrix theta_tilde(r, r);
    for (int i = 0; i < r; ++i)
        theta_tilde.row(i) = theta.row(b_p[i] - 1).head(r);
    Precoder p = build_partial(theta_tilde, b_p, s);
    p.theta = std::move(theta);
    return p;
}

} // namespace beamsim
