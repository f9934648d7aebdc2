#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "beamsim/errors.hpp"
#include "beamsim/precoder.hpp"
#include "beamsim/rng.hpp"

using namespace beamsim;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

double unitary_error(const CMatrix& m) {
    const Eigen::Index n = m.rows();
    return (m.adjoint() * m - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
}

GivensParams random_params(int s, RngStream& rng) {
    GivensParams p = GivensParams::zero(s);
    for (auto& [psi, rho] : p.angles) {
        psi = (2.0 * rng.uniform() - 1.0) * kPi;
        rho = (2.0 * rng.uniform() - 1.0) * kPi / 2.0;
    }
    return p;
}

fs::path temp_file(const char* name) {
    return fs::temp_directory_path() / name;
}

std::string file_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("rotation vector follows the doubling exponent pattern") {
    const CVector v0 = rotation_vector(0.0, 4);
    for (int i = 0; i < 4; ++i) CHECK(v0(i) == cxd(1.0, 0.0));

    const double phi = 0.37;
    const CVector v3 = rotation_vector(phi, 3);
    CHECK(std::abs(v3(0) - cxd(1.0, 0.0)) <= 1e-15);
    CHECK(std::abs(v3(1) - std::polar(1.0, phi)) <= 1e-15);
    CHECK(std::abs(v3(2) - std::polar(1.0, 2.0 * phi)) <= 1e-15);

    const CVector v5 = rotation_vector(phi, 5);
    const double exponents[] = {0.0, 1.0, 2.0, 4.0, 8.0};
    for (int i = 0; i < 5; ++i)
        CHECK(std::abs(v5(i) - std::polar(1.0, exponents[i] * phi)) <= 1e-15);

    CHECK_THROWS_AS(rotation_vector(0.1, 0), std::invalid_argument);
}

TEST_CASE("difference machinery sizes") {
    const auto q2 = Constellation::qam(2);
    const auto q4 = Constellation::qam(4);
    CHECK(coordinate_difference_set(q2).size() == 9);
    CHECK(coordinate_difference_set(q4).size() == 49);
    CHECK(coordinate_difference_set(q2)[0] == cxd(0.0, 0.0));

    const CMatrix d = difference_vectors(q2, 2);
    CHECK(d.cols() == 80);  // 9^2 - 1 nonzero vectors
    for (Eigen::Index k = 0; k < d.cols(); ++k)
        CHECK(d.col(k).cwiseAbs().maxCoeff() > 0.0);

    CHECK_THROWS_AS(difference_vectors(q4, 5), std::invalid_argument);  // 20 bits
}

TEST_CASE("objective evaluators agree with a direct loop") {
    const auto c = Constellation::qam(2);
    const CMatrix deltas = difference_vectors(c, 2);
    const CMatrix theta = ifft_matrix(2);

    double ref_min = 1e300, ref_first = 1e300, ref_geo = 1e300;
    for (Eigen::Index k = 0; k < deltas.cols(); ++k) {
        const CVector y = theta * deltas.col(k);
        double prod = 1.0;
        for (int i = 0; i < 2; ++i) {
            ref_min = std::min(ref_min, std::norm(y(i)));
            prod *= std::norm(y(i));
        }
        ref_first = std::min(ref_first, std::norm(y(0)));
        ref_geo = std::min(ref_geo, std::sqrt(prod));
    }
    CHECK(min_coordinate_distance2(theta, deltas) == doctest::Approx(ref_min).epsilon(1e-12));
    CHECK(min_first_coordinate_distance2(theta, deltas) ==
          doctest::Approx(ref_first).epsilon(1e-12));
    CHECK(min_geometric_mean_distance2(theta, deltas) == doctest::Approx(ref_geo).epsilon(1e-12));

    // identity leaves single-coordinate differences with a zero coordinate
    CHECK(min_coordinate_distance2(CMatrix::Identity(2, 2), deltas) == 0.0);
}

TEST_CASE("rotation search reproduces the known two-stream value") {
    const auto rs = optimize_rotation_angle(2, Constellation::qam(2));
    CHECK(rs.dmin2 == doctest::Approx(0.27).epsilon(0.08));  // 0.27 +- 0.02
    CHECK(rs.dmin2 > 0.25);
    CHECK(rs.dmin2 < 0.29);
    CHECK(rs.phi > 0.0);
    CHECK(rs.phi <= kPi / 2.0);
}

TEST_CASE("rotation search beats a tenfold finer brute-force grid") {
    const auto c = Constellation::qam(2);
    const auto rs = optimize_rotation_angle(2, c, 10000);

    const CMatrix deltas = difference_vectors(c, 2);
    double brute = 0.0;
    const int fine = 100000;
    for (int i = 1; i <= fine; ++i) {
        const double phi = (kPi / 2.0) * i / fine;
        const double v =
            (rotation_vector(phi, 2).transpose() * deltas).cwiseAbs2().minCoeff() / 2.0;
        brute = std::max(brute, v);
    }
    CHECK(rs.dmin2 >= brute - 1e-4);
}

TEST_CASE("single-stream rotation is trivial") {
    const auto rs = optimize_rotation_angle(1, Constellation::qam(4));
    CHECK(rs.dmin2 == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("givens product: identity, textbook rotation, unitarity, closure") {
    CHECK(unitary_error(givens_unitary(GivensParams::zero(3))) == 0.0);
    CHECK((givens_unitary(GivensParams::zero(3)) - CMatrix::Identity(3, 3))
              .cwiseAbs()
              .maxCoeff() == 0.0);

    GivensParams p2 = GivensParams::zero(2);
    p2.angles[0] = {kPi / 4.0, 0.0};
    const CMatrix g = givens_unitary(p2);
    const double h = std::sqrt(2.0) / 2.0;
    CHECK(std::abs(g(0, 0) - cxd(h, 0)) <= 1e-12);
    CHECK(std::abs(g(0, 1) - cxd(h, 0)) <= 1e-12);
    CHECK(std::abs(g(1, 0) - cxd(-h, 0)) <= 1e-12);
    CHECK(std::abs(g(1, 1) - cxd(h, 0)) <= 1e-12);

    RngStream rng(3, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const CMatrix a = givens_unitary(random_params(4, rng));
        const CMatrix b = givens_unitary(random_params(4, rng));
        CHECK(unitary_error(a) <= 1e-10);
        CHECK(unitary_error(a * b) <= 1e-9);
    }

    GivensParams bad = GivensParams::zero(3);
    bad.angles.pop_back();
    CHECK_THROWS_AS(givens_unitary(bad), std::invalid_argument);
}

TEST_CASE("first givens pair touches only the leading block") {
    GivensParams p = GivensParams::zero(3);
    p.angles[0] = {0.3, 0.1};  // pair (1,2) comes first in the ordering
    const CMatrix g = givens_unitary(p);
    CHECK(std::abs(g(2, 2) - cxd(1.0, 0.0)) <= 1e-15);
    CHECK(std::abs(g(0, 2)) <= 1e-15);
    CHECK(std::abs(g(2, 0)) <= 1e-15);
    CHECK(std::abs(g(0, 0) - cxd(std::cos(0.3), 0.0)) <= 1e-15);
}

TEST_CASE("ifft matrix is the unitary transform with an all-equal first column") {
    const CMatrix f2 = ifft_matrix(2);
    const double h = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(f2(0, 0) - cxd(h, 0)) <= 1e-15);
    CHECK(std::abs(f2(0, 1) - cxd(h, 0)) <= 1e-15);
    CHECK(std::abs(f2(1, 0) - cxd(h, 0)) <= 1e-15);
    CHECK(std::abs(f2(1, 1) - cxd(-h, 0)) <= 1e-12);

    CHECK(unitary_error(ifft_matrix(4)) <= 1e-12);

    for (int s = 1; s <= 6; ++s) {
        const CMatrix f = ifft_matrix(s);
        for (int l = 1; l < s; ++l) CHECK(std::abs(f(l, 0) - f(0, 0)) <= 1e-15);
    }

    const CMatrix f5 = ifft_matrix(5);
    CHECK(std::abs(f5(2, 3) - std::polar(1.0 / std::sqrt(5.0), 2.0 * kPi * 6.0 / 5.0)) <= 1e-14);
}

TEST_CASE("min-coordinate designer: known small cases and invariants") {
    const auto c = Constellation::qam(2);

    const auto p1 = design_phi1(1, c);
    CHECK(p1.theta.rows() == 1);
    CHECK(std::abs(p1.theta(0, 0) - cxd(1.0, 0.0)) == 0.0);

    Phi1Budget quick;
    quick.starts = 16;
    const auto p2 = design_phi1(2, c, quick);
    const CMatrix deltas = difference_vectors(c, 2);
    const double obj = min_coordinate_distance2(p2.theta, deltas);
    CHECK(obj > 0.0);
    CHECK(obj > min_coordinate_distance2(CMatrix::Identity(2, 2), deltas));
    CHECK(unitary_error(p2.theta) <= 1e-10);
    CHECK(min_first_coordinate_distance2(p2.theta, deltas) > 0.0);  // full-diversity certificate

    // the objective ignores per-row phase rotations
    CVector phases(2);
    phases << std::polar(1.0, 0.8), std::polar(1.0, -2.1);
    const CMatrix rotated = phases.asDiagonal() * p2.theta;
    CHECK(min_coordinate_distance2(rotated, deltas) == doctest::Approx(obj).epsilon(1e-12));
}

TEST_CASE("min-coordinate designer is stable across search seeds") {
    const auto c = Constellation::qam(2);
    const CMatrix deltas = difference_vectors(c, 2);
    double lo = 1e300, hi = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Phi1Budget b;
        b.starts = 16;
        b.seed = seed;
        const double obj = min_coordinate_distance2(design_phi1(2, c, b).theta, deltas);
        lo = std::min(lo, obj);
        hi = std::max(hi, obj);
    }
    CHECK(lo >= 0.95 * hi);
}

TEST_CASE("rotation-based designer matches its rotation search") {
    const auto c = Constellation::qam(2);
    const auto p = design_phi2(2, c);
    CHECK(unitary_error(p.theta) <= 1e-10);
    for (int k = 0; k < 2; ++k)
        CHECK(std::abs(std::abs(p.theta(0, k)) - 1.0 / std::sqrt(2.0)) <= 1e-12);

    const auto rs = optimize_rotation_angle(2, c);
    const CMatrix deltas = difference_vectors(c, 2);
    // first-coordinate distance equals the normalized rotation value (R = S)
    CHECK(min_first_coordinate_distance2(p.theta, deltas) ==
          doctest::Approx(rs.dmin2).epsilon(1e-9));

    const auto p4 = design_phi2(4, c);
    CHECK(unitary_error(p4.theta) <= 1e-10);
    CHECK(min_first_coordinate_distance2(p4.theta, difference_vectors(c, 4)) ==
          doctest::Approx(optimize_rotation_angle(4, c).dmin2).epsilon(1e-9));
}

TEST_CASE("algebraic-phase designer picks the best candidate") {
    const auto c = Constellation::qam(2);

    const auto p1 = design_phi3(1, c);
    CHECK(std::abs(p1.theta(0, 0) - cxd(1.0, 0.0)) == 0.0);

    const std::vector<int> cands{4, 8, 16, 32};
    const auto p = design_phi3(2, c, cands);
    CHECK(unitary_error(p.theta) <= 1e-10);
    const CMatrix deltas = difference_vectors(c, 2);
    const double obj = min_geometric_mean_distance2(p.theta, deltas);
    CHECK(obj > 0.0);

    // selection is exactly the max over the candidate list
    double best = 0.0;
    const CMatrix f_t = ifft_matrix(2).transpose();
    for (int cp : cands) {
        CVector diag(2);
        diag << 1.0, std::polar(1.0, 2.0 * kPi / cp);
        best = std::max(best, min_geometric_mean_distance2(f_t * diag.asDiagonal(), deltas));
    }
    CHECK(obj == doctest::Approx(best).epsilon(1e-12));
    CHECK(min_first_coordinate_distance2(p.theta, deltas) > 0.0);

    CHECK(default_p_candidates(4) == std::vector<int>{8, 16, 15, 17, 31, 33});

    // P = 1 makes sigma trivial, collapsing a coordinate for the pair
    // delta = (d, d); every candidate scores zero
    CHECK_THROWS_AS(design_phi3(2, c, {1}), InfeasibleDesignError);
}

TEST_CASE("partial assembly routes rows as specified") {
    const CMatrix i2 = CMatrix::Identity(2, 2);
    const auto full = build_partial(i2, {1, 2}, 2);
    CHECK((full.theta - i2).cwiseAbs().maxCoeff() == 0.0);
    CHECK(full.b_n.empty());

    RngStream rng(9, 0);
    const CMatrix tt = givens_unitary(random_params(2, rng));
    const auto p = build_partial(tt, {1, 3}, 4);
    CHECK(p.b_n == std::vector<int>{2, 4});
    // precoded outputs land on subchannels 1 and 3, fed by inputs 1..2
    CHECK(std::abs(p.theta(0, 0) - tt(0, 0)) == 0.0);
    CHECK(std::abs(p.theta(0, 1) - tt(0, 1)) == 0.0);
    CHECK(std::abs(p.theta(2, 0) - tt(1, 0)) == 0.0);
    CHECK(std::abs(p.theta(2, 1) - tt(1, 1)) == 0.0);
    // non-precoded subchannels 2 and 4 take inputs 3 and 4 untouched
    CHECK(std::abs(p.theta(1, 2) - cxd(1.0, 0.0)) == 0.0);
    CHECK(std::abs(p.theta(3, 3) - cxd(1.0, 0.0)) == 0.0);
    CHECK(std::abs(p.theta(1, 0)) == 0.0);
    CHECK(std::abs(p.theta(3, 2)) == 0.0);

    CHECK(unitary_error(p.theta) <= 1e-10);  // unitary because tt is

    const CMatrix stretched = 2.0 * i2;
    CHECK(unitary_error(build_partial(stretched, {1, 3}, 4).theta) > 0.5);

    CHECK_THROWS_AS(build_partial(tt, {3, 1}, 4), std::invalid_argument);
    CHECK_THROWS_AS(build_partial(tt, {1, 5}, 4), std::invalid_argument);
    CHECK_THROWS_AS(build_partial(tt, {1, 1}, 4), std::invalid_argument);
    CHECK_THROWS_AS(build_partial(tt, {1, 2}, 1), std::invalid_argument);
}

TEST_CASE("identity precoder") {
    const auto p = identity_precoder(3);
    CHECK((p.theta - CMatrix::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(p.b_p == std::vector<int>{1, 2, 3});
    CHECK(p.r == 3);
}

TEST_CASE("designers satisfy the power constraint") {
    const auto c = Constellation::qam(2);
    for (const auto& p :
         {design_phi1(2, c, Phi1Budget{.starts = 8}), design_phi2(3, c), design_phi3(3, c)}) {
        // E||Theta x||^2 over the constellation prior equals E||x||^2 = S
        double total = 0.0;
        const int s = p.s;
        long count = 0;
        std::vector<int> digit(s, 0);
        while (true) {
            CVector x(s);
            for (int i = 0; i < s; ++i) x(i) = c.point(digit[i]);
            total += (p.theta * x).squaredNorm();
            ++count;
            int pos = 0;
            while (pos < s && ++digit[pos] == c.size()) digit[pos++] = 0;
            if (pos == s) break;
        }
        CHECK(total / count == doctest::Approx(static_cast<double>(s)).epsilon(1e-10));
    }
}

TEST_CASE("precoder files round trip") {
    const auto c = Constellation::qam(2);
    Phi1Budget quick;
    quick.starts = 8;
    const auto designed = design_phi1(2, c, quick);
    const auto p = build_partial(designed.theta_tilde, {1, 3}, 4);

    const auto path = temp_file("beamsim_test_precoder.json");
    save_precoder(p, path);
    const auto q = load_precoder(path);
    CHECK(q.s == p.s);
    CHECK(q.r == p.r);
    CHECK(q.b_p == p.b_p);
    CHECK(q.b_n == p.b_n);
    CHECK((q.theta - p.theta).cwiseAbs().maxCoeff() <= 1e-12 * p.theta.cwiseAbs().maxCoeff());
    CHECK((q.theta_tilde - p.theta_tilde).cwiseAbs().maxCoeff() <= 1e-12);

    // canonical serialization: save(load(file)) reproduces the bytes
    const auto path2 = temp_file("beamsim_test_precoder2.json");
    save_precoder(q, path2);
    CHECK(file_bytes(path) == file_bytes(path2));

    fs::remove(path);
    fs::remove(path2);
}

TEST_CASE("precoder loading reports malformed files") {
    const auto missing = temp_file("beamsim_test_missing_field.json");
    {
        std::ofstream out(missing);
        out << "{\"s\": 2, \"r\": 2, \"b_p\": [1, 2]}\n";
    }
    bool threw = false;
    try {
        load_precoder(missing);
    } catch (const ParseError& e) {
        threw = true;
        CHECK(std::string(e.what()).find("theta") != std::string::npos);
    }
    CHECK(threw);
    fs::remove(missing);

    const auto garbled = temp_file("beamsim_test_garbled.json");
    {
        std::ofstream out(garbled);
        out << "{not json\n";
    }
    CHECK_THROWS_AS(load_precoder(garbled), ParseError);
    fs::remove(garbled);

    CHECK_THROWS_AS(load_precoder(temp_file("beamsim_test_does_not_exist.json")), ParseError);
}
