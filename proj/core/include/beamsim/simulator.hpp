#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "beamsim/errors.hpp"
#include "beamsim/transceiver.hpp"

namespace beamsim {

struct StoppingRule {
    long min_bit_errors = 200;
    long max_trials = 10'000'000;
};

struct SimulationConfig {
    SchemeConfig scheme;
    std::vector<double> snr_grid_db;   // strictly increasing
    std::uint64_t seed = 1;
    StoppingRule stopping;
    std::string output_path;           // empty = no file output
    int workers = 1;
    // Provenance echoed into result files; never read by the sweep itself.
    std::string criterion;
    std::string precoder_path;

    void validate() const;
};

// Input parameters echoed into every result file so a curve is
// self-describing.
struct ConfigEcho {
    std::string scheme;
    int m_rx = 0;
    int n_tx = 0;
    int s = 0;
    int r = 0;
    int qam_m = 0;
    std::vector<int> b_p;
    std::uint64_t seed = 0;
    long min_bit_errors = 0;
    long max_trials = 0;
    std::string criterion;       // empty unless a precoder was designed on load
    std::string precoder_path;   // empty unless a precoder file was read
};

struct BerPoint {
    double snr_db = 0.0;
    long bit_errors = 0;
    long bits = 0;
    double ber = 0.0;
    long trials = 0;
};

struct BerCurve {
    std::vector<BerPoint> points;
    ConfigEcho echo;
    double wall_time_s = 0.0;
    std::string version;
};

// Monte Carlo BER sweep over the SNR grid. Each trial draws an independent
// channel from its own counter-based stream, so results are identical for
// any worker count. Flushes partial results to cfg.output_path after each
// grid point when the path is set; `on_point` (if given) observes each
// finished point.
BerCurve run_ber_sweep(const SimulationConfig& cfg,
                       const std::function<void(const BerPoint&)>& on_point = {});

// Least-squares slope of log10(ber) against snr_db/10 over grid points with
// snr in [lo_db, hi_db] and ber > 0, negated so a diversity-d curve gives
// about +d. Throws InsufficientDataError with fewer than two usable points.
double estimate_slope(const BerCurve& curve, double lo_db, double hi_db);

// Default window: the three highest-SNR points with ber in [1e-6, 1e-2].
double estimate_slope(const BerCurve& curve);

// Horizontal distance in dB between two curves at a target BER:
// snr_a(target) - snr_b(target), each from log-linear interpolation between
// the first adjacent bracket. Positive means `a` needs more SNR.
double compare_at_ber(const BerCurve& a, const BerCurve& b, double target_ber);

// CSV (header snr_db,bit_errors,bits,ber,trials) plus a companion .json by
// the same stem carrying the config echo and timing. Writing the same curve
// twice produces byte-identical files.
void export_results(const BerCurve& curve, const std::string& csv_path);

BerCurve load_curve(const std::string& path);          // by extension (.csv/.json)
SimulationConfig load_config(const std::string& path); // JSON run description

// Echo derived from a validated configuration (b_p filled for precoded
// schemes).
ConfigEcho make_echo(const SimulationConfig& cfg);

std::string library_version();

} // namespace beamsim
