#include "beamsim/simulator.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "beamsim/channel.hpp"
#include "beamsim/precoder.hpp"

namespace beamsim {

using nlohmann::json;
using nlohmann::ordered_json;

void SimulationConfig::validate() const {
    scheme.validate();
    if (snr_grid_db.empty()) throw std::invalid_argument("snr grid must be non-empty");
    for (std::size_t i = 1; i < snr_grid_db.size(); ++i)
        if (!(snr_grid_db[i] > snr_grid_db[i - 1]))
            throw std::invalid_argument("snr grid must be strictly increasing");
    if (stopping.min_bit_errors < 1)
        throw std::invalid_argument("min_bit_errors must be positive");
    if (stopping.max_trials < 1) throw std::invalid_argument("max_trials must be positive");
    if (workers < 1) throw std::invalid_argument("worker count must be positive");
}

std::string library_version() {
#ifdef BEAMSIM_VERSION
    return BEAMSIM_VERSION;
#else
    return "unknown";
#endif
}

ConfigEcho make_echo(const SimulationConfig& cfg) {
    ConfigEcho e;
    e.scheme = to_string(cfg.scheme.scheme);
    e.m_rx = cfg.scheme.m_rx;
    e.n_tx = cfg.scheme.n_tx;
    e.s = cfg.scheme.s;
    e.r = cfg.scheme.r;
    e.qam_m = cfg.scheme.constellation.bits_per_symbol();
    if (cfg.scheme.scheme == Scheme::FPMB || cfg.scheme.scheme == Scheme::PPMB)
        e.b_p = cfg.scheme.precoder.b_p;
    e.seed = cfg.seed;
    e.min_bit_errors = cfg.stopping.min_bit_errors;
    e.max_trials = cfg.stopping.max_trials;
    e.criterion = cfg.criterion;
    e.precoder_path = cfg.precoder_path;
    return e;
}

namespace {

struct Totals {
    long errors = 0;
    long bits = 0;
};

// Trials are independent: each owns a counter-based stream keyed by
// (seed, point_index << 40 | trial_index). Draw order inside a trial is
// part of the reproducibility contract: channel entries, then data bits,
// then noise samples.
Totals run_range(const SchemeConfig& sc, const MlDecoder& decoder, std::uint64_t seed,
                 std::uint64_t point_index, long t_begin, long t_end, double snr_linear) {
    Totals tot;
    const int nbits = sc.bits_per_use();
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(nbits));
    for (long t = t_begin; t < t_end; ++t) {
        RngStream rng(seed, (point_index << 40) | static_cast<std::uint64_t>(t));
        const auto ch = svd_ordered(sample_channel(sc.m_rx, sc.n_tx, rng));
        for (int i = 0; i < nbits; ++i) bits[static_cast<std::size_t>(i)] =
            static_cast<std::uint8_t>(rng.bit());
        const auto res = run_trial(sc, decoder, bits, ch, rng, snr_linear);
        tot.errors += res.bit_errors;
        tot.bits += res.bits;
    }
    return tot;
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

BerCurve run_ber_sweep(const SimulationConfig& cfg,
                       const std::function<void(const BerPoint&)>& on_point) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const MlDecoder decoder(cfg.scheme);
    BerCurve curve;
    curve.echo = make_echo(cfg);
    curve.version = library_version();

    constexpr long kBatch = 8192;  // stopping rule is checked between batches
    for (std::size_t p = 0; p < cfg.snr_grid_db.size(); ++p) {
        const double snr_linear = std::pow(10.0, cfg.snr_grid_db[p] / 10.0);
        BerPoint pt;
        pt.snr_db = cfg.snr_grid_db[p];
        while (pt.bit_errors < cfg.stopping.min_bit_errors &&
               pt.trials < cfg.stopping.max_trials) {
            const long batch = std::min(kBatch, cfg.stopping.max_trials - pt.trials);
            if (cfg.workers <= 1 || batch == 1) {
                const auto tot = run_range(cfg.scheme, decoder, cfg.seed, p, pt.trials,
                                           pt.trials + batch, snr_linear);
                pt.bit_errors += tot.errors;
                pt.bits += tot.bits;
            } else {
                const int w = static_cast<int>(std::min<long>(cfg.workers, batch));
                std::vector<Totals> parts(static_cast<std::size_t>(w));
                std::vector<std::thread> threads;
                threads.reserve(static_cast<std::size_t>(w));
                for (int i = 0; i < w; ++i) {
                    const long lo = pt.trials + batch * i / w;
                    const long hi = pt.trials + batch * (i + 1) / w;
                    threads.emplace_back([&, i, lo, hi] {
                        parts[static_cast<std::size_t>(i)] = run_range(
                            cfg.scheme, decoder, cfg.seed, p, lo, hi, snr_linear);
                    });
                }
                for (auto& th : threads) th.join();
                for (const auto& part : parts) {
                    pt.bit_errors += part.errors;
                    pt.bits += part.bits;
                }
            }
            pt.trials += batch;
        }
        pt.ber = pt.bits > 0 ? static_cast<double>(pt.bit_errors) / static_cast<double>(pt.bits)
                             : 0.0;
        curve.points.push_back(pt);
        curve.wall_time_s = elapsed_s(t0);
        if (!cfg.output_path.empty()) export_results(curve, cfg.output_path);
        if (on_point) on_point(pt);
    }
    curve.wall_time_s = elapsed_s(t0);
    if (!cfg.output_path.empty()) export_results(curve, cfg.output_path);
    return curve;
}

namespace {

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw InsufficientDataError("slope window has no snr spread");
    return (n * sxy - sx * sy) / denom;
}

double slope_of_points(const std::vector<const BerPoint*>& sel) {
    if (sel.size() < 2)
        throw InsufficientDataError("need at least two points with ber > 0 in the slope window");
    std::vector<double> xs, ys;
    xs.reserve(sel.size());
    ys.reserve(sel.size());
    for (const auto* p : sel) {
        xs.push_back(p->snr_db / 10.0);  // decades of linear snr
        ys.push_back(std::log10(p->ber));
    }
    return -fit_slope(xs, ys);
}

} // namespace

double estimate_slope(const BerCurve& curve, double lo_db, double hi_db) {
    if (!(lo_db < hi_db)) throw std::invalid_argument("slope window must satisfy lo < hi");
    std::vector<const BerPoint*> sel;
    for (const auto& p : curve.points)
        if (p.snr_db >= lo_db - 1e-12 && p.snr_db <= hi_db + 1e-12 && p.ber > 0.0)
            sel.push_back(&p);
    return slope_of_points(sel);
}

double estimate_slope(const BerCurve& curve) {
    std::vector<const BerPoint*> sel;
    for (const auto& p : curve.points)
        if (p.ber >= 1e-6 && p.ber <= 1e-2) sel.push_back(&p);
    if (sel.size() > 3) sel.erase(sel.begin(), sel.end() - 3);
    return slope_of_points(sel);
}

namespace {

double snr_at_ber(const BerCurve& c, double target) {
    if (!(target > 0.0)) throw std::invalid_argument("target ber must be positive");
    const double ty = std::log10(target);
    for (std::size_t i = 0; i + 1 < c.points.size(); ++i) {
        const BerPoint& a = c.points[i];
        const BerPoint& b = c.points[i + 1];
        if (a.ber == target) return a.snr_db;
        if (a.ber <= 0.0 || b.ber <= 0.0) continue;
        if ((a.ber - target) * (b.ber - target) < 0.0) {
            const double y0 = std::log10(a.ber);
            const double y1 = std::log10(b.ber);
            if (y0 == y1) return a.snr_db;
            return a.snr_db + (b.snr_db - a.snr_db) * (ty - y0) / (y1 - y0);
        }
    }
    if (!c.points.empty() && c.points.back().ber == target) return c.points.back().snr_db;
    throw InsufficientDataError("no adjacent grid points bracket the target ber");
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string companion_json_path(const std::string& csv_path) {
    const auto slash = csv_path.find_last_of('/');
    const auto dot = csv_path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return csv_path + ".json";
    return csv_path.substr(0, dot) + ".json";
}

ordered_json echo_to_json(const ConfigEcho& e) {
    ordered_json j;
    j["scheme"] = e.scheme;
    j["m_rx"] = e.m_rx;
    j["n_tx"] = e.n_tx;
    j["s"] = e.s;
    j["r"] = e.r;
    j["qam_m"] = e.qam_m;
    if (!e.b_p.empty()) j["b_p"] = e.b_p;
    j["seed"] = e.seed;
    j["min_bit_errors"] = e.min_bit_errors;
    j["max_trials"] = e.max_trials;
    if (!e.criterion.empty()) j["criterion"] = e.criterion;
    if (!e.precoder_path.empty()) j["precoder_path"] = e.precoder_path;
    return j;
}

void echo_from_json(const json& j, ConfigEcho& e) {
    if (j.contains("scheme")) e.scheme = j.at("scheme").get<std::string>();
    if (j.contains("m_rx")) e.m_rx = j.at("m_rx").get<int>();
    if (j.contains("n_tx")) e.n_tx = j.at("n_tx").get<int>();
    if (j.contains("s")) e.s = j.at("s").get<int>();
    if (j.contains("r")) e.r = j.at("r").get<int>();
    if (j.contains("qam_m")) e.qam_m = j.at("qam_m").get<int>();
    if (j.contains("b_p")) e.b_p = j.at("b_p").get<std::vector<int>>();
    if (j.contains("seed")) e.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("min_bit_errors")) e.min_bit_errors = j.at("min_bit_errors").get<long>();
    if (j.contains("max_trials")) e.max_trials = j.at("max_trials").get<long>();
    if (j.contains("criterion")) e.criterion = j.at("criterion").get<std::string>();
    if (j.contains("precoder_path")) e.precoder_path = j.at("precoder_path").get<std::string>();
}

} // namespace

double compare_at_ber(const BerCurve& a, const BerCurve& b, double target_ber) {
    return snr_at_ber(a, target_ber) - snr_at_ber(b, target_ber);
}

void export_results(const BerCurve& curve, const std::string& csv_path) {
    {
        std::ofstream out(csv_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write results file '" + csv_path + "'");
        out << "snr_db,bit_errors,bits,ber,trials\n";
        for (const auto& p : curve.points)
            out << format_double(p.snr_db) << ',' << p.bit_errors << ',' << p.bits << ','
                << format_double(p.ber) << ',' << p.trials << '\n';
    }
    ordered_json j;
    j["config"] = echo_to_json(curve.echo);
    j["version"] = curve.version;
    j["wall_time_s"] = curve.wall_time_s;
    auto& results = j["results"] = ordered_json::array();
    for (const auto& p : curve.points) {
        ordered_json row;
        row["snr_db"] = p.snr_db;
        row["bit_errors"] = p.bit_errors;
        row["bits"] = p.bits;
        row["ber"] = p.ber;
        row["trials"] = p.trials;
        results.push_back(std::move(row));
    }
    const std::string json_path = companion_json_path(csv_path);
    std::ofstream out(json_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write results file '" + json_path + "'");
    out << j.dump(2) << '\n';
}

namespace {

BerCurve load_curve_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open results file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty results file '" + path + "'");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "snr_db,bit_errors,bits,ber,trials")
        throw ParseError("unexpected csv header in '" + path + "'");
    BerCurve curve;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != 5)
            throw ParseError("line " + std::to_string(lineno) + " of '" + path +
                             "': expected 5 fields");
        try {
            BerPoint p;
            p.snr_db = std::stod(fields[0]);
            p.bit_errors = std::stol(fields[1]);
            p.bits = std::stol(fields[2]);
            p.ber = std::stod(fields[3]);
            p.trials = std::stol(fields[4]);
            curve.points.push_back(p);
        } catch (const std::exception&) {
            throw ParseError("line " + std::to_string(lineno) + " of '" + path +
                             "': malformed number");
        }
    }
    return curve;
}

BerCurve load_curve_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open results file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("results parse error in '" + path + "': " + e.what());
    }
    BerCurve curve;
    try {
        if (j.contains("config")) echo_from_json(j.at("config"), curve.echo);
        if (j.contains("version")) curve.version = j.at("version").get<std::string>();
        if (j.contains("wall_time_s")) curve.wall_time_s = j.at("wall_time_s").get<double>();
        if (!j.contains("results")) throw ParseError("missing required field 'results'");
        for (const auto& row : j.at("results")) {
            BerPoint p;
            p.snr_db = row.at("snr_db").get<double>();
            p.bit_errors = row.at("bit_errors").get<long>();
            p.bits = row.at("bits").get<long>();
            p.ber = row.at("ber").get<double>();
            p.trials = row.at("trials").get<long>();
            curve.points.push_back(p);
        }
    } catch (const json::exception& e) {
        throw ParseError("results field error in '" + path + "': " + e.what());
    }
    return curve;
}

} // namespace

BerCurve load_curve(const std::string& path) {
    const auto dot = path.find_last_of('.');
    const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
    if (ext == ".csv") return load_curve_csv(path);
    if (ext == ".json") return load_curve_json(path);
    throw ParseError("unsupported results extension '" + ext + "' (want .csv or .json)");
}

SimulationConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("config parse error in '" + path + "': " + e.what());
    }
    if (!j.is_object()) throw ParseError("config root must be a json object");

    auto require = [&](const char* name) -> const json& {
        const auto it = j.find(name);
        if (it == j.end())
            throw ParseError(std::string("missing required field '") + name + "'");
        return *it;
    };

    SimulationConfig cfg;
    try {
        const std::string scheme_name = require("scheme").get<std::string>();
        const int m_rx = require("m_rx").get<int>();
        const int n_tx = require("n_tx").get<int>();
        const int s = require("s").get<int>();
        const int r = require("r").get<int>();
        const int qam_m = require("qam_m").get<int>();
        cfg.snr_grid_db = require("snr_db").get<std::vector<double>>();
        cfg.seed = require("seed").get<std::uint64_t>();
        cfg.stopping.min_bit_errors = require("min_bit_errors").get<long>();
        cfg.stopping.max_trials = require("max_trials").get<long>();
        if (j.contains("workers")) cfg.workers = j.at("workers").get<int>();
        if (j.contains("output_path")) cfg.output_path = j.at("output_path").get<std::string>();

        std::string criterion = "phi1";
        if (j.contains("criterion")) criterion = j.at("criterion").get<std::string>();
        if (criterion != "phi1" && criterion != "phi2" && criterion != "phi3")
            throw ParseError("criterion must be one of phi1, phi2, phi3");

        Scheme sch;
        try {
            sch = scheme_from_string(scheme_name);
        } catch (const std::invalid_argument& e) {
            throw ParseError(e.what());
        }
        const Constellation c = Constellation::qam(qam_m);

        switch (sch) {
            case Scheme::SB:
                if (s != 1 || r != 1) throw ParseError("sb requires s = 1 and r = 1");
                cfg.scheme = make_sb_config(m_rx, n_tx, qam_m);
                break;
            case Scheme::PSB: {
                if (s != 1) throw ParseError("psb requires s = 1");
                if (r < 1) throw ParseError("psb requires r >= 1");
                const auto rs = optimize_rotation_angle(r, c);
                cfg.scheme = make_psb_config(m_rx, n_tx, r, qam_m, rs.phi);
                break;
            }
            case Scheme::FPMB:
            case Scheme::PPMB: {
                Precoder p;
                if (j.contains("precoder_path")) {
                    cfg.precoder_path = j.at("precoder_path").get<std::string>();
                    p = load_precoder(cfg.precoder_path);
                    if (p.s != s || p.r != r)
                        throw ParseError("precoder file dimensions do not match the config");
                    if (j.contains("b_p") &&
                        j.at("b_p").get<std::vector<int>>() != p.b_p)
                        throw ParseError("b_p in config conflicts with the precoder file");
                } else {
                    std::vector<int> b_p;
                    if (sch == Scheme::FPMB) {
                        if (r != s) throw ParseError("fpmb requires r = s");
                        for (int b = 1; b <= s; ++b) b_p.push_back(b);
                    } else {
                        b_p = require("b_p").get<std::vector<int>>();
                        if (static_cast<int>(b_p.size()) != r)
                            throw ParseError("b_p length must equal r");
                    }
                    CMatrix tt;
                    if (criterion == "phi1")
                        tt = design_phi1(r, c).theta_tilde;
                    else if (criterion == "phi2")
                        tt = design_phi2(r, c).theta_tilde;
                    else
                        tt = design_phi3(r, c).theta_tilde;
                    cfg.criterion = criterion;
                    p = build_partial(tt, b_p, s);
                }
                cfg.scheme = make_pmb_config(m_rx, n_tx, qam_m, std::move(p));
                break;
            }
        }
        if (cfg.scheme.s != s || (sch != Scheme::PSB && cfg.scheme.r != r))
            throw ParseError("scheme dimensions do not match s/r fields");
    } catch (const json::exception& e) {
        throw ParseError("config field error in '" + path + "': " + e.what());
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("invalid config value: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

} // namespace beamsim
