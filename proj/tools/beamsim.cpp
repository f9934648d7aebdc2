// Command-line front end: BER sweeps, the diversity-order table, precoder
// design, and slope/gain readouts of saved curves.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "beamsim/diversity.hpp"
#include "beamsim/precoder.hpp"
#include "beamsim/simulator.hpp"

namespace {

void write_or_print(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
    out << text;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo link simulator for SVD beamforming with constellation precoding"};
    app.require_subcommand(1);

    // ---- run ----
    auto* run = app.add_subcommand("run", "Run a BER sweep described by a json config");
    std::string run_config;
    int run_workers = 0;
    std::uint64_t run_seed = 0;
    std::string run_out;
    run->add_option("--config", run_config, "json run description")
        ->required()
        ->check(CLI::ExistingFile);
    auto* run_workers_opt = run->add_option("--workers", run_workers, "override worker count");
    auto* run_seed_opt = run->add_option("--seed", run_seed, "override rng seed");
    auto* run_out_opt = run->add_option("--out", run_out, "override results csv path");
    run->callback([&] {
        auto cfg = beamsim::load_config(run_config);
        if (run_workers_opt->count()) cfg.workers = run_workers;
        if (run_seed_opt->count()) cfg.seed = run_seed;
        if (run_out_opt->count()) cfg.output_path = run_out;
        const auto curve = beamsim::run_ber_sweep(cfg, [](const beamsim::BerPoint& p) {
            std::fprintf(stderr, "snr %g dB: ber %.4g (%ld errors / %ld bits, %ld trials)\n",
                         p.snr_db, p.ber, p.bit_errors, p.bits, p.trials);
        });
        std::printf("%10s %12s %14s %12s %10s\n", "snr_db", "bit_errors", "bits", "ber",
                    "trials");
        for (const auto& p : curve.points)
            std::printf("%10g %12ld %14ld %12.6g %10ld\n", p.snr_db, p.bit_errors, p.bits,
                        p.ber, p.trials);
        if (!cfg.output_path.empty())
            std::fprintf(stderr, "wrote %s (+ companion json)\n", cfg.output_path.c_str());
    });

    // ---- table1 ----
    auto* table = app.add_subcommand("table1", "Diversity orders of all 4x4 S=4 partial assignments");
    bool table_csv = false;
    std::string table_out;
    table->add_flag("--csv", table_csv, "emit csv instead of aligned text");
    table->add_option("--out", table_out, "write to a file instead of stdout");
    table->callback([&] {
        const auto rows = beamsim::table_one();
        write_or_print(table_csv ? beamsim::render_table_csv(rows)
                                 : beamsim::render_table_text(rows),
                       table_out);
    });

    // ---- design ----
    auto* design = app.add_subcommand("design", "Design a fully precoded constellation precoder");
    std::string design_criterion;
    int design_streams = 0;
    int design_qam = 0;
    std::string design_out;
    beamsim::Phi1Budget budget;
    design->add_option("--criterion", design_criterion, "phi1 | phi2 | phi3")
        ->required()
        ->check(CLI::IsMember({"phi1", "phi2", "phi3"}));
    design->add_option("--streams", design_streams, "subchannel count S")->required();
    design->add_option("--qam", design_qam, "bits per symbol (even)")->required();
    design->add_option("--out", design_out, "precoder json path")->required();
    design->add_option("--starts", budget.starts, "phi1 random restarts");
    design->add_option("--seed", budget.seed, "phi1 search seed");
    design->add_option("--workers", budget.workers, "phi1 search threads");
    design->callback([&] {
        const auto c = beamsim::Constellation::qam(design_qam);
        beamsim::Precoder p;
        if (design_criterion == "phi1")
            p = beamsim::design_phi1(design_streams, c, budget);
        else if (design_criterion == "phi2")
            p = beamsim::design_phi2(design_streams, c);
        else
            p = beamsim::design_phi3(design_streams, c);
        beamsim::save_precoder(p, design_out);
        const double cert = beamsim::min_coordinate_distance2(
            p.theta_tilde, beamsim::difference_vectors(c, design_streams));
        std::fprintf(stderr, "wrote %s (s=%d, %s, min coordinate distance^2 = %.6g)\n",
                     design_out.c_str(), design_streams, design_criterion.c_str(), cert);
    });

    // ---- slope ----
    auto* slope = app.add_subcommand("slope", "Diversity-slope estimate of a saved BER curve");
    std::string slope_input;
    std::string slope_window;
    slope->add_option("--input", slope_input, "results csv or json")
        ->required()
        ->check(CLI::ExistingFile);
    slope->add_option("--window", slope_window,
                      "snr window lo,hi in dB (default: top 3 points with ber in [1e-6, 1e-2])");
    slope->callback([&] {
        const auto curve = beamsim::load_curve(slope_input);
        double value;
        if (slope_window.empty()) {
            value = beamsim::estimate_slope(curve);
        } else {
            double lo = 0.0, hi = 0.0;
            char tail = '\0';
            if (std::sscanf(slope_window.c_str(), "%lf,%lf%c", &lo, &hi, &tail) != 2)
                throw CLI::ValidationError("--window", "expected lo,hi (two numbers)");
            value = beamsim::estimate_slope(curve, lo, hi);
        }
        std::printf("%.6g\n", value);
    });

    // ---- compare ----
    auto* compare = app.add_subcommand("compare", "SNR gap of curve a over curve b at a target BER");
    std::string cmp_a, cmp_b;
    double cmp_ber = 1e-3;
    compare->add_option("--a", cmp_a, "first curve (csv or json)")
        ->required()
        ->check(CLI::ExistingFile);
    compare->add_option("--b", cmp_b, "second curve (csv or json)")
        ->required()
        ->check(CLI::ExistingFile);
    compare->add_option("--ber", cmp_ber, "target bit error rate");
    compare->callback([&] {
        const double gap = beamsim::compare_at_ber(beamsim::load_curve(cmp_a),
                                                   beamsim::load_curve(cmp_b), cmp_ber);
        std::printf("%.6g\n", gap);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
