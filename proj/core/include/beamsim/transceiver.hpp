#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "beamsim/channel.hpp"
#include "beamsim/constellation.hpp"
#include "beamsim/precoder.hpp"
#include "beamsim/rng.hpp"
#include "beamsim/types.hpp"

namespace beamsim {

// SB: plain single beamforming, one stream on the best subchannel.
// PSB: single beamforming with R symbols rotated onto the best subchannel.
// FPMB: multiple beamforming with all S streams precoded.
// PPMB: multiple beamforming with R < S streams precoded.
enum class Scheme { SB, PSB, FPMB, PPMB };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& name);

// Everything needed to run one configuration end to end. For SB/PSB the
// channel is collapsed to the largest singular value and `psb_theta` holds
// the (power-normalized) rotation row; for FPMB/PPMB `precoder` carries the
// S x S constellation precoder.
struct SchemeConfig {
    Scheme scheme = Scheme::SB;
    int m_rx = 0;
    int n_tx = 0;
    int s = 0;
    int r = 0;
    Constellation constellation = Constellation::qam(2);
    Precoder precoder;    // FPMB / PPMB
    CVector psb_theta;    // SB / PSB; already scaled by 1/sqrt(r)

    void validate() const;
    int bits_per_use() const;      // bits decoded per channel use
    int symbols_per_use() const;   // symbols jointly detected per channel use
};

SchemeConfig make_sb_config(int m_rx, int n_tx, int qam_m);
SchemeConfig make_psb_config(int m_rx, int n_tx, int r, int qam_m, double phi);
SchemeConfig make_pmb_config(int m_rx, int n_tx, int qam_m, Precoder p);

// Average transmit-power constraint: noise variance per complex receive
// sample for a given per-antenna setup, n_tx / snr_linear.
double noise_variance(int n_tx, double snr_linear);

// Post-beamforming channel: r = diag(lambdas) * Theta * x + noise, or the
// scalar lambda1 * theta^T x + noise for single beamforming.
CVector transmit(const SchemeConfig& cfg, const SymbolVector& x, const RVector& lambdas,
                 const CVector& noise);

// Exhaustive ML detector. Candidate labels pack symbol 0 into the low bits;
// ties resolve to the lowest candidate index.
class MlDecoder {
public:
    explicit MlDecoder(const SchemeConfig& cfg);

    // Bits for the candidate closest to `received` given the channel gains.
    std::vector<std::uint8_t> decode(const CVector& received, const RVector& lambdas) const;

    int candidate_count() const { return static_cast<int>(precoded_.cols()); }

private:
    int symbols_;
    int bits_;
    int bits_per_symbol_;
    CMatrix precoded_;   // (rows = subchannels or 1) x candidates, Theta applied
};

std::vector<std::uint8_t> ml_decode(const SchemeConfig& cfg, const CVector& received,
                                    const RVector& lambdas);

struct TrialResult {
    long bit_errors = 0;
    long bits = 0;
};

// One Monte Carlo trial: map bits, send through the beamformed channel at
// the given linear SNR, ML-decode, count bit errors. Consumes noise draws
// from `rng` (one complex Gaussian per receive coordinate).
TrialResult run_trial(const SchemeConfig& cfg, const MlDecoder& decoder,
                      const std::vector<std::uint8_t>& bits, const ChannelRealization& ch,
                      RngStream& rng, double snr_linear);

TrialResult run_trial(const SchemeConfig& cfg, const std::vector<std::uint8_t>& bits,
                      const ChannelRealization& ch, RngStream& rng, double snr_linear);

} // namespace beamsim
