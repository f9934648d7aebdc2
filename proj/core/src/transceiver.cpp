#include "beamsim/transceiver.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace beamsim {

std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::SB: return "sb";
        case Scheme::PSB: return "psb";
        case Scheme::FPMB: return "fpmb";
        case Scheme::PPMB: return "ppmb";
    }
    throw std::invalid_argument("unknown scheme");
}

Scheme scheme_from_string(const std::string& name) {
    std::string lower;
    lower.reserve(name.size());
    for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lower == "sb") return Scheme::SB;
    if (lower == "psb") return Scheme::PSB;
    if (lower == "fpmb") return Scheme::FPMB;
    if (lower == "ppmb") return Scheme::PPMB;
    throw std::invalid_argument("unknown scheme '" + name + "'");
}

void SchemeConfig::validate() const {
    if (m_rx < 1 || n_tx < 1) throw std::invalid_argument("antenna counts must be positive");
    if (s < 1 || s > std::min(m_rx, n_tx))
        throw std::invalid_argument("subchannel count must be in [1, min(m_rx, n_tx)]");
    if (r < 1) throw std::invalid_argument("symbol count must be positive");
    switch (scheme) {
        case Scheme::SB:
            if (s != 1 || r != 1) throw std::invalid_argument("sb uses a single stream");
            if (psb_theta.size() != 1) throw std::invalid_argument("sb rotation must be scalar");
            break;
        case Scheme::PSB:
            if (s != 1) throw std::invalid_argument("psb uses a single subchannel");
            if (psb_theta.size() != r)
                throw std::invalid_argument("rotation length must match symbol count");
            break;
        case Scheme::FPMB:
            if (r != s) throw std::invalid_argument("fpmb precodes every subchannel");
            [[fallthrough]];
        case Scheme::PPMB:
            if (scheme == Scheme::PPMB && r >= s)
                throw std::invalid_argument("ppmb precodes a strict subset of subchannels");
            if (precoder.s != s || precoder.r != r)
                throw std::invalid_argument("precoder dimensions must match the configuration");
            if (precoder.theta.rows() != s || precoder.theta.cols() != s)
                throw std::invalid_argument("precoder matrix must be s x s");
            break;
    }
}

int SchemeConfig::symbols_per_use() const {
    return (scheme == Scheme::SB || scheme == Scheme::PSB) ? r : s;
}

int SchemeConfig::bits_per_use() const {
    return symbols_per_use() * constellation.bits_per_symbol();
}

SchemeConfig make_sb_config(int m_rx, int n_tx, int qam_m) {
    SchemeConfig cfg;
    cfg.scheme = Scheme::SB;
    cfg.m_rx = m_rx;
    cfg.n_tx = n_tx;
    cfg.s = 1;
    cfg.r = 1;
    cfg.constellation = Constellation::qam(qam_m);
    cfg.psb_theta = CVector::Ones(1);
    cfg.validate();
    return cfg;
}

SchemeConfig make_psb_config(int m_rx, int n_tx, int r, int qam_m, double phi) {
    SchemeConfig cfg;
    cfg.scheme = r == 1 ? Scheme::SB : Scheme::PSB;
    cfg.m_rx = m_rx;
    cfg.n_tx = n_tx;
    cfg.s = 1;
    cfg.r = r;
    cfg.constellation = Constellation::qam(qam_m);
    cfg.psb_theta = rotation_vector(phi, r) / std::sqrt(static_cast<double>(r));
    cfg.validate();
    return cfg;
}

SchemeConfig make_pmb_config(int m_rx, int n_tx, int qam_m, Precoder p) {
    SchemeConfig cfg;
    cfg.scheme = p.r == p.s ? Scheme::FPMB : Scheme::PPMB;
    cfg.m_rx = m_rx;
    cfg.n_tx = n_tx;
    cfg.s = p.s;
    cfg.r = p.r;
    cfg.constellation = Constellation::qam(qam_m);
    cfg.precoder = std::move(p);
    cfg.validate();
    return cfg;
}

double noise_variance(int n_tx, double snr_linear) {
    if (n_tx < 1) throw std::invalid_argument("antenna count must be positive");
    if (std::isnan(snr_linear) || snr_linear <= 0.0)
        throw std::invalid_argument("snr must be positive");
    return static_cast<double>(n_tx) / snr_linear;  // +inf snr -> noiseless
}

CVector transmit(const SchemeConfig& cfg, const SymbolVector& x, const RVector& lambdas,
                 const CVector& noise) {
    if (x.size() != cfg.symbols_per_use())
        throw std::invalid_argument("symbol vector length must match the configuration");
    if (cfg.scheme == Scheme::SB || cfg.scheme == Scheme::PSB) {
        if (lambdas.size() < 1 || noise.size() != 1)
            throw std::invalid_argument("single beamforming uses one receive coordinate");
        CVector out(1);
        out(0) = lambdas(0) * (cfg.psb_theta.transpose() * x)(0) + noise(0);
        return out;
    }
    if (lambdas.size() != cfg.s || noise.size() != cfg.s)
        throw std::invalid_argument("need one gain and one noise sample per subchannel");
    CVector out = cfg.precoder.theta * x;
    out.array() *= lambdas.array();
    out += noise;
    return out;
}

MlDecoder::MlDecoder(const SchemeConfig& cfg) {
    cfg.validate();
    symbols_ = cfg.symbols_per_use();
    bits_per_symbol_ = cfg.constellation.bits_per_symbol();
    bits_ = cfg.bits_per_use();
    if (bits_ > 16)
        throw std::invalid_argument("joint detection limited to 16 bits per channel use");
    const int count = 1 << bits_;
    const int mask = (1 << bits_per_symbol_) - 1;
    CMatrix candidates(symbols_, count);
    for (int c = 0; c < count; ++c)
        for (int i = 0; i < symbols_; ++i)
            candidates(i, c) = cfg.constellation.point((c >> (bits_per_symbol_ * i)) & mask);
    if (cfg.scheme == Scheme::SB || cfg.scheme == Scheme::PSB) {
        precoded_ = cfg.psb_theta.transpose() * candidates;
    } else {
        precoded_ = cfg.precoder.theta * candidates;
    }
}

std::vector<std::uint8_t> MlDecoder::decode(const CVector& received,
                                            const RVector& lambdas) const {
    const int rows = static_cast<int>(precoded_.rows());
    if (received.size() != rows)
        throw std::invalid_argument("received vector length must match the configuration");
    if (lambdas.size() < rows)
        throw std::invalid_argument("need one gain per receive coordinate");
    const int count = static_cast<int>(precoded_.cols());
    double best = std::numeric_limits<double>::infinity();
    int best_c = 0;
    for (int c = 0; c < count; ++c) {
        double d = 0.0;
        for (int k = 0; k < rows; ++k)
            d += std::norm(received(k) - lambdas(k) * precoded_(k, c));
        if (d < best) {  // strict: ties resolve to the lowest candidate index
            best = d;
            best_c = c;
        }
    }
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(bits_));
    const int mask = (1 << bits_per_symbol_) - 1;
    for (int i = 0; i < symbols_; ++i) {
        const int label = (best_c >> (bits_per_symbol_ * i)) & mask;
        for (int j = 0; j < bits_per_symbol_; ++j)
            bits[static_cast<std::size_t>(i * bits_per_symbol_ + j)] =
                static_cast<std::uint8_t>((label >> (bits_per_symbol_ - 1 - j)) & 1);
    }
    return bits;
}

std::vector<std::uint8_t> ml_decode(const SchemeConfig& cfg, const CVector& received,
                                    const RVector& lambdas) {
    return MlDecoder(cfg).decode(received, lambdas);
}

TrialResult run_trial(const SchemeConfig& cfg, const MlDecoder& decoder,
                      const std::vector<std::uint8_t>& bits, const ChannelRealization& ch,
                      RngStream& rng, double snr_linear) {
    if (static_cast<int>(bits.size()) != cfg.bits_per_use())
        throw std::invalid_argument("bit count must match bits per channel use");
    if (ch.rx_count() != cfg.m_rx || ch.tx_count() != cfg.n_tx)
        throw std::invalid_argument("channel dimensions must match the configuration");
    const bool single = cfg.scheme == Scheme::SB || cfg.scheme == Scheme::PSB;
    const int coords = single ? 1 : cfg.s;
    const RVector lambdas = ch.singular_values.head(coords);
    const double n0 = noise_variance(cfg.n_tx, snr_linear);
    CVector noise(coords);
    for (int i = 0; i < coords; ++i) noise(i) = rng.complex_gaussian(n0);
    const SymbolVector x = map_bits(cfg.constellation, bits);
    const CVector received = transmit(cfg, x, lambdas, noise);
    const auto decoded = decoder.decode(received, lambdas);
    TrialResult res;
    res.bits = static_cast<long>(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i] != decoded[i]) ++res.bit_errors;
    return res;
}

TrialResult run_trial(const SchemeConfig& cfg, const std::vector<std::uint8_t>& bits,
                      const ChannelRealization& ch, RngStream& rng, double snr_linear) {
    MlDecoder decoder(cfg);
    return run_trial(cfg, decoder, bits, ch, rng, snr_linear);
}

} // namespace beamsim
