#pragma once

// Downlink rate model: Shannon capacity with d^-sigma path loss, co-channel
// interference from the other vehicles an RSU is serving, and the Poisson
// contention weighting used at planning time.

#include <algorithm>
#include <cmath>
#include <span>

#include "hdmap/error.hpp"
#include "hdmap/model.hpp"

namespace hdmap::channel {

class SingularGeometry : public Error {
public:
  SingularGeometry() : Error("link distance must be > 0 (path loss diverges)") {}
};

// `concurrent_vehicles` counts the subject too: 1 means the link is alone.
struct LinkContext {
  const Rsu* rsu = nullptr;
  double distance_m = 0.0;
  int concurrent_vehicles = 1;
};

struct Interferer {
  double distance_m = 0.0;
  double tx_power_w = 0.0;
};

// Received power d^-sigma * P * |h1|.
inline double received_power(double distance_m, double tx_power_w, const ChannelParams& ch) {
  if (!(distance_m > 0)) throw SingularGeometry();
  return std::pow(distance_m, -ch.path_loss_exponent) * tx_power_w * std::abs(ch.fading_gain);
}

inline double link_bandwidth(const Rsu& rsu, const ChannelParams& ch) {
  return std::min(rsu.bandwidth_mb_s, ch.rx_bandwidth_default);
}

inline double shannon_rate(double bandwidth, double signal, double interference, double noise) {
  return std::max(0.0, bandwidth * std::log2(1.0 + signal / (noise + interference)));
}

// Rate with an explicit interferer set.
inline double downlink_rate(const LinkContext& ctx, std::span<const Interferer> interferers,
                            const ChannelParams& ch) {
  if (ctx.rsu == nullptr) throw InvalidArgument("downlink_rate: missing RSU");
  const double signal = received_power(ctx.distance_m, ctx.rsu->tx_power_max_w, ch);
  double interference = 0.0;
  for (const auto& i : interferers) interference += received_power(i.distance_m, i.tx_power_w, ch);
  return shannon_rate(link_bandwidth(*ctx.rsu, ch), signal, interference, ch.noise_psd);
}

// Rate with the k-1 other vehicles at the subject's distance, served at the
// same transmit power.
inline double downlink_rate(const LinkContext& ctx, const ChannelParams& ch) {
  if (ctx.rsu == nullptr) throw InvalidArgument("downlink_rate: missing RSU");
  if (ctx.concurrent_vehicles < 1) throw InvalidArgument("downlink_rate: k must be >= 1");
  const double signal = received_power(ctx.distance_m, ctx.rsu->tx_power_max_w, ch);
  const double interference = static_cast<double>(ctx.concurrent_vehicles - 1) * signal;
  return shannon_rate(link_bandwidth(*ctx.rsu, ch), signal, interference, ch.noise_psd);
}

inline double solo_rate(const Rsu& rsu, const ChannelParams& ch) {
  return downlink_rate(LinkContext{&rsu, rsu.lane_offset_m, 1}, ch);
}

/// Poisson probability of k vehicles sharing one RSU, P(X=k) = e^-mp (mp)^k / k!.
inline double concurrency_pmf(double m, double p, int k) {
  if (k < 0) return 0.0;
  const double lambda = m * p;
  if (lambda <= 0.0) return k == 0 ? 1.0 : 0.0;
  return std::exp(-lambda + k * std::log(lambda) - std::lgamma(static_cast<double>(k) + 1.0));
}

struct ExpectedRateOptions {
  // Divide by the probability mass of k = 1..m-1 so the weights sum to 1.
  bool renormalize = false;
};

// Contention-weighted rate sum_{k=1}^{m-1} P(X=k) R(X=k). A lone vehicle
// (m = 1) gets the solo rate.
inline double expected_rate(const LinkContext& ctx, const ChannelParams& ch, int m, double p,
                            ExpectedRateOptions opts = {}) {
  if (m < 1) throw InvalidArgument("expected_rate: m must be >= 1");
  LinkContext link = ctx;
  if (m == 1) {
    link.concurrent_vehicles = 1;
    return downlink_rate(link, ch);
  }
  double sum = 0.0;
  double mass = 0.0;
  for (int k = 1; k <= m - 1; ++k) {
    const double w = concurrency_pmf(m, p, k);
    // The remaining tail is negligible once the pmf has decayed past its mode.
    if (w < 1e-300 && k > m * p) break;
    link.concurrent_vehicles = k;
    sum += w * downlink_rate(link, ch);
    mass += w;
  }
  if (opts.renormalize) return mass > 0 ? sum / mass : 0.0;
  return sum;
}

// Seconds a vehicle spends inside the RSU's coverage circle; zero when the
// lane never enters it.
inline double contact_window(const Rsu& rsu, const Vehicle& vehicle) {
  if (!(vehicle.speed_mps > 0)) throw InvalidArgument("contact_window: speed must be > 0");
  return 2.0 * rsu.half_chord_m() / vehicle.speed_mps;
}

}  // namespace hdmap::channel
