#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tsync/clockdyn.hpp"
#include "tsync/rng.hpp"

namespace tsync {

// Gaussian in-node latency, clamped at zero when a tail sample goes negative.
struct LatencySpec {
    double mean = 0.0;    // [s]
    double stddev = 0.0;  // [s]
};

struct PropagationSpec {
    enum class Family { deterministic, exponential };
    Family family = Family::deterministic;
    double value = 0.0;  // deterministic delay, or exponential mean [s]
};

struct HoldSpec {
    enum class Family { deterministic, uniform };
    Family family = Family::deterministic;
    double value = 0.0;  // deterministic hold [s]
    double lo = 0.0;     // uniform bounds [s]
    double hi = 0.0;
};

// Per-role delay model of one link. Receiver-side latencies are scaled by
// (n_mu, n_sigma) when sampled, which is how asymmetric paths are configured.
struct DelayProfile {
    LatencySpec send_s;  // sender send-timestamping latency
    LatencySpec rec_s;   // sender receive-timestamping latency
    LatencySpec send_r;  // receiver send-timestamping latency (before n_mu/n_sigma)
    LatencySpec rec_r;   // receiver receive-timestamping latency (before n_mu/n_sigma)
    PropagationSpec prop_sr;
    PropagationSpec prop_rs;
    double n_mu = 1.0;
    double n_sigma = 1.0;
    HoldSpec node_hold_s;          // schedule-to-send hold at the sender
    HoldSpec node_hold_r;          // receive-to-respond hold at the receiver
    double node_eval_hold = 0.0;   // delay from t4 acquisition to clock evaluation [s]
};

struct QuantizationSpec {
    double resolution = 0.0;  // timestamps floored to multiples; 0 disables
};

// One synchronization round. Timestamps live in their owners' timescales; the
// eval pair is the ground truth at the evaluation instant. Records are
// self-contained: estimators never see the underlying clock state.
struct ExchangeRecord {
    std::int64_t k = 0;
    double t1 = 0.0;
    double t2 = 0.0;
    double t3 = 0.0;
    double t4 = 0.0;
    double eval_sender = 0.0;
    double eval_receiver = 0.0;

    bool operator==(const ExchangeRecord&) const = default;
};

// Reading of the sender clock at a true-time instant within the current slot:
// linear extrapolation of the state from the slot start.
double sender_clock_read(const ClockState& state, double true_time, double slot_start);

// Maps true time to the receiver's reported timescale. Identity when empty
// (the receiver holds the reference); multi-hop chains plug virtual clocks in.
using ReceiverClock = std::function<double(double)>;

// Simulates one two-way exchange starting at slot_start_true. Throws
// NumericError if the sampled delay chain does not complete within tau.
ExchangeRecord run_exchange(const ClockState& state, const DelayProfile& delays,
                            const QuantizationSpec& quant, double slot_start_true,
                            double tau, RngStream& rng,
                            const ReceiverClock& receiver_clock = {});

// CSV dataset: header k,t1,t2,t3,t4,eval_sender,eval_receiver; values printed
// with 17 significant digits so the round-trip is lossless.
void write_dataset(const std::vector<ExchangeRecord>& records, const std::string& path);
std::vector<ExchangeRecord> read_dataset(const std::string& path);

}  // namespace tsync
