#include "tsync/exchange.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tsync/errors.hpp"

namespace tsync {

namespace {

double sample_latency(const LatencySpec& spec, double mu_scale, double sigma_scale,
                      RngStream& rng) {
    const double v = rng.gaussian(spec.mean * mu_scale, spec.stddev * sigma_scale);
    return std::max(0.0, v);
}

double sample_propagation(const PropagationSpec& spec, RngStream& rng) {
    switch (spec.family) {
        case PropagationSpec::Family::deterministic: return spec.value;
        case PropagationSpec::Family::exponential: return rng.exponential(spec.value);
    }
    return spec.value;
}

double sample_hold(const HoldSpec& spec, RngStream& rng) {
    switch (spec.family) {
        case HoldSpec::Family::deterministic: return spec.value;
        case HoldSpec::Family::uniform: return rng.uniform(spec.lo, spec.hi);
    }
    return spec.value;
}

double quantize(double t, const QuantizationSpec& quant) {
    if (quant.resolution <= 0.0) return t;
    return std::floor(t / quant.resolution) * quant.resolution;
}

}  // namespace

double sender_clock_read(const ClockState& state, double true_time, double slot_start) {
    return true_time + state.theta + state.total_skew() * (true_time - slot_start);
}

ExchangeRecord run_exchange(const ClockState& state, const DelayProfile& delays,
                            const QuantizationSpec& quant, double slot_start_true,
                            double tau, RngStream& rng,
                            const ReceiverClock& receiver_clock) {
    // Draw order is fixed; it is part of the reproducibility contract.
    const double hold_s = sample_hold(delays.node_hold_s, rng);
    const double lat_send_s = sample_latency(delays.send_s, 1.0, 1.0, rng);
    const double prop_sr = sample_propagation(delays.prop_sr, rng);
    const double lat_rec_r = sample_latency(delays.rec_r, delays.n_mu, delays.n_sigma, rng);
    const double hold_r = sample_hold(delays.node_hold_r, rng);
    const double lat_send_r = sample_latency(delays.send_r, delays.n_mu, delays.n_sigma, rng);
    const double prop_rs = sample_propagation(delays.prop_rs, rng);
    const double lat_rec_s = sample_latency(delays.rec_s, 1.0, 1.0, rng);

    const double u1 = slot_start_true + hold_s;       // first packet leaves the sender
    const double u2 = u1 + prop_sr;                   // arrival at the receiver
    const double u3 = u2 + hold_r;                    // response leaves the receiver
    const double u4 = u3 + prop_rs;                   // response arrives at the sender
    const double u_eval = u4 + delays.node_eval_hold; // correction is evaluated here

    const double last_event =
        std::max({u1 + lat_send_s, u2 + lat_rec_r, u3 + lat_send_r, u4 + lat_rec_s, u_eval});
    if (last_event - slot_start_true > tau)
        throw NumericError("exchange does not complete within the synchronization period; "
                           "tau or the delay profile is misconfigured");

    const auto receiver_read = [&](double t) {
        return receiver_clock ? receiver_clock(t) : t;
    };

    ExchangeRecord rec;
    rec.t1 = quantize(sender_clock_read(state, u1 + lat_send_s, slot_start_true), quant);
    rec.t2 = quantize(receiver_read(u2 + lat_rec_r), quant);
    rec.t3 = quantize(receiver_read(u3 + lat_send_r), quant);
    rec.t4 = quantize(sender_clock_read(state, u4 + lat_rec_s, slot_start_true), quant);
    rec.eval_sender = sender_clock_read(state, u_eval, slot_start_true);
    rec.eval_receiver = u_eval;  // the reference timescale is true time
    return rec;
}

namespace {

constexpr char kDatasetHeader[] = "k,t1,t2,t3,t4,eval_sender,eval_receiver";

void append_field(std::string& line, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    line += ',';
    line += buf;
}

double parse_double(std::string_view field, const std::string& path, std::size_t lineno) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        throw IoError(path + ":" + std::to_string(lineno) + ": bad numeric field '" +
                      std::string(field) + "'");
    return v;
}

}  // namespace

void write_dataset(const std::vector<ExchangeRecord>& records, const std::string& path) {
    if (records.empty()) throw ConfigError("refusing to write an empty dataset");
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << kDatasetHeader << '\n';
    std::string line;
    for (const auto& r : records) {
        line = std::to_string(r.k);
        append_field(line, r.t1);
        append_field(line, r.t2);
        append_field(line, r.t3);
        append_field(line, r.t4);
        append_field(line, r.eval_sender);
        append_field(line, r.eval_receiver);
        line += '\n';
        out << line;
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

std::vector<ExchangeRecord> read_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw IoError(path + ": empty file");
    ++lineno;
    if (line != kDatasetHeader)
        throw IoError(path + ":1: unexpected header '" + line + "'");

    std::vector<ExchangeRecord> records;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::array<std::string_view, 7> fields;
        std::string_view rest(line);
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const auto comma = rest.find(',');
            if (comma == std::string_view::npos) {
                if (i + 1 != fields.size())
                    throw IoError(path + ":" + std::to_string(lineno) +
                                  ": expected 7 fields, got " + std::to_string(i + 1));
                fields[i] = rest;
                rest = {};
            } else {
                fields[i] = rest.substr(0, comma);
                rest = rest.substr(comma + 1);
            }
        }
        if (!rest.empty())
            throw IoError(path + ":" + std::to_string(lineno) + ": trailing fields");

        ExchangeRecord r;
        r.k = static_cast<std::int64_t>(parse_double(fields[0], path, lineno));
        r.t1 = parse_double(fields[1], path, lineno);
        r.t2 = parse_double(fields[2], path, lineno);
        r.t3 = parse_double(fields[3], path, lineno);
        r.t4 = parse_double(fields[4], path, lineno);
        r.eval_sender = parse_double(fields[5], path, lineno);
        r.eval_receiver = parse_double(fields[6], path, lineno);
        records.push_back(r);
    }
    return records;
}

}  // namespace tsync
