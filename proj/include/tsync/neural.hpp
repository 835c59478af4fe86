#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tsync/splines.hpp"

namespace tsync {

// One training pattern: the residual features of a window and the observed
// error of the order-1 fit at the evaluation instant, both in seconds.
struct TrainingTuple {
    std::vector<double> features;
    double target = 0.0;
};

// Residual-correcting network: fixed topology of one tanh hidden layer and a
// linear output. Inputs and target share a single normalization constant
// derived from the training set; the forward pass takes raw seconds and
// returns seconds.
struct NeuralModel {
    int inputs = 0;
    int hidden = 10;
    std::vector<double> w1;  // hidden x inputs, row-major per hidden unit
    std::vector<double> b1;  // hidden
    std::vector<double> w2;  // hidden
    double b2 = 0.0;
    double scale = 1.0;      // [s]
};

// Vertical residuals of the `count` most recent window points against the
// fitter's line, ordered by sender time with the most recent last.
std::vector<double> extract_features(const InfoWindow& window, const LineFitter& fitter,
                                     std::size_t count);
std::vector<double> extract_features(const InfoWindow& window, const SplineFit& line,
                                     std::size_t count);

double forward(const NeuralModel& model, std::span<const double> features);

struct TrainConfig {
    int epochs = 8;
    double lr_start = 1e-3;
    double lr_end = 1e-5;
    double momentum = 0.01;
    std::uint64_t seed = 1;
    int hidden = 10;
    bool zero_output_init = false;  // start the output layer at zero
};

struct TrainResult {
    NeuralModel model;
    std::vector<double> epoch_loss;  // sum of squared errors [s^2], end of epoch
};

// Plain stochastic gradient descent with momentum: per-sample updates in a
// seeded order fixed once before the first epoch, learning rate annealed
// linearly over all updates. Aborts with NumericError if the loss leaves the
// finite range.
TrainResult train(const std::vector<TrainingTuple>& data, const TrainConfig& config);

// Largest relative deviation between analytic gradients of the squared error
// and central finite differences, over every parameter of the model.
double gradient_check(const NeuralModel& model, const TrainingTuple& tuple);

// Receiver-time estimate: line prediction plus the network's residual
// correction for the window.
double corrected_time(const NeuralModel& model, const InfoWindow& window,
                      const LineFitter& fitter, double sender_time);

// Versioned self-describing text format; doubles carry 17 significant digits
// so reloaded models reproduce forward outputs bit-exactly.
void save_model(const NeuralModel& model, const std::string& path);
NeuralModel load_model(const std::string& path);

// Training database: CSV with one feature column per input plus the target.
void write_training_db(const std::vector<TrainingTuple>& tuples, const std::string& path);
std::vector<TrainingTuple> read_training_db(const std::string& path);

}  // namespace tsync
