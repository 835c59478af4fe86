#include "tsync/neural.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "tsync/errors.hpp"
#include "tsync/rng.hpp"

namespace tsync {

namespace {

bool sorted_by_x(const std::vector<WindowPoint>& pts) {
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (pts[i].x < pts[i - 1].x) return false;
    return true;
}

void check_width(const NeuralModel& model, std::size_t got) {
    if (static_cast<std::size_t>(model.inputs) != got)
        throw NumericError("feature width " + std::to_string(got) +
                           " does not match the model's " + std::to_string(model.inputs) +
                           " inputs");
}

// Forward pass in normalized units; optionally exposes the hidden activations.
double forward_normalized(const NeuralModel& m, std::span<const double> x,
                          std::vector<double>* hidden_out = nullptr) {
    const int in = m.inputs;
    double y = m.b2;
    if (hidden_out) hidden_out->resize(m.hidden);
    for (int j = 0; j < m.hidden; ++j) {
        const double* row = m.w1.data() + static_cast<std::size_t>(j) * in;
        double z = m.b1[j];
        for (int i = 0; i < in; ++i) z += row[i] * x[i];
        const double h = std::tanh(z);
        if (hidden_out) (*hidden_out)[j] = h;
        y += m.w2[j] * h;
    }
    return y;
}

}  // namespace

std::vector<double> extract_features(const InfoWindow& window, const SplineFit& line,
                                     std::size_t count) {
    const auto& pts = window.points;
    if (pts.size() < count)
        throw NumericError("window holds " + std::to_string(pts.size()) +
                           " points, need " + std::to_string(count));

    std::vector<double> out;
    out.reserve(count);
    if (sorted_by_x(pts)) {
        for (std::size_t i = pts.size() - count; i < pts.size(); ++i)
            out.push_back(pts[i].y - line.predict(pts[i].x));
    } else {
        std::vector<WindowPoint> sorted(pts);
        std::stable_sort(sorted.begin(), sorted.end(),
                         [](const WindowPoint& a, const WindowPoint& b) { return a.x < b.x; });
        for (std::size_t i = sorted.size() - count; i < sorted.size(); ++i)
            out.push_back(sorted[i].y - line.predict(sorted[i].x));
    }
    return out;
}

std::vector<double> extract_features(const InfoWindow& window, const LineFitter& fitter,
                                     std::size_t count) {
    return extract_features(window, fitter.fit_line(window), count);
}

double forward(const NeuralModel& model, std::span<const double> features) {
    check_width(model, features.size());
    std::vector<double> x(features.size());
    const double inv = 1.0 / model.scale;
    for (std::size_t i = 0; i < features.size(); ++i) x[i] = features[i] * inv;
    return forward_normalized(model, x) * model.scale;
}

TrainResult train(const std::vector<TrainingTuple>& data, const TrainConfig& config) {
    if (data.empty()) throw ConfigError("training set is empty");
    const int in = static_cast<int>(data.front().features.size());
    if (in == 0) throw ConfigError("training tuples have no features");
    for (const auto& t : data)
        if (static_cast<int>(t.features.size()) != in)
            throw ConfigError("training tuples disagree on feature width");

    NeuralModel m;
    m.inputs = in;
    m.hidden = config.hidden;
    m.w1.assign(static_cast<std::size_t>(m.hidden) * in, 0.0);
    m.b1.assign(m.hidden, 0.0);
    m.w2.assign(m.hidden, 0.0);
    m.b2 = 0.0;

    double scale = 0.0;
    for (const auto& t : data) {
        for (const double f : t.features) scale = std::max(scale, std::abs(f));
        scale = std::max(scale, std::abs(t.target));
    }
    if (scale == 0.0) scale = 1.0;
    m.scale = scale;
    const double inv_scale = 1.0 / scale;

    RngStream init_rng(config.seed, stream_id(0, StreamPurpose::weight_init));
    const double w1_bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (auto& w : m.w1) w = init_rng.uniform(-w1_bound, w1_bound);
    const double w2_bound = 1.0 / std::sqrt(static_cast<double>(m.hidden));
    for (auto& w : m.w2) w = config.zero_output_init ? 0.0 : init_rng.uniform(-w2_bound, w2_bound);

    // Presentation order: one seeded shuffle, reused by every epoch.
    std::vector<std::uint32_t> order(data.size());
    std::iota(order.begin(), order.end(), 0u);
    RngStream shuffle_rng(config.seed, stream_id(0, StreamPurpose::shuffle));
    for (std::size_t i = order.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(shuffle_rng.uniform01() * static_cast<double>(i));
        std::swap(order[i - 1], order[std::min(j, i - 1)]);
    }

    std::vector<double> v1(m.w1.size(), 0.0), vb1(m.b1.size(), 0.0), v2(m.w2.size(), 0.0);
    double vb2 = 0.0;
    std::vector<double> x(in), h(m.hidden);

    const std::size_t total_updates = static_cast<std::size_t>(config.epochs) * data.size();
    std::size_t update = 0;
    TrainResult result;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (const auto idx : order) {
            const auto& sample = data[idx];
            for (int i = 0; i < in; ++i) x[i] = sample.features[i] * inv_scale;
            const double target = sample.target * inv_scale;

            double y = m.b2;
            for (int j = 0; j < m.hidden; ++j) {
                const double* row = m.w1.data() + static_cast<std::size_t>(j) * in;
                double z = m.b1[j];
                for (int i = 0; i < in; ++i) z += row[i] * x[i];
                h[j] = std::tanh(z);
                y += m.w2[j] * h[j];
            }

            const double lr =
                total_updates > 1
                    ? config.lr_start + (config.lr_end - config.lr_start) *
                                            (static_cast<double>(update) /
                                             static_cast<double>(total_updates - 1))
                    : config.lr_start;
            ++update;

            const double dy = 2.0 * (y - target);
            vb2 = config.momentum * vb2 - lr * dy;
            m.b2 += vb2;
            for (int j = 0; j < m.hidden; ++j) {
                const double g2 = dy * h[j];
                const double gz = dy * m.w2[j] * (1.0 - h[j] * h[j]);
                v2[j] = config.momentum * v2[j] - lr * g2;
                m.w2[j] += v2[j];
                vb1[j] = config.momentum * vb1[j] - lr * gz;
                m.b1[j] += vb1[j];
                double* row = m.w1.data() + static_cast<std::size_t>(j) * in;
                double* vrow = v1.data() + static_cast<std::size_t>(j) * in;
                const double mu = config.momentum;
                for (int i = 0; i < in; ++i) {
                    vrow[i] = mu * vrow[i] - lr * gz * x[i];
                    row[i] += vrow[i];
                }
            }
        }

        double loss = 0.0;
        for (const auto& sample : data) {
            for (int i = 0; i < in; ++i) x[i] = sample.features[i] * inv_scale;
            const double e = forward_normalized(m, x) - sample.target * inv_scale;
            loss += e * e;
        }
        loss *= scale * scale;
        if (!std::isfinite(loss))
            throw NumericError("training loss diverged at epoch " + std::to_string(epoch + 1));
        result.epoch_loss.push_back(loss);
    }

    result.model = std::move(m);
    return result;
}

double gradient_check(const NeuralModel& model, const TrainingTuple& tuple) {
    check_width(model, tuple.features.size());
    const int in = model.inputs;
    const double inv_scale = 1.0 / model.scale;
    std::vector<double> x(in);
    for (int i = 0; i < in; ++i) x[i] = tuple.features[i] * inv_scale;
    const double target = tuple.target * inv_scale;

    // Analytic gradients of L = (forward - target)^2 in normalized units.
    std::vector<double> h;
    const double y = forward_normalized(model, x, &h);
    const double dy = 2.0 * (y - target);
    std::vector<double> g1(model.w1.size()), gb1(model.b1.size()), g2(model.w2.size());
    double gb2 = dy;
    for (int j = 0; j < model.hidden; ++j) {
        g2[j] = dy * h[j];
        const double gz = dy * model.w2[j] * (1.0 - h[j] * h[j]);
        gb1[j] = gz;
        for (int i = 0; i < in; ++i) g1[static_cast<std::size_t>(j) * in + i] = gz * x[i];
    }

    NeuralModel probe = model;
    const double step = 1e-6;
    const auto numeric = [&](double* param) {
        const double saved = *param;
        *param = saved + step;
        const double up = forward_normalized(probe, x) - target;
        *param = saved - step;
        const double dn = forward_normalized(probe, x) - target;
        *param = saved;
        return (up * up - dn * dn) / (2.0 * step);
    };
    const auto deviation = [](double a, double n) {
        const double mag = std::max(std::abs(a), std::abs(n));
        if (mag < 1e-12) return 0.0;
        return std::abs(a - n) / mag;
    };

    double worst = 0.0;
    for (std::size_t i = 0; i < probe.w1.size(); ++i)
        worst = std::max(worst, deviation(g1[i], numeric(&probe.w1[i])));
    for (std::size_t j = 0; j < probe.b1.size(); ++j)
        worst = std::max(worst, deviation(gb1[j], numeric(&probe.b1[j])));
    for (std::size_t j = 0; j < probe.w2.size(); ++j)
        worst = std::max(worst, deviation(g2[j], numeric(&probe.w2[j])));
    worst = std::max(worst, deviation(gb2, numeric(&probe.b2)));
    return worst;
}

double corrected_time(const NeuralModel& model, const InfoWindow& window,
                      const LineFitter& fitter, double sender_time) {
    const SplineFit line = fitter.fit_line(window);
    const auto features =
        extract_features(window, line, static_cast<std::size_t>(model.inputs));
    return line.predict(sender_time) + forward(model, features);
}

namespace {

constexpr char kModelMagic[] = "tsyncnn";
constexpr int kModelVersion = 1;

void print_doubles(std::ofstream& out, const char* tag, std::span<const double> values) {
    out << tag;
    char buf[32];
    for (const double v : values) {
        std::snprintf(buf, sizeof(buf), " %.17g", v);
        out << buf;
    }
    out << '\n';
}

std::vector<double> parse_doubles(std::istringstream& line, std::size_t expect,
                                  const std::string& path, const char* tag) {
    std::vector<double> out;
    out.reserve(expect);
    double v = 0.0;
    while (line >> v) out.push_back(v);
    if (out.size() != expect)
        throw IoError(path + ": section '" + std::string(tag) + "' expects " +
                      std::to_string(expect) + " values, got " + std::to_string(out.size()));
    return out;
}

std::istringstream tagged_line(std::ifstream& in, const std::string& path, const char* tag) {
    std::string line;
    if (!std::getline(in, line)) throw IoError(path + ": missing section '" + tag + "'");
    std::istringstream ss(line);
    std::string got;
    ss >> got;
    if (got != tag)
        throw IoError(path + ": expected section '" + std::string(tag) + "', got '" + got + "'");
    return ss;
}

}  // namespace

void save_model(const NeuralModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << kModelMagic << ' ' << kModelVersion << '\n';
    out << "inputs " << model.inputs << '\n';
    out << "hidden " << model.hidden << '\n';
    {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", model.scale);
        out << "scale " << buf << '\n';
    }
    print_doubles(out, "w1", model.w1);
    print_doubles(out, "b1", model.b1);
    print_doubles(out, "w2", model.w2);
    print_doubles(out, "b2", std::span<const double>(&model.b2, 1));
    if (!out) throw IoError("write failed for '" + path + "'");
}

NeuralModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");

    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != kModelMagic)
        throw IoError(path + ": not a model file (magic '" + magic + "')");
    if (version != kModelVersion)
        throw IoError(path + ": unsupported model version " + std::to_string(version));
    in.ignore(std::numeric_limits<std::streamsize>::max(), '\n');

    NeuralModel m;
    {
        auto ss = tagged_line(in, path, "inputs");
        ss >> m.inputs;
    }
    {
        auto ss = tagged_line(in, path, "hidden");
        ss >> m.hidden;
    }
    if (m.inputs <= 0 || m.hidden <= 0)
        throw IoError(path + ": non-positive layer sizes");
    {
        auto ss = tagged_line(in, path, "scale");
        ss >> m.scale;
    }
    {
        auto ss = tagged_line(in, path, "w1");
        m.w1 = parse_doubles(ss, static_cast<std::size_t>(m.inputs) * m.hidden, path, "w1");
    }
    {
        auto ss = tagged_line(in, path, "b1");
        m.b1 = parse_doubles(ss, m.hidden, path, "b1");
    }
    {
        auto ss = tagged_line(in, path, "w2");
        m.w2 = parse_doubles(ss, m.hidden, path, "w2");
    }
    {
        auto ss = tagged_line(in, path, "b2");
        m.b2 = parse_doubles(ss, 1, path, "b2")[0];
    }
    return m;
}

void write_training_db(const std::vector<TrainingTuple>& tuples, const std::string& path) {
    if (tuples.empty()) throw ConfigError("refusing to write an empty training database");
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    const std::size_t width = tuples.front().features.size();
    for (std::size_t i = 0; i < width; ++i) out << 'f' << i << ',';
    out << "target\n";
    char buf[32];
    std::string line;
    for (const auto& t : tuples) {
        if (t.features.size() != width)
            throw ConfigError("training tuples disagree on feature width");
        line.clear();
        for (const double f : t.features) {
            std::snprintf(buf, sizeof(buf), "%.17g,", f);
            line += buf;
        }
        std::snprintf(buf, sizeof(buf), "%.17g", t.target);
        line += buf;
        line += '\n';
        out << line;
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

std::vector<TrainingTuple> read_training_db(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::string line;
    if (!std::getline(in, line)) throw IoError(path + ": empty file");
    const std::size_t width = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));

    std::vector<TrainingTuple> tuples;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        TrainingTuple t;
        t.features.reserve(width);
        const char* ptr = line.data();
        const char* end = line.data() + line.size();
        for (std::size_t i = 0; i <= width; ++i) {
            double v = 0.0;
            const auto [next, ec] = std::from_chars(ptr, end, v);
            if (ec != std::errc{})
                throw IoError(path + ":" + std::to_string(lineno) + ": bad numeric field");
            if (i < width) {
                if (next == end || *next != ',')
                    throw IoError(path + ":" + std::to_string(lineno) + ": expected " +
                                  std::to_string(width + 1) + " fields");
                t.features.push_back(v);
                ptr = next + 1;
            } else {
                if (next != end)
                    throw IoError(path + ":" + std::to_string(lineno) + ": trailing fields");
                t.target = v;
            }
        }
        tuples.push_back(std::move(t));
    }
    return tuples;
}

}  // namespace tsync
