#include "tinyfl/flsim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "tinyfl/benchmark.hpp"

namespace tinyfl::sim {

namespace {

// Uniform helpers built on raw generator words so results do not depend on
// the standard library's distribution implementations.
double unit_open(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;  // (0,1)
}

double uniform_pm1(std::mt19937_64& rng) {
    return 2.0 * unit_open(rng) - 1.0;
}

double gaussian(std::mt19937_64& rng) {
    const double u1 = unit_open(rng);
    const double u2 = unit_open(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

uint64_t uniform_range(std::mt19937_64& rng, uint64_t lo, uint64_t hi) {
    return lo + rng() % (hi - lo + 1);
}

template <typename M>
void expect_transfer_intact(const M& sent, const M& received) {
    if (!(sent == received)) throw std::logic_error("message altered by encode/decode round trip");
}

msg::ModelParams wire_params(const std::vector<double>& values, cbor::Profile profile) {
    msg::ModelParams p;
    p.encoding = msg::choose_params_encoding(values, profile);
    p.values = values;
    return p;
}

struct ClientRuntime {
    ClientState state;
    bool training_enabled = false;
    bool notified = false;        // client sent its notification this round
    bool server_eligible = false; // server actually received it
    uint64_t reported_size = 0;
};

}  // namespace

void Config::validate() const {
    if (num_clients == 0) throw std::invalid_argument("num_clients must be positive");
    if (!(min_fraction > 0.0) || min_fraction > 1.0) throw std::invalid_argument("min_fraction must be in (0,1]");
    if (rounds == 0) throw std::invalid_argument("rounds must be positive");
    if (param_count == 0) throw std::invalid_argument("param_count must be positive");
    if (local_epochs == 0) throw std::invalid_argument("local_epochs must be positive");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw std::invalid_argument("learning_rate must be positive");
    }
    if (drop_rate < 0.0 || drop_rate >= 1.0) throw std::invalid_argument("drop_rate must be in [0,1)");
    if (dataset_size_min < 2) throw std::invalid_argument("dataset_size_min must be at least 2");
    if (dataset_size_max < dataset_size_min) throw std::invalid_argument("dataset_size_max below dataset_size_min");
    if (noise_stddev < 0.0) throw std::invalid_argument("noise_stddev must be non-negative");
}

uint32_t Config::required_clients() const {
    // The tiny nudge keeps exact products like 0.1 * 30 from ceiling up;
    // a positive fraction always requires at least one client.
    const double required = std::ceil(min_fraction * num_clients - 1e-9);
    return std::max(1u, static_cast<uint32_t>(required));
}

double mse_loss(std::span<const double> model, std::span<const Sample> samples) {
    if (samples.empty()) return 0.0;
    double sum = 0.0;
    for (const Sample& s : samples) {
        double pred = 0.0;
        for (size_t j = 0; j < model.size(); ++j) pred += model[j] * s.input[j];
        const double err = pred - s.target;
        sum += err * err;
    }
    return sum / static_cast<double>(samples.size());
}

std::vector<double> mse_gradient(std::span<const double> model, std::span<const Sample> samples) {
    std::vector<double> grad(model.size(), 0.0);
    if (samples.empty()) return grad;
    for (const Sample& s : samples) {
        double pred = 0.0;
        for (size_t j = 0; j < model.size(); ++j) pred += model[j] * s.input[j];
        const double factor = 2.0 * (pred - s.target) / static_cast<double>(samples.size());
        for (size_t j = 0; j < model.size(); ++j) grad[j] += factor * s.input[j];
    }
    return grad;
}

void train_one_epoch(ClientState& client, double learning_rate, uint32_t batch_size) {
    const size_t n = client.train_set.size();
    const size_t step = batch_size == 0 ? n : std::min<size_t>(batch_size, n);
    for (size_t begin = 0; begin < n; begin += step) {
        const size_t count = std::min(step, n - begin);
        const std::span<const Sample> batch(client.train_set.data() + begin, count);
        const std::vector<double> grad = mse_gradient(client.model, batch);
        for (size_t j = 0; j < client.model.size(); ++j) client.model[j] -= learning_rate * grad[j];
    }
    client.samples_seen += n;
    client.train_loss = mse_loss(client.model, client.train_set);
    client.val_loss = mse_loss(client.model, client.val_set);
}

void local_train(ClientState& client, std::span<const double> global_model, uint32_t epochs, double learning_rate,
                 uint32_t batch_size) {
    client.model.assign(global_model.begin(), global_model.end());
    for (uint32_t e = 0; e < epochs; ++e) train_one_epoch(client, learning_rate, batch_size);
}

bool check_stop(const ClientState& client) {
    return client.val_loss < client.train_loss;
}

std::vector<uint32_t> select_clients(std::span<const uint32_t> eligible, const Config& cfg) {
    const uint32_t required = cfg.required_clients();
    if (eligible.size() < required) return {};
    return {eligible.begin(), eligible.begin() + required};
}

std::vector<double> aggregation_weights(std::span<const uint64_t> sizes) {
    if (sizes.empty()) throw std::invalid_argument("empty-input: no dataset sizes");
    uint64_t total = 0;
    for (const uint64_t n : sizes) {
        if (n == 0) throw std::invalid_argument("dataset sizes must be positive");
        total += n;
    }
    std::vector<double> weights(sizes.size());
    for (size_t i = 0; i < sizes.size(); ++i) weights[i] = static_cast<double>(sizes[i]) / static_cast<double>(total);
    return weights;
}

std::vector<double> fedavg(const std::vector<std::vector<double>>& models, std::span<const uint64_t> sizes) {
    if (models.empty()) throw std::invalid_argument("empty-input: no models to aggregate");
    if (models.size() != sizes.size()) throw std::invalid_argument("dimension-mismatch: models vs sizes");
    const size_t dim = models.front().size();
    for (const auto& m : models) {
        if (m.size() != dim) throw std::invalid_argument("dimension-mismatch: model parameter counts differ");
    }
    const std::vector<double> weights = aggregation_weights(sizes);
    std::vector<double> out(dim, 0.0);
    for (size_t k = 0; k < models.size(); ++k) {
        for (size_t j = 0; j < dim; ++j) out[j] += weights[k] * models[k][j];
    }
    return out;
}

void transport_deliver(size_t payload_octets, TrafficCounters& counters) {
    counters.octets += payload_octets;
    counters.frames += bench::frame_count(payload_octets);
}

uint64_t model_checksum(std::span<const double> model) {
    uint64_t h = 14695981039346656037ull;
    for (const double v : model) {
        const auto bits = std::bit_cast<uint64_t>(v);
        for (unsigned i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xff;
            h *= 1099511628211ull;
        }
    }
    return h;
}

SimulationResult run_simulation(const Config& cfg, const MessageTrace& trace) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);

    SimulationResult result;
    result.config = cfg;
    for (auto& b : result.model_identifier.uuid) b = static_cast<uint8_t>(rng() & 0xff);

    // Per-client synthetic regression data around one ground truth.
    std::vector<double> truth(cfg.param_count);
    for (double& w : truth) w = uniform_pm1(rng);

    std::vector<ClientRuntime> clients(cfg.num_clients);
    for (uint32_t i = 0; i < cfg.num_clients; ++i) {
        ClientState& st = clients[i].state;
        st.id = i;
        const auto total = static_cast<size_t>(uniform_range(rng, cfg.dataset_size_min, cfg.dataset_size_max));
        const size_t val_count = std::max<size_t>(1, total / 5);
        for (size_t k = 0; k < total; ++k) {
            Sample s;
            s.input.resize(cfg.param_count);
            for (double& x : s.input) x = uniform_pm1(rng);
            double y = 0.0;
            for (uint32_t j = 0; j < cfg.param_count; ++j) y += truth[j] * s.input[j];
            if (cfg.noise_stddev > 0.0) y += cfg.noise_stddev * gaussian(rng);
            s.target = y;
            (k < total - val_count ? st.train_set : st.val_set).push_back(std::move(s));
        }
    }

    std::vector<double> global(cfg.param_count, 0.0);
    const msg::ModelIdentifier& model_id = result.model_identifier;

    for (uint32_t round = 1; round <= cfg.rounds; ++round) {
        RoundReport report;
        report.round = round;
        TrafficCounters down;
        TrafficCounters up;
        const auto deliver = [&](const std::vector<uint8_t>& payload, TrafficCounters& counters,
                                 std::string_view direction) {
            transport_deliver(payload.size(), counters);
            if (trace) trace(direction, payload);
        };

        const msg::ModelParams params = wire_params(global, cfg.profile);
        const msg::GlobalModelUpdate active{model_id, round, params, true};
        const msg::GlobalModelUpdate halt{model_id, round, params, false};
        const std::vector<uint8_t> active_payload = msg::encode_global(active, cfg.profile);
        const std::vector<uint8_t> halt_payload = msg::encode_global(halt, cfg.profile);
        report.global_update_octets = active_payload.size();

        // Dissemination: one global update per client (or one broadcast when
        // multicast accounting is on; halted clients still get their own
        // inference-only copy).
        if (cfg.multicast) deliver(active_payload, down, "down");
        for (ClientRuntime& c : clients) {
            const bool inference_only = c.state.halted;
            const auto& payload = inference_only ? halt_payload : active_payload;
            if (!cfg.multicast || inference_only) deliver(payload, down, "down");
            const msg::GlobalModelUpdate received = msg::decode_global(payload);
            expect_transfer_intact(inference_only ? halt : active, received);
            c.state.model = received.model_params.values;
            c.state.samples_seen = 0;
            c.state.train_loss = mse_loss(c.state.model, c.state.train_set);
            c.state.val_loss = mse_loss(c.state.model, c.state.val_set);
            c.training_enabled = received.continue_training;
            c.notified = false;
            c.server_eligible = false;
        }

        // Local training with observe-style notifications at the first
        // threshold crossing; the server may halt a client on the spot.
        std::vector<uint32_t> arrival;
        for (uint32_t epoch = 0; epoch < cfg.local_epochs; ++epoch) {
            for (ClientRuntime& c : clients) {
                if (c.state.halted || !c.training_enabled) continue;
                train_one_epoch(c.state, cfg.learning_rate, cfg.batch_size);
                if (c.notified || c.state.samples_seen < cfg.min_dataset_size) continue;
                c.notified = true;
                const msg::LocalDataSetUpdate note{c.state.samples_seen,
                                                   msg::ModelMetadata{c.state.train_loss, c.state.val_loss}};
                const std::vector<uint8_t> note_payload = msg::encode_dataset_update(note, cfg.profile);
                deliver(note_payload, up, "up");
                if (cfg.drop_rate > 0.0 && unit_open(rng) < cfg.drop_rate) continue;  // lost in transit
                const msg::LocalDataSetUpdate received = msg::decode_dataset_update(note_payload);
                expect_transfer_intact(note, received);
                c.reported_size = received.local_dataset_size;
                c.server_eligible = true;
                arrival.push_back(c.state.id);
                if (received.metadata && check_stop(c.state)) {
                    deliver(halt_payload, down, "down");
                    const msg::GlobalModelUpdate halt_received = msg::decode_global(halt_payload);
                    expect_transfer_intact(halt, halt_received);
                    c.state.halted = true;
                }
            }
        }

        // Selection and collection.
        report.selected = select_clients(arrival, cfg);
        if (report.selected.empty()) {
            report.aborted = true;
        } else {
            std::vector<std::vector<double>> models;
            std::vector<uint64_t> sizes;
            for (const uint32_t id : report.selected) {
                ClientRuntime& c = clients[id];
                const msg::LocalModelUpdate update{model_id, round, wire_params(c.state.model, cfg.profile),
                                                   msg::ModelMetadata{c.state.train_loss, c.state.val_loss}};
                const std::vector<uint8_t> payload = msg::encode_local_model(update, cfg.profile);
                deliver(payload, up, "up");
                const msg::LocalModelUpdate received = msg::decode_local_model(payload);
                expect_transfer_intact(update, received);
                if (received.model_identifier != model_id || received.model_round != round) {
                    report.echo_rejected.push_back(id);
                    continue;
                }
                models.push_back(received.model_params.values);
                sizes.push_back(c.reported_size);
            }
            if (models.empty()) {
                report.aborted = true;
            } else {
                // Aggregation invariants are cheap; violations are logic
                // errors, never data-dependent.
                const std::vector<double> weights = aggregation_weights(sizes);
                double weight_total = 0.0;
                for (const double w : weights) weight_total += w;
                if (std::fabs(weight_total - 1.0) > 1e-12) throw std::logic_error("aggregation weights do not sum to 1");
                global = fedavg(models, sizes);
                for (size_t j = 0; j < global.size(); ++j) {
                    double lo = models[0][j];
                    double hi = models[0][j];
                    for (const auto& m : models) {
                        lo = std::min(lo, m[j]);
                        hi = std::max(hi, m[j]);
                    }
                    if (global[j] < lo - 1e-12 || global[j] > hi + 1e-12) {
                        throw std::logic_error("aggregate left the convex hull of the client models");
                    }
                }
            }
        }

        report.bytes_down = down.octets;
        report.frames_down = down.frames;
        report.bytes_up = up.octets;
        report.frames_up = up.frames;
        report.model_checksum = model_checksum(global);
        for (const ClientRuntime& c : clients) {
            report.clients.push_back(ClientRoundStats{c.state.id, c.state.samples_seen, c.state.train_loss,
                                                      c.state.val_loss, c.state.halted, c.server_eligible});
        }
        result.rounds.push_back(std::move(report));
    }

    result.final_model = global;
    return result;
}

namespace {

std::string checksum_hex(uint64_t checksum) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(checksum));
    return buf;
}

}  // namespace

nlohmann::json config_to_json(const Config& cfg) {
    return nlohmann::json{{"num_clients", cfg.num_clients},
                          {"min_fraction", cfg.min_fraction},
                          {"rounds", cfg.rounds},
                          {"min_dataset_size", cfg.min_dataset_size},
                          {"param_count", cfg.param_count},
                          {"seed", cfg.seed},
                          {"profile", cfg.profile == cbor::Profile::Compact ? "compact" : "verbose"},
                          {"local_epochs", cfg.local_epochs},
                          {"learning_rate", cfg.learning_rate},
                          {"batch_size", cfg.batch_size},
                          {"multicast", cfg.multicast},
                          {"drop_rate", cfg.drop_rate},
                          {"dataset_size_min", cfg.dataset_size_min},
                          {"dataset_size_max", cfg.dataset_size_max},
                          {"noise_stddev", cfg.noise_stddev}};
}

Config config_from_json(const nlohmann::json& j) {
    Config cfg;
    cfg.num_clients = j.value("num_clients", cfg.num_clients);
    cfg.min_fraction = j.value("min_fraction", cfg.min_fraction);
    cfg.rounds = j.value("rounds", cfg.rounds);
    cfg.min_dataset_size = j.value("min_dataset_size", cfg.min_dataset_size);
    cfg.param_count = j.value("param_count", cfg.param_count);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("profile")) {
        const std::string profile = j.at("profile").get<std::string>();
        if (profile == "compact") {
            cfg.profile = cbor::Profile::Compact;
        } else if (profile == "verbose") {
            cfg.profile = cbor::Profile::Verbose;
        } else {
            throw std::invalid_argument("profile must be compact or verbose");
        }
    }
    cfg.local_epochs = j.value("local_epochs", cfg.local_epochs);
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.multicast = j.value("multicast", cfg.multicast);
    cfg.drop_rate = j.value("drop_rate", cfg.drop_rate);
    cfg.dataset_size_min = j.value("dataset_size_min", cfg.dataset_size_min);
    cfg.dataset_size_max = j.value("dataset_size_max", cfg.dataset_size_max);
    cfg.noise_stddev = j.value("noise_stddev", cfg.noise_stddev);
    return cfg;
}

nlohmann::json SimulationResult::to_json() const {
    nlohmann::json rounds_json = nlohmann::json::array();
    for (const RoundReport& r : rounds) {
        nlohmann::json clients_json = nlohmann::json::array();
        for (const ClientRoundStats& c : r.clients) {
            clients_json.push_back({{"id", c.id},
                                    {"samples_seen", c.samples_seen},
                                    {"train_loss", c.train_loss},
                                    {"val_loss", c.val_loss},
                                    {"halted", c.halted},
                                    {"eligible", c.eligible}});
        }
        rounds_json.push_back({{"round", r.round},
                               {"bytes_down", r.bytes_down},
                               {"bytes_up", r.bytes_up},
                               {"frames_down", r.frames_down},
                               {"frames_up", r.frames_up},
                               {"global_update_octets", r.global_update_octets},
                               {"selected", r.selected},
                               {"echo_rejected", r.echo_rejected},
                               {"aborted", r.aborted},
                               {"clients", clients_json},
                               {"model_checksum", checksum_hex(r.model_checksum)}});
    }
    return nlohmann::json{{"config", config_to_json(config)},
                          {"model_identifier", model_identifier.to_string()},
                          {"rounds", rounds_json},
                          {"final_model_checksum", checksum_hex(model_checksum(final_model))}};
}

}  // namespace tinyfl::sim
