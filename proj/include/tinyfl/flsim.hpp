#ifndef TINYFL_FLSIM_HPP
#define TINYFL_FLSIM_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tinyfl/cbor.hpp"
#include "tinyfl/messages.hpp"

// Deterministic single-process simulation of the orchestration workflow:
// per round the server distributes the global model to every client,
// clients train locally and notify the server through an observe-style
// channel once enough samples were seen, the server picks the earliest
// notifiers, collects their local models and aggregates them with
// dataset-size-weighted averaging. Every message crosses the real CBOR
// codec and a frame-accounting transport; a client whose validation loss
// drops below its training loss is halted by the server and runs
// inference-only from then on.
//
// The local learner is a linear least-squares stub: prediction is
// dot(model, input), the loss is mean squared error, trained with
// mini-batch gradient descent on per-client synthetic data (80/20
// train/validation split).

namespace tinyfl::sim {

struct Config {
    uint32_t num_clients = 4;
    double min_fraction = 1.0;  // fraction of clients required for aggregation, (0,1]
    uint32_t rounds = 1;
    uint64_t min_dataset_size = 1;  // observe threshold on samples seen
    uint32_t param_count = 4;
    uint64_t seed = 1;
    cbor::Profile profile = cbor::Profile::Compact;
    uint32_t local_epochs = 1;
    double learning_rate = 0.01;
    uint32_t batch_size = 0;  // 0 = full batch
    bool multicast = false;   // count the round-start dissemination once instead of per client
    double drop_rate = 0.0;   // probability an observe notification is lost in transit
    // Synthetic data generation.
    uint32_t dataset_size_min = 20;
    uint32_t dataset_size_max = 100;
    double noise_stddev = 0.05;

    void validate() const;  // throws std::invalid_argument
    // Clients required for aggregation: ceil(min_fraction * num_clients).
    uint32_t required_clients() const;
};

struct Sample {
    std::vector<double> input;
    double target = 0.0;
};

struct ClientState {
    uint32_t id = 0;
    std::vector<double> model;
    std::vector<Sample> train_set;
    std::vector<Sample> val_set;
    uint64_t samples_seen = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    bool halted = false;
};

struct TrafficCounters {
    uint64_t octets = 0;
    uint64_t frames = 0;
};

struct ClientRoundStats {
    uint32_t id = 0;
    uint64_t samples_seen = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    bool halted = false;
    bool eligible = false;
};

struct RoundReport {
    uint32_t round = 0;
    uint64_t bytes_down = 0;
    uint64_t bytes_up = 0;
    uint64_t frames_down = 0;
    uint64_t frames_up = 0;
    uint64_t global_update_octets = 0;  // encoded size of this round's global update
    std::vector<uint32_t> selected;       // in notification-arrival order
    std::vector<uint32_t> echo_rejected;  // updates excluded for uuid/round mismatch
    bool aborted = false;                 // insufficient eligible clients
    std::vector<ClientRoundStats> clients;
    uint64_t model_checksum = 0;  // FNV-1a over the aggregated parameters
};

struct SimulationResult {
    Config config;
    msg::ModelIdentifier model_identifier;
    std::vector<RoundReport> rounds;
    std::vector<double> final_model;

    nlohmann::json to_json() const;
};

// Mean squared error of dot(model, input) against the targets.
double mse_loss(std::span<const double> model, std::span<const Sample> samples);
// Analytic gradient of mse_loss with respect to the model.
std::vector<double> mse_gradient(std::span<const double> model, std::span<const Sample> samples);

// One pass over the training set in mini-batches of `batch_size` (0 = full
// batch), recomputing both losses afterwards. Adds the processed sample
// count to samples_seen.
void train_one_epoch(ClientState& client, double learning_rate, uint32_t batch_size);

// Initializes the client model from the global parameters and runs `epochs`
// training passes.
void local_train(ClientState& client, std::span<const double> global_model, uint32_t epochs, double learning_rate,
                 uint32_t batch_size = 0);

// Server-side halt rule: stop a client once validation loss is strictly
// below training loss.
bool check_stop(const ClientState& client);

// First ceil(min_fraction * num_clients) ids of `eligible` (already in
// notification-arrival order). Empty result means insufficient clients.
std::vector<uint32_t> select_clients(std::span<const uint32_t> eligible, const Config& cfg);

// n_k / sum(n) per client; throws on empty input or a zero size.
std::vector<double> aggregation_weights(std::span<const uint64_t> sizes);

// Dataset-size-weighted component-wise average.
std::vector<double> fedavg(const std::vector<std::vector<double>>& models, std::span<const uint64_t> sizes);

// Accounts one payload delivery: octets plus its frame count.
void transport_deliver(size_t payload_octets, TrafficCounters& counters);

uint64_t model_checksum(std::span<const double> model);

// Debug hook invoked with every simulated payload; direction is "down" or
// "up".
using MessageTrace = std::function<void(std::string_view direction, std::span<const uint8_t> payload)>;

SimulationResult run_simulation(const Config& cfg, const MessageTrace& trace = {});

nlohmann::json config_to_json(const Config& cfg);
Config config_from_json(const nlohmann::json& j);

}  // namespace tinyfl::sim

#endif
