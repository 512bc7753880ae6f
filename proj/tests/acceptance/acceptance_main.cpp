// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails. Each check pins its tolerances in code.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tinyfl/benchmark.hpp"
#include "tinyfl/flsim.hpp"
#include "tinyfl/json_codec.hpp"
#include "tinyfl/messages.hpp"
#include "tinyfl/pb_codec.hpp"

using namespace tinyfl;

namespace {

struct Outcome {
    bool passed = true;
    std::string detail;

    void fail(const std::string& why) {
        passed = false;
        if (!detail.empty()) detail += "; ";
        detail += why;
    }
};

#define EXPECT(outcome, cond, why)              \
    do {                                        \
        if (!(cond)) (outcome).fail(why);       \
    } while (0)

msg::ModelIdentifier test_id() {
    msg::ModelIdentifier id;
    for (size_t i = 0; i < 16; ++i) id.uuid[i] = static_cast<uint8_t>(0xa0 + i);
    return id;
}

msg::ModelParams params_for(std::vector<double> values, cbor::Profile profile) {
    msg::ModelParams p;
    p.encoding = msg::choose_params_encoding(values, profile);
    p.values = std::move(values);
    return p;
}

double random_finite(std::mt19937_64& rng) {
    for (;;) {
        const double v = std::bit_cast<double>(rng());
        if (std::isfinite(v)) return v;
    }
}

// Finite loss values that survive their codec exactly: any finite double
// for CBOR/JSON, binary32 for Protobuf.
double random_loss(std::mt19937_64& rng, bool binary32) {
    for (;;) {
        const double v =
            binary32 ? static_cast<double>(std::bit_cast<float>(static_cast<uint32_t>(rng()))) : random_finite(rng);
        if (std::isfinite(v)) return v;
    }
}

// --- criterion 1 -----------------------------------------------------------

Outcome table1_reproduction() {
    Outcome out;
    const bench::SizeReport report = bench::run_table1();
    EXPECT(out, report.rows.size() == 28, "expected 28 cells");
    for (const std::string& m : report.mismatches()) out.fail(m);
    return out;
}

// --- criterion 2 -----------------------------------------------------------

Outcome table2_reproduction() {
    Outcome out;
    const bench::SizeReport report = bench::run_table2(1);
    for (const std::string& m : report.mismatches()) out.fail(m);
    uint64_t cbor_global = 0, cbor_local = 0, json_global = 0, json_local = 0, pb_global = 0, pb_local = 0;
    for (const auto& row : report.rows) {
        const bool global = row.message == "FL_Global_Model_Update";
        if (row.codec == "cbor") (global ? cbor_global : cbor_local) = row.octets;
        if (row.codec == "json") (global ? json_global : json_local) = row.octets;
        if (row.codec == "protobuf") (global ? pb_global : pb_local) = row.octets;
    }
    EXPECT(out, cbor_global == 177733, "global CBOR size");
    EXPECT(out, cbor_local == 177738, "local CBOR size");
    EXPECT(out, pb_global == 177730, "global Protobuf size");
    EXPECT(out, pb_local == 177748, "local Protobuf size");
    EXPECT(out, static_cast<double>(cbor_global) / static_cast<double>(json_global) < 0.25, "global CBOR/JSON ratio");
    EXPECT(out, static_cast<double>(cbor_local) / static_cast<double>(json_local) < 0.25, "local CBOR/JSON ratio");
    return out;
}

// --- criterion 3 -----------------------------------------------------------

Outcome dataset_update_single_frame() {
    Outcome out;
    std::mt19937_64 rng(31);
    for (int i = 0; i < 10000 && out.passed; ++i) {
        uint64_t size = rng();
        switch (i % 5) {
            case 0: size %= 24; break;
            case 1: size = 24 + size % 232; break;
            case 2: size = 256 + size % 65280; break;
            case 3: size = 65536 + size % 0xffff0000ull; break;
            default: break;  // full 64-bit range
        }
        msg::LocalDataSetUpdate m{size, std::nullopt};
        if (i % 3 != 0) m.metadata = msg::ModelMetadata{random_finite(rng), random_finite(rng)};
        for (const cbor::Profile profile : {cbor::Profile::Compact, cbor::Profile::Verbose}) {
            const size_t octets = msg::encode_dataset_update(m, profile).size();
            EXPECT(out, octets <= 127, "dataset update of " + std::to_string(octets) + " octets");
            EXPECT(out, bench::frame_count(octets) == 1, "frame count above 1");
        }
    }
    return out;
}

// --- criterion 4 -----------------------------------------------------------

Outcome roundtrip_suites() {
    Outcome out;
    std::mt19937_64 rng(47);
    const auto rand_params = [&](bool binary32) {
        std::vector<double> values(rng() % 24);
        for (auto& v : values) v = random_loss(rng, binary32);
        return values;
    };
    const auto quantize = [](const std::vector<double>& v) {
        std::vector<double> q;
        q.reserve(v.size());
        for (const double x : v) q.push_back(static_cast<double>(static_cast<float>(x)));
        return q;
    };

    for (int i = 0; i < 10000 && out.passed; ++i) {
        const uint64_t round = rng() >> (rng() % 64);
        const bool flag = (rng() & 1) != 0;
        msg::ModelIdentifier id;
        for (auto& b : id.uuid) b = static_cast<uint8_t>(rng());

        // CBOR, both profiles.
        for (const cbor::Profile profile : {cbor::Profile::Compact, cbor::Profile::Verbose}) {
            const msg::GlobalModelUpdate g{id, round, params_for(rand_params(false), profile), flag};
            EXPECT(out, msg::decode_global(msg::encode_global(g, profile)) == g, "cbor global round trip");
            const msg::LocalModelUpdate l{id, round, params_for(rand_params(false), profile),
                                          msg::ModelMetadata{random_finite(rng), random_finite(rng)}};
            EXPECT(out, msg::decode_local_model(msg::encode_local_model(l, profile)) == l, "cbor local round trip");
            msg::LocalDataSetUpdate d{rng(), std::nullopt};
            if ((rng() & 1) != 0) d.metadata = msg::ModelMetadata{random_finite(rng), random_finite(rng)};
            EXPECT(out, msg::decode_dataset_update(msg::encode_dataset_update(d, profile)) == d,
                   "cbor dataset round trip");
        }

        // JSON.
        {
            msg::ModelParams params;
            params.encoding = msg::Heterogeneous{};
            params.values = rand_params(false);
            const msg::GlobalModelUpdate g{id, round, params, flag};
            EXPECT(out, alt::json_decode_global(alt::json_encode(g)) == g, "json global round trip");
            const msg::LocalModelUpdate l{id, round, params,
                                          msg::ModelMetadata{random_finite(rng), random_finite(rng)}};
            EXPECT(out, alt::json_decode_local_model(alt::json_encode(l)) == l, "json local round trip");
            msg::LocalDataSetUpdate d{rng(), std::nullopt};
            if ((rng() & 1) != 0) d.metadata = msg::ModelMetadata{random_finite(rng), random_finite(rng)};
            EXPECT(out, alt::json_decode_dataset_update(alt::json_encode(d)) == d, "json dataset round trip");
        }

        // Protobuf: parameters compare after binary32 quantization.
        {
            msg::ModelParams params;
            params.encoding = msg::Heterogeneous{};
            params.values = rand_params(true);
            msg::GlobalModelUpdate g{id, round, params, flag};
            const auto g2 = alt::pb_decode_global(alt::pb_encode(g));
            g.model_params.values = quantize(g.model_params.values);
            EXPECT(out, g2 == g, "pb global round trip");
            msg::LocalModelUpdate l{id, round, params, msg::ModelMetadata{random_loss(rng, false), 0.5}};
            const auto l2 = alt::pb_decode_local_model(alt::pb_encode(l));
            l.model_params.values = quantize(l.model_params.values);
            EXPECT(out, l2 == l, "pb local round trip");
            msg::LocalDataSetUpdate d{rng(), std::nullopt};
            if ((rng() & 1) != 0) d.metadata = msg::ModelMetadata{random_finite(rng), random_finite(rng)};
            EXPECT(out, alt::pb_decode_dataset_update(alt::pb_encode(d)) == d, "pb dataset round trip");
        }
    }
    return out;
}

// --- criterion 5 -----------------------------------------------------------

Outcome canonical_heads() {
    Outcome out;
    std::mt19937_64 rng(53);
    const auto head_len = [](uint64_t v) -> size_t {
        return v < 24 ? 1 : v <= 0xff ? 2 : v <= 0xffff ? 3 : v <= 0xffffffffull ? 5 : 9;
    };
    for (int i = 0; i < 10000 && out.passed; ++i) {
        uint64_t v = rng();
        switch (i % 5) {
            case 0: v %= 24; break;
            case 1: v = 24 + v % 232; break;
            case 2: v = 256 + v % 65280; break;
            case 3: v = 65536 + v % 0xffff0000ull; break;
            default: v |= 0x100000000ull; break;
        }
        EXPECT(out, cbor::encode_value(cbor::Value::uint(v), cbor::Profile::Compact).size() == head_len(v),
               "non-minimal integer head for " + std::to_string(v));
        // Length heads share the layout: check byte strings around the bands.
        if (i < 300) {
            const std::vector<uint8_t> payload(v % 512, 0xee);
            const auto encoded = cbor::encode_value(cbor::Value::bytes(payload), cbor::Profile::Compact);
            EXPECT(out, encoded.size() == head_len(payload.size()) + payload.size(), "non-minimal length head");
        }
    }

    std::mt19937_64 msg_rng(59);
    for (int i = 0; i < 2000 && out.passed; ++i) {
        std::vector<double> values(msg_rng() % 30);
        for (auto& v : values) v = random_loss(msg_rng, (msg_rng() & 1) != 0);
        msg::ModelIdentifier id;
        for (auto& b : id.uuid) b = static_cast<uint8_t>(msg_rng());
        const uint64_t round = msg_rng() >> (msg_rng() % 64);
        const auto compact = msg::encode_global(
            msg::GlobalModelUpdate{id, round, params_for(values, cbor::Profile::Compact), true},
            cbor::Profile::Compact);
        const auto verbose = msg::encode_global(
            msg::GlobalModelUpdate{id, round, params_for(values, cbor::Profile::Verbose), true},
            cbor::Profile::Verbose);
        EXPECT(out, compact.size() <= verbose.size(), "compact larger than verbose");
    }
    return out;
}

// --- criterion 6 -----------------------------------------------------------

Outcome golden_vectors() {
    Outcome out;
    std::ifstream in(std::string(TINYFL_TEST_DATA_DIR) + "/golden_vectors.txt");
    if (!in.good()) {
        out.fail("cannot open golden_vectors.txt");
        return out;
    }
    std::string line;
    size_t count = 0;
    size_t bad = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++count;
        const size_t space = line.find(' ');
        const std::vector<uint8_t> bytes = cbor::from_hex(line.substr(0, space));
        try {
            const auto decoded = cbor::decode_value(bytes);
            if (decoded.consumed != bytes.size() ||
                cbor::diagnostic(decoded.value) != line.substr(space + 1)) {
                ++bad;
            }
        } catch (const cbor::DecodeError&) {
            ++bad;
        }
    }
    EXPECT(out, count == 1000, "expected 1000 vectors, found " + std::to_string(count));
    EXPECT(out, bad == 0, std::to_string(bad) + " vectors decoded differently");
    return out;
}

// --- criterion 7 -----------------------------------------------------------

Outcome simulation_invariants() {
    Outcome out;
    for (uint64_t seed = 1; seed <= 10 && out.passed; ++seed) {
        sim::Config cfg;
        cfg.seed = seed;
        cfg.num_clients = 4 + static_cast<uint32_t>(seed - 1);  // 4..13
        cfg.min_fraction = seed % 2 == 0 ? 0.5 : 1.0;
        cfg.rounds = 1 + static_cast<uint32_t>(seed % 5);  // 1..5
        cfg.param_count = 4 + static_cast<uint32_t>(seed % 8);
        cfg.local_epochs = 1 + static_cast<uint32_t>(seed % 3);

        // Aggregation-weight and convex-hull invariants are enforced inside
        // run_simulation; a violation would throw.
        sim::SimulationResult first;
        try {
            first = sim::run_simulation(cfg);
        } catch (const std::exception& e) {
            out.fail(std::string("seed ") + std::to_string(seed) + ": " + e.what());
            continue;
        }
        const sim::SimulationResult second = sim::run_simulation(cfg);
        EXPECT(out, first.to_json().dump() == second.to_json().dump(),
               "report differs across repeated runs, seed " + std::to_string(seed));

        uint64_t halted_before = 0;
        for (const auto& round : first.rounds) {
            EXPECT(out, round.echo_rejected.empty(), "echo mismatch reported");
            uint64_t halted_now = 0;
            for (const auto& c : round.clients) halted_now += c.halted ? 1 : 0;
            const uint64_t newly = halted_now - halted_before;
            EXPECT(out, round.bytes_down == (cfg.num_clients + newly) * round.global_update_octets,
                   "downlink bytes mismatch, seed " + std::to_string(seed) + " round " +
                       std::to_string(round.round));
            halted_before = halted_now;
        }
    }

    // 16-client upper bound of the grid.
    sim::Config big;
    big.seed = 10;
    big.num_clients = 16;
    big.min_fraction = 0.75;
    big.rounds = 5;
    big.param_count = 6;
    const auto a = sim::run_simulation(big);
    const auto b = sim::run_simulation(big);
    EXPECT(out, a.to_json().dump() == b.to_json().dump(), "16-client report differs across runs");
    return out;
}

// --- criterion 8 -----------------------------------------------------------

Outcome learner_checks() {
    Outcome out;
    std::mt19937_64 rng(61);
    const auto unit = [&] { return (static_cast<double>(rng() >> 11) * 0x1p-53) * 2.0 - 1.0; };

    // Gradient vs central finite differences, 1e-6 relative.
    for (int trial = 0; trial < 25 && out.passed; ++trial) {
        std::vector<double> model(8);
        for (auto& w : model) w = unit();
        std::vector<sim::Sample> samples(16);
        for (auto& s : samples) {
            s.input.resize(8);
            for (auto& x : s.input) x = unit();
            s.target = unit();
        }
        const auto grad = sim::mse_gradient(model, samples);
        for (size_t j = 0; j < model.size(); ++j) {
            const double h = 1e-5 * std::max(1.0, std::fabs(model[j]));
            auto shifted = model;
            shifted[j] += h;
            const double up = sim::mse_loss(shifted, samples);
            shifted[j] = model[j] - h;
            const double down = sim::mse_loss(shifted, samples);
            const double numeric = (up - down) / (2.0 * h);
            const double scale = std::max({1.0, std::fabs(grad[j]), std::fabs(numeric)});
            EXPECT(out, std::fabs(grad[j] - numeric) / scale < 1e-6, "gradient check failed");
        }
    }

    // Non-increasing training loss on zero-noise data.
    {
        std::vector<double> truth(8);
        for (auto& w : truth) w = unit();
        sim::ClientState client;
        for (int i = 0; i < 40; ++i) {
            sim::Sample s;
            s.input.resize(8);
            for (auto& x : s.input) x = unit();
            s.target = 0.0;
            for (size_t j = 0; j < 8; ++j) s.target += truth[j] * s.input[j];
            (i < 32 ? client.train_set : client.val_set).push_back(std::move(s));
        }
        client.model.assign(8, 0.0);
        double prev = sim::mse_loss(client.model, client.train_set);
        for (int epoch = 0; epoch < 60; ++epoch) {
            sim::train_one_epoch(client, 0.01, 0);
            EXPECT(out, client.train_loss <= prev, "training loss increased on zero-noise data");
            prev = client.train_loss;
        }
    }

    // The halt rule fires in a real simulation and halted clients take no
    // further gradient steps.
    {
        sim::Config cfg;
        cfg.num_clients = 4;
        cfg.min_fraction = 0.25;
        cfg.rounds = 4;
        cfg.param_count = 4;
        cfg.seed = 42;
        cfg.local_epochs = 2;
        cfg.noise_stddev = 0.0;
        const auto result = sim::run_simulation(cfg);
        bool saw_halt = false;
        std::vector<bool> halted(cfg.num_clients, false);
        for (const auto& round : result.rounds) {
            for (const auto& c : round.clients) {
                if (halted[c.id]) {
                    EXPECT(out, c.halted, "halt flag was not sticky");
                    EXPECT(out, c.samples_seen == 0, "halted client took gradient steps");
                }
                if (c.halted) saw_halt = true;
                halted[c.id] = c.halted;
            }
        }
        EXPECT(out, saw_halt, "the val<train halt rule never fired");
    }
    return out;
}

}  // namespace

int main() {
    struct Criterion {
        int number;
        const char* name;
        double budget_seconds;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "Table 1 reproduction (28 cells, +-2 only on global/10000 compact)", 1.0, table1_reproduction},
        {2, "Table 2 reproduction (CBOR/Protobuf exact, CBOR/JSON < 0.25)", 1.0, table2_reproduction},
        {3, "dataset update always fits one 127-octet frame", 0.0, dataset_update_single_frame},
        {4, "10000 randomized round trips per message per codec", 10.0, roundtrip_suites},
        {5, "compact heads are minimal; compact <= verbose", 0.0, canonical_heads},
        {6, "1000 committed golden vectors decode identically", 0.0, golden_vectors},
        {7, "simulation invariants over seeds 1..10", 30.0, simulation_invariants},
        {8, "learner gradient/monotonicity/halt checks", 0.0, learner_checks},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = criterion.run();
        } catch (const std::exception& e) {
            outcome.fail(std::string("exception: ") + e.what());
        }
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (criterion.budget_seconds > 0.0 && elapsed > criterion.budget_seconds) {
            outcome.fail("runtime " + std::to_string(elapsed) + "s exceeds " +
                         std::to_string(criterion.budget_seconds) + "s");
        }
        std::printf("[%s] criterion %d: %s (%.3fs)%s%s\n", outcome.passed ? "PASS" : "FAIL", criterion.number,
                    criterion.name, elapsed, outcome.detail.empty() ? "" : " - ", outcome.detail.c_str());
        if (!outcome.passed) ++failures;
    }
    return failures;
}
