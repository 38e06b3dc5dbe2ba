#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "logan/rng.hpp"
#include "logan/tensor.hpp"

namespace logan {

// Named trainable tensors. Ordered map so iteration (and therefore
// checkpoints, gradcheck reports, optimizer updates) is deterministic.
class ParamStore {
public:
    explicit ParamStore(std::uint64_t seed = 0) : rng_(seed), seed_(seed) {}

    // Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)].
    Tensor& create(const std::string& name, std::vector<std::int64_t> shape,
                   std::int64_t fan_in);
    Tensor& create_zeros(const std::string& name, std::vector<std::int64_t> shape);

    Tensor& get(const std::string& name);
    const Tensor& get(const std::string& name) const;
    bool contains(const std::string& name) const { return entries_.count(name) != 0; }

    const std::map<std::string, Tensor>& entries() const { return entries_; }

    void zero_grad();
    std::uint64_t seed() const { return seed_; }

private:
    std::map<std::string, Tensor> entries_;
    Rng rng_;
    std::uint64_t seed_;
};

// One serialized tensor inside a checkpoint file.
struct CheckpointEntry {
    std::string name;
    std::vector<std::int64_t> dims;
    std::vector<double> values;
};

// Binary checkpoint: magic "LGAN", version u32, count u32, then per entry
// name (u32 length + UTF-8 bytes), rank u32, dims u32 each, values f64
// little-endian. Round trips bit-exactly.
void write_checkpoint(const std::string& path, const std::vector<CheckpointEntry>& entries);
std::vector<CheckpointEntry> read_checkpoint(const std::string& path);

void save_checkpoint(const std::string& path, const ParamStore& params);
// Installs every parameter entry into the store; "opt." entries (optimizer
// state written by the trainer) are skipped.
void load_checkpoint(const std::string& path, ParamStore& params);

// Adam with bias correction. One state slot per parameter entry.
class AdamOptimizer {
public:
    struct Config {
        double lr = 1e-5;
        double beta1 = 0.9;
        double beta2 = 0.999;
        double epsilon = 1e-8;
    };

    AdamOptimizer() = default;
    explicit AdamOptimizer(const Config& cfg) : cfg_(cfg) {}

    void step(ParamStore& params);
    std::int64_t steps_taken() const { return t_; }

    // Serialized under "opt.adam." so training can resume bit-exactly.
    void append_state(std::vector<CheckpointEntry>& out) const;
    void restore_state(const std::vector<CheckpointEntry>& entries);

    Config& config() { return cfg_; }
    const Config& config() const { return cfg_; }

private:
    Config cfg_;
    std::int64_t t_ = 0;
    std::map<std::string, std::vector<double>> m_;
    std::map<std::string, std::vector<double>> v_;
};

}  // namespace logan
