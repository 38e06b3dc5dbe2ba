#include "logan/params.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "logan/errors.hpp"

namespace logan {

Tensor& ParamStore::create(const std::string& name, std::vector<std::int64_t> shape,
                           std::int64_t fan_in) {
    if (entries_.count(name))
        throw ContractError("parameter already exists: " + name);
    if (fan_in <= 0) throw ContractError("fan_in must be positive for " + name);
    std::int64_t n = 1;
    for (auto d : shape) n *= d;
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::vector<double> values(static_cast<std::size_t>(n));
    for (auto& v : values) v = rng_.uniform(-bound, bound);
    auto [it, ok] = entries_.emplace(name, Tensor::leaf(std::move(shape), std::move(values), true));
    return it->second;
}

Tensor& ParamStore::create_zeros(const std::string& name, std::vector<std::int64_t> shape) {
    if (entries_.count(name))
        throw ContractError("parameter already exists: " + name);
    auto [it, ok] = entries_.emplace(name, Tensor::zeros(std::move(shape), true));
    return it->second;
}

Tensor& ParamStore::get(const std::string& name) {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw ContractError("unknown parameter: " + name);
    return it->second;
}

const Tensor& ParamStore::get(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw ContractError("unknown parameter: " + name);
    return it->second;
}

void ParamStore::zero_grad() {
    for (auto& [name, t] : entries_) t.zero_grad();
}

// --- checkpoint io -----------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'L', 'G', 'A', 'N'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& buf, std::uint32_t v) {
    buf.push_back(static_cast<char>(v & 0xff));
    buf.push_back(static_cast<char>((v >> 8) & 0xff));
    buf.push_back(static_cast<char>((v >> 16) & 0xff));
    buf.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_f64(std::string& buf, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

struct Reader {
    const std::string& data;
    std::size_t pos = 0;

    void need(std::size_t n, const char* what) const {
        if (pos + n > data.size())
            throw FormatError(std::string("checkpoint truncated reading ") + what +
                              " at byte offset " + std::to_string(pos));
    }
    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    double f64(const char* what) {
        need(8, what);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i)
            bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(data[pos + i])) << (8 * i);
        pos += 8;
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    std::string bytes(std::size_t n, const char* what) {
        need(n, what);
        std::string out = data.substr(pos, n);
        pos += n;
        return out;
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open file: " + path);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return data;
}

}  // namespace

void write_checkpoint(const std::string& path, const std::vector<CheckpointEntry>& entries) {
    std::string buf;
    buf.append(kMagic, 4);
    put_u32(buf, kVersion);
    put_u32(buf, static_cast<std::uint32_t>(entries.size()));
    for (const auto& e : entries) {
        put_u32(buf, static_cast<std::uint32_t>(e.name.size()));
        buf.append(e.name);
        put_u32(buf, static_cast<std::uint32_t>(e.dims.size()));
        std::size_t n = 1;
        for (auto d : e.dims) {
            put_u32(buf, static_cast<std::uint32_t>(d));
            n *= static_cast<std::size_t>(d);
        }
        if (n != e.values.size())
            throw ContractError("checkpoint entry " + e.name + ": dims do not match value count");
        for (double v : e.values) put_f64(buf, v);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write file: " + path);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw FormatError("short write: " + path);
}

std::vector<CheckpointEntry> read_checkpoint(const std::string& path) {
    const std::string data = slurp(path);
    Reader r{data};
    const std::string magic = r.bytes(4, "magic");
    if (std::memcmp(magic.data(), kMagic, 4) != 0)
        throw FormatError("bad checkpoint magic in " + path + " at byte offset 0");
    const std::uint32_t version = r.u32("version");
    if (version != kVersion)
        throw FormatError("unsupported checkpoint version " + std::to_string(version));
    const std::uint32_t count = r.u32("entry count");
    std::vector<CheckpointEntry> entries;
    entries.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        CheckpointEntry e;
        const std::uint32_t name_len = r.u32("name length");
        e.name = r.bytes(name_len, "name");
        const std::uint32_t rank = r.u32("rank");
        std::size_t n = 1;
        for (std::uint32_t k = 0; k < rank; ++k) {
            std::uint32_t d = r.u32("dim");
            e.dims.push_back(static_cast<std::int64_t>(d));
            n *= d;
        }
        e.values.resize(n);
        for (std::size_t k = 0; k < n; ++k) e.values[k] = r.f64("values");
        entries.push_back(std::move(e));
    }
    if (r.pos != data.size())
        throw FormatError("trailing bytes in checkpoint " + path + " at byte offset " +
                          std::to_string(r.pos));
    return entries;
}

void save_checkpoint(const std::string& path, const ParamStore& params) {
    std::vector<CheckpointEntry> entries;
    entries.reserve(params.entries().size());
    for (const auto& [name, t] : params.entries()) {
        entries.push_back({name, t.shape(),
                           std::vector<double>(t.values().begin(), t.values().end())});
    }
    write_checkpoint(path, entries);
}

void load_checkpoint(const std::string& path, ParamStore& params) {
    for (auto& e : read_checkpoint(path)) {
        if (e.name.rfind("opt.", 0) == 0) continue;
        if (params.contains(e.name)) {
            Tensor& t = params.get(e.name);
            if (t.shape() != e.dims)
                throw DataError("checkpoint entry " + e.name + " has shape " +
                                shape_string(e.dims) + ", expected " + shape_string(t.shape()));
            std::copy(e.values.begin(), e.values.end(), t.mutable_values().begin());
        } else {
            throw DataError("checkpoint entry " + e.name + " not present in model");
        }
    }
}

// --- Adam ---------------------------------------------------------------------

void AdamOptimizer::step(ParamStore& params) {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (const auto& [name, t] : params.entries()) {
        Tensor tensor = t;
        auto values = tensor.mutable_values();
        auto grad = tensor.grad();
        auto& m = m_[name];
        auto& v = v_[name];
        if (m.empty()) m.assign(values.size(), 0.0);
        if (v.empty()) v.assign(values.size(), 0.0);
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double g = i < grad.size() ? grad[i] : 0.0;
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            values[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.epsilon);
        }
    }
}

void AdamOptimizer::append_state(std::vector<CheckpointEntry>& out) const {
    out.push_back({"opt.adam.t", {1}, {static_cast<double>(t_)}});
    for (const auto& [name, m] : m_)
        out.push_back({"opt.adam.m." + name,
                       {static_cast<std::int64_t>(m.size())}, m});
    for (const auto& [name, v] : v_)
        out.push_back({"opt.adam.v." + name,
                       {static_cast<std::int64_t>(v.size())}, v});
}

void AdamOptimizer::restore_state(const std::vector<CheckpointEntry>& entries) {
    for (const auto& e : entries) {
        if (e.name == "opt.adam.t") {
            t_ = static_cast<std::int64_t>(e.values.at(0));
        } else if (e.name.rfind("opt.adam.m.", 0) == 0) {
            m_[e.name.substr(11)] = e.values;
        } else if (e.name.rfind("opt.adam.v.", 0) == 0) {
            v_[e.name.substr(11)] = e.values;
        }
    }
}

}  // namespace logan
