#include "timelyrec/params.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

namespace timelyrec {

int ParamStore::add(const std::string& name, std::vector<std::size_t> shape) {
    if (by_name_.count(name))
        throw ContractError("ParamStore::add: duplicate parameter " + name);
    Entry e;
    e.name = name;
    e.value.shape = std::move(shape);
    e.value.values.assign(e.value.size(), 0.0);
    e.moment1.assign(e.value.size(), 0.0);
    e.moment2.assign(e.value.size(), 0.0);
    entries_.push_back(std::move(e));
    const int idx = static_cast<int>(entries_.size()) - 1;
    by_name_[name] = idx;
    return idx;
}

int ParamStore::index_of(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end())
        throw ContractError("ParamStore: unknown parameter " + name);
    return it->second;
}

std::vector<Vec> ParamStore::zero_gradients() const {
    std::vector<Vec> grads(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i)
        grads[i].assign(entries_[i].value.values.size(), 0.0);
    return grads;
}

void ParamStore::adam_step(const std::vector<Vec>& gradients, const AdamHyper& hyper) {
    if (gradients.size() != entries_.size())
        throw ContractError("adam_step: gradient buffer count mismatch");
    ++step_;
    const double bc1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(step_));
    for (std::size_t p = 0; p < entries_.size(); ++p) {
        Entry& e = entries_[p];
        const Vec& g = gradients[p];
        if (g.size() != e.value.values.size())
            throw ContractError("adam_step: gradient shape mismatch for " + e.name);
        for (std::size_t i = 0; i < g.size(); ++i) {
            e.moment1[i] = hyper.beta1 * e.moment1[i] + (1.0 - hyper.beta1) * g[i];
            e.moment2[i] = hyper.beta2 * e.moment2[i] + (1.0 - hyper.beta2) * g[i] * g[i];
            const double m_hat = e.moment1[i] / bc1;
            const double v_hat = e.moment2[i] / bc2;
            e.value.values[i] -=
                hyper.learning_rate * m_hat / (std::sqrt(v_hat) + hyper.epsilon);
        }
    }
}

namespace {

constexpr std::uint8_t kContainerVersion = 1;

void write_bytes(std::ostream& out, const void* data, std::size_t n) {
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    if (!out) throw IoError("write failed");
}

void read_bytes(std::istream& in, void* data, std::size_t n) {
    in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (in.gcount() != static_cast<std::streamsize>(n))
        throw IoError("unexpected end of stream");
}

}  // namespace

void write_u8(std::ostream& out, std::uint8_t v) { write_bytes(out, &v, 1); }

void write_u32(std::ostream& out, std::uint32_t v) {
    std::uint8_t b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    write_bytes(out, b, 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
    std::uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    write_bytes(out, b, 8);
}

void write_i64(std::ostream& out, std::int64_t v) {
    write_u64(out, static_cast<std::uint64_t>(v));
}

void write_f64(std::ostream& out, double v) {
    write_u64(out, std::bit_cast<std::uint64_t>(v));
}

std::uint8_t read_u8(std::istream& in) {
    std::uint8_t v;
    read_bytes(in, &v, 1);
    return v;
}

std::uint32_t read_u32(std::istream& in) {
    std::uint8_t b[4];
    read_bytes(in, b, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t read_u64(std::istream& in) {
    std::uint8_t b[8];
    read_bytes(in, b, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

std::int64_t read_i64(std::istream& in) {
    return static_cast<std::int64_t>(read_u64(in));
}

double read_f64(std::istream& in) {
    return std::bit_cast<double>(read_u64(in));
}

void ParamStore::serialize(std::ostream& out) const {
    write_u8(out, kContainerVersion);
    write_u32(out, static_cast<std::uint32_t>(entries_.size()));
    for (const Entry& e : entries_) {
        write_u32(out, static_cast<std::uint32_t>(e.name.size()));
        write_bytes(out, e.name.data(), e.name.size());
        write_u32(out, static_cast<std::uint32_t>(e.value.shape.size()));
        for (std::size_t s : e.value.shape) write_u64(out, s);
        for (double v : e.value.values) write_f64(out, v);
    }
}

ParamStore ParamStore::deserialize(std::istream& in) {
    if (read_u8(in) != kContainerVersion)
        throw IoError("parameter container: unsupported format version");
    ParamStore store;
    const std::uint32_t count = read_u32(in);
    for (std::uint32_t p = 0; p < count; ++p) {
        const std::uint32_t name_len = read_u32(in);
        std::string name(name_len, '\0');
        read_bytes(in, name.data(), name_len);
        const std::uint32_t ndim = read_u32(in);
        std::vector<std::size_t> shape(ndim);
        for (std::uint32_t i = 0; i < ndim; ++i)
            shape[i] = static_cast<std::size_t>(read_u64(in));
        const int idx = store.add(name, std::move(shape));
        Vec& values = store.tensor(idx).values;
        for (double& v : values) v = read_f64(in);
    }
    return store;
}

bool ParamStore::bitwise_equal(const ParamStore& other) const {
    if (entries_.size() != other.entries_.size()) return false;
    for (std::size_t p = 0; p < entries_.size(); ++p) {
        const Entry& a = entries_[p];
        const Entry& b = other.entries_[p];
        if (a.name != b.name || a.value.shape != b.value.shape) return false;
        if (std::memcmp(a.value.values.data(), b.value.values.data(),
                        a.value.values.size() * sizeof(double)) != 0)
            return false;
    }
    return true;
}

double grad_check(ParamStore& params,
                  const std::function<double()>& loss,
                  const std::vector<Vec>& analytic,
                  double h) {
    if (analytic.size() != static_cast<std::size_t>(params.count()))
        throw ContractError("grad_check: gradient buffer count mismatch");
    double max_rel = 0.0;
    for (int p = 0; p < params.count(); ++p) {
        Vec& values = params.tensor(p).values;
        if (analytic[static_cast<std::size_t>(p)].size() != values.size())
            throw ContractError("grad_check: gradient shape mismatch");
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double saved = values[i];
            values[i] = saved + h;
            const double up = loss();
            values[i] = saved - h;
            const double down = loss();
            values[i] = saved;
            const double numeric = (up - down) / (2.0 * h);
            const double a = analytic[static_cast<std::size_t>(p)][i];
            const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-12});
            max_rel = std::max(max_rel, std::fabs(a - numeric) / denom);
        }
    }
    return max_rel;
}

}  // namespace timelyrec
