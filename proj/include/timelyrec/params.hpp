#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "timelyrec/common.hpp"

namespace timelyrec {

struct Tensor {
    std::vector<std::size_t> shape;
    Vec values;

    std::size_t size() const {
        std::size_t n = 1;
        for (std::size_t s : shape) n *= s;
        return n;
    }
};

struct AdamHyper {
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Named trainable tensors plus per-tensor Adam moments. Single writer
// during updates; read-only snapshots may be shared for evaluation.
class ParamStore {
public:
    int add(const std::string& name, std::vector<std::size_t> shape);
    int index_of(const std::string& name) const;
    int count() const { return static_cast<int>(entries_.size()); }

    const std::string& name(int idx) const { return entries_.at(static_cast<std::size_t>(idx)).name; }
    Tensor& tensor(int idx) { return entries_.at(static_cast<std::size_t>(idx)).value; }
    const Tensor& tensor(int idx) const { return entries_.at(static_cast<std::size_t>(idx)).value; }
    Tensor& tensor(const std::string& name) { return tensor(index_of(name)); }
    const Tensor& tensor(const std::string& name) const { return tensor(index_of(name)); }

    std::int64_t step_count() const { return step_; }

    // Fresh zero gradient buffers, one per parameter, shape-matched.
    std::vector<Vec> zero_gradients() const;

    // Bias-corrected Adam update in place; increments the shared step count.
    void adam_step(const std::vector<Vec>& gradients, const AdamHyper& hyper);

    // Flat parameter container: format-version byte, then per parameter
    // name, shape, little-endian float64 values. Bit-exact round trip.
    void serialize(std::ostream& out) const;
    static ParamStore deserialize(std::istream& in);

    bool bitwise_equal(const ParamStore& other) const;

private:
    struct Entry {
        std::string name;
        Tensor value;
        Vec moment1;
        Vec moment2;
    };

    std::vector<Entry> entries_;
    std::unordered_map<std::string, int> by_name_;
    std::int64_t step_ = 0;
};

// Central-difference gradient check. `loss` must be deterministic and free
// of tape state (it is called repeatedly with perturbed parameters).
// `analytic` holds one gradient buffer per parameter. Returns the maximum
// relative error, with denominator max(|a|, |b|, 1e-12).
double grad_check(ParamStore& params,
                  const std::function<double()>& loss,
                  const std::vector<Vec>& analytic,
                  double h);

// Little-endian scalar IO helpers shared with the model checkpoint header.
void write_u8(std::ostream& out, std::uint8_t v);
void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
void write_i64(std::ostream& out, std::int64_t v);
void write_f64(std::ostream& out, double v);
std::uint8_t read_u8(std::istream& in);
std::uint32_t read_u32(std::istream& in);
std::uint64_t read_u64(std::istream& in);
std::int64_t read_i64(std::istream& in);
double read_f64(std::istream& in);

}  // namespace timelyrec
