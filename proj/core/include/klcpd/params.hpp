#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "klcpd/matrix.hpp"

namespace klcpd {

/// One named trainable tensor with its gradient and optimizer moments.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix moment1;  // Adam first moment
  Matrix moment2;  // Adam second moment / RMSProp mean square
};

/// Ordered collection of parameters. Element addresses are stable for the
/// lifetime of the store, so graphs may bind to them directly.
class ParamStore {
 public:
  Parameter& add(const std::string& name, Matrix init);
  /// Uniform init in [-scale, scale]; used for weights.
  Parameter& add_uniform(const std::string& name, std::size_t rows, std::size_t cols, double scale,
                         std::mt19937_64& rng);

  [[nodiscard]] bool contains(const std::string& name) const { return index_.contains(name); }
  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;

  [[nodiscard]] std::size_t count() const noexcept { return params_.size(); }
  [[nodiscard]] std::size_t total_size() const noexcept;
  [[nodiscard]] bool empty() const noexcept { return params_.empty(); }

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grad();
  /// Resets moments and the step counter.
  void reset_optimizer();

  /// Number of optimizer steps taken (drives Adam bias correction).
  std::uint64_t step = 0;

  /// Flattened copy of all parameter values in insertion order.
  [[nodiscard]] std::vector<double> flat_values() const;
  [[nodiscard]] std::vector<double> flat_grads() const;
  void set_flat_values(const std::vector<double>& flat);

 private:
  std::deque<Parameter> params_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace klcpd
