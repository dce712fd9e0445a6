#include "klcpd/params.hpp"

#include "klcpd/error.hpp"

namespace klcpd {

Parameter& ParamStore::add(const std::string& name, Matrix init) {
  if (index_.contains(name)) throw ParameterError("duplicate parameter '" + name + "'");
  if (!init.all_finite()) throw NumericError("parameter '" + name + "' initialised non-finite");
  Parameter p;
  p.name = name;
  p.grad = Matrix(init.rows(), init.cols());
  p.moment1 = Matrix(init.rows(), init.cols());
  p.moment2 = Matrix(init.rows(), init.cols());
  p.value = std::move(init);
  index_.emplace(name, params_.size());
  params_.push_back(std::move(p));
  return params_.back();
}

Parameter& ParamStore::add_uniform(const std::string& name, std::size_t rows, std::size_t cols,
                                   double scale, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = dist(rng);
  return add(name, std::move(m));
}

Parameter& ParamStore::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return params_[it->second];
}

const Parameter& ParamStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return params_[it->second];
}

std::size_t ParamStore::total_size() const noexcept {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p.grad.fill(0.0);
}

void ParamStore::reset_optimizer() {
  for (auto& p : params_) {
    p.moment1.fill(0.0);
    p.moment2.fill(0.0);
  }
  step = 0;
}

std::vector<double> ParamStore::flat_values() const {
  std::vector<double> out;
  out.reserve(total_size());
  for (const auto& p : params_) out.insert(out.end(), p.value.storage().begin(), p.value.storage().end());
  return out;
}

std::vector<double> ParamStore::flat_grads() const {
  std::vector<double> out;
  out.reserve(total_size());
  for (const auto& p : params_) out.insert(out.end(), p.grad.storage().begin(), p.grad.storage().end());
  return out;
}

void ParamStore::set_flat_values(const std::vector<double>& flat) {
  if (flat.size() != total_size()) throw ShapeError("set_flat_values: size mismatch");
  std::size_t k = 0;
  for (auto& p : params_)
    for (double& v : p.value.values()) v = flat[k++];
}

}  // namespace klcpd
