#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "causalid/error.hpp"
#include "causalid/graph.hpp"

namespace causalid {

/// Variable name -> 0-based value index.
using Assignment = std::map<std::string, int>;

inline constexpr double kNormalizationTolerance = 1e-12;
inline constexpr double kDistributionTolerance = 1e-9;

/// Dense probability mass function over a finite set of discrete variables.
/// Cells are laid out mixed-radix over the variable order with the last
/// variable varying fastest.
class JointTable {
 public:
  JointTable(std::vector<std::string> variables, std::vector<int> cardinalities, std::vector<double> mass)
      : variables_(std::move(variables)), cards_(std::move(cardinalities)), mass_(std::move(mass)) {
    if (variables_.size() != cards_.size()) throw Error("joint table: one cardinality per variable required");
    std::size_t cells = 1;
    for (std::size_t i = 0; i < variables_.size(); ++i) {
      if (cards_[i] < 2) throw Error("joint table: cardinality of '" + variables_[i] + "' must be >= 2");
      for (std::size_t j = 0; j < i; ++j)
        if (variables_[j] == variables_[i]) throw Error("joint table: duplicate variable '" + variables_[i] + "'");
      cells *= static_cast<std::size_t>(cards_[i]);
    }
    if (mass_.size() != cells) throw Error("joint table: expected " + std::to_string(cells) + " cells");
    double total = 0.0;
    for (double m : mass_) {
      if (!(m >= 0.0)) throw Error("joint table: negative or NaN mass");
      total += m;
    }
    if (std::abs(total - 1.0) > kNormalizationTolerance)
      throw Error("joint table: masses sum to " + std::to_string(total));
  }

  const std::vector<std::string>& variables() const noexcept { return variables_; }
  const std::vector<int>& cardinalities() const noexcept { return cards_; }
  const std::vector<double>& mass() const noexcept { return mass_; }
  std::size_t size() const noexcept { return mass_.size(); }

  std::optional<std::size_t> position(const std::string& name) const {
    for (std::size_t i = 0; i < variables_.size(); ++i)
      if (variables_[i] == name) return i;
    return std::nullopt;
  }

  int cardinality(const std::string& name) const {
    auto pos = position(name);
    if (!pos) throw Error("joint table: unknown variable '" + name + "'");
    return cards_[*pos];
  }

  /// Mass of one full assignment.
  double at(const Assignment& values) const {
    std::size_t index = 0;
    for (std::size_t i = 0; i < variables_.size(); ++i) {
      auto it = values.find(variables_[i]);
      if (it == values.end()) throw Error("joint table: assignment misses '" + variables_[i] + "'");
      if (it->second < 0 || it->second >= cards_[i]) throw Error("joint table: value out of range");
      index = index * static_cast<std::size_t>(cards_[i]) + static_cast<std::size_t>(it->second);
    }
    return mass_[index];
  }

 private:
  std::vector<std::string> variables_;
  std::vector<int> cards_;
  std::vector<double> mass_;
};

/// Decodes a cell index into per-variable values (last variable fastest).
inline std::vector<int> decode_index(std::size_t index, const std::vector<int>& cards) {
  std::vector<int> values(cards.size());
  for (std::size_t i = cards.size(); i-- > 0;) {
    values[i] = static_cast<int>(index % static_cast<std::size_t>(cards[i]));
    index /= static_cast<std::size_t>(cards[i]);
  }
  return values;
}

/// Sums out every variable not in `keep`; kept variables retain their order.
inline JointTable marginalize(const JointTable& joint, const VarSet& keep) {
  for (const auto& name : keep)
    if (!joint.position(name)) throw Error("marginalize: unknown variable '" + name + "'");
  std::vector<std::size_t> kept;
  std::vector<std::string> names;
  std::vector<int> cards;
  for (std::size_t i = 0; i < joint.variables().size(); ++i) {
    if (keep.count(joint.variables()[i])) {
      kept.push_back(i);
      names.push_back(joint.variables()[i]);
      cards.push_back(joint.cardinalities()[i]);
    }
  }
  std::size_t cells = 1;
  for (int c : cards) cells *= static_cast<std::size_t>(c);
  std::vector<double> mass(cells, 0.0);
  for (std::size_t cell = 0; cell < joint.size(); ++cell) {
    const auto values = decode_index(cell, joint.cardinalities());
    std::size_t target = 0;
    for (std::size_t k = 0; k < kept.size(); ++k)
      target = target * static_cast<std::size_t>(cards[k]) + static_cast<std::size_t>(values[kept[k]]);
    mass[target] += joint.mass()[cell];
  }
  return JointTable(std::move(names), std::move(cards), std::move(mass));
}

/// Sup-norm distance between two equally sized vectors.
inline double sup_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw Error("sup_distance: size mismatch");
  double out = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) out = std::max(out, std::abs(a[i] - b[i]));
  return out;
}

}  // namespace causalid
