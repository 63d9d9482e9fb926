#pragma once

#include <span>
#include <stdexcept>
#include <string>

namespace ionboost {

// Binary class label; always -1 or +1.
using Label = int;

// Thrown when input data (files, panels) is malformed or inconsistent.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// sign() with sign(0) = +1.
constexpr Label sign_label(double v) noexcept { return v >= 0.0 ? 1 : -1; }

constexpr bool is_label(int v) noexcept { return v == 1 || v == -1; }

// XOR_2(a, b) = -1 if a*b >= 0, +1 otherwise.
constexpr Label xor2(double a, double b) noexcept { return a * b >= 0.0 ? -1 : 1; }

// Recursive k-XOR: XOR_k(x_1..x_k) = XOR_2(XOR_{k-1}(x_1..x_{k-1}), x_k).
inline Label xor_label(std::span<const double> x) {
  if (x.size() < 2) throw std::invalid_argument("xor_label: k must be >= 2, got " + std::to_string(x.size()));
  Label acc = xor2(x[0], x[1]);
  for (std::size_t i = 2; i < x.size(); ++i) acc = xor2(static_cast<double>(acc), x[i]);
  return acc;
}

}  // namespace ionboost
