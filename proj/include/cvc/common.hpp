#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace cvc {

using Complex = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

constexpr Complex kI{0.0, 1.0};

/// Input violates a domain contract in a way that makes the result meaningless
/// (vanishing normalizer, linearly dependent mean vectors, ...).
class degenerate_input : public std::runtime_error {
public:
  explicit degenerate_input(const std::string& what) : std::runtime_error(what) {}
};

/// Operation is defined but this implementation refuses the requested size.
class unsupported_size : public std::runtime_error {
public:
  explicit unsupported_size(const std::string& what) : std::runtime_error(what) {}
};

/// Configuration would allocate more state than the resource guard allows.
class resource_refusal : public std::runtime_error {
public:
  explicit resource_refusal(const std::string& what) : std::runtime_error(what) {}
};

/// Truncated multimode Fock space: `cutoff` levels per mode, `modes` modes.
struct HilbertSpec {
  int cutoff = 0;  // Fock levels 0..cutoff-1
  int modes = 1;

  HilbertSpec() = default;
  HilbertSpec(int cutoff_, int modes_) : cutoff(cutoff_), modes(modes_) {
    if (cutoff < 2) throw std::invalid_argument("HilbertSpec: cutoff must be >= 2");
    if (modes < 1) throw std::invalid_argument("HilbertSpec: modes must be >= 1");
    // dim() throws on overflow
    (void)dim();
  }

  /// Total dimension cutoff^modes; throws if not representable.
  long long dim() const {
    long long d = 1;
    for (int j = 0; j < modes; ++j) {
      if (d > (1LL << 62) / cutoff)
        throw std::invalid_argument("HilbertSpec: cutoff^modes overflows");
      d *= cutoff;
    }
    return d;
  }

  bool operator==(const HilbertSpec& o) const {
    return cutoff == o.cutoff && modes == o.modes;
  }
  bool operator!=(const HilbertSpec& o) const { return !(*this == o); }
};

}  // namespace cvc
