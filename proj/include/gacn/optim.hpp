#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>

#include "gacn/diff.hpp"

namespace gacn {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with one moment pair and step counter per named parameter. A step whose
// gradient is exactly zero everywhere is skipped entirely (no moment decay, no
// move), so frozen or untouched parameter groups stay bitwise unchanged.
class Adam {
 public:
  explicit Adam(AdamOptions options = {}) : opt_(options) {}

  // Returns whether the parameter moved.
  bool step(const std::string& name, diff::Matrix& param, const diff::Matrix& grad);

  const AdamOptions& options() const noexcept { return opt_; }
  std::uint64_t steps(const std::string& name) const;

  void save(std::ostream& os) const;
  void load(std::istream& is, const std::string& source = "optimizer");

 private:
  struct Slot {
    diff::Matrix m;
    diff::Matrix v;
    std::uint64_t t = 0;
  };
  AdamOptions opt_;
  std::map<std::string, Slot> slots_;
};

}  // namespace gacn
