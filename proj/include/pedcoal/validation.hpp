#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace pedcoal {

struct ValidationCheck {
  std::string name;
  bool passed = false;
  std::string detail;  // the numbers behind the verdict
};

struct ValidationReport {
  std::uint64_t seed = 0;
  std::vector<ValidationCheck> checks;

  bool all_passed() const;
  std::string to_json() const;
};

/// Runs the whole acceptance battery, one check per criterion, fully
/// determined by `seed`. The callback (when set) sees each check as it
/// finishes, so a driver can stream progress lines.
ValidationReport run_validation(std::uint64_t seed,
                                const std::function<void(const ValidationCheck&)>& progress = {});

}  // namespace pedcoal
