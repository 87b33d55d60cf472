#include "dgnn/system.hpp"

#include <cmath>
#include <string>

#include "dgnn/error.hpp"

namespace dgnn {

void AtomicSystem::validate(bool require_components) const {
  const auto fail = [this](const std::string& why) {
    throw ValidationError("system '" + id + "': " + why);
  };
  const auto n = atomic_numbers.size();
  if (positions.size() != n || tags.size() != n) {
    fail("atomic_numbers/positions/tags lengths differ (" + std::to_string(n) + ", " +
         std::to_string(positions.size()) + ", " + std::to_string(tags.size()) + ")");
  }
  bool has_ads = false, has_cat = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (atomic_numbers[i] < 1 || atomic_numbers[i] > 100) {
      fail("atomic number " + std::to_string(atomic_numbers[i]) + " at atom " + std::to_string(i) +
           " outside [1, 100]");
    }
    if (!is_adsorbate(tags[i]) && !is_catalyst(tags[i])) {
      fail("tag " + std::to_string(tags[i]) + " at atom " + std::to_string(i) + " not in {0, 1, 2}");
    }
    has_ads = has_ads || is_adsorbate(tags[i]);
    has_cat = has_cat || is_catalyst(tags[i]);
    for (double x : positions[i]) {
      if (!std::isfinite(x)) fail("non-finite position at atom " + std::to_string(i));
    }
  }
  if (n == 0) fail("no atoms");
  if (require_components && !has_ads) fail("no adsorbate (tag 2) atoms");
  if (require_components && !has_cat) fail("no catalyst (tag 0/1) atoms");
  if (cell) {
    for (const auto& row : *cell)
      for (double x : row)
        if (!std::isfinite(x)) fail("non-finite cell entry");
  }
  if (target_energy && !std::isfinite(*target_energy)) fail("non-finite target energy");
}

}  // namespace dgnn
