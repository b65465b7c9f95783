#include "vgcrl/rng.hpp"

#include <sstream>

#include "vgcrl/common.hpp"

namespace vgcrl {

std::string Rng::save_state() const {
  std::ostringstream os;
  os << gen_;
  return os.str();
}

void Rng::load_state(const std::string& text) {
  std::istringstream is(text);
  is >> gen_;
  VGCRL_CHECK(!is.fail(), "Rng::load_state: malformed generator state");
}

}  // namespace vgcrl
