#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace vgcrl {

// All recoverable failures surface as this exception type. Messages carry the
// failing operation and the offending values (shapes, indices, field names).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void append_all(std::ostringstream&) {}

template <typename T, typename... Rest>
void append_all(std::ostringstream& os, const T& v, const Rest&... rest) {
  os << v;
  append_all(os, rest...);
}

template <typename... Args>
std::string concat(const Args&... args) {
  std::ostringstream os;
  append_all(os, args...);
  return os.str();
}

}  // namespace detail

template <typename... Args>
[[noreturn]] void fail(const Args&... args) {
  throw Error(detail::concat(args...));
}

}  // namespace vgcrl

#define VGCRL_CHECK(cond, ...)                  \
  do {                                          \
    if (!(cond)) ::vgcrl::fail(__VA_ARGS__);    \
  } while (0)
