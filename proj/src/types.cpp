#include "contactsim/types.hpp"

#include <charconv>

namespace contactsim {

std::string format_double(double value) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

}  // namespace contactsim
