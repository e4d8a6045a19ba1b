#include "lacclean/cell.hpp"

#include <fmt/format.h>

namespace lacclean {

std::string to_string(const CellIdentity& c)
{
  auto opt = [](const std::optional<std::uint16_t>& v) { return v ? std::to_string(*v) : std::string("*"); };
  return fmt::format("{}-{}-{}-{}", opt(c.mcc), opt(c.mnc), c.lac, c.cell_id);
}

std::ostream& operator<<(std::ostream& os, const CellIdentity& c)
{
  return os << to_string(c);
}

} // namespace lacclean
