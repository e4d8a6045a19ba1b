#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace lacclean {

inline constexpr std::uint32_t kMaxOperatorCode = 999;
inline constexpr std::uint32_t kMinLac = 1;
inline constexpr std::uint32_t kMaxLac = 65533;
inline constexpr std::uint32_t kMaxCellId = (1u << 28) - 1;

/// Cell Global Identity. mcc and mnc may be missing (anonymised traces);
/// lac and cell_id are always present.
///
/// Ordering is lexicographic on (mcc, mnc, lac, cell_id) with a missing
/// field ordered before any present value.
struct CellIdentity
{
  std::optional<std::uint16_t> mcc;
  std::optional<std::uint16_t> mnc;
  std::uint32_t lac = kMinLac;
  std::uint32_t cell_id = 0;

  friend bool operator==(const CellIdentity&, const CellIdentity&) = default;
  friend std::strong_ordering operator<=>(const CellIdentity&, const CellIdentity&) = default;

  bool is_partial() const noexcept { return !mcc || !mnc; }
};

/// True when every field lies in its admissible range.
inline bool is_valid(const CellIdentity& c) noexcept
{
  if (c.mcc && *c.mcc > kMaxOperatorCode) return false;
  if (c.mnc && *c.mnc > kMaxOperatorCode) return false;
  return c.lac >= kMinLac && c.lac <= kMaxLac && c.cell_id <= kMaxCellId;
}

std::string to_string(const CellIdentity& c);
std::ostream& operator<<(std::ostream& os, const CellIdentity& c);

/// Distinct cells in canonical order.
class CellSet
{
public:
  using const_iterator = std::vector<CellIdentity>::const_iterator;

  CellSet() = default;

  explicit CellSet(std::vector<CellIdentity> cells) : cells_(std::move(cells))
  {
    std::sort(cells_.begin(), cells_.end());
    cells_.erase(std::unique(cells_.begin(), cells_.end()), cells_.end());
  }

  const_iterator begin() const noexcept { return cells_.begin(); }
  const_iterator end() const noexcept { return cells_.end(); }
  std::size_t size() const noexcept { return cells_.size(); }
  bool empty() const noexcept { return cells_.empty(); }
  const CellIdentity& operator[](std::size_t i) const { return cells_[i]; }
  const std::vector<CellIdentity>& cells() const noexcept { return cells_; }

  bool contains(const CellIdentity& c) const
  {
    return std::binary_search(cells_.begin(), cells_.end(), c);
  }

  friend bool operator==(const CellSet&, const CellSet&) = default;

private:
  std::vector<CellIdentity> cells_;
};

} // namespace lacclean
