#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <optional>
#include <string_view>

namespace motiv {

// Canonical order: virtue then vice, pair by pair.
enum class MoralFrame : std::uint8_t {
  kCare,
  kHarm,
  kLoyalty,
  kBetrayal,
  kAuthority,
  kSubversion,
  kPurity,
  kDegradation,
  kFairness,
  kInjustice,
  kFreedom,
  kOppression,
};

inline constexpr std::size_t kFrameCount = 12;

enum class Polarity : std::uint8_t { kVirtue, kVice };

struct FrameInfo {
  MoralFrame frame;
  std::string_view name;
  Polarity polarity;
  int pair_id;  // 1..6
};

inline constexpr std::array<FrameInfo, kFrameCount> kFrames{{
    {MoralFrame::kCare, "Care", Polarity::kVirtue, 1},
    {MoralFrame::kHarm, "Harm", Polarity::kVice, 1},
    {MoralFrame::kLoyalty, "Loyalty", Polarity::kVirtue, 2},
    {MoralFrame::kBetrayal, "Betrayal", Polarity::kVice, 2},
    {MoralFrame::kAuthority, "Authority", Polarity::kVirtue, 3},
    {MoralFrame::kSubversion, "Subversion", Polarity::kVice, 3},
    {MoralFrame::kPurity, "Purity", Polarity::kVirtue, 4},
    {MoralFrame::kDegradation, "Degradation", Polarity::kVice, 4},
    {MoralFrame::kFairness, "Fairness", Polarity::kVirtue, 5},
    {MoralFrame::kInjustice, "Injustice", Polarity::kVice, 5},
    {MoralFrame::kFreedom, "Freedom", Polarity::kVirtue, 6},
    {MoralFrame::kOppression, "Oppression", Polarity::kVice, 6},
}};

constexpr std::size_t index_of(MoralFrame f) { return static_cast<std::size_t>(f); }
constexpr const FrameInfo& info(MoralFrame f) { return kFrames[index_of(f)]; }
constexpr std::string_view name_of(MoralFrame f) { return info(f).name; }

/// Case-insensitive lookup of a canonical frame name.
std::optional<MoralFrame> parse_frame(std::string_view name);

/// Set of frames a tweet expresses.
class FrameSet {
 public:
  FrameSet() = default;

  void insert(MoralFrame f) { bits_.set(index_of(f)); }
  bool contains(MoralFrame f) const { return bits_.test(index_of(f)); }
  bool empty() const { return bits_.none(); }
  std::size_t size() const { return bits_.count(); }

  bool operator==(const FrameSet&) const = default;

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (const auto& fi : kFrames) {
      if (contains(fi.frame)) fn(fi.frame);
    }
  }

 private:
  std::bitset<kFrameCount> bits_;
};

}  // namespace motiv
