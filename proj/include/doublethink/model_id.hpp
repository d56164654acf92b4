#ifndef DOUBLETHINK_MODEL_ID_HPP
#define DOUBLETHINK_MODEL_ID_HPP

#include <bit>
#include <cstdint>
#include <vector>

namespace doublethink {

/// Bit-vector over the candidate variables: bit j set means beta_j is free.
/// Zero is the grand null model.
class ModelId {
 public:
  using Bits = std::uint64_t;
  static constexpr int kMaxVariables = 63;

  constexpr ModelId() = default;
  constexpr explicit ModelId(Bits bits) : bits_(bits) {}

  static ModelId full(int nu) { return ModelId(nu >= 64 ? ~Bits{0} : (Bits{1} << nu) - 1); }
  static ModelId from_indices(const std::vector<int>& idx) {
    Bits b = 0;
    for (int j : idx) b |= Bits{1} << j;
    return ModelId(b);
  }

  constexpr Bits bits() const { return bits_; }
  constexpr int size() const { return std::popcount(bits_); }
  constexpr bool contains(int j) const { return (bits_ >> j) & 1u; }
  constexpr bool is_null() const { return bits_ == 0; }
  constexpr bool subset_of(ModelId other) const { return (bits_ & ~other.bits_) == 0; }
  constexpr bool intersects(ModelId other) const { return (bits_ & other.bits_) != 0; }

  constexpr ModelId with(int j) const { return ModelId(bits_ | (Bits{1} << j)); }
  constexpr ModelId without(int j) const { return ModelId(bits_ & ~(Bits{1} << j)); }

  std::vector<int> indices() const {
    std::vector<int> out;
    out.reserve(size());
    for (Bits b = bits_; b; b &= b - 1) out.push_back(std::countr_zero(b));
    return out;
  }

  friend constexpr bool operator==(ModelId, ModelId) = default;
  friend constexpr auto operator<=>(ModelId, ModelId) = default;

 private:
  Bits bits_ = 0;
};

}  // namespace doublethink

#endif  // DOUBLETHINK_MODEL_ID_HPP
