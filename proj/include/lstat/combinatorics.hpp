#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "lstat/rational.hpp"

namespace lstat {

// An ordered list of positive parts (l_1, ..., l_m).
struct Composition {
  std::vector<int> parts;

  int total() const;
  int size() const { return static_cast<int>(parts.size()); }
  // Cumulative sums l_1, l_1 + l_2, ..., l_1 + ... + l_{m-1} (interior cuts).
  std::vector<int> cuts() const;
};

// All compositions of `total`, ordered by the bitmask of interior cuts.
std::vector<Composition> compositions(int total);

// sum_m sum_{compositions into m parts} ((-1)^{m-1} / m) * l! / (l_1! ... l_m!)
Rational comp_coeff_sum(int ell);

// (-1)^{m-1} / m * l! / prod l_i!  -- the weight a composition carries in
// the cumulant formulas.
Rational composition_weight(const Composition& c);

// #{u : 0 <= u <= n-1 and 0 <= u + s <= n-1 for every s in partial_sums}
long long clamp_count(long long n, std::span<const long long> partial_sums);

// G(k_1, ..., k_l) for zero-sum k, summing over all permutations and
// compositions. 1 <= l <= 8.
Rational g_direct(std::span<const Rational> k);
// Same quantity after re-summation over subsets A:
//   (1/4) sum_A c(|A|) c(l - |A|) |sum_{i in A} k_i|
Rational g_subset_form(std::span<const Rational> k);

// Both sides of the permutation-maximum / subset identity for zero-sum v:
//   (1/m) sum_tau max(0, v_tau(1), ..., v_tau(1) + ... + v_tau(m-1))
//   (1/4) sum_F (|F|-1)! (m-|F|-1)! |sum_{j in F} v_j|
std::pair<Rational, Rational> rs_identity_sides(std::span<const Rational> v);

// A nonzero 0/1 vector of length `length`. Bit j of the vector (1-based,
// j = 1 first) lives at mask bit (length - j), so numeric mask order is the
// lexicographic order of the bit vectors.
class Branch {
 public:
  Branch(std::uint32_t mask, int length);
  static Branch from_bits(const std::vector<int>& bits);

  std::uint32_t mask() const { return mask_; }
  int length() const { return length_; }
  int bit(int j) const;  // j in 1..length
  std::vector<int> bits() const;
  bool is_full() const { return mask_ == full_mask(length_); }
  // coordinatewise alpha <= beta with at least one strict
  bool precedes(const Branch& other) const;

  static std::uint32_t full_mask(int length) { return (std::uint32_t{1} << length) - 1; }

  friend bool operator==(const Branch&, const Branch&) = default;

 private:
  std::uint32_t mask_;
  int length_;
};

// Strictly increasing chain of branches.
class Tree {
 public:
  explicit Tree(std::vector<Branch> branches);

  const std::vector<Branch>& branches() const { return branches_; }
  int size() const { return static_cast<int>(branches_.size()); }
  int length() const { return branches_.front().length(); }
  const Branch& top() const { return branches_.back(); }

  friend bool operator==(const Tree&, const Tree&) = default;

 private:
  std::vector<Branch> branches_;
};

struct TreeFilter {
  bool size_below_length = false;  // |T| < l
  bool top_not_full = false;       // largest branch != D
  bool top_last_zero = false;      // last coordinate of the largest branch is 0
  bool accepts(const Tree& t) const;
};

// Every tree over length-l branches exactly once, ordered by (size, branch
// list). 1 <= l <= 6.
std::vector<Tree> enumerate_trees(int ell, TreeFilter filter = {});
void for_each_tree(int ell, const TreeFilter& filter, const std::function<void(const Tree&)>& visit);

// max(0, alpha . k | alpha in T)
Rational tree_maximum(const Tree& tree, std::span<const Rational> k);

// U(k) = sum_{T} (-1)^{|T|-1} max(0, alpha . k | alpha in T). 1 <= l <= 6.
Rational u_tree_sum(std::span<const Rational> k, const TreeFilter& filter = {});

// W(T) = (a2 - a1, ..., a_|T| - a1, D - a1); requires the top branch != D.
Tree rotate_tree(const Tree& tree);

}  // namespace lstat
