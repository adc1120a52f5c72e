#include "lstat/combinatorics.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdlib>
#include <numeric>

#include "lstat/errors.hpp"

namespace lstat {

namespace {

constexpr int kMaxGLength = 8;
constexpr int kMaxTreeLength = 6;
constexpr int kMaxCompCoeff = 12;

Rational sum_of(std::span<const Rational> k) {
  Rational s = 0;
  for (const auto& x : k) s += x;
  return s;
}

Rational abs_of(const Rational& q) { return sgn(q) < 0 ? Rational(-q) : q; }

// Common denominator and the integer numerators k_i * D.
std::pair<BigInt, std::vector<BigInt>> integerize(std::span<const Rational> k) {
  BigInt den = 1;
  for (const auto& x : k) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), x.get_den_mpz_t());
  std::vector<BigInt> num;
  num.reserve(k.size());
  for (const auto& x : k) num.emplace_back(x.get_num() * (den / x.get_den()));
  return {den, num};
}

// Blocks of a composition described by a bitmask over the l-1 interior cut
// positions (bit p set = cut after position p+1).
std::vector<int> parts_from_mask(std::uint32_t mask, int ell) {
  std::vector<int> parts;
  int last = 0;
  for (int p = 1; p < ell; ++p)
    if (mask & (std::uint32_t{1} << (p - 1))) {
      parts.push_back(p - last);
      last = p;
    }
  parts.push_back(ell - last);
  return parts;
}

// For each permutation of the values, accumulate max(0, prefix sums at the
// cuts of every composition) into totals[mask]. Returns the totals.
template <class Int>
std::vector<Int> permutation_cut_maxima(const std::vector<Int>& values) {
  const int ell = static_cast<int>(values.size());
  const std::uint32_t ncomp = std::uint32_t{1} << (ell - 1);
  std::vector<Int> totals(ncomp, Int(0));
  std::vector<int> perm(ell);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<Int> prefix(ell);
  std::vector<Int> best(ncomp);
  do {
    Int run = 0;
    for (int i = 0; i < ell; ++i) {
      run += values[perm[i]];
      prefix[i] = run;
    }
    best[0] = 0;
    for (std::uint32_t mask = 1; mask < ncomp; ++mask) {
      int low = std::countr_zero(mask);  // cut after position low+1
      const Int& cand = prefix[low];
      const Int& rest = best[mask & (mask - 1)];
      best[mask] = cand > rest ? cand : rest;
      totals[mask] += best[mask];
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return totals;
}

}  // namespace

// --------------------------------------------------------------- compositions

int Composition::total() const { return std::accumulate(parts.begin(), parts.end(), 0); }

std::vector<int> Composition::cuts() const {
  std::vector<int> out;
  int run = 0;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    run += parts[i];
    out.push_back(run);
  }
  return out;
}

std::vector<Composition> compositions(int total) {
  if (total < 1) throw ValidationError("compositions need a positive total");
  if (total > 24) throw ResourceError("composition count 2^(total-1) too large");
  std::vector<Composition> out;
  const std::uint32_t n = std::uint32_t{1} << (total - 1);
  out.reserve(n);
  for (std::uint32_t mask = 0; mask < n; ++mask) out.push_back({parts_from_mask(mask, total)});
  return out;
}

Rational composition_weight(const Composition& c) {
  const int m = c.size();
  BigInt denom = m;
  for (int p : c.parts) denom *= factorial(static_cast<unsigned>(p));
  Rational w(factorial(static_cast<unsigned>(c.total())), denom);
  w.canonicalize();
  return (m % 2 == 1) ? w : Rational(-w);
}

Rational comp_coeff_sum(int ell) {
  if (ell < 1) throw ValidationError("comp_coeff_sum needs l >= 1");
  if (ell > kMaxCompCoeff) throw ResourceError("comp_coeff_sum supports l <= 12");
  Rational s = 0;
  for (const auto& c : compositions(ell)) s += composition_weight(c);
  return s;
}

long long clamp_count(long long n, std::span<const long long> partial_sums) {
  if (n < 1) throw ValidationError("clamp_count needs n >= 1");
  long long hi = 0, lo = 0;
  for (long long s : partial_sums) {
    hi = std::max(hi, s);
    lo = std::max(lo, -s);
  }
  return std::max(0LL, n - hi - lo);
}

// ------------------------------------------------------------------------- G

Rational g_direct(std::span<const Rational> k) {
  const int ell = static_cast<int>(k.size());
  if (ell < 1) throw ValidationError("G needs at least one argument");
  if (ell > kMaxGLength) throw ResourceError("g_direct supports l <= 8");
  if (sum_of(k) != 0) throw ValidationError("G needs arguments summing to zero");
  if (ell == 1) return 0;

  // G is 1-homogeneous, so work with integer numerators over a common
  // denominator and divide at the end.
  auto [den, num] = integerize(k);
  BigInt abs_total = 0;
  for (const auto& x : num) abs_total += abs(x);

  std::vector<BigInt> totals;
  if (abs_total < BigInt(1) << 40) {
    std::vector<long long> small;
    for (const auto& x : num) small.push_back(x.get_si());
    for (long long t : permutation_cut_maxima(small)) totals.emplace_back(static_cast<long>(t));
  } else {
    totals = permutation_cut_maxima(num);
  }

  Rational result = 0;
  const std::uint32_t ncomp = std::uint32_t{1} << (ell - 1);
  for (std::uint32_t mask = 1; mask < ncomp; ++mask) {
    if (totals[mask] == 0) continue;
    auto parts = parts_from_mask(mask, ell);
    const int m = static_cast<int>(parts.size());
    BigInt denom = m;
    for (int p : parts) denom *= factorial(static_cast<unsigned>(p));
    Rational term(totals[mask], denom);
    term.canonicalize();
    if (m % 2 == 1) term = -term;
    result += term;
  }
  return result / Rational(den);
}

Rational g_subset_form(std::span<const Rational> k) {
  const int ell = static_cast<int>(k.size());
  if (ell < 1) throw ValidationError("G needs at least one argument");
  if (ell > kMaxGLength) throw ResourceError("g_subset_form supports l <= 8");
  if (sum_of(k) != 0) throw ValidationError("G needs arguments summing to zero");

  // c(s) = sum over set partitions of an s-set of (-1)^{r-1} (r-1)!, which
  // equals the composition sum.
  std::vector<Rational> c(ell + 1);
  for (int s = 1; s <= ell; ++s) c[s] = comp_coeff_sum(s);

  Rational total = 0;
  const std::uint32_t full = Branch::full_mask(ell);
  for (std::uint32_t a = 1; a < full; ++a) {
    int size = std::popcount(a);
    Rational weight = c[size] * c[ell - size];
    if (weight == 0) continue;
    Rational s = 0;
    for (int i = 0; i < ell; ++i)
      if (a & (std::uint32_t{1} << i)) s += k[i];
    total += weight * abs_of(s);
  }
  return total / 4;
}

std::pair<Rational, Rational> rs_identity_sides(std::span<const Rational> v) {
  const int m = static_cast<int>(v.size());
  if (m < 2) throw ValidationError("identity needs m >= 2");
  if (m > kMaxGLength) throw ResourceError("identity supports m <= 8");
  if (sum_of(v) != 0) throw ValidationError("identity needs a zero-sum vector");

  std::vector<int> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  Rational lhs = 0;
  do {
    Rational run = 0, best = 0;
    for (int i = 0; i + 1 < m; ++i) {
      run += v[perm[i]];
      if (run > best) best = run;
    }
    lhs += best;
  } while (std::next_permutation(perm.begin(), perm.end()));
  lhs /= m;

  Rational rhs = 0;
  const std::uint32_t full = Branch::full_mask(m);
  for (std::uint32_t f = 1; f < full; ++f) {
    int size = std::popcount(f);
    Rational s = 0;
    for (int i = 0; i < m; ++i)
      if (f & (std::uint32_t{1} << i)) s += v[i];
    BigInt w = factorial(static_cast<unsigned>(size - 1)) * factorial(static_cast<unsigned>(m - size - 1));
    rhs += Rational(w) * abs_of(s);
  }
  rhs /= 4;
  return {lhs, rhs};
}

// --------------------------------------------------------------------- trees

Branch::Branch(std::uint32_t mask, int length) : mask_(mask), length_(length) {
  if (length < 1 || length > 30) throw ValidationError("branch length out of range");
  if (mask == 0) throw ValidationError("branch must be nonzero");
  if (mask > full_mask(length)) throw ValidationError("branch mask wider than its length");
}

Branch Branch::from_bits(const std::vector<int>& bits) {
  std::uint32_t mask = 0;
  const int len = static_cast<int>(bits.size());
  for (int j = 0; j < len; ++j) {
    if (bits[j] != 0 && bits[j] != 1) throw ValidationError("branch entries must be 0 or 1");
    if (bits[j]) mask |= std::uint32_t{1} << (len - 1 - j);
  }
  return Branch(mask, len);
}

int Branch::bit(int j) const { return (mask_ >> (length_ - j)) & 1u; }

std::vector<int> Branch::bits() const {
  std::vector<int> out(length_);
  for (int j = 1; j <= length_; ++j) out[j - 1] = bit(j);
  return out;
}

bool Branch::precedes(const Branch& other) const {
  return length_ == other.length_ && mask_ != other.mask_ && (mask_ & ~other.mask_) == 0;
}

Tree::Tree(std::vector<Branch> branches) : branches_(std::move(branches)) {
  if (branches_.empty()) throw ValidationError("tree needs at least one branch");
  for (std::size_t i = 1; i < branches_.size(); ++i)
    if (!branches_[i - 1].precedes(branches_[i]))
      throw ValidationError("tree branches must be strictly increasing");
}

bool TreeFilter::accepts(const Tree& t) const {
  if (size_below_length && t.size() >= t.length()) return false;
  if (top_not_full && t.top().is_full()) return false;
  if (top_last_zero && t.top().bit(t.length()) != 0) return false;
  return true;
}

namespace {

void extend_chains(int ell, std::vector<std::uint32_t>& chain,
                   std::vector<std::vector<std::uint32_t>>& out) {
  out.push_back(chain);
  const std::uint32_t full = Branch::full_mask(ell);
  const std::uint32_t last = chain.back();
  // strict supersets of the last branch
  const std::uint32_t free = full & ~last;
  for (std::uint32_t add = free; add != 0; add = (add - 1) & free) {
    chain.push_back(last | add);
    extend_chains(ell, chain, out);
    chain.pop_back();
  }
}

const std::vector<Tree>& all_trees(int ell) {
  static const std::array<std::vector<Tree>, kMaxTreeLength + 1> cache = [] {
    std::array<std::vector<Tree>, kMaxTreeLength + 1> c;
    for (int len = 1; len <= kMaxTreeLength; ++len) {
      std::vector<std::vector<std::uint32_t>> chains;
      std::vector<std::uint32_t> chain;
      for (std::uint32_t first = 1; first <= Branch::full_mask(len); ++first) {
        chain.assign(1, first);
        extend_chains(len, chain, chains);
      }
      std::sort(chains.begin(), chains.end(), [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
      });
      c[len].reserve(chains.size());
      for (const auto& ch : chains) {
        std::vector<Branch> br;
        br.reserve(ch.size());
        for (auto mask : ch) br.emplace_back(mask, len);
        c[len].emplace_back(std::move(br));
      }
    }
    return c;
  }();
  return cache[ell];
}

void check_tree_length(int ell) {
  if (ell < 1) throw ValidationError("tree length must be >= 1");
  if (ell > kMaxTreeLength) throw ResourceError("tree enumeration supports l <= 6");
}

}  // namespace

void for_each_tree(int ell, const TreeFilter& filter, const std::function<void(const Tree&)>& visit) {
  check_tree_length(ell);
  for (const auto& t : all_trees(ell))
    if (filter.accepts(t)) visit(t);
}

std::vector<Tree> enumerate_trees(int ell, TreeFilter filter) {
  std::vector<Tree> out;
  for_each_tree(ell, filter, [&](const Tree& t) { out.push_back(t); });
  return out;
}

Rational tree_maximum(const Tree& tree, std::span<const Rational> k) {
  if (static_cast<int>(k.size()) != tree.length()) throw ValidationError("vector length differs from tree");
  Rational best = 0;
  for (const auto& b : tree.branches()) {
    Rational dot = 0;
    for (int j = 1; j <= b.length(); ++j)
      if (b.bit(j)) dot += k[j - 1];
    if (dot > best) best = dot;
  }
  return best;
}

Rational u_tree_sum(std::span<const Rational> k, const TreeFilter& filter) {
  const int ell = static_cast<int>(k.size());
  check_tree_length(ell);

  // alpha . k for every mask
  const std::uint32_t full = Branch::full_mask(ell);
  std::vector<Rational> dot(full + 1);
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    int low = std::countr_zero(mask);
    dot[mask] = dot[mask & (mask - 1)] + k[ell - 1 - low];
  }

  Rational total = 0;
  for (const auto& t : all_trees(ell)) {
    if (!filter.accepts(t)) continue;
    const Rational* best = nullptr;
    for (const auto& b : t.branches())
      if (best == nullptr || dot[b.mask()] > *best) best = &dot[b.mask()];
    if (sgn(*best) <= 0) continue;
    if (t.size() % 2 == 1)
      total += *best;
    else
      total -= *best;
  }
  return total;
}

Tree rotate_tree(const Tree& tree) {
  if (tree.top().is_full()) throw DomainError("rotation needs a largest branch different from D");
  const auto& br = tree.branches();
  const int len = tree.length();
  const std::uint32_t first = br.front().mask();
  std::vector<Branch> out;
  out.reserve(br.size());
  for (std::size_t i = 1; i < br.size(); ++i) out.emplace_back(br[i].mask() & ~first, len);
  out.emplace_back(Branch::full_mask(len) & ~first, len);
  return Tree(std::move(out));
}

}  // namespace lstat
