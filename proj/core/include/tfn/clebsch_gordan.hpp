#pragma once

#include <map>
#include <tuple>
#include <vector>

#include "tfn/nd_array.hpp"

namespace tfn::so3 {

/// Complex-basis Clebsch-Gordan coefficient <l1 m1 l2 m2 | l m>
/// (Condon-Shortley convention, Racah closed form).
double clebsch_gordan_complex(int l1, int m1, int l2, int m2, int l, int m);

/// Real-basis Clebsch-Gordan coefficients for every admissible
/// (l_out, l_a, l_b) triple with all orders <= l_max.
///
/// Built by conjugating the complex coefficients with the unitary
/// complex-to-real spherical-harmonic change of basis.  Blocks with
/// l_out + l_a + l_b odd come out purely imaginary under that conjugation and
/// are rotated onto the real axis by a global -i per block (the intertwiner
/// between real irreps is unique up to scale, so this is a sign convention,
/// not an approximation).  The discarded residue is tracked and construction
/// throws if it ever reaches 1e-10.
///
/// Block layout: [2*l_out+1, 2*l_a+1, 2*l_b+1], m indices ascending from -l.
class CGTable {
 public:
  explicit CGTable(int l_max);

  int l_max() const { return l_max_; }

  /// Selection rule |l_a - l_b| <= l_out <= l_a + l_b (and all within l_max).
  bool has_block(int l_out, int l_a, int l_b) const;

  /// Throws std::out_of_range when the selection rule excludes the triple.
  const NdArray& block(int l_out, int l_a, int l_b) const;

  /// Single coefficient; zero outside the selection rule.
  double coefficient(int l_out, int m_out, int l_a, int m_a, int l_b, int m_b) const;

  /// Largest magnitude discarded when realizing the blocks.
  double max_imag_residue() const { return max_residue_; }

  struct Key {
    int l_out, l_a, l_b;
  };
  std::vector<Key> keys() const;

 private:
  int l_max_;
  double max_residue_ = 0.0;
  std::map<std::tuple<int, int, int>, NdArray> blocks_;
};

inline CGTable clebsch_gordan_table(int l_max) { return CGTable(l_max); }

}  // namespace tfn::so3
