#include "tfn/clebsch_gordan.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace tfn::so3 {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

/// Nonzero entries of one row of the unitary complex->real SH change of
/// basis U^(l): Y_real_m = sum_mu U[m][mu] Y_complex_mu.
struct URow {
  int mu[2];
  std::complex<double> c[2];
  int count;
};

URow u_row(int m) {
  using namespace std::complex_literals;
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  URow row{};
  if (m == 0) {
    row.mu[0] = 0;
    row.c[0] = 1.0;
    row.count = 1;
  } else if (m > 0) {
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    row.mu[0] = -m;
    row.c[0] = inv_sqrt2;
    row.mu[1] = m;
    row.c[1] = sign * inv_sqrt2;
    row.count = 2;
  } else {
    const int mm = -m;
    const double sign = (mm % 2 == 0) ? 1.0 : -1.0;
    row.mu[0] = -mm;
    row.c[0] = 1i * inv_sqrt2;
    row.mu[1] = mm;
    row.c[1] = -1i * sign * inv_sqrt2;
    row.count = 2;
  }
  return row;
}

}  // namespace

double clebsch_gordan_complex(int l1, int m1, int l2, int m2, int l, int m) {
  if (m1 + m2 != m) return 0.0;
  if (l < std::abs(l1 - l2) || l > l1 + l2) return 0.0;
  if (std::abs(m1) > l1 || std::abs(m2) > l2 || std::abs(m) > l) return 0.0;

  const double delta = factorial(l1 + l2 - l) * factorial(l1 - l2 + l) * factorial(-l1 + l2 + l) /
                       factorial(l1 + l2 + l + 1);
  const double pre = std::sqrt((2.0 * l + 1.0) * delta) *
                     std::sqrt(factorial(l1 + m1) * factorial(l1 - m1) * factorial(l2 + m2) *
                               factorial(l2 - m2) * factorial(l + m) * factorial(l - m));

  const int k_lo = std::max({0, l2 - l - m1, l1 + m2 - l});
  const int k_hi = std::min({l1 + l2 - l, l1 - m1, l2 + m2});
  double sum = 0.0;
  for (int k = k_lo; k <= k_hi; ++k) {
    const double term = factorial(k) * factorial(l1 + l2 - l - k) * factorial(l1 - m1 - k) *
                        factorial(l2 + m2 - k) * factorial(l - l2 + m1 + k) * factorial(l - l1 - m2 + k);
    sum += ((k % 2 == 0) ? 1.0 : -1.0) / term;
  }
  return pre * sum;
}

CGTable::CGTable(int l_max) : l_max_(l_max) {
  if (l_max < 0) throw std::invalid_argument("CGTable: negative l_max");
  for (int lo = 0; lo <= l_max; ++lo) {
    for (int la = 0; la <= l_max; ++la) {
      for (int lb = 0; lb <= l_max; ++lb) {
        if (lo < std::abs(la - lb) || lo > la + lb) continue;

        const int no = 2 * lo + 1, na = 2 * la + 1, nb = 2 * lb + 1;
        std::vector<std::complex<double>> cplx(static_cast<size_t>(no * na * nb));
        for (int mo = -lo; mo <= lo; ++mo) {
          const URow uo = u_row(mo);
          for (int ma = -la; ma <= la; ++ma) {
            const URow ua = u_row(ma);
            for (int mb = -lb; mb <= lb; ++mb) {
              const URow ub = u_row(mb);
              std::complex<double> acc = 0.0;
              for (int i = 0; i < uo.count; ++i)
                for (int j = 0; j < ua.count; ++j)
                  for (int k = 0; k < ub.count; ++k) {
                    const double cg = clebsch_gordan_complex(la, ua.mu[j], lb, ub.mu[k], lo, uo.mu[i]);
                    if (cg != 0.0) acc += uo.c[i] * std::conj(ua.c[j]) * std::conj(ub.c[k]) * cg;
                  }
              cplx[static_cast<size_t>(((mo + lo) * na + (ma + la)) * nb + (mb + lb))] = acc;
            }
          }
        }

        double max_re = 0.0, max_im = 0.0;
        for (const auto& z : cplx) {
          max_re = std::max(max_re, std::abs(z.real()));
          max_im = std::max(max_im, std::abs(z.imag()));
        }
        // even l sum -> real block; odd l sum -> imaginary block, realized
        // by multiplying with -i
        const bool take_real = max_re >= max_im;
        const double residue = take_real ? max_im : max_re;
        max_residue_ = std::max(max_residue_, residue);
        if (residue >= 1e-10) {
          throw std::runtime_error("CGTable: block (" + std::to_string(lo) + "," + std::to_string(la) +
                                   "," + std::to_string(lb) + ") is neither real nor imaginary, residue " +
                                   std::to_string(residue));
        }

        NdArray block({no, na, nb});
        for (int64_t i = 0; i < block.size(); ++i) {
          const auto& z = cplx[static_cast<size_t>(i)];
          block[i] = take_real ? z.real() : z.imag();
        }
        blocks_.emplace(std::make_tuple(lo, la, lb), std::move(block));
      }
    }
  }
}

bool CGTable::has_block(int l_out, int l_a, int l_b) const {
  return blocks_.count(std::make_tuple(l_out, l_a, l_b)) > 0;
}

const NdArray& CGTable::block(int l_out, int l_a, int l_b) const {
  const auto it = blocks_.find(std::make_tuple(l_out, l_a, l_b));
  if (it == blocks_.end()) {
    throw std::out_of_range("CGTable: no block (" + std::to_string(l_out) + "," + std::to_string(l_a) +
                            "," + std::to_string(l_b) + ")");
  }
  return it->second;
}

double CGTable::coefficient(int l_out, int m_out, int l_a, int m_a, int l_b, int m_b) const {
  if (!has_block(l_out, l_a, l_b)) return 0.0;
  return block(l_out, l_a, l_b).at({m_out + l_out, m_a + l_a, m_b + l_b});
}

std::vector<CGTable::Key> CGTable::keys() const {
  std::vector<Key> out;
  out.reserve(blocks_.size());
  for (const auto& [key, unused] : blocks_) {
    out.push_back(Key{std::get<0>(key), std::get<1>(key), std::get<2>(key)});
  }
  return out;
}

}  // namespace tfn::so3
