#include "tfn/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace tfn::ad {

namespace {

void require_same_tape(Var a, Var b) {
  if (a.tape != b.tape) throw std::invalid_argument("ad: operands come from different tapes");
}

double sigmoid(double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

/// Elementwise binary with NumPy broadcasting.
NdArray broadcast_apply(const NdArray& a, const NdArray& b, double (*op)(double, double)) {
  const auto out_shape = broadcast_shapes(a.shape(), b.shape());
  NdArray out(out_shape);
  const size_t rank = out_shape.size();
  const auto sa = a.strides(), sb = b.strides();
  std::vector<int64_t> idx(rank, 0);
  const auto da = a.data(), db = b.data();
  for (int64_t flat = 0; flat < out.size(); ++flat) {
    int64_t fa = 0, fb = 0;
    for (size_t i = 0; i < rank; ++i) {
      if (i >= rank - a.shape().size()) {
        const size_t ai = i - (rank - a.shape().size());
        fa += (a.shape()[ai] == 1 ? 0 : idx[i]) * sa[ai];
      }
      if (i >= rank - b.shape().size()) {
        const size_t bi = i - (rank - b.shape().size());
        fb += (b.shape()[bi] == 1 ? 0 : idx[i]) * sb[bi];
      }
    }
    out[flat] = op(da[static_cast<size_t>(fa)], db[static_cast<size_t>(fb)]);
    for (int64_t axis = static_cast<int64_t>(rank) - 1; axis >= 0; --axis) {
      if (++idx[static_cast<size_t>(axis)] < out_shape[static_cast<size_t>(axis)]) break;
      idx[static_cast<size_t>(axis)] = 0;
    }
  }
  return out;
}

NdArray unary_apply(const NdArray& a, const std::function<double(double)>& op) {
  NdArray out(a.shape());
  const auto da = a.data();
  for (int64_t i = 0; i < a.size(); ++i) out[i] = op(da[static_cast<size_t>(i)]);
  return out;
}

Var elementwise_unary(Var a, const std::function<double(double)>& fwd,
                      const std::function<double(double, double)>& dfdx_times_g) {
  Tape& t = *a.tape;
  NdArray value = unary_apply(t.value(a), fwd);
  const int32_t aid = a.id;
  return t.make_node(std::move(value), [aid, dfdx_times_g](Tape& tape, const NdArray& g) {
    const NdArray& x = tape.value(aid);
    NdArray gx(x.shape());
    for (int64_t i = 0; i < x.size(); ++i) gx[i] = dfdx_times_g(x[i], g[i]);
    tape.accumulate(aid, gx);
  });
}

struct EinsumPlan {
  std::string a_spec, b_spec, out_spec;
  std::vector<char> letters;        // output letters first, then contracted
  std::vector<int64_t> extents;     // per letter
  size_t out_rank = 0;
};

EinsumPlan parse_einsum(const std::string& spec, const NdArray& a, const NdArray& b) {
  const auto comma = spec.find(',');
  const auto arrow = spec.find("->");
  if (comma == std::string::npos || arrow == std::string::npos || arrow < comma) {
    throw std::invalid_argument("contract: malformed spec '" + spec + "'");
  }
  EinsumPlan plan;
  plan.a_spec = spec.substr(0, comma);
  plan.b_spec = spec.substr(comma + 1, arrow - comma - 1);
  plan.out_spec = spec.substr(arrow + 2);

  auto check_distinct = [&](const std::string& s) {
    std::set<char> seen(s.begin(), s.end());
    if (seen.size() != s.size()) throw std::invalid_argument("contract: repeated letter in '" + s + "'");
  };
  check_distinct(plan.a_spec);
  check_distinct(plan.b_spec);
  check_distinct(plan.out_spec);

  if (static_cast<int64_t>(plan.a_spec.size()) != a.rank() ||
      static_cast<int64_t>(plan.b_spec.size()) != b.rank()) {
    throw std::invalid_argument("contract: spec '" + spec + "' does not match operand shapes " +
                                NdArray::shape_to_string(a.shape()) + " and " +
                                NdArray::shape_to_string(b.shape()));
  }

  std::map<char, int64_t> extent;
  for (size_t i = 0; i < plan.a_spec.size(); ++i) extent[plan.a_spec[i]] = a.shape()[i];
  for (size_t i = 0; i < plan.b_spec.size(); ++i) {
    const char c = plan.b_spec[i];
    if (extent.count(c) && extent[c] != b.shape()[i]) {
      throw std::invalid_argument("contract: extent mismatch for '" + std::string(1, c) + "' between " +
                                  NdArray::shape_to_string(a.shape()) + " and " +
                                  NdArray::shape_to_string(b.shape()));
    }
    extent[c] = b.shape()[i];
  }

  auto contains = [](const std::string& s, char c) { return s.find(c) != std::string::npos; };
  for (char c : plan.out_spec) {
    if (!extent.count(c)) throw std::invalid_argument("contract: output letter '" + std::string(1, c) + "' not in inputs");
  }
  for (char c : plan.a_spec) {
    if (!contains(plan.out_spec, c) && !contains(plan.b_spec, c))
      throw std::invalid_argument("contract: letter '" + std::string(1, c) + "' appears only in the first operand");
  }
  for (char c : plan.b_spec) {
    if (!contains(plan.out_spec, c) && !contains(plan.a_spec, c))
      throw std::invalid_argument("contract: letter '" + std::string(1, c) + "' appears only in the second operand");
  }

  for (char c : plan.out_spec) {
    plan.letters.push_back(c);
    plan.extents.push_back(extent[c]);
  }
  for (const auto& [c, e] : extent) {
    if (!contains(plan.out_spec, c)) {
      plan.letters.push_back(c);
      plan.extents.push_back(e);
    }
  }
  plan.out_rank = plan.out_spec.size();
  return plan;
}

}  // namespace

NdArray einsum_eval(const std::string& spec, const NdArray& a, const NdArray& b) {
  const EinsumPlan plan = parse_einsum(spec, a, b);
  const size_t nletters = plan.letters.size();

  std::vector<int64_t> out_shape(plan.extents.begin(), plan.extents.begin() + static_cast<int64_t>(plan.out_rank));
  NdArray out(out_shape);
  const auto out_strides = out.strides();
  const auto a_strides = a.strides();
  const auto b_strides = b.strides();

  // per-letter strides into a, b and out (0 when the letter is absent)
  std::vector<int64_t> la(nletters, 0), lb(nletters, 0), lo(nletters, 0);
  for (size_t i = 0; i < nletters; ++i) {
    const char c = plan.letters[i];
    const auto pa = plan.a_spec.find(c);
    const auto pb = plan.b_spec.find(c);
    if (pa != std::string::npos) la[i] = a_strides[pa];
    if (pb != std::string::npos) lb[i] = b_strides[pb];
    if (i < plan.out_rank) lo[i] = out_strides[i];
  }

  std::vector<int64_t> idx(nletters, 0);
  const auto da = a.data(), db = b.data();
  const int64_t total = shape_numel(plan.extents);
  int64_t fa = 0, fb = 0, fo = 0;
  for (int64_t step = 0; step < total; ++step) {
    out[fo] += da[static_cast<size_t>(fa)] * db[static_cast<size_t>(fb)];
    for (int64_t i = static_cast<int64_t>(nletters) - 1; i >= 0; --i) {
      const auto u = static_cast<size_t>(i);
      fa += la[u];
      fb += lb[u];
      fo += lo[u];
      if (++idx[u] < plan.extents[u]) break;
      fa -= la[u] * plan.extents[u];
      fb -= lb[u] * plan.extents[u];
      fo -= lo[u] * plan.extents[u];
      idx[u] = 0;
    }
  }
  return out;
}

Var Tape::leaf(NdArray value) {
  nodes_.push_back(Node{std::move(value), nullptr});
  return Var{this, static_cast<int32_t>(nodes_.size() - 1)};
}

Var Tape::make_node(NdArray value, BackwardFn backward) {
  nodes_.push_back(Node{std::move(value), std::move(backward)});
  return Var{this, static_cast<int32_t>(nodes_.size() - 1)};
}

void Tape::backward(Var loss) {
  if (loss.tape != this) throw std::invalid_argument("Tape::backward: loss from another tape");
  const NdArray& lv = value(loss);
  if (lv.size() != 1) {
    throw std::invalid_argument("Tape::backward: loss must be scalar, got shape " +
                                NdArray::shape_to_string(lv.shape()));
  }
  grads_.assign(nodes_.size(), NdArray{});
  grads_[static_cast<size_t>(loss.id)] = NdArray::full(lv.shape(), 1.0);
  for (int32_t id = loss.id; id >= 0; --id) {
    const auto uid = static_cast<size_t>(id);
    if (grads_[uid].size() == 0 || !nodes_[uid].backward) continue;
    nodes_[uid].backward(*this, grads_[uid]);
  }
}

NdArray Tape::grad(Var v) const {
  const auto uid = static_cast<size_t>(v.id);
  if (uid < grads_.size() && grads_[uid].size() > 0) return grads_[uid];
  return NdArray(nodes_[uid].value.shape());
}

void Tape::accumulate(int32_t id, const NdArray& g) {
  const auto uid = static_cast<size_t>(id);
  if (grads_.size() < nodes_.size()) grads_.resize(nodes_.size());
  NdArray& slot = grads_[uid];
  if (slot.size() == 0) {
    slot = g;
    return;
  }
  for (int64_t i = 0; i < slot.size(); ++i) slot[i] += g[i];
}

// --- elementwise binary -----------------------------------------------------

namespace {

Var broadcast_binary(Var a, Var b, double (*fwd)(double, double), bool is_mul, bool negate_b) {
  require_same_tape(a, b);
  Tape& t = *a.tape;
  NdArray value = broadcast_apply(t.value(a), t.value(b), fwd);
  const int32_t aid = a.id, bid = b.id;
  return t.make_node(std::move(value), [aid, bid, is_mul, negate_b](Tape& tape, const NdArray& g) {
    const NdArray& av = tape.value(aid);
    const NdArray& bv = tape.value(bid);
    if (is_mul) {
      tape.accumulate(aid, reduce_to_shape(broadcast_apply(g, bv, [](double x, double y) { return x * y; }), av.shape()));
      tape.accumulate(bid, reduce_to_shape(broadcast_apply(g, av, [](double x, double y) { return x * y; }), bv.shape()));
    } else {
      tape.accumulate(aid, reduce_to_shape(g, av.shape()));
      NdArray gb = reduce_to_shape(g, bv.shape());
      if (negate_b) {
        for (int64_t i = 0; i < gb.size(); ++i) gb[i] = -gb[i];
      }
      tape.accumulate(bid, gb);
    }
  });
}

}  // namespace

Var add(Var a, Var b) {
  return broadcast_binary(a, b, [](double x, double y) { return x + y; }, false, false);
}

Var sub(Var a, Var b) {
  return broadcast_binary(a, b, [](double x, double y) { return x - y; }, false, true);
}

Var mul(Var a, Var b) {
  return broadcast_binary(a, b, [](double x, double y) { return x * y; }, true, false);
}

Var neg(Var a) { return scale(a, -1.0); }

Var scale(Var a, double c) {
  return elementwise_unary(a, [c](double x) { return c * x; }, [c](double, double g) { return c * g; });
}

Var add_scalar(Var a, double c) {
  return elementwise_unary(a, [c](double x) { return x + c; }, [](double, double g) { return g; });
}

// --- matmul ------------------------------------------------------------------

Var matmul(Var a, Var b) {
  require_same_tape(a, b);
  Tape& t = *a.tape;
  const NdArray& av = t.value(a);
  const NdArray& bv = t.value(b);
  if (av.rank() != 2 || bv.rank() != 2 || av.extent(1) != bv.extent(0)) {
    throw std::invalid_argument("matmul: incompatible shapes " + NdArray::shape_to_string(av.shape()) +
                                " and " + NdArray::shape_to_string(bv.shape()));
  }
  const int64_t m = av.extent(0), k = av.extent(1), n = bv.extent(1);
  NdArray out({m, n});
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t p = 0; p < k; ++p) {
      const double x = av[i * k + p];
      for (int64_t j = 0; j < n; ++j) out[i * n + j] += x * bv[p * n + j];
    }
  }
  const int32_t aid = a.id, bid = b.id;
  return t.make_node(std::move(out), [aid, bid, m, k, n](Tape& tape, const NdArray& g) {
    const NdArray& av2 = tape.value(aid);
    const NdArray& bv2 = tape.value(bid);
    NdArray ga({m, k}), gb({k, n});
    for (int64_t i = 0; i < m; ++i)
      for (int64_t j = 0; j < n; ++j) {
        const double gij = g[i * n + j];
        for (int64_t p = 0; p < k; ++p) {
          ga[i * k + p] += gij * bv2[p * n + j];
          gb[p * n + j] += gij * av2[i * k + p];
        }
      }
    tape.accumulate(aid, ga);
    tape.accumulate(bid, gb);
  });
}

// --- einsum ------------------------------------------------------------------

Var contract(const std::string& spec, Var a, Var b) {
  require_same_tape(a, b);
  Tape& t = *a.tape;
  const EinsumPlan plan = parse_einsum(spec, t.value(a), t.value(b));  // validates
  NdArray value = einsum_eval(spec, t.value(a), t.value(b));
  const int32_t aid = a.id, bid = b.id;
  const std::string da_spec = plan.out_spec + "," + plan.b_spec + "->" + plan.a_spec;
  const std::string db_spec = plan.out_spec + "," + plan.a_spec + "->" + plan.b_spec;
  return t.make_node(std::move(value), [aid, bid, da_spec, db_spec](Tape& tape, const NdArray& g) {
    tape.accumulate(aid, einsum_eval(da_spec, g, tape.value(bid)));
    tape.accumulate(bid, einsum_eval(db_spec, g, tape.value(aid)));
  });
}

// --- shape ops ---------------------------------------------------------------

Var permute(Var a, std::vector<int64_t> axes) {
  Tape& t = *a.tape;
  const NdArray& av = t.value(a);
  const auto rank = static_cast<size_t>(av.rank());
  if (axes.size() != rank) throw std::invalid_argument("permute: axes rank mismatch");
  std::vector<int64_t> out_shape(rank);
  for (size_t i = 0; i < rank; ++i) out_shape[i] = av.shape()[static_cast<size_t>(axes[i])];

  auto apply = [rank](const NdArray& in, const std::vector<int64_t>& perm) {
    std::vector<int64_t> shape(rank);
    for (size_t i = 0; i < rank; ++i) shape[i] = in.shape()[static_cast<size_t>(perm[i])];
    NdArray out(shape);
    const auto in_strides = in.strides();
    std::vector<int64_t> idx(rank, 0);
    for (int64_t flat = 0; flat < out.size(); ++flat) {
      int64_t fin = 0;
      for (size_t i = 0; i < rank; ++i) fin += idx[i] * in_strides[static_cast<size_t>(perm[i])];
      out[flat] = in[fin];
      for (int64_t axis = static_cast<int64_t>(rank) - 1; axis >= 0; --axis) {
        if (++idx[static_cast<size_t>(axis)] < shape[static_cast<size_t>(axis)]) break;
        idx[static_cast<size_t>(axis)] = 0;
      }
    }
    return out;
  };

  NdArray value = apply(av, axes);
  std::vector<int64_t> inverse(rank);
  for (size_t i = 0; i < rank; ++i) inverse[static_cast<size_t>(axes[i])] = static_cast<int64_t>(i);
  const int32_t aid = a.id;
  return t.make_node(std::move(value), [aid, inverse, apply](Tape& tape, const NdArray& g) {
    tape.accumulate(aid, apply(g, inverse));
  });
}

Var reshape(Var a, std::vector<int64_t> shape) {
  Tape& t = *a.tape;
  NdArray value = t.value(a).reshaped(shape);
  const int32_t aid = a.id;
  return t.make_node(std::move(value), [aid](Tape& tape, const NdArray& g) {
    tape.accumulate(aid, g.reshaped(tape.value(aid).shape()));
  });
}

// --- gather / scatter ---------------------------------------------------------

namespace {

// iterate (outer, axis, inner) decomposition shared by gather and scatter_add
struct AxisSplit {
  int64_t outer = 1, axis_extent = 1, inner = 1;
};

AxisSplit split_at(const std::vector<int64_t>& shape, int64_t axis) {
  AxisSplit s;
  for (int64_t i = 0; i < static_cast<int64_t>(shape.size()); ++i) {
    const int64_t e = shape[static_cast<size_t>(i)];
    if (i < axis) s.outer *= e;
    else if (i == axis) s.axis_extent = e;
    else s.inner *= e;
  }
  return s;
}

}  // namespace

Var gather(Var a, int64_t axis, std::vector<int64_t> indices) {
  Tape& t = *a.tape;
  const NdArray& av = t.value(a);
  if (axis < 0 || axis >= av.rank()) throw std::invalid_argument("gather: axis out of range");
  const AxisSplit s = split_at(av.shape(), axis);
  for (int64_t i : indices) {
    if (i < 0 || i >= s.axis_extent) {
      throw std::invalid_argument("gather: index " + std::to_string(i) + " out of range for shape " +
                                  NdArray::shape_to_string(av.shape()));
    }
  }
  std::vector<int64_t> out_shape = av.shape();
  out_shape[static_cast<size_t>(axis)] = static_cast<int64_t>(indices.size());
  NdArray out(out_shape);
  const int64_t nidx = static_cast<int64_t>(indices.size());
  for (int64_t o = 0; o < s.outer; ++o)
    for (int64_t k = 0; k < nidx; ++k)
      for (int64_t i = 0; i < s.inner; ++i)
        out[(o * nidx + k) * s.inner + i] = av[(o * s.axis_extent + indices[static_cast<size_t>(k)]) * s.inner + i];

  const int32_t aid = a.id;
  return t.make_node(std::move(out), [aid, axis, indices, s, nidx](Tape& tape, const NdArray& g) {
    NdArray ga(tape.value(aid).shape());
    for (int64_t o = 0; o < s.outer; ++o)
      for (int64_t k = 0; k < nidx; ++k)
        for (int64_t i = 0; i < s.inner; ++i)
          ga[(o * s.axis_extent + indices[static_cast<size_t>(k)]) * s.inner + i] += g[(o * nidx + k) * s.inner + i];
    tape.accumulate(aid, ga);
  });
}

Var scatter_add(Var src, int64_t axis, std::vector<int64_t> indices, int64_t out_extent) {
  Tape& t = *src.tape;
  const NdArray& sv = t.value(src);
  if (axis < 0 || axis >= sv.rank()) throw std::invalid_argument("scatter_add: axis out of range");
  if (sv.extent(axis) != static_cast<int64_t>(indices.size())) {
    throw std::invalid_argument("scatter_add: axis extent " + std::to_string(sv.extent(axis)) +
                                " does not match " + std::to_string(indices.size()) + " indices");
  }
  for (int64_t i : indices) {
    if (i < 0 || i >= out_extent) throw std::invalid_argument("scatter_add: index " + std::to_string(i) + " out of range");
  }
  std::vector<int64_t> out_shape = sv.shape();
  out_shape[static_cast<size_t>(axis)] = out_extent;
  const AxisSplit s = split_at(out_shape, axis);
  const int64_t nidx = static_cast<int64_t>(indices.size());
  NdArray out(out_shape);
  for (int64_t o = 0; o < s.outer; ++o)
    for (int64_t k = 0; k < nidx; ++k)
      for (int64_t i = 0; i < s.inner; ++i)
        out[(o * s.axis_extent + indices[static_cast<size_t>(k)]) * s.inner + i] += sv[(o * nidx + k) * s.inner + i];

  const int32_t sid = src.id;
  return t.make_node(std::move(out), [sid, indices, s, nidx](Tape& tape, const NdArray& g) {
    NdArray gs(tape.value(sid).shape());
    for (int64_t o = 0; o < s.outer; ++o)
      for (int64_t k = 0; k < nidx; ++k)
        for (int64_t i = 0; i < s.inner; ++i)
          gs[(o * nidx + k) * s.inner + i] = g[(o * s.axis_extent + indices[static_cast<size_t>(k)]) * s.inner + i];
    tape.accumulate(sid, gs);
  });
}

// --- reductions ----------------------------------------------------------------

Var sum_axis(Var a, int64_t axis) {
  Tape& t = *a.tape;
  const NdArray& av = t.value(a);
  if (axis < 0 || axis >= av.rank()) throw std::invalid_argument("sum_axis: axis out of range");
  const AxisSplit s = split_at(av.shape(), axis);
  std::vector<int64_t> out_shape;
  for (int64_t i = 0; i < av.rank(); ++i)
    if (i != axis) out_shape.push_back(av.extent(i));
  NdArray out(out_shape);
  for (int64_t o = 0; o < s.outer; ++o)
    for (int64_t k = 0; k < s.axis_extent; ++k)
      for (int64_t i = 0; i < s.inner; ++i) out[o * s.inner + i] += av[(o * s.axis_extent + k) * s.inner + i];

  const int32_t aid = a.id;
  return t.make_node(std::move(out), [aid, s](Tape& tape, const NdArray& g) {
    NdArray ga(tape.value(aid).shape());
    for (int64_t o = 0; o < s.outer; ++o)
      for (int64_t k = 0; k < s.axis_extent; ++k)
        for (int64_t i = 0; i < s.inner; ++i) ga[(o * s.axis_extent + k) * s.inner + i] = g[o * s.inner + i];
    tape.accumulate(aid, ga);
  });
}

Var sum_all(Var a) {
  Tape& t = *a.tape;
  NdArray out = NdArray::scalar(t.value(a).sum());
  const int32_t aid = a.id;
  return t.make_node(std::move(out), [aid](Tape& tape, const NdArray& g) {
    tape.accumulate(aid, NdArray::full(tape.value(aid).shape(), g[0]));
  });
}

// --- nonlinearities --------------------------------------------------------------

Var sqrt(Var a) {
  return elementwise_unary(a, [](double x) { return std::sqrt(x); },
                           [](double x, double g) { return g * 0.5 / std::sqrt(x); });
}

Var exp(Var a) {
  return elementwise_unary(a, [](double x) { return std::exp(x); },
                           [](double x, double g) { return g * std::exp(x); });
}

Var log(Var a) {
  return elementwise_unary(a, [](double x) { return std::log(x); },
                           [](double x, double g) { return g / x; });
}

Var square(Var a) {
  return elementwise_unary(a, [](double x) { return x * x; },
                           [](double x, double g) { return 2.0 * x * g; });
}

Var shifted_softplus(Var a) {
  return elementwise_unary(a, [](double x) { return softplus(x) - std::log(2.0); },
                           [](double x, double g) { return g * sigmoid(x); });
}

Var softmax(Var a, int64_t axis) {
  Tape& t = *a.tape;
  const NdArray& av = t.value(a);
  if (axis < 0 || axis >= av.rank()) throw std::invalid_argument("softmax: axis out of range");
  const AxisSplit s = split_at(av.shape(), axis);
  NdArray out(av.shape());
  for (int64_t o = 0; o < s.outer; ++o)
    for (int64_t i = 0; i < s.inner; ++i) {
      double mx = -1e300;
      for (int64_t k = 0; k < s.axis_extent; ++k) mx = std::max(mx, av[(o * s.axis_extent + k) * s.inner + i]);
      double z = 0.0;
      for (int64_t k = 0; k < s.axis_extent; ++k) {
        const int64_t f = (o * s.axis_extent + k) * s.inner + i;
        out[f] = std::exp(av[f] - mx);
        z += out[f];
      }
      for (int64_t k = 0; k < s.axis_extent; ++k) out[(o * s.axis_extent + k) * s.inner + i] /= z;
    }

  const int32_t aid = a.id;
  const int32_t out_id = static_cast<int32_t>(t.num_nodes());
  return t.make_node(std::move(out), [aid, out_id, s](Tape& tape, const NdArray& g) {
    const NdArray& p = tape.value(out_id);
    NdArray ga(p.shape());
    for (int64_t o = 0; o < s.outer; ++o)
      for (int64_t i = 0; i < s.inner; ++i) {
        double dot = 0.0;
        for (int64_t k = 0; k < s.axis_extent; ++k) {
          const int64_t f = (o * s.axis_extent + k) * s.inner + i;
          dot += g[f] * p[f];
        }
        for (int64_t k = 0; k < s.axis_extent; ++k) {
          const int64_t f = (o * s.axis_extent + k) * s.inner + i;
          ga[f] = p[f] * (g[f] - dot);
        }
      }
    tape.accumulate(aid, ga);
  });
}

Var concat(const std::vector<Var>& parts, int64_t axis) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  Tape& t = *parts.front().tape;
  for (const Var& p : parts) require_same_tape(parts.front(), p);

  const NdArray& first = t.value(parts.front());
  std::vector<int64_t> out_shape = first.shape();
  if (axis < 0 || axis >= first.rank()) throw std::invalid_argument("concat: axis out of range");
  int64_t total = 0;
  std::vector<int64_t> offsets, extents;
  for (const Var& p : parts) {
    const NdArray& pv = t.value(p);
    if (pv.rank() != first.rank()) {
      throw std::invalid_argument("concat: rank mismatch between " + NdArray::shape_to_string(first.shape()) +
                                  " and " + NdArray::shape_to_string(pv.shape()));
    }
    for (int64_t i = 0; i < first.rank(); ++i) {
      if (i != axis && pv.extent(i) != first.extent(i)) {
        throw std::invalid_argument("concat: shape mismatch between " + NdArray::shape_to_string(first.shape()) +
                                    " and " + NdArray::shape_to_string(pv.shape()));
      }
    }
    offsets.push_back(total);
    extents.push_back(pv.extent(axis));
    total += pv.extent(axis);
  }
  out_shape[static_cast<size_t>(axis)] = total;
  const AxisSplit s = split_at(out_shape, axis);

  NdArray out(out_shape);
  for (size_t pi = 0; pi < parts.size(); ++pi) {
    const NdArray& pv = t.value(parts[pi]);
    const int64_t e = extents[pi], off = offsets[pi];
    for (int64_t o = 0; o < s.outer; ++o)
      for (int64_t k = 0; k < e; ++k)
        for (int64_t i = 0; i < s.inner; ++i)
          out[(o * s.axis_extent + off + k) * s.inner + i] = pv[(o * e + k) * s.inner + i];
  }

  std::vector<int32_t> ids;
  for (const Var& p : parts) ids.push_back(p.id);
  return t.make_node(std::move(out), [ids, offsets, extents, s](Tape& tape, const NdArray& g) {
    for (size_t pi = 0; pi < ids.size(); ++pi) {
      NdArray gp(tape.value(ids[pi]).shape());
      const int64_t e = extents[pi], off = offsets[pi];
      for (int64_t o = 0; o < s.outer; ++o)
        for (int64_t k = 0; k < e; ++k)
          for (int64_t i = 0; i < s.inner; ++i)
            gp[(o * e + k) * s.inner + i] = g[(o * s.axis_extent + off + k) * s.inner + i];
      tape.accumulate(ids[pi], gp);
    }
  });
}

}  // namespace tfn::ad
