#include "dcvae/autodiff.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "dcvae/error.hpp"

namespace dcvae {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapC = Eigen::Map<const RowMat>;
using Map = Eigen::Map<RowMat>;

MapC as_mat(const Tensor& t) {
  return MapC(t.data().data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
}
Map as_mat(Tensor& t) {
  return Map(t.data().data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
}

Tape& same_tape(const Var& a, const Var& b) {
  if (!a.valid() || !b.valid()) throw ContractError("operation on an unbound Var");
  if (&a.tape() != &b.tape()) throw ContractError("operands recorded on different tapes");
  return a.tape();
}

void require_matrix(const Var& v, const char* op) {
  if (v.value().rank() != 2) {
    throw DimensionError(std::string(op) + " expects a matrix, got " + shape_str(v.shape()));
  }
}

enum class Broadcast { none, row };

Broadcast check_binary(const Var& a, const Var& b, const char* op) {
  const auto& sa = a.shape();
  const auto& sb = b.shape();
  if (sa == sb) return Broadcast::none;
  if (sa.size() == 2 && sb.size() == 1 && sb[0] == sa[1]) return Broadcast::row;
  throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(sa) + " vs " + shape_str(sb));
}

// Sum of the rows of g, i.e. the gradient of a row-broadcast operand.
Tensor column_sums(const Tensor& g) {
  Tensor out({g.cols()});
  for (std::size_t r = 0; r < g.rows(); ++r) {
    auto row = g.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) out[c] += row[c];
  }
  return out;
}

template <class F, class DF>
Var unary(const char* op, const Var& a, F f, DF df) {
  if (!a.valid()) throw ContractError("operation on an unbound Var");
  const Tensor& x = a.value();
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) y[i] = f(x[i]);
  return a.tape().record(op, std::move(y), {a}, [a, df](Tape& t, const Tensor& g) {
    if (!t.requires_grad(a)) return;
    const Tensor& xin = a.value();
    Tensor gx(xin.shape());
    for (std::size_t i = 0; i < gx.numel(); ++i) gx[i] = g[i] * df(xin[i]);
    t.accumulate(a, std::move(gx));
  });
}

}  // namespace

Parameter::Parameter(std::string name_in, Tensor value_in)
    : name(std::move(name_in)), value(std::move(value_in)), grad(value.shape()) {}

const Tensor& Var::value() const {
  if (!tape_) throw ContractError("value() on an unbound Var");
  return tape_->value(id_);
}

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) { return push(Node{"constant", std::move(value), {}, {}, false, nullptr, {}, false}); }

Var Tape::variable(Tensor value) { return push(Node{"variable", std::move(value), {}, {}, true, nullptr, {}, false}); }

Var Tape::param(Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var(this, it->second);
  Var v = push(Node{"param", p.value, {}, {}, true, &p, {}, false});
  param_nodes_.emplace(&p, v.id());
  return v;
}

Var Tape::record(const char* op, Tensor value, std::initializer_list<Var> inputs, Backward backward) {
  Node node{op, std::move(value), {}, {}, false, nullptr, {}, false};
  node.inputs.reserve(inputs.size());
  for (const Var& in : inputs) {
    if (&in.tape() != this) throw ContractError(std::string(op) + ": input from another tape");
    node.inputs.push_back(in.id());
    node.requires_grad = node.requires_grad || nodes_[in.id()].requires_grad;
  }
  if (node.requires_grad) node.backward = std::move(backward);
  return push(std::move(node));
}

bool Tape::requires_grad(const Var& v) const { return nodes_[v.id()].requires_grad; }

const char* Tape::op_name(const Var& v) const { return nodes_[v.id()].op; }

void Tape::accumulate(const Var& v, Tensor grad) {
  Node& node = nodes_[v.id()];
  if (!node.requires_grad) return;
  if (grad.shape() != node.value.shape()) {
    throw DimensionError(std::string("gradient shape ") + shape_str(grad.shape()) + " does not match " +
                         node.op + " value " + shape_str(node.value.shape()));
  }
  if (!node.has_grad) {
    node.grad = std::move(grad);
    node.has_grad = true;
    return;
  }
  for (std::size_t i = 0; i < grad.numel(); ++i) node.grad[i] += grad[i];
}

void Tape::backward(const Var& loss) {
  if (&loss.tape() != this) throw ContractError("backward() on a Var from another tape");
  if (loss.value().numel() != 1) {
    throw ContractError("backward() needs a scalar loss, got shape " + shape_str(loss.shape()));
  }
  for (Node& node : nodes_) {
    node.has_grad = false;
    node.grad = Tensor();
  }
  Node& root = nodes_[loss.id()];
  if (!root.requires_grad) return;
  root.grad = Tensor(root.value.shape(), 1.0);
  root.has_grad = true;

  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.has_grad) continue;
    if (node.backward) node.backward(*this, node.grad);
    if (node.param) {
      Parameter& p = *node.param;
      if (p.grad.shape() != p.value.shape()) p.grad = Tensor(p.value.shape());
      for (std::size_t k = 0; k < node.grad.numel(); ++k) p.grad[k] += node.grad[k];
    }
  }
}

Tensor Tape::grad(const Var& v) const {
  const Node& node = nodes_[v.id()];
  if (!node.has_grad) return Tensor(node.value.shape());
  return node.grad;
}

Var matmul(const Var& a, const Var& b) {
  Tape& tape = same_tape(a, b);
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  if (a.shape()[1] != b.shape()[0]) {
    throw DimensionError("matmul: inner extents differ, " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  }
  Tensor out({a.shape()[0], b.shape()[1]});
  as_mat(out).noalias() = as_mat(a.value()) * as_mat(b.value());
  return tape.record("matmul", std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g) {
    if (t.requires_grad(a)) {
      Tensor ga(a.shape());
      as_mat(ga).noalias() = as_mat(g) * as_mat(b.value()).transpose();
      t.accumulate(a, std::move(ga));
    }
    if (t.requires_grad(b)) {
      Tensor gb(b.shape());
      as_mat(gb).noalias() = as_mat(a.value()).transpose() * as_mat(g);
      t.accumulate(b, std::move(gb));
    }
  });
}

Var matmul_bt(const Var& a, const Var& b) {
  Tape& tape = same_tape(a, b);
  require_matrix(a, "matmul_bt");
  require_matrix(b, "matmul_bt");
  if (a.shape()[1] != b.shape()[1]) {
    throw DimensionError("matmul_bt: inner extents differ, " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()) + "^T");
  }
  Tensor out({a.shape()[0], b.shape()[0]});
  as_mat(out).noalias() = as_mat(a.value()) * as_mat(b.value()).transpose();
  return tape.record("matmul_bt", std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g) {
    if (t.requires_grad(a)) {
      Tensor ga(a.shape());
      as_mat(ga).noalias() = as_mat(g) * as_mat(b.value());
      t.accumulate(a, std::move(ga));
    }
    if (t.requires_grad(b)) {
      Tensor gb(b.shape());
      as_mat(gb).noalias() = as_mat(g).transpose() * as_mat(a.value());
      t.accumulate(b, std::move(gb));
    }
  });
}

Var add(const Var& a, const Var& b) {
  Tape& tape = same_tape(a, b);
  const Broadcast mode = check_binary(a, b, "add");
  Tensor out = a.value();
  const Tensor& y = b.value();
  if (mode == Broadcast::none) {
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] += y[i];
  } else {
    for (std::size_t r = 0; r < out.rows(); ++r) {
      auto row = out.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) row[c] += y[c];
    }
  }
  return tape.record("add", std::move(out), {a, b}, [a, b, mode](Tape& t, const Tensor& g) {
    t.accumulate(a, g);
    if (t.requires_grad(b)) t.accumulate(b, mode == Broadcast::none ? g : column_sums(g));
  });
}

Var sub(const Var& a, const Var& b) {
  Tape& tape = same_tape(a, b);
  const Broadcast mode = check_binary(a, b, "sub");
  Tensor out = a.value();
  const Tensor& y = b.value();
  if (mode == Broadcast::none) {
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] -= y[i];
  } else {
    for (std::size_t r = 0; r < out.rows(); ++r) {
      auto row = out.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) row[c] -= y[c];
    }
  }
  return tape.record("sub", std::move(out), {a, b}, [a, b, mode](Tape& t, const Tensor& g) {
    t.accumulate(a, g);
    if (t.requires_grad(b)) {
      Tensor gb = mode == Broadcast::none ? g : column_sums(g);
      for (double& v : gb.data()) v = -v;
      t.accumulate(b, std::move(gb));
    }
  });
}

Var mul(const Var& a, const Var& b) {
  Tape& tape = same_tape(a, b);
  const Broadcast mode = check_binary(a, b, "mul");
  Tensor out = a.value();
  const Tensor& y = b.value();
  if (mode == Broadcast::none) {
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= y[i];
  } else {
    for (std::size_t r = 0; r < out.rows(); ++r) {
      auto row = out.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) row[c] *= y[c];
    }
  }
  return tape.record("mul", std::move(out), {a, b}, [a, b, mode](Tape& t, const Tensor& g) {
    const Tensor& x = a.value();
    const Tensor& y = b.value();
    if (t.requires_grad(a)) {
      Tensor ga = g;
      if (mode == Broadcast::none) {
        for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] *= y[i];
      } else {
        for (std::size_t r = 0; r < ga.rows(); ++r) {
          auto row = ga.row(r);
          for (std::size_t c = 0; c < row.size(); ++c) row[c] *= y[c];
        }
      }
      t.accumulate(a, std::move(ga));
    }
    if (t.requires_grad(b)) {
      Tensor gb(y.shape());
      if (mode == Broadcast::none) {
        for (std::size_t i = 0; i < gb.numel(); ++i) gb[i] = g[i] * x[i];
      } else {
        for (std::size_t r = 0; r < x.rows(); ++r) {
          const auto xr = x.row(r);
          const auto gr = g.row(r);
          for (std::size_t c = 0; c < xr.size(); ++c) gb[c] += gr[c] * xr[c];
        }
      }
      t.accumulate(b, std::move(gb));
    }
  });
}

Var neg(const Var& a) {
  return unary("neg", a, [](double x) { return -x; }, [](double) { return -1.0; });
}

Var exp(const Var& a) {
  return unary("exp", a, [](double x) { return std::exp(x); }, [](double x) { return std::exp(x); });
}

Var log(const Var& a) {
  for (double x : a.value().data()) {
    if (!(x > 0.0)) throw DomainError("log of non-positive value " + std::to_string(x));
  }
  return unary("log", a, [](double x) { return std::log(x); }, [](double x) { return 1.0 / x; });
}

Var square(const Var& a) {
  return unary("square", a, [](double x) { return x * x; }, [](double x) { return 2.0 * x; });
}

Var relu(const Var& a) {
  return unary("relu", a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x) { return x > 0.0 ? 1.0 : 0.0; });
}

Var scale(const Var& a, double factor) {
  return unary("scale", a, [factor](double x) { return factor * x; }, [factor](double) { return factor; });
}

Var add_scalar(const Var& a, double offset) {
  return unary("add_scalar", a, [offset](double x) { return x + offset; }, [](double) { return 1.0; });
}

Var sum(const Var& a) {
  double s = 0.0;
  for (double x : a.value().data()) s += x;
  return a.tape().record("sum", Tensor::scalar(s), {a}, [a](Tape& t, const Tensor& g) {
    t.accumulate(a, Tensor(a.shape(), g[0]));
  });
}

Var mean(const Var& a) {
  const double n = static_cast<double>(a.value().numel());
  double s = 0.0;
  for (double x : a.value().data()) s += x;
  return a.tape().record("mean", Tensor::scalar(s / n), {a}, [a, n](Tape& t, const Tensor& g) {
    t.accumulate(a, Tensor(a.shape(), g[0] / n));
  });
}

namespace {

Var reduce_axis(const Var& a, std::size_t axis, bool average) {
  const Tensor& x = a.value();
  const char* op = average ? "mean_axis" : "sum_axis";
  if (axis >= x.rank() || x.rank() > 2) {
    throw DimensionError(std::string(op) + ": axis " + std::to_string(axis) + " invalid for shape " +
                         shape_str(x.shape()));
  }
  if (x.rank() == 1) return average ? mean(a) : sum(a);

  const std::size_t rows = x.rows();
  const std::size_t cols = x.cols();
  const double count = static_cast<double>(axis == 0 ? rows : cols);
  const double factor = average ? 1.0 / count : 1.0;
  Tensor out({axis == 0 ? cols : rows});
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = x.row(r);
    if (axis == 0) {
      for (std::size_t c = 0; c < cols; ++c) out[c] += row[c];
    } else {
      for (std::size_t c = 0; c < cols; ++c) out[r] += row[c];
    }
  }
  for (double& v : out.data()) v *= factor;
  return a.tape().record(op, std::move(out), {a}, [a, axis, factor](Tape& t, const Tensor& g) {
    Tensor ga(a.shape());
    for (std::size_t r = 0; r < ga.rows(); ++r) {
      auto row = ga.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) row[c] = factor * g[axis == 0 ? c : r];
    }
    t.accumulate(a, std::move(ga));
  });
}

}  // namespace

Var sum(const Var& a, std::size_t axis) { return reduce_axis(a, axis, false); }
Var mean(const Var& a, std::size_t axis) { return reduce_axis(a, axis, true); }

Var concat_cols(const Var& a, const Var& b) {
  Tape& tape = same_tape(a, b);
  require_matrix(a, "concat_cols");
  require_matrix(b, "concat_cols");
  const std::size_t rows = a.shape()[0];
  if (b.shape()[0] != rows) {
    throw DimensionError("concat_cols: row counts differ, " + shape_str(a.shape()) + " and " + shape_str(b.shape()));
  }
  const std::size_t ca = a.shape()[1];
  const std::size_t cb = b.shape()[1];
  Tensor out({rows, ca + cb});
  for (std::size_t r = 0; r < rows; ++r) {
    auto dst = out.row(r);
    auto ra = a.value().row(r);
    auto rb = b.value().row(r);
    std::copy(ra.begin(), ra.end(), dst.begin());
    std::copy(rb.begin(), rb.end(), dst.begin() + static_cast<std::ptrdiff_t>(ca));
  }
  return tape.record("concat_cols", std::move(out), {a, b}, [a, b, rows, ca, cb](Tape& t, const Tensor& g) {
    if (t.requires_grad(a)) {
      Tensor ga({rows, ca});
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < ca; ++c) ga.at(r, c) = g.at(r, c);
      }
      t.accumulate(a, std::move(ga));
    }
    if (t.requires_grad(b)) {
      Tensor gb({rows, cb});
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cb; ++c) gb.at(r, c) = g.at(r, ca + c);
      }
      t.accumulate(b, std::move(gb));
    }
  });
}

Var concat_rows(const Var& a, const Var& b) {
  Tape& tape = same_tape(a, b);
  require_matrix(a, "concat_rows");
  require_matrix(b, "concat_rows");
  if (a.shape()[1] != b.shape()[1]) {
    throw DimensionError("concat_rows: column counts differ, " + shape_str(a.shape()) + " and " + shape_str(b.shape()));
  }
  Tensor out({a.shape()[0] + b.shape()[0], a.shape()[1]});
  const auto split = static_cast<std::ptrdiff_t>(a.value().numel());
  std::copy(a.value().data().begin(), a.value().data().end(), out.data().begin());
  std::copy(b.value().data().begin(), b.value().data().end(), out.data().begin() + split);
  return tape.record("concat_rows", std::move(out), {a, b}, [a, b, split](Tape& t, const Tensor& g) {
    if (t.requires_grad(a)) {
      Tensor ga(a.shape());
      std::copy(g.data().begin(), g.data().begin() + split, ga.data().begin());
      t.accumulate(a, std::move(ga));
    }
    if (t.requires_grad(b)) {
      Tensor gb(b.shape());
      std::copy(g.data().begin() + split, g.data().end(), gb.data().begin());
      t.accumulate(b, std::move(gb));
    }
  });
}

Var slice_cols(const Var& a, std::size_t begin, std::size_t end) {
  require_matrix(a, "slice_cols");
  const std::size_t rows = a.shape()[0];
  const std::size_t cols = a.shape()[1];
  if (begin >= end || end > cols) {
    throw DimensionError("slice_cols: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") invalid for shape " + shape_str(a.shape()));
  }
  const std::size_t width = end - begin;
  Tensor out({rows, width});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < width; ++c) out.at(r, c) = a.value().at(r, begin + c);
  }
  return a.tape().record("slice_cols", std::move(out), {a}, [a, begin, width](Tape& t, const Tensor& g) {
    Tensor ga(a.shape());
    for (std::size_t r = 0; r < ga.rows(); ++r) {
      for (std::size_t c = 0; c < width; ++c) ga.at(r, begin + c) = g.at(r, c);
    }
    t.accumulate(a, std::move(ga));
  });
}

Var sq_dist(const Var& a, const Var& b) {
  Tape& tape = same_tape(a, b);
  require_matrix(a, "sq_dist");
  require_matrix(b, "sq_dist");
  if (a.shape()[1] != b.shape()[1]) {
    throw DimensionError("sq_dist: dimension mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  Tensor out({x.rows(), y.rows()});
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto xi = x.row(i);
    for (std::size_t j = 0; j < y.rows(); ++j) {
      auto yj = y.row(j);
      double d2 = 0.0;
      for (std::size_t k = 0; k < xi.size(); ++k) {
        const double d = xi[k] - yj[k];
        d2 += d * d;
      }
      out.at(i, j) = d2;
    }
  }
  // d/dx_i = 2 sum_j g_ij (x_i - y_j);  d/dy_j = 2 sum_i g_ij (y_j - x_i)
  return tape.record("sq_dist", std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g) {
    const Tensor& x = a.value();
    const Tensor& y = b.value();
    const std::size_t dim = x.cols();
    if (t.requires_grad(a)) {
      Tensor ga(x.shape());
      for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < y.rows(); ++j) {
          const double w = 2.0 * g.at(i, j);
          for (std::size_t k = 0; k < dim; ++k) ga.at(i, k) += w * (x.at(i, k) - y.at(j, k));
        }
      }
      t.accumulate(a, std::move(ga));
    }
    if (t.requires_grad(b)) {
      Tensor gb(y.shape());
      for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < y.rows(); ++j) {
          const double w = 2.0 * g.at(i, j);
          for (std::size_t k = 0; k < dim; ++k) gb.at(j, k) += w * (y.at(j, k) - x.at(i, k));
        }
      }
      t.accumulate(b, std::move(gb));
    }
  });
}

}  // namespace dcvae
