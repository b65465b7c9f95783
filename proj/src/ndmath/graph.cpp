#include "vgcrl/ndmath/graph.hpp"

#include <cmath>

#include "vgcrl/kernels/kernels.hpp"

namespace vgcrl::nd {

namespace {
const kern::Ops& K() { return kern::active(); }
}  // namespace

bool Tensor::all_finite() const {
  for (double x : values())
    if (!std::isfinite(x)) return false;
  return true;
}

const char* Graph::op_name(Op op) {
  switch (op) {
    case Op::kLeaf: return "leaf";
    case Op::kConst: return "constant";
    case Op::kMatmul: return "matmul";
    case Op::kAdd: return "add";
    case Op::kSub: return "sub";
    case Op::kMul: return "mul";
    case Op::kMin: return "min_elem";
    case Op::kAddRow: return "add_rowvec";
    case Op::kAddCol: return "add_colvec";
    case Op::kSubCol: return "sub_colvec";
    case Op::kConcat: return "concat_cols";
    case Op::kBroadcastRows: return "broadcast_rows";
    case Op::kScale: return "scale";
    case Op::kAddConst: return "add_const";
    case Op::kNeg: return "neg";
    case Op::kTanh: return "tanh";
    case Op::kRelu: return "relu";
    case Op::kExp: return "exp";
    case Op::kLog: return "log";
    case Op::kSquare: return "square";
    case Op::kClamp: return "clamp";
    case Op::kSumAll: return "sum_all";
    case Op::kMeanAll: return "mean_all";
    case Op::kSumCols: return "sum_cols";
    case Op::kSumColGroups: return "sum_colgroups";
    case Op::kGatherCols: return "gather_cols";
  }
  return "?";
}

int Graph::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

int Graph::check(Var v) const {
  VGCRL_CHECK(v.id >= 0 && v.id < static_cast<int>(nodes_.size()),
              "Graph: invalid Var id ", v.id);
  return v.id;
}

Var Graph::leaf(Parameter& p) {
  Node n;
  n.op = Op::kLeaf;
  n.value = p.value;
  n.param = &p;
  n.needs_grad = true;
  return {push(std::move(n))};
}

Var Graph::constant(Tensor t) {
  Node n;
  n.op = Op::kConst;
  n.value = std::move(t);
  return {push(std::move(n))};
}

Var Graph::unary(Op op, Var a, double c0, double c1) {
  const int ia = check(a);
  Node n;
  n.op = op;
  n.a = ia;
  n.c0 = c0;
  n.c1 = c1;
  n.needs_grad = nodes_[ia].needs_grad;
  const Tensor& x = nodes_[ia].value;
  const std::size_t sz = x.size();
  switch (op) {
    case Op::kScale: {
      n.value = Tensor::zeros(x.rows(), x.cols());
      K().scale(c0, x.data(), n.value.data(), sz);
      break;
    }
    case Op::kAddConst: {
      n.value = Tensor::zeros(x.rows(), x.cols());
      for (std::size_t i = 0; i < sz; ++i) n.value[i] = x[i] + c0;
      break;
    }
    case Op::kNeg: {
      n.value = Tensor::zeros(x.rows(), x.cols());
      K().scale(-1.0, x.data(), n.value.data(), sz);
      break;
    }
    case Op::kTanh: {
      n.value = Tensor::zeros(x.rows(), x.cols());
      for (std::size_t i = 0; i < sz; ++i) n.value[i] = std::tanh(x[i]);
      break;
    }
    case Op::kRelu: {
      n.value = Tensor::zeros(x.rows(), x.cols());
      K().relu(x.data(), n.value.data(), sz);
      break;
    }
    case Op::kExp: {
      n.value = Tensor::zeros(x.rows(), x.cols());
      for (std::size_t i = 0; i < sz; ++i) n.value[i] = std::exp(x[i]);
      break;
    }
    case Op::kLog: {
      n.value = Tensor::zeros(x.rows(), x.cols());
      for (std::size_t i = 0; i < sz; ++i) n.value[i] = std::log(x[i]);
      break;
    }
    case Op::kSquare: {
      n.value = Tensor::zeros(x.rows(), x.cols());
      K().mul(x.data(), x.data(), n.value.data(), sz);
      break;
    }
    case Op::kClamp: {
      n.value = Tensor::zeros(x.rows(), x.cols());
      for (std::size_t i = 0; i < sz; ++i)
        n.value[i] = x[i] < c0 ? c0 : (x[i] > c1 ? c1 : x[i]);
      break;
    }
    case Op::kSumAll:
    case Op::kMeanAll: {
      double s = 0.0;
      for (std::size_t i = 0; i < sz; ++i) s += x[i];
      if (op == Op::kMeanAll) {
        VGCRL_CHECK(sz > 0, "mean_all: empty tensor");
        s /= static_cast<double>(sz);
      }
      n.value = Tensor::scalar(s);
      break;
    }
    case Op::kSumCols: {
      n.value = Tensor::zeros(x.rows(), 1);
      for (std::size_t i = 0; i < x.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < x.cols(); ++j) s += x.at(i, j);
        n.value[i] = s;
      }
      break;
    }
    case Op::kSumColGroups: {
      const std::size_t g = static_cast<std::size_t>(c0);
      VGCRL_CHECK(g >= 1 && x.cols() % g == 0, "sum_colgroups: cols ", x.cols(),
                  " not divisible by group ", g);
      const std::size_t groups = x.cols() / g;
      n.value = Tensor::zeros(x.rows(), groups);
      for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t q = 0; q < groups; ++q) {
          double s = 0.0;
          for (std::size_t r = 0; r < g; ++r) s += x.at(i, q * g + r);
          n.value.at(i, q) = s;
        }
      break;
    }
    case Op::kBroadcastRows: {
      const std::size_t m = static_cast<std::size_t>(c0);
      VGCRL_CHECK(x.rows() == 1, "broadcast_rows: expected [1,n], got ", x.shape_str());
      n.value = Tensor::zeros(m, x.cols());
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) n.value.at(i, j) = x[j];
      break;
    }
    default:
      fail("Graph: bad unary op ", op_name(op));
  }
  return {push(std::move(n))};
}

Var Graph::binary(Op op, Var a, Var b) {
  const int ia = check(a), ib = check(b);
  const Tensor& x = nodes_[ia].value;
  const Tensor& y = nodes_[ib].value;
  Node n;
  n.op = op;
  n.a = ia;
  n.b = ib;
  n.needs_grad = nodes_[ia].needs_grad || nodes_[ib].needs_grad;
  switch (op) {
    case Op::kMatmul: {
      VGCRL_CHECK(x.cols() == y.rows(), "matmul: inner dims disagree, ",
                  x.shape_str(), " x ", y.shape_str());
      n.value = Tensor::zeros(x.rows(), y.cols());
      K().matmul(x.data(), y.data(), n.value.data(), x.rows(), x.cols(), y.cols());
      break;
    }
    case Op::kAdd:
    case Op::kSub:
    case Op::kMul:
    case Op::kMin: {
      VGCRL_CHECK(x.same_shape(y), op_name(op), ": shape mismatch ", x.shape_str(),
                  " vs ", y.shape_str());
      n.value = Tensor::zeros(x.rows(), x.cols());
      if (op == Op::kAdd) K().add(x.data(), y.data(), n.value.data(), x.size());
      else if (op == Op::kSub) K().sub(x.data(), y.data(), n.value.data(), x.size());
      else if (op == Op::kMul) K().mul(x.data(), y.data(), n.value.data(), x.size());
      else
        for (std::size_t i = 0; i < x.size(); ++i) n.value[i] = x[i] <= y[i] ? x[i] : y[i];
      break;
    }
    case Op::kAddRow: {
      VGCRL_CHECK(y.rows() == 1 && y.cols() == x.cols(), "add_rowvec: ", x.shape_str(),
                  " + ", y.shape_str());
      n.value = Tensor::zeros(x.rows(), x.cols());
      for (std::size_t i = 0; i < x.rows(); ++i)
        K().add(x.data() + i * x.cols(), y.data(), n.value.data() + i * x.cols(), x.cols());
      break;
    }
    case Op::kAddCol:
    case Op::kSubCol: {
      VGCRL_CHECK(y.cols() == 1 && y.rows() == x.rows(), op_name(op), ": ", x.shape_str(),
                  " with column ", y.shape_str());
      n.value = Tensor::zeros(x.rows(), x.cols());
      const double sgn = op == Op::kAddCol ? 1.0 : -1.0;
      for (std::size_t i = 0; i < x.rows(); ++i) {
        const double c = sgn * y[i];
        for (std::size_t j = 0; j < x.cols(); ++j) n.value.at(i, j) = x.at(i, j) + c;
      }
      break;
    }
    case Op::kConcat: {
      VGCRL_CHECK(x.rows() == y.rows(), "concat_cols: row mismatch ", x.shape_str(),
                  " vs ", y.shape_str());
      n.value = Tensor::zeros(x.rows(), x.cols() + y.cols());
      for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) n.value.at(i, j) = x.at(i, j);
        for (std::size_t j = 0; j < y.cols(); ++j) n.value.at(i, x.cols() + j) = y.at(i, j);
      }
      break;
    }
    default:
      fail("Graph: bad binary op ", op_name(op));
  }
  return {push(std::move(n))};
}

Var Graph::matmul(Var a, Var b) { return binary(Op::kMatmul, a, b); }
Var Graph::add(Var a, Var b) { return binary(Op::kAdd, a, b); }
Var Graph::sub(Var a, Var b) { return binary(Op::kSub, a, b); }
Var Graph::mul(Var a, Var b) { return binary(Op::kMul, a, b); }
Var Graph::min_elem(Var a, Var b) { return binary(Op::kMin, a, b); }
Var Graph::add_rowvec(Var a, Var b) { return binary(Op::kAddRow, a, b); }
Var Graph::add_colvec(Var a, Var b) { return binary(Op::kAddCol, a, b); }
Var Graph::sub_colvec(Var a, Var b) { return binary(Op::kSubCol, a, b); }
Var Graph::concat_cols(Var a, Var b) { return binary(Op::kConcat, a, b); }
Var Graph::broadcast_rows(Var a, std::size_t m) {
  return unary(Op::kBroadcastRows, a, static_cast<double>(m));
}
Var Graph::scale(Var a, double c) { return unary(Op::kScale, a, c); }
Var Graph::add_const(Var a, double c) { return unary(Op::kAddConst, a, c); }
Var Graph::neg(Var a) { return unary(Op::kNeg, a); }
Var Graph::tanh(Var a) { return unary(Op::kTanh, a); }
Var Graph::relu(Var a) { return unary(Op::kRelu, a); }
Var Graph::exp(Var a) { return unary(Op::kExp, a); }
Var Graph::log(Var a) { return unary(Op::kLog, a); }
Var Graph::square(Var a) { return unary(Op::kSquare, a); }
Var Graph::clamp(Var a, double lo, double hi) {
  VGCRL_CHECK(lo <= hi, "clamp: lo ", lo, " > hi ", hi);
  return unary(Op::kClamp, a, lo, hi);
}
Var Graph::sum_all(Var a) { return unary(Op::kSumAll, a); }
Var Graph::mean_all(Var a) { return unary(Op::kMeanAll, a); }
Var Graph::sum_cols(Var a) { return unary(Op::kSumCols, a); }
Var Graph::sum_colgroups(Var a, std::size_t group) {
  return unary(Op::kSumColGroups, a, static_cast<double>(group));
}

Var Graph::gather_cols(Var a, std::vector<int> idx) {
  const int ia = check(a);
  const Tensor& x = nodes_[ia].value;
  VGCRL_CHECK(idx.size() == x.rows(), "gather_cols: ", idx.size(), " indices for ",
              x.rows(), " rows");
  Node n;
  n.op = Op::kGatherCols;
  n.a = ia;
  n.needs_grad = nodes_[ia].needs_grad;
  n.value = Tensor::zeros(x.rows(), 1);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const int j = idx[i];
    VGCRL_CHECK(j >= 0 && j < static_cast<int>(x.cols()), "gather_cols: index ", j,
                " out of range for ", x.shape_str());
    n.value[i] = x.at(i, static_cast<std::size_t>(j));
  }
  n.idx = std::move(idx);
  return {push(std::move(n))};
}

double Graph::scalar_value(Var v) const {
  const Tensor& t = value(v);
  VGCRL_CHECK(t.size() == 1, "scalar_value: tensor has shape ", t.shape_str());
  return t[0];
}

const Tensor& Graph::grad(Var v) const {
  const Node& n = nodes_[check(v)];
  VGCRL_CHECK(n.grad_ready, "grad: no gradient recorded for this node");
  return n.grad;
}

void Graph::ensure_grad(int id) {
  Node& n = nodes_[id];
  if (!n.grad_ready) {
    n.grad = Tensor::zeros(n.value.rows(), n.value.cols());
    n.grad_ready = true;
  }
}

void Graph::add_grad(int id, const Tensor& g) {
  ensure_grad(id);
  K().axpy(1.0, g.data(), nodes_[id].grad.data(), g.size());
}

void Graph::backward(Var loss) {
  const int root = check(loss);
  VGCRL_CHECK(nodes_[root].value.size() == 1, "backward: loss must be scalar, got ",
              nodes_[root].value.shape_str());
  ensure_grad(root);
  nodes_[root].grad[0] = 1.0;
  for (int u = root; u >= 0; --u) {
    const Node& n = nodes_[u];
    if (!n.needs_grad || !n.grad_ready) continue;
    backward_node(u);
  }
}

void Graph::backward_node(int id) {
  Node& n = nodes_[id];
  const Tensor& g = n.grad;
  auto want = [&](int p) { return p >= 0 && nodes_[p].needs_grad; };
  switch (n.op) {
    case Op::kLeaf:
      // accumulate into the bound parameter
      K().axpy(1.0, g.data(), n.param->grad.data(), g.size());
      break;
    case Op::kConst:
      break;
    case Op::kMatmul: {
      const Tensor& A = nodes_[n.a].value;
      const Tensor& B = nodes_[n.b].value;
      if (want(n.a)) {
        // dA = G * B^T
        Tensor bt = Tensor::zeros(B.cols(), B.rows());
        K().transpose(B.data(), bt.data(), B.rows(), B.cols());
        Tensor da = Tensor::zeros(A.rows(), A.cols());
        K().matmul(g.data(), bt.data(), da.data(), g.rows(), g.cols(), bt.cols());
        add_grad(n.a, da);
      }
      if (want(n.b)) {
        // dB = A^T * G
        Tensor at = Tensor::zeros(A.cols(), A.rows());
        K().transpose(A.data(), at.data(), A.rows(), A.cols());
        Tensor db = Tensor::zeros(B.rows(), B.cols());
        K().matmul(at.data(), g.data(), db.data(), at.rows(), at.cols(), g.cols());
        add_grad(n.b, db);
      }
      break;
    }
    case Op::kAdd:
      if (want(n.a)) add_grad(n.a, g);
      if (want(n.b)) add_grad(n.b, g);
      break;
    case Op::kSub:
      if (want(n.a)) add_grad(n.a, g);
      if (want(n.b)) {
        ensure_grad(n.b);
        K().axpy(-1.0, g.data(), nodes_[n.b].grad.data(), g.size());
      }
      break;
    case Op::kMul: {
      const Tensor& A = nodes_[n.a].value;
      const Tensor& B = nodes_[n.b].value;
      Tensor t = Tensor::zeros(g.rows(), g.cols());
      if (want(n.a)) {
        K().mul(g.data(), B.data(), t.data(), g.size());
        add_grad(n.a, t);
      }
      if (want(n.b)) {
        K().mul(g.data(), A.data(), t.data(), g.size());
        add_grad(n.b, t);
      }
      break;
    }
    case Op::kMin: {
      const Tensor& A = nodes_[n.a].value;
      const Tensor& B = nodes_[n.b].value;
      Tensor t = Tensor::zeros(g.rows(), g.cols());
      if (want(n.a)) {
        for (std::size_t i = 0; i < g.size(); ++i) t[i] = A[i] <= B[i] ? g[i] : 0.0;
        add_grad(n.a, t);
      }
      if (want(n.b)) {
        for (std::size_t i = 0; i < g.size(); ++i) t[i] = A[i] <= B[i] ? 0.0 : g[i];
        add_grad(n.b, t);
      }
      break;
    }
    case Op::kAddRow: {
      if (want(n.a)) add_grad(n.a, g);
      if (want(n.b)) {
        Tensor t = Tensor::zeros(1, g.cols());
        for (std::size_t i = 0; i < g.rows(); ++i)
          K().axpy(1.0, g.data() + i * g.cols(), t.data(), g.cols());
        add_grad(n.b, t);
      }
      break;
    }
    case Op::kAddCol:
    case Op::kSubCol: {
      if (want(n.a)) add_grad(n.a, g);
      if (want(n.b)) {
        const double sgn = n.op == Op::kAddCol ? 1.0 : -1.0;
        Tensor t = Tensor::zeros(g.rows(), 1);
        for (std::size_t i = 0; i < g.rows(); ++i) {
          double s = 0.0;
          for (std::size_t j = 0; j < g.cols(); ++j) s += g.at(i, j);
          t[i] = sgn * s;
        }
        add_grad(n.b, t);
      }
      break;
    }
    case Op::kConcat: {
      const Tensor& A = nodes_[n.a].value;
      const Tensor& B = nodes_[n.b].value;
      if (want(n.a)) {
        Tensor t = Tensor::zeros(A.rows(), A.cols());
        for (std::size_t i = 0; i < A.rows(); ++i)
          for (std::size_t j = 0; j < A.cols(); ++j) t.at(i, j) = g.at(i, j);
        add_grad(n.a, t);
      }
      if (want(n.b)) {
        Tensor t = Tensor::zeros(B.rows(), B.cols());
        for (std::size_t i = 0; i < B.rows(); ++i)
          for (std::size_t j = 0; j < B.cols(); ++j) t.at(i, j) = g.at(i, A.cols() + j);
        add_grad(n.b, t);
      }
      break;
    }
    case Op::kBroadcastRows: {
      if (want(n.a)) {
        Tensor t = Tensor::zeros(1, g.cols());
        for (std::size_t i = 0; i < g.rows(); ++i)
          K().axpy(1.0, g.data() + i * g.cols(), t.data(), g.cols());
        add_grad(n.a, t);
      }
      break;
    }
    case Op::kScale:
      if (want(n.a)) {
        ensure_grad(n.a);
        K().axpy(n.c0, g.data(), nodes_[n.a].grad.data(), g.size());
      }
      break;
    case Op::kAddConst:
      if (want(n.a)) add_grad(n.a, g);
      break;
    case Op::kNeg:
      if (want(n.a)) {
        ensure_grad(n.a);
        K().axpy(-1.0, g.data(), nodes_[n.a].grad.data(), g.size());
      }
      break;
    case Op::kTanh: {
      if (want(n.a)) {
        Tensor t = Tensor::zeros(g.rows(), g.cols());
        for (std::size_t i = 0; i < g.size(); ++i)
          t[i] = g[i] * (1.0 - n.value[i] * n.value[i]);
        add_grad(n.a, t);
      }
      break;
    }
    case Op::kRelu: {
      if (want(n.a)) {
        const Tensor& x = nodes_[n.a].value;
        Tensor t = Tensor::zeros(g.rows(), g.cols());
        K().relu_grad(x.data(), g.data(), t.data(), g.size());
        add_grad(n.a, t);
      }
      break;
    }
    case Op::kExp: {
      if (want(n.a)) {
        Tensor t = Tensor::zeros(g.rows(), g.cols());
        K().mul(g.data(), n.value.data(), t.data(), g.size());
        add_grad(n.a, t);
      }
      break;
    }
    case Op::kLog: {
      if (want(n.a)) {
        const Tensor& x = nodes_[n.a].value;
        Tensor t = Tensor::zeros(g.rows(), g.cols());
        for (std::size_t i = 0; i < g.size(); ++i) t[i] = g[i] / x[i];
        add_grad(n.a, t);
      }
      break;
    }
    case Op::kSquare: {
      if (want(n.a)) {
        const Tensor& x = nodes_[n.a].value;
        Tensor t = Tensor::zeros(g.rows(), g.cols());
        for (std::size_t i = 0; i < g.size(); ++i) t[i] = 2.0 * g[i] * x[i];
        add_grad(n.a, t);
      }
      break;
    }
    case Op::kClamp: {
      if (want(n.a)) {
        const Tensor& x = nodes_[n.a].value;
        Tensor t = Tensor::zeros(g.rows(), g.cols());
        for (std::size_t i = 0; i < g.size(); ++i)
          t[i] = (x[i] >= n.c0 && x[i] <= n.c1) ? g[i] : 0.0;
        add_grad(n.a, t);
      }
      break;
    }
    case Op::kSumAll:
    case Op::kMeanAll: {
      if (want(n.a)) {
        const Tensor& x = nodes_[n.a].value;
        const double s =
            n.op == Op::kSumAll ? g[0] : g[0] / static_cast<double>(x.size());
        Tensor t = Tensor::full(x.rows(), x.cols(), s);
        add_grad(n.a, t);
      }
      break;
    }
    case Op::kSumCols: {
      if (want(n.a)) {
        const Tensor& x = nodes_[n.a].value;
        Tensor t = Tensor::zeros(x.rows(), x.cols());
        for (std::size_t i = 0; i < x.rows(); ++i)
          for (std::size_t j = 0; j < x.cols(); ++j) t.at(i, j) = g[i];
        add_grad(n.a, t);
      }
      break;
    }
    case Op::kSumColGroups: {
      if (want(n.a)) {
        const Tensor& x = nodes_[n.a].value;
        const std::size_t grp = static_cast<std::size_t>(n.c0);
        Tensor t = Tensor::zeros(x.rows(), x.cols());
        for (std::size_t i = 0; i < x.rows(); ++i)
          for (std::size_t j = 0; j < x.cols(); ++j) t.at(i, j) = g.at(i, j / grp);
        add_grad(n.a, t);
      }
      break;
    }
    case Op::kGatherCols: {
      if (want(n.a)) {
        const Tensor& x = nodes_[n.a].value;
        Tensor t = Tensor::zeros(x.rows(), x.cols());
        for (std::size_t i = 0; i < x.rows(); ++i)
          t.at(i, static_cast<std::size_t>(n.idx[i])) = g[i];
        add_grad(n.a, t);
      }
      break;
    }
  }
}

Var logsumexp_cols(Graph& g, Var x) {
  const Tensor& xv = g.value(x);
  Tensor mx = Tensor::zeros(xv.rows(), 1);
  for (std::size_t i = 0; i < xv.rows(); ++i) {
    double m = xv.at(i, 0);
    for (std::size_t j = 1; j < xv.cols(); ++j) m = std::max(m, xv.at(i, j));
    mx[i] = m;
  }
  // The shift is a constant, so the identity (and its gradient) is exact for
  // any value of mx.
  Var shift = g.constant(std::move(mx));
  Var s = g.log(g.sum_cols(g.exp(g.sub_colvec(x, shift))));
  return g.add(s, shift);
}

}  // namespace vgcrl::nd
