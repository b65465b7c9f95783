#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vgcrl/ndmath/tensor.hpp"

namespace vgcrl::nd {

// A named parameter: the trainable value plus its gradient accumulator.
// Gradients accumulate across backward passes until zero_grad().
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string n, Tensor v)
      : name(std::move(n)), grad(Tensor::zeros(v.rows(), v.cols())) {
    value = std::move(v);
  }

  void zero_grad() { grad.fill(0.0); }
};

class Graph;

// Handle into a Graph's tape.
struct Var {
  int id = -1;
};

// Reverse-mode autodiff over a flat tape. Nodes are appended in evaluation
// order, so the tape itself is the topological order and backward() is a
// single reverse sweep. Graphs are cheap single-use objects: build, read
// values, backward, discard.
class Graph {
 public:
  Var leaf(Parameter& p);      // differentiable leaf bound to p
  Var constant(Tensor t);      // non-differentiable input
  Var constant_scalar(double v) { return constant(Tensor::scalar(v)); }

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);            // same shape
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);            // elementwise
  Var min_elem(Var a, Var b);       // elementwise min; ties route gradient to a
  Var add_rowvec(Var a, Var b);     // a[m,n] + broadcast b[1,n]
  Var add_colvec(Var a, Var b);     // a[m,n] + broadcast b[m,1]
  Var sub_colvec(Var a, Var b);     // a[m,n] - broadcast b[m,1]
  Var concat_cols(Var a, Var b);    // [m,n1],[m,n2] -> [m,n1+n2]
  Var broadcast_rows(Var a, std::size_t m);  // [1,n] -> [m,n]

  Var scale(Var a, double c);
  Var add_const(Var a, double c);
  Var neg(Var a);
  Var tanh(Var a);
  Var relu(Var a);
  Var exp(Var a);
  Var log(Var a);
  Var square(Var a);
  Var clamp(Var a, double lo, double hi);  // gradient passes only strictly inside? see note

  Var sum_all(Var a);    // -> [1,1]
  Var mean_all(Var a);   // -> [1,1]
  Var sum_cols(Var a);   // [m,n] -> [m,1]
  Var sum_colgroups(Var a, std::size_t group);          // [m,G*g] -> [m,G]
  Var gather_cols(Var a, std::vector<int> idx);         // [m,n], idx[m] -> [m,1]

  const Tensor& value(Var v) const { return nodes_[check(v)].value; }
  double scalar_value(Var v) const;
  const Tensor& grad(Var v) const;

  // Seeds d(loss)/d(loss)=1 and sweeps the tape in reverse. Leaf gradients
  // are added into their bound Parameter's grad.
  void backward(Var loss);

  std::size_t num_nodes() const { return nodes_.size(); }

 private:
  enum class Op : std::uint8_t {
    kLeaf, kConst, kMatmul, kAdd, kSub, kMul, kMin, kAddRow, kAddCol, kSubCol,
    kConcat, kBroadcastRows, kScale, kAddConst, kNeg, kTanh, kRelu, kExp, kLog,
    kSquare, kClamp, kSumAll, kMeanAll, kSumCols, kSumColGroups, kGatherCols,
  };

  struct Node {
    Op op;
    int a = -1, b = -1;
    double c0 = 0.0, c1 = 0.0;
    Tensor value;
    Tensor grad;
    Parameter* param = nullptr;
    std::vector<int> idx;
    bool needs_grad = false;
    bool grad_ready = false;
  };

  int push(Node n);
  int check(Var v) const;
  static const char* op_name(Op);
  Var unary(Op op, Var a, double c0 = 0.0, double c1 = 0.0);
  Var binary(Op op, Var a, Var b);
  void ensure_grad(int id);
  void add_grad(int id, const Tensor& g);
  void backward_node(int id);

  std::vector<Node> nodes_;
};

// log(sum(exp(x), cols)) computed stably via a constant row-max shift.
Var logsumexp_cols(Graph& g, Var x);

}  // namespace vgcrl::nd
