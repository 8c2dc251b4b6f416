#include "qfgan/tape.hpp"

#include <cmath>

#include "qfgan/errors.hpp"
#include "qfgan/par.hpp"

namespace qfgan::ad {

namespace {

void require(bool ok, const char* what) {
  if (!ok) raise(Errc::shape_mismatch, what);
}

long conv_out_len(long in_len, long kernel, int stride) {
  return (in_len - kernel) / stride + 1;
}

}  // namespace

const Node& Tape::arg(int id) const {
  if (id < 0 || id >= size()) raise(Errc::shape_mismatch, "tape node id out of range", id);
  return nodes_[std::size_t(id)];
}

const Node& Tape::node(int id) const { return arg(id); }

std::span<const double> Tape::values(int id) const { return arg(id).v; }

int Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return size() - 1;
}

int Tape::leaf(const Shape& shape, std::span<const double> values) {
  require(long(values.size()) == shape.numel(), "leaf value count differs from shape");
  Node n;
  n.op = Op::leaf;
  n.shape = shape;
  n.v.assign(values.begin(), values.end());
  return push(std::move(n));
}

int Tape::zeros(const Shape& shape) {
  Node n;
  n.op = Op::leaf;
  n.shape = shape;
  n.v.assign(std::size_t(shape.numel()), 0.0);
  return push(std::move(n));
}

int Tape::add(int a, int b) {
  const Node &na = arg(a), &nb = arg(b);
  require(na.shape == nb.shape, "add operands differ in shape");
  Node n;
  n.op = Op::add;
  n.shape = na.shape;
  n.a = a;
  n.b = b;
  n.v.resize(na.v.size());
  for (std::size_t i = 0; i < n.v.size(); ++i) n.v[i] = na.v[i] + nb.v[i];
  return push(std::move(n));
}

int Tape::sub(int a, int b) {
  const Node &na = arg(a), &nb = arg(b);
  require(na.shape == nb.shape, "sub operands differ in shape");
  Node n;
  n.op = Op::sub;
  n.shape = na.shape;
  n.a = a;
  n.b = b;
  n.v.resize(na.v.size());
  for (std::size_t i = 0; i < n.v.size(); ++i) n.v[i] = na.v[i] - nb.v[i];
  return push(std::move(n));
}

int Tape::mul(int a, int b) {
  const Node &na = arg(a), &nb = arg(b);
  require(na.shape == nb.shape, "mul operands differ in shape");
  Node n;
  n.op = Op::mul;
  n.shape = na.shape;
  n.a = a;
  n.b = b;
  n.v.resize(na.v.size());
  for (std::size_t i = 0; i < n.v.size(); ++i) n.v[i] = na.v[i] * nb.v[i];
  return push(std::move(n));
}

int Tape::neg(int a) {
  const Node& na = arg(a);
  Node n;
  n.op = Op::neg;
  n.shape = na.shape;
  n.a = a;
  n.v.resize(na.v.size());
  for (std::size_t i = 0; i < n.v.size(); ++i) n.v[i] = -na.v[i];
  return push(std::move(n));
}

int Tape::scale(int a, double c) {
  const Node& na = arg(a);
  Node n;
  n.op = Op::scale;
  n.shape = na.shape;
  n.a = a;
  n.c = c;
  n.v.resize(na.v.size());
  for (std::size_t i = 0; i < n.v.size(); ++i) n.v[i] = na.v[i] * c;
  return push(std::move(n));
}

int Tape::add_const(int a, double c) {
  const Node& na = arg(a);
  Node n;
  n.op = Op::add_const;
  n.shape = na.shape;
  n.a = a;
  n.c = c;
  n.v.resize(na.v.size());
  for (std::size_t i = 0; i < n.v.size(); ++i) n.v[i] = na.v[i] + c;
  return push(std::move(n));
}

int Tape::divg(int a, int b) {
  const Node &na = arg(a), &nb = arg(b);
  require(na.shape == nb.shape, "divg operands differ in shape");
  Node n;
  n.op = Op::divg;
  n.shape = na.shape;
  n.a = a;
  n.b = b;
  n.v.resize(na.v.size());
  for (std::size_t i = 0; i < n.v.size(); ++i) n.v[i] = nb.v[i] != 0.0 ? na.v[i] / nb.v[i] : 0.0;
  return push(std::move(n));
}

int Tape::sqrt_guard(int a) {
  const Node& na = arg(a);
  Node n;
  n.op = Op::sqrt_guard;
  n.shape = na.shape;
  n.a = a;
  n.v.resize(na.v.size());
  for (std::size_t i = 0; i < n.v.size(); ++i) n.v[i] = na.v[i] > 0.0 ? std::sqrt(na.v[i]) : 0.0;
  return push(std::move(n));
}

int Tape::heaviside_mul(int a, int gate) {
  const Node &na = arg(a), &ng = arg(gate);
  require(na.shape == ng.shape, "heaviside_mul operands differ in shape");
  Node n;
  n.op = Op::heaviside_mul;
  n.shape = na.shape;
  n.a = a;
  n.b = gate;
  n.v.resize(na.v.size());
  for (std::size_t i = 0; i < n.v.size(); ++i) n.v[i] = ng.v[i] > 0.0 ? na.v[i] : 0.0;
  return push(std::move(n));
}

int Tape::relu(int a) {
  const Node& na = arg(a);
  Node n;
  n.op = Op::relu;
  n.shape = na.shape;
  n.a = a;
  n.v.resize(na.v.size());
  for (std::size_t i = 0; i < n.v.size(); ++i) n.v[i] = na.v[i] > 0.0 ? na.v[i] : 0.0;
  return push(std::move(n));
}

int Tape::conv_fwd(int x, int w, int stride) {
  const Node &nx = arg(x), &nw = arg(w);
  require(nx.shape.rank == 3 && nw.shape.rank == 3, "conv_fwd needs rank-3 operands");
  require(nx.shape.d1 == nw.shape.d1, "conv_fwd channel counts differ");
  require(stride >= 1, "conv_fwd stride must be >= 1");
  require(nw.shape.d2 <= nx.shape.d2, "conv_fwd kernel longer than input");
  const long B = nx.shape.d0, Ci = nx.shape.d1, Li = nx.shape.d2;
  const long Co = nw.shape.d0, K = nw.shape.d2;
  const long Lo = conv_out_len(Li, K, stride);
  Node n;
  n.op = Op::conv_fwd;
  n.shape = cube_shape(B, Co, Lo);
  n.a = x;
  n.b = w;
  n.stride = stride;
  n.v.assign(std::size_t(B * Co * Lo), 0.0);
  const double* xv = nx.v.data();
  const double* wv = nw.v.data();
  double* yv = n.v.data();
  par::for_index(B * Co, [&](long bc) {
    const long bn = bc / Co, co = bc % Co;
    for (long t = 0; t < Lo; ++t) {
      double acc = 0.0;
      for (long ci = 0; ci < Ci; ++ci) {
        const double* xr = xv + (bn * Ci + ci) * Li + t * stride;
        const double* wr = wv + (co * Ci + ci) * K;
        for (long k = 0; k < K; ++k) acc += xr[k] * wr[k];
      }
      yv[bc * Lo + t] = acc;
    }
  });
  return push(std::move(n));
}

int Tape::conv_input_vjp(int g, int w, int stride, long input_length) {
  const Node &ng = arg(g), &nw = arg(w);
  require(ng.shape.rank == 3 && nw.shape.rank == 3, "conv_input_vjp needs rank-3 operands");
  require(ng.shape.d1 == nw.shape.d0, "conv_input_vjp output channel counts differ");
  const long B = ng.shape.d0, Co = ng.shape.d1, Lo = ng.shape.d2;
  const long Ci = nw.shape.d1, K = nw.shape.d2;
  require(input_length >= K, "conv_input_vjp input shorter than kernel");
  require(conv_out_len(input_length, K, stride) == Lo, "conv_input_vjp length inconsistent");
  Node n;
  n.op = Op::conv_input_vjp;
  n.shape = cube_shape(B, Ci, input_length);
  n.a = g;
  n.b = w;
  n.stride = stride;
  n.aux = input_length;
  n.v.assign(std::size_t(B * Ci * input_length), 0.0);
  const double* gv = ng.v.data();
  const double* wv = nw.v.data();
  double* dv = n.v.data();
  par::for_index(B * Ci, [&](long bc) {
    const long bn = bc / Ci, ci = bc % Ci;
    for (long p = 0; p < input_length; ++p) {
      double acc = 0.0;
      for (long k = 0; k <= p && k < K; ++k) {
        if ((p - k) % stride != 0) continue;
        const long t = (p - k) / stride;
        if (t >= Lo) continue;
        for (long co = 0; co < Co; ++co)
          acc += gv[(bn * Co + co) * Lo + t] * wv[(co * Ci + ci) * K + k];
      }
      dv[bc * input_length + p] = acc;
    }
  });
  return push(std::move(n));
}

int Tape::conv_weight_vjp(int g, int x, int stride, long kernel) {
  const Node &ng = arg(g), &nx = arg(x);
  require(ng.shape.rank == 3 && nx.shape.rank == 3, "conv_weight_vjp needs rank-3 operands");
  require(ng.shape.d0 == nx.shape.d0, "conv_weight_vjp batch sizes differ");
  const long B = ng.shape.d0, Co = ng.shape.d1, Lo = ng.shape.d2;
  const long Ci = nx.shape.d1, Li = nx.shape.d2;
  require(kernel >= 1 && kernel <= Li, "conv_weight_vjp kernel outside input");
  require(conv_out_len(Li, kernel, stride) == Lo, "conv_weight_vjp length inconsistent");
  Node n;
  n.op = Op::conv_weight_vjp;
  n.shape = cube_shape(Co, Ci, kernel);
  n.a = g;
  n.b = x;
  n.stride = stride;
  n.aux = kernel;
  n.v.assign(std::size_t(Co * Ci * kernel), 0.0);
  const double* gv = ng.v.data();
  const double* xv = nx.v.data();
  double* dv = n.v.data();
  par::for_index(Co * Ci, [&](long cc) {
    const long co = cc / Ci, ci = cc % Ci;
    for (long k = 0; k < kernel; ++k) {
      double acc = 0.0;
      for (long bn = 0; bn < B; ++bn) {
        const double* gr = gv + (bn * Co + co) * Lo;
        const double* xr = xv + (bn * Ci + ci) * Li + k;
        for (long t = 0; t < Lo; ++t) acc += gr[t] * xr[t * stride];
      }
      dv[cc * kernel + k] = acc;
    }
  });
  return push(std::move(n));
}

int Tape::bcast_chan(int v, long batch, long length) {
  const Node& nv = arg(v);
  require(nv.shape.rank == 1, "bcast_chan needs a vector");
  require(batch >= 1 && length >= 1, "bcast_chan target must be non-empty");
  const long C = nv.shape.d0;
  Node n;
  n.op = Op::bcast_chan;
  n.shape = cube_shape(batch, C, length);
  n.a = v;
  n.v.resize(std::size_t(batch * C * length));
  for (long bn = 0; bn < batch; ++bn)
    for (long c = 0; c < C; ++c)
      for (long l = 0; l < length; ++l) n.v[std::size_t((bn * C + c) * length + l)] = nv.v[std::size_t(c)];
  return push(std::move(n));
}

int Tape::sum_chan(int x) {
  const Node& nx = arg(x);
  require(nx.shape.rank == 3, "sum_chan needs a rank-3 operand");
  const long B = nx.shape.d0, C = nx.shape.d1, L = nx.shape.d2;
  Node n;
  n.op = Op::sum_chan;
  n.shape = vec_shape(C);
  n.a = x;
  n.v.assign(std::size_t(C), 0.0);
  for (long c = 0; c < C; ++c) {
    double acc = 0.0;
    for (long bn = 0; bn < B; ++bn)
      for (long l = 0; l < L; ++l) acc += nx.v[std::size_t((bn * C + c) * L + l)];
    n.v[std::size_t(c)] = acc;
  }
  return push(std::move(n));
}

int Tape::matmul_nt(int a, int w) {
  const Node &na = arg(a), &nw = arg(w);
  require(na.shape.rank == 2 && nw.shape.rank == 2, "matmul_nt needs rank-2 operands");
  require(na.shape.d1 == nw.shape.d1, "matmul_nt inner sizes differ");
  const long B = na.shape.d0, I = na.shape.d1, O = nw.shape.d0;
  Node n;
  n.op = Op::matmul_nt;
  n.shape = mat_shape(B, O);
  n.a = a;
  n.b = w;
  n.v.assign(std::size_t(B * O), 0.0);
  const double* av = na.v.data();
  const double* wv = nw.v.data();
  double* yv = n.v.data();
  par::for_index(B, [&](long bn) {
    for (long o = 0; o < O; ++o) {
      double acc = 0.0;
      for (long i = 0; i < I; ++i) acc += av[bn * I + i] * wv[o * I + i];
      yv[bn * O + o] = acc;
    }
  });
  return push(std::move(n));
}

int Tape::matmul_nn(int a, int b) {
  const Node &na = arg(a), &nb = arg(b);
  require(na.shape.rank == 2 && nb.shape.rank == 2, "matmul_nn needs rank-2 operands");
  require(na.shape.d1 == nb.shape.d0, "matmul_nn inner sizes differ");
  const long B = na.shape.d0, O = na.shape.d1, I = nb.shape.d1;
  Node n;
  n.op = Op::matmul_nn;
  n.shape = mat_shape(B, I);
  n.a = a;
  n.b = b;
  n.v.assign(std::size_t(B * I), 0.0);
  const double* av = na.v.data();
  const double* bv = nb.v.data();
  double* yv = n.v.data();
  par::for_index(B, [&](long bn) {
    for (long i = 0; i < I; ++i) {
      double acc = 0.0;
      for (long o = 0; o < O; ++o) acc += av[bn * O + o] * bv[o * I + i];
      yv[bn * I + i] = acc;
    }
  });
  return push(std::move(n));
}

int Tape::matmul_tn(int a, int b) {
  const Node &na = arg(a), &nb = arg(b);
  require(na.shape.rank == 2 && nb.shape.rank == 2, "matmul_tn needs rank-2 operands");
  require(na.shape.d0 == nb.shape.d0, "matmul_tn batch sizes differ");
  const long B = na.shape.d0, O = na.shape.d1, I = nb.shape.d1;
  Node n;
  n.op = Op::matmul_tn;
  n.shape = mat_shape(O, I);
  n.a = a;
  n.b = b;
  n.v.assign(std::size_t(O * I), 0.0);
  const double* av = na.v.data();
  const double* bv = nb.v.data();
  double* yv = n.v.data();
  par::for_index(O, [&](long o) {
    for (long i = 0; i < I; ++i) {
      double acc = 0.0;
      for (long bn = 0; bn < B; ++bn) acc += av[bn * O + o] * bv[bn * I + i];
      yv[o * I + i] = acc;
    }
  });
  return push(std::move(n));
}

int Tape::bcast_rows(int v, long rows) {
  const Node& nv = arg(v);
  require(nv.shape.rank == 1, "bcast_rows needs a vector");
  require(rows >= 1, "bcast_rows target must be non-empty");
  const long O = nv.shape.d0;
  Node n;
  n.op = Op::bcast_rows;
  n.shape = mat_shape(rows, O);
  n.a = v;
  n.v.resize(std::size_t(rows * O));
  for (long r = 0; r < rows; ++r)
    for (long o = 0; o < O; ++o) n.v[std::size_t(r * O + o)] = nv.v[std::size_t(o)];
  return push(std::move(n));
}

int Tape::colsum(int a) {
  const Node& na = arg(a);
  require(na.shape.rank == 2, "colsum needs a rank-2 operand");
  const long R = na.shape.d0, C = na.shape.d1;
  Node n;
  n.op = Op::colsum;
  n.shape = vec_shape(C);
  n.a = a;
  n.v.assign(std::size_t(C), 0.0);
  for (long c = 0; c < C; ++c) {
    double acc = 0.0;
    for (long r = 0; r < R; ++r) acc += na.v[std::size_t(r * C + c)];
    n.v[std::size_t(c)] = acc;
  }
  return push(std::move(n));
}

int Tape::bcast_cols(int v, long cols) {
  const Node& nv = arg(v);
  require(nv.shape.rank == 1, "bcast_cols needs a vector");
  require(cols >= 1, "bcast_cols target must be non-empty");
  const long B = nv.shape.d0;
  Node n;
  n.op = Op::bcast_cols;
  n.shape = mat_shape(B, cols);
  n.a = v;
  n.v.resize(std::size_t(B * cols));
  for (long r = 0; r < B; ++r)
    for (long c = 0; c < cols; ++c) n.v[std::size_t(r * cols + c)] = nv.v[std::size_t(r)];
  return push(std::move(n));
}

int Tape::row_sum(int a) {
  const Node& na = arg(a);
  require(na.shape.rank == 2, "row_sum needs a rank-2 operand");
  const long R = na.shape.d0, C = na.shape.d1;
  Node n;
  n.op = Op::row_sum;
  n.shape = vec_shape(R);
  n.a = a;
  n.v.assign(std::size_t(R), 0.0);
  for (long r = 0; r < R; ++r) {
    double acc = 0.0;
    for (long c = 0; c < C; ++c) acc += na.v[std::size_t(r * C + c)];
    n.v[std::size_t(r)] = acc;
  }
  return push(std::move(n));
}

int Tape::mean_all(int a) {
  const Node& na = arg(a);
  Node n;
  n.op = Op::mean_all;
  n.shape = vec_shape(1);
  n.a = a;
  double acc = 0.0;
  for (double x : na.v) acc += x;
  n.v.assign(1, acc / double(na.shape.numel()));
  return push(std::move(n));
}

int Tape::sum_all(int a) {
  const Node& na = arg(a);
  Node n;
  n.op = Op::sum_all;
  n.shape = vec_shape(1);
  n.a = a;
  double acc = 0.0;
  for (double x : na.v) acc += x;
  n.v.assign(1, acc);
  return push(std::move(n));
}

int Tape::bcast_all(int s, const Shape& shape) {
  const Node& ns = arg(s);
  require(ns.shape.numel() == 1, "bcast_all needs a scalar");
  Node n;
  n.op = Op::bcast_all;
  n.shape = shape;
  n.a = s;
  n.v.assign(std::size_t(shape.numel()), ns.v[0]);
  return push(std::move(n));
}

int Tape::reshape(int a, const Shape& shape) {
  const Node& na = arg(a);
  require(na.shape.numel() == shape.numel(), "reshape changes element count");
  Node n;
  n.op = Op::reshape;
  n.shape = shape;
  n.a = a;
  n.v = na.v;
  return push(std::move(n));
}

std::vector<int> backward_record(Tape& tape, int root, int upstream,
                                 std::span<const int> wanted) {
  require(tape.node(upstream).shape == tape.node(root).shape,
          "backward seed shape differs from root");
  std::vector<int> grad(std::size_t(root) + 1, -1);
  grad[std::size_t(root)] = upstream;
  auto acc = [&](int target, int contrib) {
    int& slot = grad[std::size_t(target)];
    slot = slot < 0 ? contrib : tape.add(slot, contrib);
  };
  for (int id = root; id >= 0; --id) {
    const int g = grad[std::size_t(id)];
    if (g < 0) continue;
    // Copy: emitting nodes may reallocate the tape's storage.
    const Node nd = tape.node(id);
    switch (nd.op) {
      case Op::leaf:
        break;
      case Op::add:
        acc(nd.a, g);
        acc(nd.b, g);
        break;
      case Op::sub:
        acc(nd.a, g);
        acc(nd.b, tape.neg(g));
        break;
      case Op::mul:
        acc(nd.a, tape.mul(g, nd.b));
        acc(nd.b, tape.mul(g, nd.a));
        break;
      case Op::neg:
        acc(nd.a, tape.neg(g));
        break;
      case Op::scale:
        acc(nd.a, tape.scale(g, nd.c));
        break;
      case Op::add_const:
        acc(nd.a, g);
        break;
      case Op::divg:
        // y = a/b where b != 0: da = g/b, db = -g*y/b; both stay 0 where b is.
        acc(nd.a, tape.divg(g, nd.b));
        acc(nd.b, tape.neg(tape.divg(tape.mul(g, id), nd.b)));
        break;
      case Op::sqrt_guard:
        // dy/da = 1/(2y) where y > 0, taken as 0 at the kink.
        acc(nd.a, tape.divg(tape.scale(g, 0.5), id));
        break;
      case Op::heaviside_mul:
        // The gate argument is a fixed mask; it receives no gradient.
        acc(nd.a, tape.heaviside_mul(g, nd.b));
        break;
      case Op::relu:
        acc(nd.a, tape.heaviside_mul(g, nd.a));
        break;
      case Op::conv_fwd:
        acc(nd.a, tape.conv_input_vjp(g, nd.b, nd.stride, tape.node(nd.a).shape.d2));
        acc(nd.b, tape.conv_weight_vjp(g, nd.a, nd.stride, tape.node(nd.b).shape.d2));
        break;
      case Op::conv_input_vjp:
        // The three conv ops contract one trilinear form; each adjoint is
        // another member of the triple.
        acc(nd.a, tape.conv_fwd(g, nd.b, nd.stride));
        acc(nd.b, tape.conv_weight_vjp(nd.a, g, nd.stride, tape.node(nd.b).shape.d2));
        break;
      case Op::conv_weight_vjp:
        acc(nd.a, tape.conv_fwd(nd.b, g, nd.stride));
        acc(nd.b, tape.conv_input_vjp(nd.a, g, nd.stride, tape.node(nd.b).shape.d2));
        break;
      case Op::bcast_chan:
        acc(nd.a, tape.sum_chan(g));
        break;
      case Op::sum_chan: {
        const Shape& xs = tape.node(nd.a).shape;
        acc(nd.a, tape.bcast_chan(g, xs.d0, xs.d2));
        break;
      }
      case Op::matmul_nt:
        acc(nd.a, tape.matmul_nn(g, nd.b));
        acc(nd.b, tape.matmul_tn(g, nd.a));
        break;
      case Op::matmul_nn:
        acc(nd.a, tape.matmul_nt(g, nd.b));
        acc(nd.b, tape.matmul_tn(nd.a, g));
        break;
      case Op::matmul_tn:
        acc(nd.a, tape.matmul_nt(nd.b, g));
        acc(nd.b, tape.matmul_nn(nd.a, g));
        break;
      case Op::bcast_rows:
        acc(nd.a, tape.colsum(g));
        break;
      case Op::colsum:
        acc(nd.a, tape.bcast_rows(g, tape.node(nd.a).shape.d0));
        break;
      case Op::bcast_cols:
        acc(nd.a, tape.row_sum(g));
        break;
      case Op::row_sum:
        acc(nd.a, tape.bcast_cols(g, tape.node(nd.a).shape.d1));
        break;
      case Op::mean_all: {
        const Shape& xs = tape.node(nd.a).shape;
        acc(nd.a, tape.bcast_all(tape.scale(g, 1.0 / double(xs.numel())), xs));
        break;
      }
      case Op::sum_all:
        acc(nd.a, tape.bcast_all(g, tape.node(nd.a).shape));
        break;
      case Op::bcast_all:
        acc(nd.a, tape.sum_all(g));
        break;
      case Op::reshape:
        acc(nd.a, tape.reshape(g, tape.node(nd.a).shape));
        break;
    }
  }
  std::vector<int> out;
  out.reserve(wanted.size());
  for (int w : wanted) {
    if (w < 0 || w > root) raise(Errc::shape_mismatch, "wanted node id out of range", w);
    out.push_back(grad[std::size_t(w)]);
  }
  return out;
}

std::vector<std::vector<double>> backward_values(const Tape& tape, int root,
                                                 std::span<const double> upstream,
                                                 std::span<const int> wanted) {
  Tape t = tape;
  const int up = t.leaf(tape.node(root).shape, upstream);
  const std::vector<int> ids = backward_record(t, root, up, wanted);
  std::vector<std::vector<double>> out(wanted.size());
  for (std::size_t i = 0; i < wanted.size(); ++i) {
    if (ids[i] >= 0) {
      std::span<const double> g = t.values(ids[i]);
      out[i].assign(g.begin(), g.end());
    } else {
      out[i].assign(std::size_t(tape.node(wanted[i]).shape.numel()), 0.0);
    }
  }
  return out;
}

}  // namespace qfgan::ad
