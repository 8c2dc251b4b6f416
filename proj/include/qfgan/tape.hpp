#pragma once

#include <span>
#include <vector>

// Reverse-mode differentiation on an explicit tape. Every operation computes
// its value eagerly and records itself, so argument ids are always smaller
// than result ids and reverse creation order is a valid reverse topological
// order. backward_record emits the gradient computation as new tape nodes;
// because the primitive set is closed under differentiation, that recorded
// pass can be differentiated again, which is what the gradient penalty needs
// (a parameter gradient of an input-gradient norm).
namespace qfgan::ad {

struct Shape {
  int rank = 1;
  long d0 = 1;
  long d1 = 1;
  long d2 = 1;

  long numel() const { return d0 * d1 * d2; }
  bool operator==(const Shape&) const = default;
};

inline Shape scalar_shape() { return Shape{1, 1, 1, 1}; }
inline Shape vec_shape(long n) { return Shape{1, n, 1, 1}; }
inline Shape mat_shape(long r, long c) { return Shape{2, r, c, 1}; }
inline Shape cube_shape(long a, long b, long c) { return Shape{3, a, b, c}; }

enum class Op {
  leaf,
  add,            // elementwise a + b
  sub,            // elementwise a - b
  mul,            // elementwise a * b
  neg,
  scale,          // a * c
  add_const,      // a + c
  divg,           // elementwise a / b, 0 where b == 0
  sqrt_guard,     // sqrt(max(a, 0))
  heaviside_mul,  // a * [b > 0]; the gate argument b receives no gradient
  relu,
  conv_fwd,        // (x[B,Ci,Li], w[Co,Ci,K]; stride) -> y[B,Co,Lo]
  conv_input_vjp,  // (g[B,Co,Lo], w[Co,Ci,K]; stride, aux=Li) -> dx[B,Ci,Li]
  conv_weight_vjp, // (g[B,Co,Lo], x[B,Ci,Li]; stride) -> dw[Co,Ci,K], K=aux
  bcast_chan,      // v[C] -> [B,C,L]
  sum_chan,        // [B,C,L] -> v[C]
  matmul_nt,       // (a[B,I], w[O,I]) -> a w^T [B,O]
  matmul_nn,       // (a[B,O], b[O,I]) -> a b [B,I]
  matmul_tn,       // (a[B,O], b[B,I]) -> a^T b [O,I]
  bcast_rows,      // v[O] -> [B,O]
  colsum,          // [B,O] -> v[O]
  bcast_cols,      // v[B] -> [B,M]
  row_sum,         // [B,M] -> v[B]
  mean_all,        // any -> scalar
  sum_all,         // any -> scalar
  bcast_all,       // scalar -> any
  reshape          // same numel, new shape
};

struct Node {
  Op op = Op::leaf;
  Shape shape;
  int a = -1;
  int b = -1;
  double c = 0.0;
  int stride = 1;
  long aux = 0;
  std::vector<double> v;
};

class Tape {
 public:
  int leaf(const Shape& shape, std::span<const double> values);
  int zeros(const Shape& shape);

  int add(int a, int b);
  int sub(int a, int b);
  int mul(int a, int b);
  int neg(int a);
  int scale(int a, double c);
  int add_const(int a, double c);
  int divg(int a, int b);
  int sqrt_guard(int a);
  int heaviside_mul(int a, int gate);
  int relu(int a);
  int conv_fwd(int x, int w, int stride);
  int conv_input_vjp(int g, int w, int stride, long input_length);
  int conv_weight_vjp(int g, int x, int stride, long kernel);
  int bcast_chan(int v, long batch, long length);
  int sum_chan(int x);
  int matmul_nt(int a, int w);
  int matmul_nn(int a, int b);
  int matmul_tn(int a, int b);
  int bcast_rows(int v, long rows);
  int colsum(int a);
  int bcast_cols(int v, long cols);
  int row_sum(int a);
  int mean_all(int a);
  int sum_all(int a);
  int bcast_all(int s, const Shape& shape);
  int reshape(int a, const Shape& shape);

  const Node& node(int id) const;
  int size() const { return int(nodes_.size()); }
  std::span<const double> values(int id) const;

 private:
  int push(Node n);
  const Node& arg(int id) const;

  std::vector<Node> nodes_;
};

// Emits the reverse pass of node `root`, seeded with node `upstream` (same
// shape as root), as new nodes on the tape. Returns one gradient node id per
// wanted node, -1 where no path exists (gradient identically zero).
std::vector<int> backward_record(Tape& tape, int root, int upstream,
                                 std::span<const int> wanted);

// Numeric reverse pass; no nodes are added. Returns one dense gradient buffer
// per wanted node (zeros where no path exists).
std::vector<std::vector<double>> backward_values(const Tape& tape, int root,
                                                 std::span<const double> upstream,
                                                 std::span<const int> wanted);

}  // namespace qfgan::ad
