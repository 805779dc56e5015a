// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#include "nie/ad/gradcheck.hpp"

#include <algorithm>

#include "nie/ad/ops.hpp"
#include "nie/common/random.hpp"

namespace nie::ad {

Matrix random_matrix(Index rows, Index cols, std::uint64_t seed, double lo, double hi) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = uniform_real(rng, lo, hi);
  return m;
}

namespace {

double evaluate(const ScalarFn& fn, const std::vector<Matrix>& inputs) {
  Tape tape;
  std::vector<Var> vars;
  for (const auto& m : inputs) vars.push_back(tape.constant(m));
  return fn(tape, vars).scalar();
}

}  // namespace

double gradient_error(const ScalarFn& fn, const std::vector<Matrix>& inputs, double h) {
  std::vector<Matrix> analytic;
  {
    Tape tape;
    std::vector<Var> vars;
    for (const auto& m : inputs) vars.push_back(tape.leaf(m));
    Var loss = fn(tape, vars);
    tape.backward(loss);
    for (const auto& v : vars) analytic.push_back(tape.grad(v));
  }
  double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
  std::vector<Matrix> probe = inputs;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    for (Index i = 0; i < inputs[k].size(); ++i) {
      const double x0 = inputs[k].data()[i];
      probe[k].data()[i] = x0 + h;
      const double fp = evaluate(fn, probe);
      probe[k].data()[i] = x0 - h;
      const double fm = evaluate(fn, probe);
      probe[k].data()[i] = x0;
      const double numeric = (fp - fm) / (2.0 * h);
      const double a = analytic[k].data()[i];
      diff2 += (a - numeric) * (a - numeric);
      a2 += a * a;
      n2 += numeric * numeric;
    }
  }
  return std::sqrt(diff2) / std::max({std::sqrt(a2), std::sqrt(n2), 1e-10});
}

ScalarFn project_output(std::function<Var(Tape&, const std::vector<Var>&)> op, Index rows,
                        Index cols, std::uint64_t seed) {
  Matrix r = random_matrix(rows, cols, seed);
  return [op = std::move(op), r](Tape& tape, const std::vector<Var>& in) {
    return sum(mul(op(tape, in), tape.constant(r)));
  };
}

std::vector<GradCheckResult> check_ops(std::uint64_t seed, double tolerance) {
  struct Case {
    std::string name;
    std::function<Var(Tape&, const std::vector<Var>&)> op;
    std::vector<Matrix> inputs;
  };
  const Index n = 5, m = 7;
  std::uint64_t salt = 0;
  auto rnd = [&](Index r, Index c, double lo = -1.0, double hi = 1.0) {
    return random_matrix(r, c, derive_seed(seed, ++salt), lo, hi);
  };
  const Matrix a = rnd(n, m);
  const Matrix b = rnd(n, m);
  const Matrix spd_factor = rnd(n, n);
  Matrix spd = spd_factor * spd_factor.transpose() + Matrix::Identity(n, n);
  Matrix mask = Matrix::Ones(n, m);
  for (Index i = 0; i < n; ++i) mask(i, i) = 0.0;

  std::vector<Case> cases = {
      {"matmul", [](Tape&, const std::vector<Var>& v) { return matmul(v[0], v[1]); }, {a, rnd(m, n)}},
      {"transpose", [](Tape&, const std::vector<Var>& v) { return transpose(v[0]); }, {a}},
      {"add", [](Tape&, const std::vector<Var>& v) { return add(v[0], v[1]); }, {a, b}},
      {"add_row", [](Tape&, const std::vector<Var>& v) { return add(v[0], v[1]); }, {a, rnd(1, m)}},
      {"sub", [](Tape&, const std::vector<Var>& v) { return sub(v[0], v[1]); }, {a, b}},
      {"mul", [](Tape&, const std::vector<Var>& v) { return mul(v[0], v[1]); }, {a, b}},
      {"mul_scalar", [](Tape&, const std::vector<Var>& v) { return mul(v[0], v[1]); }, {a, rnd(1, 1)}},
      {"scale", [](Tape&, const std::vector<Var>& v) { return scale(v[0], -2.5); }, {a}},
      {"add_scalar", [](Tape&, const std::vector<Var>& v) { return add_scalar(v[0], 0.3); }, {a}},
      {"concat_rows", [](Tape&, const std::vector<Var>& v) { return concat({v[0], v[1]}, 0); }, {a, b}},
      {"concat_cols", [](Tape&, const std::vector<Var>& v) { return concat({v[0], v[1]}, 1); }, {a, b}},
      {"slice_rows", [](Tape&, const std::vector<Var>& v) { return slice_rows(v[0], 1, 3); }, {a}},
      {"gather_rows",
       [](Tape&, const std::vector<Var>& v) { return gather_rows(v[0], {4, 0, 0, 2, 4, 4, 1}); },
       {a}},
      {"max_over_axis0", [](Tape&, const std::vector<Var>& v) { return max_over_axis(v[0], 0).value; }, {a}},
      {"max_over_axis1", [](Tape&, const std::vector<Var>& v) { return max_over_axis(v[0], 1).value; }, {a}},
      {"max_over_groups",
       [](Tape&, const std::vector<Var>& v) { return max_over_groups(v[0], 2).value; },
       {rnd(6, m)}},
      {"leaky_relu", [](Tape&, const std::vector<Var>& v) { return leaky_relu(v[0]); }, {a}},
      {"exp", [](Tape&, const std::vector<Var>& v) { return exp(v[0]); }, {a}},
      {"log", [](Tape&, const std::vector<Var>& v) { return log(v[0]); }, {rnd(n, m, 0.5, 2.0)}},
      {"softmax_rows", [](Tape&, const std::vector<Var>& v) { return softmax_rows(v[0]); }, {a}},
      {"log_softmax_rows",
       [mask](Tape&, const std::vector<Var>& v) { return log_softmax_rows(v[0], mask); },
       {a}},
      {"sum", [](Tape&, const std::vector<Var>& v) { return sum(v[0]); }, {a}},
      {"mean", [](Tape&, const std::vector<Var>& v) { return mean(v[0]); }, {a}},
      {"squared_norm", [](Tape&, const std::vector<Var>& v) { return squared_norm(v[0]); }, {a}},
      {"row_norm", [](Tape&, const std::vector<Var>& v) { return row_norm(v[0]); }, {a}},
      {"distance_matrix",
       [](Tape&, const std::vector<Var>& v) { return distance_matrix(v[0], v[1]); },
       {a, rnd(4, m)}},
      {"cholesky_solve",
       [](Tape&, const std::vector<Var>& v) { return cholesky_solve(v[0], v[1]); },
       {spd, rnd(n, 3)}},
  };

  std::vector<GradCheckResult> results;
  for (auto& c : cases) {
    Tape shape_probe;
    std::vector<Var> vars;
    for (const auto& in : c.inputs) vars.push_back(shape_probe.constant(in));
    const Var out = c.op(shape_probe, vars);
    const ScalarFn fn = project_output(c.op, out.rows(), out.cols(), derive_seed(seed, ++salt));
    GradCheckResult r;
    r.name = c.name;
    r.tolerance = tolerance;
    r.rel_error = gradient_error(fn, c.inputs);
    r.pass = r.rel_error < tolerance;
    results.push_back(r);
  }
  return results;
}

}  // namespace nie::ad
