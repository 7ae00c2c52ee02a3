// SPDX-License-Identifier: MIT
//
// Python surface of the library.  Payoffs are named by string rather than
// passed as callables: estimation runs on C++ worker threads, where
// calling back into the interpreter is not allowed.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <stdexcept>

#include "semiboost/matrix_semigroup.hpp"
#include "semiboost/order_params.hpp"
#include "semiboost/random_grid.hpp"
#include "semiboost/report.hpp"
#include "semiboost/scheme.hpp"
#include "semiboost/splitting.hpp"

namespace py = pybind11;
using namespace semiboost;

namespace {

Vec scalar(double v) {
  Vec x(1);
  x[0] = v;
  return x;
}

OrderParams make_params(int nu, int n, int alpha, int beta, double T) {
  OrderParams p{alpha, beta, nu, GridSpec{T, n, 0}};
  p.validate();
  return p;
}

MatrixSemigroup make_matrix(const Eigen::MatrixXd& generator) {
  MatrixSemigroup sg{generator};
  sg.validate();
  return sg;
}

OuFunctional parse_functional(const std::string& name, double arg) {
  if (name == "mean") return OuFunctional::mean();
  if (name == "second_moment") return OuFunctional::second_moment();
  if (name == "cdf") return OuFunctional::cdf_at(arg);
  if (name == "density") return OuFunctional::density_at(arg);
  if (name == "cos") return OuFunctional::cos_expectation();
  throw std::invalid_argument("unknown functional '" + name + "'");
}

std::function<double(const Vec&)> parse_payoff(const std::string& name, double threshold) {
  if (name == "x2") return [](const Vec& x) { return x[0] * x[0]; };
  if (name == "x") return [](const Vec& x) { return x[0]; };
  if (name == "cos") return [](const Vec& x) { return std::cos(x[0]); };
  if (name == "indicator")
    return [threshold](const Vec& x) { return x[0] <= threshold ? 1.0 : 0.0; };
  throw std::invalid_argument("unknown payoff '" + name + "'");
}

py::dict estimate_to_dict(const MCEstimate& est) {
  py::dict d;
  d["mean"] = est.mean;
  d["stderr"] = est.stderr_;
  d["samples"] = est.n_samples;
  d["work"] = est.work;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "boosted-order weak approximation of Markov semigroups on random grids";

  // ---- order parameters -------------------------------------------------
  m.def("m_steps", &m_steps, py::arg("level"), py::arg("nu"), py::arg("alpha") = 1,
        "stage count of the boosted step at a grid level");
  m.def("q_order", &q_order, py::arg("i"), py::arg("level"), py::arg("nu"), py::arg("alpha") = 1,
        "target order of correction stratum i");
  m.def("kappa", &kappa, py::arg("level"), py::arg("nu"), py::arg("alpha") = 1,
        py::arg("beta") = 1, "derivative budget of the boosted step");
  m.def("l_max", &l_max, py::arg("nu"), py::arg("alpha") = 1,
        "deepest grid level used for target order nu");
  m.def("q_nu", &q_nu, py::arg("nu"), py::arg("alpha") = 1, py::arg("beta") = 1,
        "derivative order required of the test function");
  m.def(
      "t_nu",
      [](int nu, int n, int alpha, int beta, double T) {
        return t_nu(make_params(nu, n, alpha, beta, T));
      },
      py::arg("nu"), py::arg("n"), py::arg("alpha") = 1, py::arg("beta") = 1, py::arg("T") = 1.0,
      "earliest usable evaluation time on the level-1 grid");
  m.def(
      "order_table",
      [](int nu, int n, int alpha, int beta, double T) {
        py::list out;
        for (const auto& row : build_order_table(make_params(nu, n, alpha, beta, T))) {
          py::dict d;
          d["level"] = row.level;
          d["m"] = row.m;
          d["kappa"] = row.kappa_value;
          d["q"] = row.q;
          out.append(d);
        }
        return out;
      },
      py::arg("nu"), py::arg("n") = 2, py::arg("alpha") = 1, py::arg("beta") = 1,
      py::arg("T") = 1.0, "per-level (m, kappa, q_i) table");

  // ---- matrix backend ---------------------------------------------------
  m.def(
      "exact_transition",
      [](const Eigen::MatrixXd& generator, double t) {
        return exact_transition(make_matrix(generator), t);
      },
      py::arg("generator"), py::arg("t"), "exp(t * A) for a conservative generator");
  m.def(
      "boosted_transition",
      [](const Eigen::MatrixXd& generator, int nu, int n, int alpha, int beta, double T) {
        return boosted_transition(make_matrix(generator), make_params(nu, n, alpha, beta, T));
      },
      py::arg("generator"), py::arg("nu"), py::arg("n"), py::arg("alpha") = 1,
      py::arg("beta") = 2, py::arg("T") = 1.0,
      "boosted one-step transition matrix over [0, T]");
  m.def("tv_distance", &tv_distance, py::arg("p1"), py::arg("p2"),
        "largest row distance in L1 norm");
  m.def(
      "random_generator",
      [](int states, std::uint64_t seed) { return random_generator(states, seed).generator; },
      py::arg("states"), py::arg("seed"), "reproducible random conservative generator");

  // ---- diffusion estimation --------------------------------------------
  m.def(
      "ou_oracle",
      [](double a, double sigma, double x0, double T, const std::string& functional, double arg) {
        return ou_oracle(a, sigma, x0, T, parse_functional(functional, arg));
      },
      py::arg("a"), py::arg("sigma"), py::arg("x0"), py::arg("T"), py::arg("functional"),
      py::arg("arg") = 0.0,
      "closed-form OU functional: mean | second_moment | cdf | density | cos");
  m.def(
      "estimate_ou",
      [](int nu, int n, const std::string& payoff, std::uint64_t samples, std::uint64_t seed,
         double a, double sigma, double x0, double T, double threshold, int alpha, int beta,
         int workers) {
        const OrderParams params = make_params(nu, n, alpha, beta, T);
        const SchemeSemigroup sg{make_ou_scheme(a, sigma), gaussian_noise(1), {}, params.grid};
        const MCEstimate est = estimate_qhat(params, sg, scalar(x0), parse_payoff(payoff, threshold),
                                             samples, seed, workers);
        return estimate_to_dict(est);
      },
      py::arg("nu"), py::arg("n"), py::arg("payoff"), py::arg("samples"), py::arg("seed"),
      py::arg("a") = 1.0, py::arg("sigma") = 1.0, py::arg("x0") = 1.0, py::arg("T") = 1.0,
      py::arg("threshold") = 0.0, py::arg("alpha") = 1, py::arg("beta") = 2,
      py::arg("workers") = 1,
      "boosted estimate of E[f(X_T)] for the OU scheme; payoff: x2 | x | cos | indicator");
  m.def(
      "ou_density",
      [](int nu, int n, double theta, const std::vector<double>& ys, std::uint64_t samples,
         std::uint64_t seed, double a, double sigma, double x0, double T, int alpha, int beta,
         int workers) {
        const OrderParams params = make_params(nu, n, alpha, beta, T);
        const SchemeSemigroup sg{make_ou_scheme(a, sigma), gaussian_noise(1), {}, params.grid};
        const DensityTable table =
            convolved_density(params, sg, theta, scalar(x0), ys, samples, seed, workers);
        py::list out;
        for (const auto& row : table.rows) {
          py::dict d;
          d["y"] = row.y;
          d["p"] = row.p;
          d["stderr"] = row.stderr_;
          out.append(d);
        }
        return out;
      },
      py::arg("nu"), py::arg("n"), py::arg("theta"), py::arg("ys"), py::arg("samples"),
      py::arg("seed"), py::arg("a") = 1.0, py::arg("sigma") = 1.0, py::arg("x0") = 1.0,
      py::arg("T") = 1.0, py::arg("alpha") = 1, py::arg("beta") = 2, py::arg("workers") = 1,
      "kernel-blurred density of the boosted estimator on a grid of points");

  // ---- diagnostics ------------------------------------------------------
  m.def(
      "fit_slope",
      [](const std::vector<double>& ns, const std::vector<double>& errors) {
        if (ns.size() != errors.size())
          throw std::invalid_argument("ns and errors must have equal length");
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < ns.size(); ++i) pts.emplace_back(ns[i], errors[i]);
        const SlopeFit fit = fit_slope(pts);
        return py::make_tuple(fit.slope, fit.ci);
      },
      py::arg("ns"), py::arg("errors"),
      "log-log decay slope and half-width of its confidence band");
  m.def("bump", py::overload_cast<double, double>(&bump), py::arg("v"), py::arg("z"),
        "plateau bump: 1 on [0, v], smooth to 0 at 2v");
  m.def("bump_log_derivative", &bump_log_derivative, py::arg("v"), py::arg("z"), py::arg("q"),
        "q-th derivative of ln bump on the shell");
  m.def(
      "split_info",
      [](double z_star, double r_star, double delta) {
        const SplitNoise split = build_split(gaussian_noise(1), scalar(z_star), r_star, delta);
        py::dict d;
        d["eps_star"] = split.eps_star;
        d["m_star"] = split.m_star;
        d["delta"] = split.delta;
        return d;
      },
      py::arg("z_star") = 0.0, py::arg("r_star") = 1.0, py::arg("delta") = 1.0,
      "fitted lower-bound level and splitting mass for the Gaussian law");
}
