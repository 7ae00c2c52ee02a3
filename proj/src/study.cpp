// SPDX-License-Identifier: MIT
#include "semiboost/study.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "semiboost/expansion.hpp"
#include "semiboost/matrix_semigroup.hpp"
#include "semiboost/random_grid.hpp"
#include "semiboost/report.hpp"
#include "semiboost/rng.hpp"
#include "semiboost/scheme.hpp"
#include "semiboost/splitting.hpp"

namespace semiboost {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Output-path failures; mapped to their own exit code.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fmt(long v) { return std::to_string(v); }
std::string fmt(std::uint64_t v) { return std::to_string(v); }

double parse_number(const std::string& key, const std::string& raw) {
  const std::string t = trim(raw);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size())
    throw std::invalid_argument("config key '" + key + "': not a number: '" + raw + "'");
  return v;
}

long parse_integer(const std::string& key, const std::string& raw) {
  const double v = parse_number(key, raw);
  const long n = std::lround(v);
  if (v != static_cast<double>(n))
    throw std::invalid_argument("config key '" + key + "': not an integer: '" + raw + "'");
  return n;
}

}  // namespace

void StudyConfig::append(const std::string& key, const std::string& value) {
  const std::string k = trim(key);
  if (k.empty() || k.find_first_of(" \t=") != std::string::npos)
    throw std::invalid_argument("invalid config key '" + key + "'");
  items_.emplace_back(k, trim(value));
}

void StudyConfig::replace(const std::string& key, const std::string& value) {
  const std::string k = trim(key);
  items_.erase(std::remove_if(items_.begin(), items_.end(),
                              [&](const auto& kv) { return kv.first == k; }),
               items_.end());
  append(k, value);
}

void StudyConfig::override_with(const StudyConfig& stronger) {
  std::set<std::string> seen;
  for (const auto& [k, v] : stronger.items_) {
    if (seen.insert(k).second)
      items_.erase(std::remove_if(items_.begin(), items_.end(),
                                  [&](const auto& kv) { return kv.first == k; }),
                   items_.end());
    items_.emplace_back(k, v);
  }
}

bool StudyConfig::has(const std::string& key) const {
  for (const auto& [k, v] : items_)
    if (k == key) return true;
  return false;
}

std::vector<std::string> StudyConfig::values(const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : items_)
    if (k == key) out.push_back(v);
  return out;
}

std::string StudyConfig::value(const std::string& key) const {
  const auto all = values(key);
  if (all.empty()) throw std::invalid_argument("missing config key '" + key + "'");
  return all.back();
}

std::string StudyConfig::value_or(const std::string& key, const std::string& fallback) const {
  const auto all = values(key);
  return all.empty() ? fallback : all.back();
}

double StudyConfig::number(const std::string& key) const { return parse_number(key, value(key)); }

double StudyConfig::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

long StudyConfig::integer(const std::string& key) const { return parse_integer(key, value(key)); }

long StudyConfig::integer_or(const std::string& key, long fallback) const {
  return has(key) ? integer(key) : fallback;
}

std::vector<long> StudyConfig::integer_list(const std::string& key) const {
  const auto raw = values(key);
  if (raw.empty()) throw std::invalid_argument("missing config key '" + key + "'");
  std::vector<long> out;
  out.reserve(raw.size());
  for (const auto& v : raw) out.push_back(parse_integer(key, v));
  return out;
}

std::string StudyConfig::serialize() const {
  std::string out;
  for (const auto& [k, v] : items_) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

StudyConfig StudyConfig::parse(const std::string& text) {
  StudyConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": missing '='");
    const std::string key = trim(t.substr(0, eq));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
    cfg.append(key, t.substr(eq + 1));
  }
  return cfg;
}

StudyConfig StudyConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

double flow_condition_lhs(const HypothesisInputs& in, double delta, double t) {
  if (!(delta > 0.0) || !(t > 0.0))
    throw std::invalid_argument("step size and horizon must be positive");
  return 3.0 * std::pow(delta, 0.25) * in.psi_norm + delta * in.m8 +
         std::exp(-in.m_star * in.m_star * t / (2.0 * delta));
}

double ellipticity_requirement(const HypothesisInputs& in) {
  if (!(in.lambda_star > 0.0))
    throw std::invalid_argument("ellipticity floor is not positive; condition inapplicable");
  const double n = in.dim;
  return 8.0 * (n * n * n + n * n + 1.0) / in.lambda_star * in.psi_norm * in.psi_norm;
}

namespace {

// ---------------------------------------------------------------- output

std::string resolve_out(const std::string& path) {
  if (path.empty() || path.front() == '/') return path;
  if (const char* dir = std::getenv("SEMIBOOST_OUT_DIR"); dir && *dir)
    return std::string(dir) + "/" + path;
  return path;
}

using Row = std::vector<std::string>;

void write_csv(const std::string& raw_path, const StudyConfig& config, const std::string& header,
               const std::vector<Row>& rows) {
  const std::string path = resolve_out(raw_path);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::trunc);
    if (!f) throw IoError("cannot open '" + tmp + "' for writing");
    for (const auto& [k, v] : config.items()) f << "# " << k << '=' << v << '\n';
    f << header << '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) f << ',';
        f << row[i];
      }
      f << '\n';
    }
    f.flush();
    if (!f) throw IoError("write failed for '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw IoError("cannot rename '" + tmp + "' to '" + path + "'");
  }
}

void print_table(std::ostream& out, const std::string& header, const std::vector<Row>& rows) {
  std::string h = header;
  std::replace(h.begin(), h.end(), ',', ' ');
  out << h << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ' ';
      out << (row[i].empty() ? "-" : row[i]);
    }
    out << '\n';
  }
}

/// CSV-writing studies insist on an output path; table-first studies
/// write one only when configured.
std::string required_out(const StudyConfig& c) {
  if (!c.has("out")) throw std::invalid_argument("missing config key 'out'");
  return c.value("out");
}

// ------------------------------------------------------- shared parsing

Vec scalar(double v) {
  Vec x(1);
  x[0] = v;
  return x;
}

struct SchemeChoice {
  SchemeFunction scheme;
  bool is_ou = false;
  double a = 1.0;
  double sigma = 1.0;
  double x0 = 0.0;
};

SchemeChoice parse_scheme(const StudyConfig& c) {
  SchemeChoice sc;
  const std::string name = c.value_or("scheme", "ou");
  if (name == "ou") {
    sc.is_ou = true;
    sc.a = c.number_or("a", 1.0);
    sc.sigma = c.number_or("sigma", 1.0);
    sc.scheme = make_ou_scheme(sc.a, sc.sigma);
    sc.x0 = c.number_or("x0", 1.0);
  } else if (name == "brownian") {
    sc.scheme = make_brownian_scheme();
    sc.x0 = c.number_or("x0", 0.0);
  } else {
    throw std::invalid_argument("unknown scheme '" + name + "'");
  }
  return sc;
}

NoiseLaw parse_noise(const StudyConfig& c) {
  const std::string name = c.value_or("noise", "gaussian");
  if (name == "gaussian") return gaussian_noise(1);
  if (name == "uniform") return uniform_noise_1d();
  if (name == "rademacher") return rademacher_noise_1d();
  throw std::invalid_argument("unknown noise '" + name + "'");
}

struct PayoffChoice {
  std::string name;
  std::function<double(const Vec&)> f;
  OuFunctional functional;
};

PayoffChoice parse_payoff(const std::string& spec) {
  PayoffChoice p;
  p.name = spec;
  if (spec == "poly" || spec == "x2") {
    p.f = [](const Vec& x) { return x[0] * x[0]; };
    p.functional = OuFunctional::second_moment();
  } else if (spec == "cos") {
    p.f = [](const Vec& x) { return std::cos(x[0]); };
    p.functional = OuFunctional::cos_expectation();
  } else if (spec == "mean" || spec == "x") {
    p.f = [](const Vec& x) { return x[0]; };
    p.functional = OuFunctional::mean();
  } else if (spec.rfind("indicator:", 0) == 0) {
    const double k = parse_number("f", spec.substr(10));
    p.f = [k](const Vec& x) { return x[0] <= k ? 1.0 : 0.0; };
    p.functional = OuFunctional::cdf_at(k);
  } else {
    throw std::invalid_argument("unknown payoff '" + spec + "'");
  }
  return p;
}

/// Closed-form functionals of a Normal(mean, var) end state.
double normal_functional(double mean, double var, const OuFunctional& f) {
  switch (f.kind) {
    case OuFunctional::Kind::mean:
      return mean;
    case OuFunctional::Kind::second_moment:
      return mean * mean + var;
    case OuFunctional::Kind::cdf_at:
      return 0.5 * std::erfc(-(f.arg - mean) / std::sqrt(2.0 * var));
    case OuFunctional::Kind::density_at:
      return std::exp(-0.5 * (f.arg - mean) * (f.arg - mean) / var) / std::sqrt(kTwoPi * var);
    case OuFunctional::Kind::cos_expectation:
      return std::cos(mean) * std::exp(-0.5 * var);
  }
  throw std::invalid_argument("unknown functional");
}

double scheme_oracle(const SchemeChoice& sc, double T, const OuFunctional& f) {
  if (sc.is_ou) return ou_oracle(sc.a, sc.sigma, sc.x0, T, f);
  return normal_functional(sc.x0, T, f);  // Brownian end state
}

void end_state_law(const SchemeChoice& sc, double T, double& mean, double& var) {
  if (sc.is_ou) {
    mean = sc.x0 * std::exp(-sc.a * T);
    var = sc.sigma * sc.sigma * (1.0 - std::exp(-2.0 * sc.a * T)) / (2.0 * sc.a);
  } else {
    mean = sc.x0;
    var = T;
  }
}

std::vector<double> parse_grid(const std::string& spec) {
  const auto c1 = spec.find(':');
  const auto c2 = spec.find(':', c1 == std::string::npos ? c1 : c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos)
    throw std::invalid_argument("grid must be lo:hi:points, got '" + spec + "'");
  const double lo = parse_number("grid", spec.substr(0, c1));
  const double hi = parse_number("grid", spec.substr(c1 + 1, c2 - c1 - 1));
  const long pts = parse_integer("grid", spec.substr(c2 + 1));
  if (pts < 2 || !(hi > lo)) throw std::invalid_argument("grid needs hi > lo and >= 2 points");
  std::vector<double> ys(pts);
  for (long j = 0; j < pts; ++j) ys[j] = lo + (hi - lo) * j / (pts - 1.0);
  return ys;
}

int checked_int(long v, const char* what) {
  if (v < -(1L << 30) || v > (1L << 30))
    throw std::invalid_argument(std::string(what) + " out of range");
  return static_cast<int>(v);
}

OrderParams parse_order_params(const StudyConfig& c, int nu, long n) {
  OrderParams p;
  p.alpha = checked_int(c.integer_or("alpha", 1), "alpha");
  p.beta = checked_int(c.integer_or("beta", 2), "beta");
  p.nu = nu;
  p.grid = GridSpec{c.number_or("T", 1.0), checked_int(n, "n"), 0};
  p.validate();
  return p;
}

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return rng::hash_combine(rng::hash_combine(rng::mix64(seed), a), b);
}

// ------------------------------------------------------------- studies

int run_params(const StudyConfig& c, std::ostream& out) {
  const OrderParams p = parse_order_params(c, checked_int(c.integer("nu"), "nu"),
                                           c.integer_or("n", 2));
  const auto table = build_order_table(p);

  std::vector<Row> rows;
  for (const auto& r : table) {
    if (r.q.empty()) {
      rows.push_back({fmt(long(r.level)), "", fmt(long(r.m)), "", fmt(long(r.kappa_value))});
    } else {
      for (std::size_t i = 0; i < r.q.size(); ++i)
        rows.push_back({fmt(long(r.level)), fmt(long(i + 1)), fmt(long(r.m)),
                        fmt(long(r.q[i])), fmt(long(r.kappa_value))});
    }
  }
  if (p.nu >= 1) rows.push_back({"q_nu", fmt(q_nu(p.nu, p.alpha, p.beta)), "", "", ""});
  rows.push_back({"l_max", fmt(long(l_max(p.nu, p.alpha))), "", "", ""});
  if (c.has("n")) {
    try {
      rows.push_back({"t_nu", fmt(t_nu(p)), "", "", ""});
    } catch (const std::exception&) {
      rows.push_back({"t_nu", "unavailable", "", "", ""});
    }
  }

  const std::string header = "level,i,m,q,kappa";
  print_table(out, header, rows);
  if (c.has("out")) write_csv(c.value("out"), c, header, rows);
  return 0;
}

std::string atom_text(const OperatorAtom& a) {
  std::string span = "(" + std::to_string(a.level) + ")[" + std::to_string(a.s) + ".." +
                     std::to_string(a.t) + "]";
  switch (a.kind) {
    case AtomKind::base:
      return "base" + span;
    case AtomKind::boosted:
      return "boost{" + std::to_string(a.order) + "}" + span;
    case AtomKind::exact:
      return "exact" + span;
  }
  return "?" + span;
}

void emit_words(const OrderParams& base, int order, int level, std::int64_t s, int depth,
                std::set<std::tuple<int, int, std::int64_t>>& seen, std::vector<Row>& rows) {
  OrderParams p = base;
  p.nu = order;
  const auto words = expand_to_words(build_expansion(p, level, s));
  std::vector<OperatorAtom> pending;
  for (const auto& w : words) {
    std::string text;
    for (const auto& factor : w.factors) {
      if (!text.empty()) text += ' ';
      text += atom_text(factor[0].atom);
      const auto& a = factor[0].atom;
      if (a.kind == AtomKind::boosted &&
          seen.insert({a.order, a.level, a.s}).second)
        pending.push_back(a);
    }
    rows.push_back({fmt(long(depth)), w.sign > 0 ? "+" : "-", text});
  }
  for (const auto& a : pending) emit_words(base, a.order, a.level, a.s, depth + 1, seen, rows);
}

int run_expand(const StudyConfig& c, std::ostream& out) {
  const int nu = checked_int(c.integer("nu"), "nu");
  const OrderParams p = parse_order_params(c, nu, c.integer_or("n", 2));
  const int level = checked_int(c.integer_or("level", 0), "level");

  std::vector<Row> rows;
  std::set<std::tuple<int, int, std::int64_t>> seen;
  emit_words(p, nu, level, 0, 0, seen, rows);

  const std::string header = "depth,sign,word";
  print_table(out, header, rows);
  if (c.has("out")) write_csv(c.value("out"), c, header, rows);
  return 0;
}

MatrixSemigroup parse_generator(const StudyConfig& c) {
  MatrixSemigroup msg;
  const auto raw_rows = c.values("generator_row");
  if (!raw_rows.empty()) {
    const int states = static_cast<int>(raw_rows.size());
    msg.generator.resize(states, states);
    for (int i = 0; i < states; ++i) {
      std::istringstream in(raw_rows[i]);
      std::string cell;
      int j = 0;
      while (in >> cell) {
        if (j >= states)
          throw std::invalid_argument("generator_row has more entries than rows");
        msg.generator(i, j++) = parse_number("generator_row", cell);
      }
      if (j != states) throw std::invalid_argument("generator_row has too few entries");
    }
  } else {
    const int states = checked_int(c.integer("states"), "states");
    msg = random_generator(states, static_cast<std::uint64_t>(c.integer_or("generator_seed", 1)));
  }
  msg.validate();
  return msg;
}

int run_matrix_convergence(const StudyConfig& c, std::ostream& out) {
  const std::string out_path = required_out(c);
  const MatrixSemigroup msg = parse_generator(c);
  const double T = c.number_or("T", 1.0);
  const auto nus = c.integer_list("nu");
  const auto ns = c.integer_list("n");
  const Eigen::MatrixXd exact = exact_transition(msg, T);

  std::vector<Row> rows;
  for (const long nu : nus) {
    std::vector<std::pair<double, double>> pts;
    std::vector<double> tvs;
    for (const long n : ns) {
      const OrderParams p = parse_order_params(c, checked_int(nu, "nu"), n);
      const double tv = tv_distance(exact, boosted_transition(msg, p));
      tvs.push_back(tv);
      if (tv > 0.0) pts.emplace_back(double(n), tv);
    }
    double slope = std::numeric_limits<double>::quiet_NaN();
    if (pts.size() >= 2) slope = fit_slope(pts).slope;
    for (std::size_t i = 0; i < ns.size(); ++i)
      rows.push_back({fmt(ns[i]), fmt(nu), fmt(tvs[i]), fmt(slope)});
  }
  write_csv(out_path, c, "n,nu,tv_error,fitted_slope", rows);
  print_table(out, "n,nu,tv_error,fitted_slope", rows);
  return 0;
}

int run_sde_base_error(const StudyConfig& c, std::ostream& out) {
  const std::string out_path = required_out(c);
  const SchemeChoice sc = parse_scheme(c);
  const NoiseLaw noise = parse_noise(c);
  const PayoffChoice payoff = parse_payoff(c.value_or("f", "poly"));
  const double T = c.number_or("T", 1.0);
  const auto ns = c.integer_list("n");
  const auto samples = static_cast<std::uint64_t>(c.integer_or("samples", 100000));
  const auto seed = static_cast<std::uint64_t>(c.integer_or("seed", 1));
  const int workers = checked_int(c.integer_or("workers", 1), "workers");
  const double exact = scheme_oracle(sc, T, payoff.functional);

  std::vector<Row> rows;
  for (const long n : ns) {
    SchemeSemigroup sg{sc.scheme, noise, {}, GridSpec{T, checked_int(n, "n"), 1}};
    const MCEstimate est =
        weak_expectation(sg, scalar(sc.x0), T, payoff.f, samples, sub_seed(seed, n), workers);
    rows.push_back({fmt(n), fmt(est.mean), fmt(est.stderr_), fmt(exact),
                    fmt(std::abs(est.mean - exact))});
  }
  write_csv(out_path, c, "n,estimate,stderr,exact,error", rows);
  print_table(out, "n,estimate,stderr,exact,error", rows);
  return 0;
}

int run_weak_error(const StudyConfig& c, std::ostream& out, bool tv_flavor) {
  const std::string out_path = required_out(c);
  const SchemeChoice sc = parse_scheme(c);
  const NoiseLaw noise = parse_noise(c);
  const PayoffChoice payoff =
      tv_flavor ? parse_payoff("indicator:" + fmt(c.number_or("threshold", 0.0)))
                : parse_payoff(c.value_or("f", "poly"));
  const double T = c.number_or("T", 1.0);
  const auto nus = c.integer_list("nu");
  const auto ns = c.integer_list("n");
  const auto samples = static_cast<std::uint64_t>(c.integer_or("samples", 100000));
  const auto seed = static_cast<std::uint64_t>(c.integer_or("seed", 1));
  const int workers = checked_int(c.integer_or("workers", 1), "workers");
  const double exact = scheme_oracle(sc, T, payoff.functional);

  std::vector<int> n_list;
  for (const long n : ns) n_list.push_back(checked_int(n, "n"));

  std::vector<Row> rows;
  std::vector<Row> footer;
  for (const long nu : nus) {
    const OrderParams params = parse_order_params(c, checked_int(nu, "nu"), ns.front());
    const SchemeSemigroup sg{sc.scheme, noise, {}, params.grid};
    const ConvergenceReport report = weak_error_study(params, sg, scalar(sc.x0), payoff.f, exact,
                                                      n_list, samples, sub_seed(seed, nu), workers);
    for (const auto& r : report.rows)
      rows.push_back({fmt(r.n), fmt(nu), fmt(r.estimate), fmt(r.stderr_), fmt(r.exact),
                      fmt(r.abs_error), r.usable ? "1" : "0", fmt(r.work_per_sample)});
    footer.push_back({"fitted_slope", fmt(nu), fmt(report.slope), "", "", "", "", ""});
    footer.push_back({"slope_ci", fmt(nu), fmt(report.slope_ci), "", "", "", "", ""});
    if (report.noise_dominated)
      footer.push_back({"noise_dominated", fmt(nu), "1", "", "", "", "", ""});
  }
  rows.insert(rows.end(), footer.begin(), footer.end());
  const std::string header = "n,nu,estimate,stderr,exact,abs_error,usable,work_per_sample";
  write_csv(out_path, c, header, rows);
  print_table(out, header, rows);
  return 0;
}

int run_density_compare(const StudyConfig& c, std::ostream& out) {
  const std::string out_path = required_out(c);
  const SchemeChoice sc = parse_scheme(c);
  const NoiseLaw noise = parse_noise(c);
  const double theta = c.number_or("theta", 1.0);
  const double T = c.number_or("T", 1.0);
  const auto nus = c.has("nu") ? c.integer_list("nu") : std::vector<long>{1};
  const auto ns = c.integer_list("n");
  const std::vector<double> ys = parse_grid(c.value("grid"));
  const auto samples = static_cast<std::uint64_t>(c.integer_or("samples", 100000));
  const auto seed = static_cast<std::uint64_t>(c.integer_or("seed", 1));
  const int workers = checked_int(c.integer_or("workers", 1), "workers");

  double mean = 0.0, var = 0.0;
  end_state_law(sc, T, mean, var);

  std::vector<Row> rows;
  for (const long nu : nus) {
    for (const long n : ns) {
      const OrderParams params = parse_order_params(c, checked_int(nu, "nu"), n);
      const SchemeSemigroup sg{sc.scheme, noise, {}, params.grid};
      const DensityTable table = convolved_density(params, sg, theta, scalar(sc.x0), ys, samples,
                                                   sub_seed(seed, nu, n), workers);
      const double delta = params.grid.at_level(1).step();
      const double blur_var = var + std::pow(delta, 2.0 * theta);
      double sup = 0.0;
      for (const auto& r : table.rows) {
        const double px = normal_functional(mean, blur_var, OuFunctional::density_at(r.y));
        const double err = std::abs(r.p - px);
        sup = std::max(sup, err);
        rows.push_back({fmt(n), fmt(nu), fmt(r.y), fmt(r.p), fmt(px), fmt(err)});
      }
      rows.push_back({fmt(n), fmt(nu), "sup_error", "", "", fmt(sup)});
    }
  }
  const std::string header = "n,nu,y,p_hat,p_exact,abs_err";
  write_csv(out_path, c, header, rows);
  print_table(out, header, rows);
  return 0;
}

int run_splitting_check(const StudyConfig& c, std::ostream& out) {
  const std::string out_path = required_out(c);
  const NoiseLaw noise = parse_noise(c);
  const double r_star = c.number_or("r_star", 1.0);
  const double z_star = c.number_or("z_star", 0.0);
  const double delta = c.number_or("delta", 1.0 / 16.0);
  const auto samples = static_cast<std::uint64_t>(c.integer_or("samples", 100000));
  const auto seed = static_cast<std::uint64_t>(c.integer_or("seed", 1));
  const long steps = std::lround(1.0 / delta);
  if (steps < 1 || std::abs(1.0 / steps - delta) > 1e-9)
    throw std::invalid_argument("delta must be the reciprocal of a step count");

  const SplitNoise split = build_split(noise, scalar(z_star), r_star, delta);
  std::vector<Row> rows;
  bool all_pass = true;
  const auto emit = [&](const std::string& name, double stat, double bound, bool pass) {
    rows.push_back({name, fmt(stat), fmt(bound), pass ? "1" : "0"});
    all_pass = all_pass && pass;
  };

  {
    // mixture law equality against the scaled base draw
    rng::Stream sa = rng::Stream::derive(seed, 1);
    rng::Stream sb = rng::Stream::derive(seed, 2);
    std::vector<double> a(samples), b(samples);
    const double root = std::sqrt(delta);
    for (auto& v : a) v = root * split.base.sample(sa)[0];
    for (auto& v : b) v = split.sample_mixture(sb)[0];
    const double stat = ks_two_sample(std::move(a), std::move(b));
    const double bound = 1.628 * std::sqrt(2.0 / static_cast<double>(samples));
    emit("mixture_ks", stat, bound, stat <= bound);
  }
  {
    // shell-derivative growth exponent, worst deviation over (q, p)
    double worst = 0.0;
    for (const int q : {1, 2}) {
      for (const int p : {1, 2}) {
        std::vector<std::pair<double, double>> pts;
        for (const double v : {0.25, 0.5, 1.0, 2.0}) {
          double peak = 0.0;
          for (int j = 1; j < 400; ++j) {
            const double z = v * (1.0 + j / 400.0);
            peak = std::max(peak,
                            bump(v, z) * std::pow(std::abs(bump_log_derivative(v, z, q)), p));
          }
          pts.emplace_back(v, peak);
        }
        worst = std::max(worst, std::abs(fit_slope(pts).slope - p * q));
      }
    }
    emit("bump_scaling", worst, 0.2, worst <= 0.2);
  }
  {
    // splitting-frequency tail against its exponential bound
    rng::Stream stream = rng::Stream::derive(seed, 3);
    const std::uint64_t trials = std::min<std::uint64_t>(samples, 20000);
    std::uint64_t misses = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
      long hits = 0;
      for (long s = 0; s < steps; ++s) hits += split.sample_chi(stream) ? 1 : 0;
      if (hits < 0.5 * split.m_star * steps) ++misses;
    }
    const double phat = static_cast<double>(misses) / trials;
    const double bound = std::exp(-0.5 * split.m_star * split.m_star * steps) +
                         3.0 * std::sqrt(phat * (1.0 - phat) / trials);
    emit("frequency_tail", phat, bound, phat <= bound + 1e-12);
  }
  {
    // residual rejection weight must stay within [0, 1]
    rng::Stream stream = rng::Stream::derive(seed, 4);
    double worst = 0.0;
    for (int i = 0; i < 1000000; ++i) {
      const Vec w = split.base.sample(stream);
      const double rho = split.base.density(w);
      if (rho <= 0.0) continue;
      worst = std::max(worst,
                       split.eps_star * bump(0.5 * split.r_star, Vec(w - split.z_star)) / rho);
    }
    emit("residual_weight", worst, 1.0, worst <= 1.0 + 1e-9);
  }
  {
    // self-normalization: constant payoffs come back exactly as one
    SchemeSemigroup sg{make_ou_scheme(1.0, 1.0), noise, {},
                       GridSpec{1.0, checked_int(steps, "delta"), 1}};
    const RegularizedEstimate reg = regularized_expectation(
        sg, split, scalar(1.0), 1.0, [](const Vec&) { return 1.0; }, 2000, seed, 1);
    const double stat = std::abs(reg.estimate.mean - 1.0);
    emit("self_normalization", stat, 0.0, stat == 0.0);
  }

  const std::string header = "check,statistic,bound,pass";
  write_csv(out_path, c, header, rows);
  print_table(out, header, rows);
  return all_pass ? 0 : 3;
}

int run_hypothesis_report(const StudyConfig& c, std::ostream& out) {
  const SchemeChoice sc = parse_scheme(c);
  const NoiseLaw noise = parse_noise(c);
  const double T = c.number_or("T", 1.0);
  const auto ns = c.has("n") ? c.integer_list("n") : std::vector<long>{16};
  std::vector<double> ts;
  for (const auto& v : c.values("t")) ts.push_back(parse_number("t", v));
  if (ts.empty()) ts.push_back(T);
  const auto samples = static_cast<std::uint64_t>(c.integer_or("samples", 200000));
  const auto seed = static_cast<std::uint64_t>(c.integer_or("seed", 1));

  const auto cloud = sample_cloud(sc.scheme, 2.0, 200, seed);
  HypothesisInputs in;
  in.dim = sc.scheme.dim_x;
  in.psi_norm = psi_norm_estimate(sc.scheme, 3, cloud).norm;
  in.lambda_star = ellipticity_floor(sc.scheme, cloud);
  in.m8 = moment_estimate(noise, 8, samples, seed).mean;
  bool m_star_known = true;
  try {
    in.m_star = build_split(noise, scalar(c.number_or("z_star", 0.0)),
                            c.number_or("r_star", 1.0), 1.0)
                    .m_star;
  } catch (const std::invalid_argument&) {
    m_star_known = false;
  }
  const bool elliptic = in.lambda_star > 0.0;
  const double ell_rhs = elliptic ? ellipticity_requirement(in) : 0.0;

  std::vector<Row> rows;
  for (const long n : ns) {
    const double delta = T / static_cast<double>(n);
    for (const double t : ts) {
      std::string flow_lhs = "unknown", flow_pass = "unknown";
      if (m_star_known) {
        const double lhs = flow_condition_lhs(in, delta, t);
        flow_lhs = fmt(lhs);
        flow_pass = lhs <= 0.5 ? "1" : "0";
      }
      const double ell_lhs = 1.0 / std::sqrt(delta);
      std::string ell_rhs_s = "inapplicable", ell_pass = "inapplicable";
      if (elliptic) {
        ell_rhs_s = fmt(ell_rhs);
        ell_pass = ell_lhs >= ell_rhs ? "1" : "0";
      }
      rows.push_back({fmt(n), fmt(t), fmt(delta), flow_lhs, "0.5", flow_pass, fmt(ell_lhs),
                      ell_rhs_s, ell_pass});
    }
  }
  rows.push_back({"psi_norm", fmt(in.psi_norm), "", "", "", "", "", "", ""});
  rows.push_back({"lambda_star", fmt(in.lambda_star), "", "", "", "", "", "", ""});
  rows.push_back({"m_star", m_star_known ? fmt(in.m_star) : "unknown", "", "", "", "", "", "", ""});
  rows.push_back({"m8", fmt(in.m8), "", "", "", "", "", "", ""});
  if (!elliptic)
    rows.push_back(
        {"note", "ellipticity violated; conditions inapplicable", "", "", "", "", "", "", ""});

  for (const double t : ts) {
    std::string minimal = "unknown";
    if (!elliptic) {
      minimal = "inapplicable";
    } else if (m_star_known) {
      // both conditions are monotone in n, so scan doublings then bisect
      const auto pass_at = [&](long n) {
        const double delta = T / static_cast<double>(n);
        return flow_condition_lhs(in, delta, t) <= 0.5 && 1.0 / std::sqrt(delta) >= ell_rhs;
      };
      long hi = 1;
      while (hi < (1L << 40) && !pass_at(hi)) hi *= 2;
      if (pass_at(hi)) {
        long lo = hi / 2;
        while (hi - lo > 1) {
          const long mid = lo + (hi - lo) / 2;
          (pass_at(mid) ? hi : lo) = mid;
        }
        minimal = fmt(hi);
      } else {
        minimal = "none";
      }
    }
    rows.push_back({"minimal_n", fmt(t), minimal, "", "", "", "", "", ""});
  }

  const std::string header =
      "n,t,delta,flow_lhs,flow_bound,flow_pass,ellipticity_lhs,ellipticity_rhs,ellipticity_pass";
  print_table(out, header, rows);
  if (c.has("out")) write_csv(c.value("out"), c, header, rows);
  return 0;
}

}  // namespace

int run_study(const StudyConfig& config, std::ostream& out, std::ostream& err) {
  std::string kind;
  try {
    kind = config.value("study");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  try {
    if (kind == "params") return run_params(config, out);
    if (kind == "expand") return run_expand(config, out);
    if (kind == "matrix-convergence") return run_matrix_convergence(config, out);
    if (kind == "sde-base-error") return run_sde_base_error(config, out);
    if (kind == "sde-weak-error") return run_weak_error(config, out, false);
    if (kind == "tv-study") return run_weak_error(config, out, true);
    if (kind == "density-compare") return run_density_compare(config, out);
    if (kind == "splitting-check") return run_splitting_check(config, out);
    if (kind == "hypothesis-report") return run_hypothesis_report(config, out);
    throw std::invalid_argument("unknown study kind '" + kind + "'");
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace semiboost
