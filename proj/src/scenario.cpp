#include "rkck/scenario.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "rkck/constraint.hpp"
#include "rkck/dynamics.hpp"
#include "rkck/oracles.hpp"
#include "rkck/product.hpp"

namespace rkck::scenario {

using nlohmann::ordered_json;

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string join_components(const RealVector& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += fmt(v(i));
  }
  return out;
}

void require_object(const ordered_json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
}

}  // namespace

std::string kernel_table_csv(const std::vector<LabelPair>& grid,
                             const std::vector<Complex>& values) {
  std::string out = "p'',q'',p',q',Re K,Im K\n";
  for (size_t i = 0; i < grid.size(); ++i) {
    out += join_components(grid[i].bra.p) + ',' + join_components(grid[i].bra.q) + ',' +
           join_components(grid[i].ket.p) + ',' + join_components(grid[i].ket.q) + ',' +
           fmt(values[i].real()) + ',' + fmt(values[i].imag()) + '\n';
  }
  return out;
}

namespace {

void reject_unknown_keys(const ordered_json& j, const std::vector<std::string>& allowed,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      throw ValidationError(where + ": unknown key '" + it.key() + "'");
    }
  }
}

const ordered_json& require_key(const ordered_json& j, const std::string& key,
                                const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw ValidationError(where + ": missing required key '" + key + "'");
  return *it;
}

double require_number(const ordered_json& j, const std::string& where) {
  if (!j.is_number()) throw ValidationError(where + ": expected a number");
  return j.get<double>();
}

long require_integer(const ordered_json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ValidationError(where + ": expected an integer");
  return j.get<long>();
}

std::string require_string(const ordered_json& j, const std::string& where) {
  if (!j.is_string()) throw ValidationError(where + ": expected a string");
  return j.get<std::string>();
}

RealVector parse_real_vector(const ordered_json& j, int modes, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != modes) {
    throw ValidationError(where + ": expected an array of " + std::to_string(modes) +
                          " numbers");
  }
  RealVector v(modes);
  for (int i = 0; i < modes; ++i) v(i) = require_number(j[i], where);
  return v;
}

CoherentLabel parse_label(const ordered_json& j, int modes, const std::string& where) {
  require_object(j, where);
  reject_unknown_keys(j, {"p", "q"}, where);
  CoherentLabel l;
  l.p = parse_real_vector(require_key(j, "p", where), modes, where + ".p");
  l.q = parse_real_vector(require_key(j, "q", where), modes, where + ".q");
  return l;
}

FockSpace parse_space(const ordered_json& config, long resource_cap) {
  const ordered_json& j = require_key(config, "space", "config");
  require_object(j, "space");
  reject_unknown_keys(j, {"modes", "cutoff", "total_number_cap"}, "space");
  const int modes = static_cast<int>(require_integer(require_key(j, "modes", "space"), "space.modes"));
  const int cutoff = static_cast<int>(require_integer(require_key(j, "cutoff", "space"), "space.cutoff"));
  std::optional<int> cap;
  if (j.contains("total_number_cap")) {
    cap = static_cast<int>(require_integer(j["total_number_cap"], "space.total_number_cap"));
  }
  return FockSpace(modes, cutoff, cap, resource_cap);
}

FiducialVector parse_fiducial(const ordered_json& config, const FockSpace& space) {
  const ordered_json& j = require_key(config, "fiducial", "config");
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "ground") return ground_fiducial(space);
    if (s.rfind("fock:", 0) == 0) {
      std::vector<int> occ;
      std::stringstream ss(s.substr(5));
      std::string tok;
      while (std::getline(ss, tok, ',')) occ.push_back(std::stoi(tok));
      return fock_fiducial(space, occ);
    }
    if (s.rfind("coherent:", 0) == 0) {
      std::stringstream ss(s.substr(9));
      std::string tok;
      std::vector<double> nums;
      while (std::getline(ss, tok, ',')) nums.push_back(std::stod(tok));
      if (static_cast<int>(nums.size()) != 2 * space.modes()) {
        throw ValidationError("fiducial: coherent spec needs re,im per mode");
      }
      Vector z(space.modes());
      for (int m = 0; m < space.modes(); ++m) z(m) = Complex(nums[2 * m], nums[2 * m + 1]);
      return coherent_fiducial(space, CoherentLabel::from_z(z));
    }
    throw ValidationError("fiducial: unknown named form '" + s + "'");
  }
  if (j.is_array()) {
    if (static_cast<Eigen::Index>(j.size()) != space.dim()) {
      throw ValidationError("fiducial: literal vector length must equal the space dimension");
    }
    Vector v(space.dim());
    for (Eigen::Index i = 0; i < space.dim(); ++i) {
      const ordered_json& e = j[i];
      if (!e.is_array() || e.size() != 2) {
        throw ValidationError("fiducial: literal entries are [re, im] pairs");
      }
      v(i) = Complex(require_number(e[0], "fiducial"), require_number(e[1], "fiducial"));
    }
    return make_fiducial(std::move(v), "literal");
  }
  throw ValidationError("fiducial: expected a string or a vector literal");
}

OperatorMatrix parse_matrix(const ordered_json& j, Eigen::Index dim, const std::string& where) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != dim) {
    throw ValidationError(where + ": matrix must be " + std::to_string(dim) + " rows");
  }
  Matrix m(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    const ordered_json& row = j[r];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != dim) {
      throw ValidationError(where + ": matrix rows must have " + std::to_string(dim) +
                            " entries");
    }
    for (Eigen::Index c = 0; c < dim; ++c) {
      const ordered_json& e = row[c];
      if (!e.is_array() || e.size() != 2) {
        throw ValidationError(where + ": matrix entries are [re, im] pairs");
      }
      m(r, c) = Complex(require_number(e[0], where), require_number(e[1], where));
    }
  }
  return as_hermitian(std::move(m));
}

struct ConstraintSpec {
  std::optional<ConstraintSet> set;            // spectral constraints
  std::optional<LinearWindowConstraint> window; // continuous-zero window
};

ConstraintSpec parse_constraint(const ordered_json& config, const FockSpace& space) {
  ConstraintSpec spec;
  if (!config.contains("constraint") || config["constraint"].is_null()) return spec;
  const ordered_json& j = config["constraint"];
  require_object(j, "constraint");
  const std::string type = require_string(require_key(j, "type", "constraint"), "constraint.type");
  if (type == "second_class_pq") {
    reject_unknown_keys(j, {"type", "delta_squared"}, "constraint");
    spec.set = second_class_pq(space, require_number(require_key(j, "delta_squared", "constraint"),
                                                     "constraint.delta_squared"));
  } else if (type == "angular_momentum_zero") {
    reject_unknown_keys(j, {"type", "delta_squared"}, "constraint");
    spec.set = angular_momentum_zero(space,
                                     require_number(require_key(j, "delta_squared", "constraint"),
                                                    "constraint.delta_squared"));
  } else if (type == "number_shell") {
    reject_unknown_keys(j, {"type", "excitation", "delta_squared"}, "constraint");
    spec.set = number_shell(space,
                            static_cast<int>(require_integer(require_key(j, "excitation", "constraint"),
                                                             "constraint.excitation")),
                            require_number(require_key(j, "delta_squared", "constraint"),
                                           "constraint.delta_squared"));
  } else if (type == "operator") {
    reject_unknown_keys(j, {"type", "matrix", "delta_squared", "kind"}, "constraint");
    ConstraintSet cs;
    cs.ops.push_back(parse_matrix(require_key(j, "matrix", "constraint"), space.dim(),
                                  "constraint.matrix"));
    cs.delta_squared = require_number(require_key(j, "delta_squared", "constraint"),
                                      "constraint.delta_squared");
    cs.kind = ConstraintKind::discrete_spectrum;
    if (j.contains("kind")) {
      const std::string kind = require_string(j["kind"], "constraint.kind");
      if (kind == "second_class") cs.kind = ConstraintKind::second_class;
      else if (kind == "discrete") cs.kind = ConstraintKind::discrete_spectrum;
      else throw ValidationError("constraint.kind: unknown value '" + kind + "'");
    }
    spec.set = std::move(cs);
  } else if (type == "momentum_window") {
    reject_unknown_keys(j, {"type", "mode", "coef_p", "coef_q", "shift"}, "constraint");
    LinearWindowConstraint w;
    if (j.contains("mode")) w.mode = static_cast<int>(require_integer(j["mode"], "constraint.mode"));
    if (j.contains("coef_p")) w.coef_p = require_number(j["coef_p"], "constraint.coef_p");
    if (j.contains("coef_q")) w.coef_q = require_number(j["coef_q"], "constraint.coef_q");
    if (j.contains("shift")) w.shift = require_number(j["shift"], "constraint.shift");
    spec.window = w;
  } else {
    throw ValidationError("constraint.type: unknown value '" + type + "'");
  }
  return spec;
}

std::vector<LabelPair> parse_grid(const ordered_json& config, const FockSpace& space,
                                  unsigned long long seed) {
  const ordered_json& j = require_key(config, "grid", "config");
  require_object(j, "grid");
  const std::string type = require_string(require_key(j, "type", "grid"), "grid.type");
  std::vector<LabelPair> grid;
  if (type == "pairs") {
    reject_unknown_keys(j, {"type", "pairs"}, "grid");
    const ordered_json& pairs = require_key(j, "pairs", "grid");
    if (!pairs.is_array()) throw ValidationError("grid.pairs: expected an array");
    for (size_t i = 0; i < pairs.size(); ++i) {
      const ordered_json& p = pairs[i];
      require_object(p, "grid.pairs[]");
      reject_unknown_keys(p, {"bra", "ket"}, "grid.pairs[]");
      grid.push_back({parse_label(require_key(p, "bra", "grid.pairs[]"), space.modes(), "grid.bra"),
                      parse_label(require_key(p, "ket", "grid.pairs[]"), space.modes(), "grid.ket")});
    }
  } else if (type == "random") {
    reject_unknown_keys(j, {"type", "count", "max_abs_z"}, "grid");
    const long count = require_integer(require_key(j, "count", "grid"), "grid.count");
    const double zmax = require_number(require_key(j, "max_abs_z", "grid"), "grid.max_abs_z");
    if (count < 0) throw ValidationError("grid.count must be >= 0");
    std::mt19937_64 rng(seed);
    auto uniform = [&rng]() {
      // platform-independent uniform in [-1, 1)
      return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
    };
    auto random_label = [&]() {
      Vector z(space.modes());
      for (int m = 0; m < space.modes(); ++m) z(m) = zmax * Complex(uniform(), uniform());
      const double norm = std::sqrt(z.squaredNorm());
      if (norm > zmax) z *= zmax / norm;
      return CoherentLabel::from_z(z);
    };
    for (long i = 0; i < count; ++i) {
      LabelPair pair{random_label(), random_label()};
      grid.push_back(std::move(pair));
    }
  } else {
    throw ValidationError("grid.type: unknown value '" + type + "'");
  }
  return grid;
}

LabelSequence parse_sequence(const ordered_json& j, const FockSpace& space,
                             const std::string& where) {
  require_object(j, where);
  const std::string family = require_string(require_key(j, "family", where), where + ".family");
  if (family == "power_law") {
    reject_unknown_keys(j, {"family", "limit", "direction", "alpha"}, where);
    return LabelSequence::power_law(
        parse_label(require_key(j, "limit", where), space.modes(), where + ".limit"),
        parse_label(require_key(j, "direction", where), space.modes(), where + ".direction"),
        require_number(require_key(j, "alpha", where), where + ".alpha"));
  }
  if (family == "geometric") {
    reject_unknown_keys(j, {"family", "limit", "direction", "ratio"}, where);
    return LabelSequence::geometric(
        parse_label(require_key(j, "limit", where), space.modes(), where + ".limit"),
        parse_label(require_key(j, "direction", where), space.modes(), where + ".direction"),
        require_number(require_key(j, "ratio", where), where + ".ratio"));
  }
  if (family == "finite_support") {
    reject_unknown_keys(j, {"family", "head", "limit"}, where);
    std::vector<CoherentLabel> head;
    const ordered_json& h = require_key(j, "head", where);
    if (!h.is_array()) throw ValidationError(where + ".head: expected an array");
    for (const auto& e : h) head.push_back(parse_label(e, space.modes(), where + ".head[]"));
    return LabelSequence::finite_support(
        std::move(head),
        parse_label(require_key(j, "limit", where), space.modes(), where + ".limit"));
  }
  throw ValidationError(where + ".family: unknown value '" + family + "'");
}

OperatorMatrix parse_hamiltonian(const ordered_json& config, const FockSpace& space) {
  const ordered_json& j = require_key(config, "hamiltonian", "config");
  require_object(j, "hamiltonian");
  const std::string type = require_string(require_key(j, "type", "hamiltonian"),
                                          "hamiltonian.type");
  if (type == "zero") {
    reject_unknown_keys(j, {"type"}, "hamiltonian");
    OperatorMatrix h;
    h.mat = Matrix::Zero(space.dim(), space.dim());
    h.hermitian = true;
    return h;
  }
  if (type == "oscillator") {
    reject_unknown_keys(j, {"type"}, "hamiltonian");
    Matrix sum = Matrix::Zero(space.dim(), space.dim());
    for (int m = 0; m < space.modes(); ++m) {
      const Matrix p = space.momentum(m).mat;
      const Matrix q = space.position(m).mat;
      sum += 0.5 * (p * p + q * q);
    }
    OperatorMatrix h;
    h.mat = std::move(sum);
    h.hermitian = true;
    return h;
  }
  if (type == "total_number") {
    reject_unknown_keys(j, {"type"}, "hamiltonian");
    return space.total_number();
  }
  if (type == "matrix") {
    reject_unknown_keys(j, {"type", "matrix"}, "hamiltonian");
    return parse_matrix(require_key(j, "matrix", "hamiltonian"), space.dim(),
                        "hamiltonian.matrix");
  }
  throw ValidationError("hamiltonian.type: unknown value '" + type + "'");
}

std::string parse_prefix(const ordered_json& config) {
  if (!config.contains("output")) return "result";
  const ordered_json& j = config["output"];
  require_object(j, "output");
  reject_unknown_keys(j, {"prefix"}, "output");
  if (!j.contains("prefix")) return "result";
  return require_string(j["prefix"], "output.prefix");
}

void parallel_for(long count, int threads, const std::function<void(long)>& body) {
  if (threads <= 1 || count < 2) {
    for (long i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<long> next{0};
  const int used = std::min<long>(threads, count);
  for (int t = 0; t < used; ++t) {
    pool.emplace_back([&]() {
      for (long i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

ordered_json label_json(const CoherentLabel& l) {
  ordered_json j;
  j["p"] = std::vector<double>(l.p.data(), l.p.data() + l.p.size());
  j["q"] = std::vector<double>(l.q.data(), l.q.data() + l.q.size());
  return j;
}

ordered_json kernel_json(const std::vector<LabelPair>& grid, const std::vector<Complex>& values) {
  ordered_json rows = ordered_json::array();
  for (size_t i = 0; i < grid.size(); ++i) {
    ordered_json row;
    row["bra"] = label_json(grid[i].bra);
    row["ket"] = label_json(grid[i].ket);
    row["re"] = values[i].real();
    row["im"] = values[i].imag();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::map<std::string, std::string> cmd_kernel(const ordered_json& config,
                                              const RunOptions& options) {
  reject_unknown_keys(config, {"space", "fiducial", "constraint", "grid", "output"}, "config");
  const FockSpace space = parse_space(config, options.resource_cap);
  const FiducialVector fid = parse_fiducial(config, space);
  const ConstraintSpec cons = parse_constraint(config, space);
  if (cons.window) {
    throw ValidationError("kernel command needs a spectral constraint (or none)");
  }
  const std::vector<LabelPair> grid = parse_grid(config, space, options.seed);

  std::optional<ConstraintProjector> proj;
  if (cons.set) proj = build_projector(space, *cons.set);

  std::vector<Complex> values(grid.size());
  parallel_for(static_cast<long>(grid.size()), options.threads, [&](long i) {
    if (proj) {
      values[i] = constrained_kernel(space, fid, *proj, grid[i].bra, grid[i].ket);
    } else {
      values[i] = overlap(space, fid, grid[i].bra, grid[i].ket);
    }
  });

  ordered_json meta;
  meta["command"] = "kernel";
  meta["dimension"] = space.dim();
  meta["constrained"] = proj.has_value();
  if (proj) {
    meta["projector_rank"] = proj->rank;
    meta["delta_squared"] = proj->delta_squared;
  }
  meta["values"] = kernel_json(grid, values);

  const std::string prefix = parse_prefix(config);
  std::map<std::string, std::string> files;
  files[prefix + "_kernel.csv"] = kernel_table_csv(grid, values);
  files[prefix + "_kernel.json"] = meta.dump(2) + "\n";
  return files;
}

std::map<std::string, std::string> cmd_reduce(const ordered_json& config,
                                              const RunOptions& options) {
  reject_unknown_keys(config, {"space", "fiducial", "constraint", "grid", "reduction", "output"},
                      "config");
  const FockSpace space = parse_space(config, options.resource_cap);
  const FiducialVector fid = parse_fiducial(config, space);
  const ConstraintSpec cons = parse_constraint(config, space);
  const std::vector<LabelPair> grid = parse_grid(config, space, options.seed);

  const ordered_json& red = require_key(config, "reduction", "config");
  require_object(red, "reduction");
  reject_unknown_keys(red, {"deltas", "rescale"}, "reduction");
  const ordered_json& deltas_json = require_key(red, "deltas", "reduction");
  if (!deltas_json.is_array()) throw ValidationError("reduction.deltas: expected an array");
  std::vector<double> ladder;
  for (const auto& d : deltas_json) ladder.push_back(require_number(d, "reduction.deltas"));
  RescaleFamily rescale = RescaleFamily::none;
  if (red.contains("rescale")) {
    const std::string r = require_string(red["rescale"], "reduction.rescale");
    if (r == "none") rescale = RescaleFamily::none;
    else if (r == "half_width") rescale = RescaleFamily::half_width;
    else if (r == "w_sup") rescale = RescaleFamily::w_sup;
    else throw ValidationError("reduction.rescale: unknown value '" + r + "'");
  }

  ReducedKernel result;
  if (cons.window) {
    if (rescale != RescaleFamily::half_width) {
      throw ValidationError("momentum_window constraints use rescale = half_width");
    }
    result = reduce_kernel_delta_limit(space, fid, *cons.window, grid, ladder);
  } else if (cons.set) {
    const ConstraintSet base = *cons.set;
    ConstraintFamily family = [&base](double delta) {
      ConstraintSet cs = base;
      cs.delta_squared = delta * delta;
      return cs;
    };
    result = reduce_kernel_delta_limit(space, fid, family, grid, ladder, rescale);
  } else {
    throw ValidationError("reduce command requires a constraint");
  }

  std::vector<Complex> limits;
  for (const auto& pt : result.points) limits.push_back(pt.limit);
  std::vector<CoherentLabel> labels;
  for (const auto& pair : grid) {
    labels.push_back(pair.bra);
    labels.push_back(pair.ket);
  }

  // Gram of the extrapolated kernel over the grid labels
  Matrix gram(labels.size(), labels.size());
  if (cons.window) {
    std::vector<LabelPair> all_pairs;
    for (const auto& a : labels)
      for (const auto& b : labels) all_pairs.push_back({a, b});
    const ReducedKernel full = reduce_kernel_delta_limit(space, fid, *cons.window, all_pairs, ladder);
    for (size_t i = 0; i < labels.size(); ++i)
      for (size_t j = 0; j < labels.size(); ++j)
        gram(i, j) = full.points[i * labels.size() + j].limit;
  }

  ordered_json report;
  report["command"] = "reduce";
  report["ladder"] = ladder;
  report["rescale"] = red.contains("rescale") ? red["rescale"].get<std::string>() : "none";
  report["delta_independent"] = result.delta_independent;
  report["typical_rho"] = result.typical_rho;
  ordered_json pts = ordered_json::array();
  for (size_t i = 0; i < result.points.size(); ++i) {
    const auto& pt = result.points[i];
    ordered_json p;
    p["bra"] = label_json(grid[i].bra);
    p["ket"] = label_json(grid[i].ket);
    std::vector<double> re, im;
    for (const Complex& v : pt.values) {
      re.push_back(v.real());
      im.push_back(v.imag());
    }
    p["values_re"] = re;
    p["values_im"] = im;
    p["limit_re"] = pt.limit.real();
    p["limit_im"] = pt.limit.imag();
    p["rho"] = pt.rho;
    p["residual"] = pt.residual;
    p["converged"] = pt.converged;
    pts.push_back(std::move(p));
  }
  report["points"] = std::move(pts);
  if (cons.window) {
    // the extrapolated kernel is PSD only up to its extrapolation residual
    report["limit_gram_rank"] = kernel_rank(gram, 1e-4, 1e-4);
  }

  const std::string prefix = parse_prefix(config);
  std::map<std::string, std::string> files;
  files[prefix + "_reduce.json"] = report.dump(2) + "\n";
  files[prefix + "_reduce_limit.csv"] = kernel_table_csv(grid, limits);
  return files;
}

std::string product_csv(const ProductKernelResult& res) {
  std::string out = "N,Re Pi,Im Pi,abs Pi,s_N\n";
  for (const auto& pt : res.curve) {
    out += std::to_string(pt.n) + ',' + fmt(pt.partial.real()) + ',' + fmt(pt.partial.imag()) +
           ',' + fmt(std::abs(pt.partial)) + ',' + fmt(pt.s) + '\n';
  }
  return out;
}

const char* class_name(ProductClass c) {
  switch (c) {
    case ProductClass::convergent: return "convergent";
    case ProductClass::diverges_to_zero: return "diverges-to-zero";
    case ProductClass::divergent: return "divergent";
  }
  return "?";
}

std::map<std::string, std::string> cmd_product(const ordered_json& config,
                                               const RunOptions& options) {
  reject_unknown_keys(config,
                      {"space", "fiducial", "constraint", "sequences", "n_factors", "output"},
                      "config");
  const FockSpace space = parse_space(config, options.resource_cap);
  const FiducialVector fid = parse_fiducial(config, space);
  const ConstraintSpec cons = parse_constraint(config, space);
  if (cons.window) throw ValidationError("product command needs a spectral constraint (or none)");

  const ordered_json& seqs = require_key(config, "sequences", "config");
  require_object(seqs, "sequences");
  reject_unknown_keys(seqs, {"bra", "ket"}, "sequences");
  const LabelSequence bra = parse_sequence(require_key(seqs, "bra", "sequences"), space,
                                           "sequences.bra");
  const LabelSequence ket = parse_sequence(require_key(seqs, "ket", "sequences"), space,
                                           "sequences.ket");
  const long n_factors = require_integer(require_key(config, "n_factors", "config"),
                                         "n_factors");

  std::optional<ConstraintProjector> proj;
  if (cons.set) proj = build_projector(space, *cons.set);
  const ProductKernelResult res =
      product_kernel(space, fid, proj ? &*proj : nullptr, bra, ket, n_factors);

  ordered_json meta;
  meta["command"] = "product";
  meta["classification"] = class_name(res.classification);
  meta["sbar"] = res.sbar;
  meta["cauchy_defect"] = res.cauchy_defect;
  meta["limit_re"] = res.limit.real();
  meta["limit_im"] = res.limit.imag();
  meta["ell1_bra"] = ell1_criterion(bra);
  meta["ell1_ket"] = ell1_criterion(ket);

  const std::string prefix = parse_prefix(config);
  std::map<std::string, std::string> files;
  files[prefix + "_product.csv"] = product_csv(res);
  files[prefix + "_product.json"] = meta.dump(2) + "\n";
  return files;
}

std::map<std::string, std::string> cmd_propagate(const ordered_json& config,
                                                 const RunOptions& options) {
  reject_unknown_keys(config,
                      {"space", "fiducial", "constraint", "hamiltonian", "branch", "times",
                       "grid", "sequences", "n_factors", "output"},
                      "config");
  const FockSpace space = parse_space(config, options.resource_cap);
  const FiducialVector fid = parse_fiducial(config, space);
  const ConstraintSpec cons = parse_constraint(config, space);
  if (cons.window) {
    throw ValidationError("propagate command needs a spectral constraint (or none)");
  }
  const OperatorMatrix h = parse_hamiltonian(config, space);

  ConstraintBranch branch = ConstraintBranch::commuting;
  if (config.contains("branch")) {
    const std::string b = require_string(config["branch"], "branch");
    if (b == "commuting") branch = ConstraintBranch::commuting;
    else if (b == "general") branch = ConstraintBranch::general;
    else throw ValidationError("branch: unknown value '" + b + "'");
  }

  std::vector<double> times{0.0};
  if (config.contains("times")) {
    const ordered_json& t = config["times"];
    if (!t.is_array() || t.empty()) throw ValidationError("times: expected a non-empty array");
    times.clear();
    for (const auto& e : t) times.push_back(require_number(e, "times"));
  }

  std::map<std::string, std::string> files;
  const std::string prefix = parse_prefix(config);
  ordered_json meta;
  meta["command"] = "propagate";
  meta["times"] = times;

  std::optional<ConstraintProjector> proj;
  std::optional<RenormalizedHamiltonian> bundle;
  if (cons.set) {
    proj = build_projector(space, *cons.set);
    bundle = select_fiducial_and_shift(space, *proj, h, branch);
    meta["ebar"] = bundle->ebar;
    meta["selected_index"] = bundle->selected_index;
    meta["branch"] = config.contains("branch") ? config["branch"].get<std::string>()
                                               : "commuting";
    meta["projector_rank"] = proj->rank;

    // physical-subspace spectrum, then the complement
    OperatorMatrix restricted;
    restricted.mat = proj->range_basis.adjoint() * bundle->hbar.mat * proj->range_basis;
    restricted.hermitian = true;
    const EigResult phys = eig_hermitian(restricted);
    std::string csv = "index,eigenvalue,physical\n";
    long row = 0;
    for (Eigen::Index i = 0; i < phys.values.size(); ++i) {
      csv += std::to_string(row++) + ',' + fmt(phys.values(i)) + ",1\n";
    }
    const Eigen::Index n = space.dim();
    Matrix comp = Matrix::Identity(n, n) - proj->projector.mat;
    OperatorMatrix comp_h;
    comp_h.mat = comp * bundle->hbar.mat * comp;
    comp_h.hermitian = true;
    EigResult unphys = eig_hermitian(comp_h);
    // skip the rank zeros contributed by the projector itself
    for (Eigen::Index i = 0; i < unphys.values.size(); ++i) {
      if (i < proj->rank && std::abs(unphys.values(i)) < 1e-12) continue;
      csv += std::to_string(row++) + ',' + fmt(unphys.values(i)) + ",0\n";
    }
    files[prefix + "_spectrum.csv"] = csv;
  } else {
    OperatorMatrix hb = h;
    const EigResult eig = eig_hermitian(hb);
    std::string csv = "index,eigenvalue,physical\n";
    for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
      csv += std::to_string(i) + ',' + fmt(eig.values(i)) + ",1\n";
    }
    files[prefix + "_spectrum.csv"] = csv;
  }

  if (config.contains("grid")) {
    const std::vector<LabelPair> grid = parse_grid(config, space, options.seed);
    for (size_t ti = 0; ti < times.size(); ++ti) {
      std::vector<Complex> values(grid.size());
      OperatorMatrix x;
      if (proj) {
        x = constrained_propagator(space, *proj, bundle->hbar, times[ti], branch);
      } else {
        x = propagator(space, h, times[ti]);
      }
      parallel_for(static_cast<long>(grid.size()), options.threads, [&](long i) {
        values[i] = coherent_matrix_element(space, fid, x, grid[i].bra, grid[i].ket);
      });
      files[prefix + "_kernel_T" + std::to_string(ti) + ".csv"] =
          kernel_table_csv(grid, values);
    }
  }

  if (config.contains("sequences")) {
    if (!proj || !bundle) {
      throw ValidationError("propagate with sequences requires a constraint");
    }
    const ordered_json& seqs = config["sequences"];
    require_object(seqs, "sequences");
    reject_unknown_keys(seqs, {"bra", "ket"}, "sequences");
    const LabelSequence bra = parse_sequence(require_key(seqs, "bra", "sequences"), space,
                                             "sequences.bra");
    const LabelSequence ket = parse_sequence(require_key(seqs, "ket", "sequences"), space,
                                             "sequences.ket");
    const long n_factors = require_integer(require_key(config, "n_factors", "config"),
                                           "n_factors");
    ordered_json curves = ordered_json::array();
    for (size_t ti = 0; ti < times.size(); ++ti) {
      const ProductKernelResult res =
          product_propagator(space, *proj, *bundle, fid, bra, ket, times[ti], n_factors);
      files[prefix + "_product_T" + std::to_string(ti) + ".csv"] = product_csv(res);
      ordered_json c;
      c["T"] = times[ti];
      c["classification"] = class_name(res.classification);
      c["sbar"] = res.sbar;
      c["cauchy_defect"] = res.cauchy_defect;
      c["limit_re"] = res.limit.real();
      c["limit_im"] = res.limit.imag();
      curves.push_back(std::move(c));
    }
    meta["products"] = std::move(curves);
  }

  files[prefix + "_propagate.json"] = meta.dump(2) + "\n";
  return files;
}

}  // namespace

std::map<std::string, std::string> run_command(const std::string& command,
                                               const std::string& config_text,
                                               const RunOptions& options) {
  ordered_json config;
  try {
    config = ordered_json::parse(config_text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  require_object(config, "config");
  if (command == "kernel") return cmd_kernel(config, options);
  if (command == "reduce") return cmd_reduce(config, options);
  if (command == "product") return cmd_product(config, options);
  if (command == "propagate") return cmd_propagate(config, options);
  throw ValidationError("unknown command '" + command + "'");
}

void run_and_write(const std::string& command, const std::string& config_text,
                   const RunOptions& options) {
  const auto files = run_command(command, config_text, options);
  std::filesystem::create_directories(options.out_dir);
  for (const auto& [name, content] : files) {
    std::ofstream out(std::filesystem::path(options.out_dir) / name,
                      std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write output file " + name);
    out << content;
  }
}

}  // namespace rkck::scenario
