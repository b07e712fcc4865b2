#include "core/linear_svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "core/error.hpp"
#include "core/persist.hpp"
#include "core/rng.hpp"

namespace jobtitle {

namespace {

void check_dimension(std::span<const double> w, const SparseVector& x) {
  if (x.extent() > w.size())
    fail(ErrorKind::Parameter, "feature index " + std::to_string(x.extent() - 1) + " outside weight dimension " +
                                   std::to_string(w.size()));
}

void check_binary_label(int y) {
  if (y != 1 && y != -1) fail(ErrorKind::Parameter, "binary label must be +1 or -1, got " + std::to_string(y));
}

void check_c(double C) {
  if (!(C > 0.0)) fail(ErrorKind::Parameter, "regularization C must be > 0");
}

struct ColumnEntry {
  std::uint32_t instance;
  double value;
};

std::vector<std::vector<ColumnEntry>> transpose(std::span<const LabeledInstance> data, std::size_t dim) {
  std::vector<std::vector<ColumnEntry>> cols(dim);
  for (std::uint32_t i = 0; i < data.size(); ++i)
    for (const auto& e : data[i].x.entries()) cols[e.index].push_back({i, e.weight});
  return cols;
}

// Ascending populated classes, with warnings for declared-but-empty ones.
std::vector<int> populated_classes(std::span<const LabeledInstance> data, std::span<const int> declared,
                                   std::vector<std::string>& warnings) {
  std::set<int> present;
  for (const auto& inst : data) {
    if (inst.y < 0) fail(ErrorKind::Parameter, "multiclass labels must be >= 0");
    present.insert(inst.y);
  }
  for (int c : std::set<int>(declared.begin(), declared.end()))
    if (!present.count(c)) warnings.push_back("class " + std::to_string(c) + " has no training instances; skipped");
  if (present.size() < 2)
    fail(ErrorKind::Degenerate, "multiclass training needs at least 2 populated classes, got " +
                                    std::to_string(present.size()));
  return {present.begin(), present.end()};
}

}  // namespace

const char* to_string(MulticlassStrategy strategy) {
  return strategy == MulticlassStrategy::OneVsAll ? "ova" : "crammer_singer";
}

MulticlassStrategy parse_strategy(std::string_view name) {
  if (name == "ova") return MulticlassStrategy::OneVsAll;
  if (name == "crammer_singer") return MulticlassStrategy::CrammerSinger;
  fail(ErrorKind::Parameter, "unknown multiclass strategy '" + std::string(name) + "' (expected ova or crammer_singer)");
}

double l2_hinge_loss(std::span<const double> w, const SparseVector& x, int y) {
  check_dimension(w, x);
  check_binary_label(y);
  const double slack = std::max(1.0 - y * x.dot(w), 0.0);
  return slack * slack;
}

double objective(std::span<const double> w, std::span<const LabeledInstance> data, double C) {
  check_c(C);
  double reg = 0.0;
  for (double v : w) reg += v * v;
  double loss = 0.0;
  for (const auto& inst : data) loss += l2_hinge_loss(w, inst.x, inst.y);
  return 0.5 * reg + C * loss;
}

std::vector<double> gradient(std::span<const double> w, std::span<const LabeledInstance> data, double C) {
  check_c(C);
  std::vector<double> g(w.begin(), w.end());
  for (const auto& inst : data) {
    check_dimension(w, inst.x);
    check_binary_label(inst.y);
    const double slack = 1.0 - inst.y * inst.x.dot(w);
    if (slack <= 0.0) continue;
    for (const auto& e : inst.x.entries()) g[e.index] -= 2.0 * C * inst.y * e.weight * slack;
  }
  return g;
}

BinaryTrainResult train_binary(std::span<const LabeledInstance> data, std::size_t dim, const SvmOptions& options) {
  check_c(options.C);
  bool pos = false, neg = false;
  for (const auto& inst : data) {
    check_binary_label(inst.y);
    if (inst.x.extent() > dim) fail(ErrorKind::Parameter, "instance feature index outside dimension");
    (inst.y > 0 ? pos : neg) = true;
  }
  if (!pos || !neg) fail(ErrorKind::Degenerate, "binary training needs both classes present");

  const double C = options.C;
  const auto cols = transpose(data, dim);
  std::vector<double> w(dim, 0.0);
  std::vector<double> b(data.size(), 1.0);  // 1 - y_i w.x_i

  auto current_objective = [&] {
    double reg = 0.0, loss = 0.0;
    for (double v : w) reg += v * v;
    for (double s : b)
      if (s > 0.0) loss += s * s;
    return 0.5 * reg + C * loss;
  };

  std::vector<std::uint32_t> order;
  for (std::uint32_t j = 0; j < dim; ++j)
    if (!cols[j].empty()) order.push_back(j);

  Rng rng(options.seed);
  BinaryTrainResult result;
  double f = current_objective();
  result.objective_trace.push_back(f);
  constexpr double kSigma = 0.01;

  for (int epoch = 0; epoch < options.max_iters; ++epoch) {
    shuffle(order, rng);
    for (std::uint32_t j : order) {
      double g = w[j], h = 1.0;
      for (const auto& [i, v] : cols[j]) {
        if (b[i] <= 0.0) continue;
        const double y = data[i].y;
        g -= 2.0 * C * y * v * b[i];
        h += 2.0 * C * v * v;
      }
      if (std::fabs(g) < 1e-12) continue;
      const double d = -g / h;
      for (double step = 1.0; step > 1e-10; step *= 0.5) {
        const double z = step * d;
        double delta = w[j] * z + 0.5 * z * z;
        for (const auto& [i, v] : cols[j]) {
          const double old_s = std::max(b[i], 0.0);
          const double new_s = std::max(b[i] - data[i].y * v * z, 0.0);
          delta += C * (new_s * new_s - old_s * old_s);
        }
        if (delta <= -kSigma * z * z) {
          w[j] += z;
          for (const auto& [i, v] : cols[j]) b[i] -= data[i].y * v * z;
          break;
        }
      }
    }
    const double next = current_objective();
    result.objective_trace.push_back(next);
    result.epochs = epoch + 1;
    const double decrease = f - next;
    f = next;
    if (decrease < options.tol * std::max(1.0, std::fabs(f))) {
      result.converged = true;
      break;
    }
  }
  result.weights = std::move(w);
  return result;
}

MulticlassTrainResult train_ova(std::span<const LabeledInstance> data, std::size_t dim, const SvmOptions& options,
                                std::span<const int> declared_classes) {
  MulticlassTrainResult result;
  const std::vector<int> classes = populated_classes(data, declared_classes, result.warnings);
  result.model.strategy = MulticlassStrategy::OneVsAll;
  result.model.classes = classes;
  result.model.dim = dim;
  result.model.C = options.C;

  std::vector<LabeledInstance> binary(data.begin(), data.end());
  for (int c : classes) {
    for (std::size_t i = 0; i < data.size(); ++i) binary[i].y = data[i].y == c ? 1 : -1;
    BinaryTrainResult r = train_binary(binary, dim, options);
    if (!r.converged) {
      result.converged = false;
      result.warnings.push_back("class " + std::to_string(c) + ": binary solver stopped at max_iters");
    }
    result.model.weights.push_back(std::move(r.weights));
  }
  return result;
}

MulticlassTrainResult train_crammer_singer(std::span<const LabeledInstance> data, std::size_t dim,
                                           const SvmOptions& options, std::span<const int> declared_classes) {
  check_c(options.C);
  MulticlassTrainResult result;
  const std::vector<int> classes = populated_classes(data, declared_classes, result.warnings);
  for (const auto& inst : data)
    if (inst.x.extent() > dim) fail(ErrorKind::Parameter, "instance feature index outside dimension");
  const std::size_t nc = classes.size();
  std::map<int, std::size_t> slot;
  for (std::size_t s = 0; s < nc; ++s) slot[classes[s]] = s;

  const double C = options.C;
  std::vector<std::vector<double>> w(nc, std::vector<double>(dim, 0.0));
  std::vector<double> alpha(data.size() * nc, 0.0);
  std::vector<double> sq_norm(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) sq_norm[i] = data[i].x.dot(data[i].x);
  std::vector<std::uint32_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<double> grad(nc), base(nc), sorted(nc), next(nc);
  Rng rng(options.seed);
  result.converged = false;
  for (int epoch = 0; epoch < options.max_iters; ++epoch) {
    shuffle(order, rng);
    double violation = 0.0;
    for (std::uint32_t i : order) {
      const double a = sq_norm[i];
      if (a <= 0.0) continue;
      const std::size_t yi = slot[data[i].y];
      double* al = &alpha[i * nc];
      for (std::size_t m = 0; m < nc; ++m) grad[m] = (m == yi ? 0.0 : 1.0) + data[i].x.dot(w[m]);

      double min_g = std::numeric_limits<double>::infinity(), max_g = -min_g;
      for (std::size_t m = 0; m < nc; ++m) {
        if (al[m] < 0.0 && grad[m] < min_g) min_g = grad[m];
        max_g = std::max(max_g, grad[m]);
      }
      if (al[yi] < C && grad[yi] < min_g) min_g = grad[yi];
      violation = std::max(violation, max_g - min_g);
      if (max_g - min_g <= 1e-12) continue;

      // Subproblem: min sum_m 0.5 a alpha_m^2 + base_m alpha_m, with
      // sum_m alpha_m = 0, alpha_m <= 0 (m != y), alpha_y <= C.
      for (std::size_t m = 0; m < nc; ++m) base[m] = grad[m] - a * al[m];
      sorted = base;
      sorted[yi] += a * C;
      std::sort(sorted.begin(), sorted.end(), std::greater<>());
      double beta = sorted[0] - a * C;
      std::size_t r = 1;
      for (; r < nc && beta < static_cast<double>(r) * sorted[r]; ++r) beta += sorted[r];
      beta /= static_cast<double>(r);
      for (std::size_t m = 0; m < nc; ++m) {
        const double cap = m == yi ? C : 0.0;
        next[m] = std::min(cap, (beta - base[m]) / a);
      }
      for (std::size_t m = 0; m < nc; ++m) {
        const double delta = next[m] - al[m];
        al[m] = next[m];
        if (std::fabs(delta) < 1e-12) continue;
        for (const auto& e : data[i].x.entries()) w[m][e.index] += delta * e.weight;
      }
    }
    if (violation < std::max(options.tol, 1e-3)) {
      result.converged = true;
      break;
    }
  }
  if (!result.converged) result.warnings.push_back("Crammer-Singer solver stopped at max_iters");

  result.model.strategy = MulticlassStrategy::CrammerSinger;
  result.model.classes = classes;
  result.model.dim = dim;
  result.model.C = C;
  result.model.weights = std::move(w);
  return result;
}

double crammer_singer_loss(const LinearModel& model, const SparseVector& x, int y) {
  auto it = std::find(model.classes.begin(), model.classes.end(), y);
  if (it == model.classes.end()) fail(ErrorKind::Parameter, "label " + std::to_string(y) + " not in model");
  const std::size_t yi = static_cast<std::size_t>(it - model.classes.begin());
  const double own = x.dot(model.weights[yi]);
  double rival = -std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < model.classes.size(); ++m)
    if (m != yi) rival = std::max(rival, x.dot(model.weights[m]));
  return std::max(0.0, 1.0 + rival - own);
}

double crammer_singer_objective(const LinearModel& model, std::span<const LabeledInstance> data, double C) {
  check_c(C);
  double reg = 0.0;
  for (const auto& row : model.weights)
    for (double v : row) reg += v * v;
  double loss = 0.0;
  for (const auto& inst : data) loss += crammer_singer_loss(model, inst.x, inst.y);
  return 0.5 * reg + C * loss;
}

Prediction predict(const LinearModel& model, const SparseVector& x) {
  if (x.extent() > model.dim)
    fail(ErrorKind::Parameter, "feature index outside model dimension " + std::to_string(model.dim));
  if (model.classes.empty()) fail(ErrorKind::Parameter, "model has no classes");
  Prediction p{model.classes.front(), {}};
  p.scores.reserve(model.classes.size());
  for (const auto& row : model.weights) p.scores.push_back(x.dot(row));
  std::size_t best = 0;
  for (std::size_t c = 1; c < p.scores.size(); ++c)
    if (p.scores[c] > p.scores[best]) best = c;
  p.class_id = model.classes[best];
  return p;
}

std::string serialize_model(const LinearModel& model) {
  std::string out = "jobtitle-linear-model 1\n";
  out += std::string("strategy ") + to_string(model.strategy) + "\n";
  out += "classes";
  for (int c : model.classes) out += ' ' + std::to_string(c);
  out += "\ndim " + std::to_string(model.dim) + "\n";
  out += "C " + persist::format_double(model.C) + "\n";
  out += std::string("bias ") + (model.bias ? "1" : "0") + "\n";
  for (std::size_t c = 0; c < model.weights.size(); ++c) {
    out += "w " + std::to_string(model.classes[c]);
    for (double v : model.weights[c]) out += ' ' + persist::format_double(v);
    out += '\n';
  }
  return out;
}

LinearModel parse_model(std::string_view text) {
  auto bad = [](const std::string& why) { fail(ErrorKind::Integrity, "linear model: " + why); };
  const auto rows = persist::lines(text);
  if (rows.size() < 6 || rows[0] != "jobtitle-linear-model 1") bad("missing header");
  auto fields = [](std::string_view line) { return persist::split(line, ' '); };

  LinearModel model;
  auto strategy = fields(rows[1]);
  if (strategy.size() != 2 || strategy[0] != "strategy") bad("missing strategy");
  try {
    model.strategy = parse_strategy(strategy[1]);
  } catch (const Error& e) {
    bad(e.what());
  }
  auto classes = fields(rows[2]);
  if (classes.empty() || classes[0] != "classes") bad("missing classes");
  for (std::size_t i = 1; i < classes.size(); ++i) model.classes.push_back(static_cast<int>(persist::parse_size(classes[i])));
  auto dim = fields(rows[3]);
  if (dim.size() != 2 || dim[0] != "dim") bad("missing dim");
  model.dim = persist::parse_size(dim[1]);
  auto c = fields(rows[4]);
  if (c.size() != 2 || c[0] != "C") bad("missing C");
  model.C = persist::parse_double(c[1]);
  auto bias = fields(rows[5]);
  if (bias.size() != 2 || bias[0] != "bias" || (bias[1] != "0" && bias[1] != "1")) bad("missing bias");
  model.bias = bias[1] == "1";
  if (rows.size() != 6 + model.classes.size()) bad("expected one weight row per class");
  for (std::size_t k = 0; k < model.classes.size(); ++k) {
    auto w = fields(rows[6 + k]);
    if (w.size() != model.dim + 2 || w[0] != "w" || persist::parse_size(w[1]) != static_cast<std::size_t>(model.classes[k]))
      bad("malformed weight row " + std::to_string(k));
    std::vector<double> row;
    row.reserve(model.dim);
    for (std::size_t i = 2; i < w.size(); ++i) {
      row.push_back(persist::parse_double(w[i]));
      if (!std::isfinite(row.back())) bad("non-finite weight");
    }
    model.weights.push_back(std::move(row));
  }
  return model;
}

}  // namespace jobtitle
