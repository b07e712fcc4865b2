#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "core/vectorspace.hpp"

namespace jobtitle {

// Binary problems use y in {-1, +1}; multiclass problems use class ids >= 0.
struct LabeledInstance {
  SparseVector x;
  int y;
};

enum class MulticlassStrategy { OneVsAll, CrammerSinger };

const char* to_string(MulticlassStrategy strategy);
MulticlassStrategy parse_strategy(std::string_view name);

struct SvmOptions {
  double C = 1.0;
  double tol = 1e-6;
  int max_iters = 1000;
  std::uint64_t seed = 1;
};

// max(1 - y w.x, 0)^2
double l2_hinge_loss(std::span<const double> w, const SparseVector& x, int y);

// 0.5 ||w||^2 + C sum_i l2_hinge_loss(w, x_i, y_i)
double objective(std::span<const double> w, std::span<const LabeledInstance> data, double C);

// w - 2C sum_{i: y_i w.x_i < 1} y_i x_i (1 - y_i w.x_i)
std::vector<double> gradient(std::span<const double> w, std::span<const LabeledInstance> data, double C);

struct BinaryTrainResult {
  std::vector<double> weights;
  bool converged = false;
  int epochs = 0;
  // Objective at w = 0 followed by the value after every epoch.
  std::vector<double> objective_trace;
};

// Primal coordinate descent with a Newton step and sufficient-decrease line
// search per coordinate, so the objective never increases across epochs.
// Stops when an epoch lowers the objective by less than tol * max(1, f).
BinaryTrainResult train_binary(std::span<const LabeledInstance> data, std::size_t dim, const SvmOptions& options = {});

struct LinearModel {
  MulticlassStrategy strategy = MulticlassStrategy::OneVsAll;
  std::vector<int> classes;                  // ascending
  std::size_t dim = 0;                       // includes the bias feature when bias is set
  std::vector<std::vector<double>> weights;  // one row per class
  double C = 1.0;
  bool bias = false;
};

struct MulticlassTrainResult {
  LinearModel model;
  bool converged = true;
  std::vector<std::string> warnings;
};

// One binary L2-SVM per class. Declared classes with no instances are
// skipped with a warning; fewer than two populated classes is an error.
MulticlassTrainResult train_ova(std::span<const LabeledInstance> data, std::size_t dim, const SvmOptions& options = {},
                                std::span<const int> declared_classes = {});

// Joint multiclass SVM, dual coordinate descent over per-instance
// subproblems.
MulticlassTrainResult train_crammer_singer(std::span<const LabeledInstance> data, std::size_t dim,
                                           const SvmOptions& options = {}, std::span<const int> declared_classes = {});

// max(0, 1 + max_{r != y} w_r.x - w_y.x)
double crammer_singer_loss(const LinearModel& model, const SparseVector& x, int y);
double crammer_singer_objective(const LinearModel& model, std::span<const LabeledInstance> data, double C);

struct Prediction {
  int class_id;
  std::vector<double> scores;  // aligned with model.classes
};

// argmax of w_c.x; ties go to the smallest class id.
Prediction predict(const LinearModel& model, const SparseVector& x);

std::string serialize_model(const LinearModel& model);
LinearModel parse_model(std::string_view text);

}  // namespace jobtitle
