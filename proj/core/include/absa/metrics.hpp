#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "absa/types.hpp"

namespace absa {

enum class Granularity { tuple, aspect_term, opinion_term, category, polarity };

std::string to_string(Granularity granularity);

/// Exact-match micro scores as percentages. When a denominator is zero the
/// affected ratio is 0, and F1 is 0 whenever P + R is 0.
struct MetricsReport {
  Granularity granularity = Granularity::tuple;
  std::size_t tp = 0;
  std::size_t n_pred = 0;
  std::size_t n_gold = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// tp = sum over examples of |pred ∩ gold|; P = tp / Σ|pred|,
/// R = tp / Σ|gold|. preds and golds are aligned by position.
MetricsReport micro_prf(const std::vector<LabelSet>& preds,
                        const std::vector<LabelSet>& golds);

/// Projects every example's tuples onto one element (forming per-example
/// sets of element values), then counts as micro_prf. opinion_term is
/// invalid for TASD.
MetricsReport element_prf(const std::vector<LabelSet>& preds,
                          const std::vector<LabelSet>& golds,
                          Granularity element, Task task);

struct ConditionId {
  std::string dataset;
  Task task = Task::asqp;
  int shot_count = 0;
  bool sc = false;
  std::string model;
};

/// Across-seed aggregate for one condition: arithmetic mean and sample
/// standard deviation of F1 (and of P and R).
struct ConditionSummary {
  ConditionId id;
  std::vector<double> per_seed_f1;
  double mean_f1 = 0.0;
  double std_f1 = 0.0;
  double mean_precision = 0.0;
  double std_precision = 0.0;
  double mean_recall = 0.0;
  double std_recall = 0.0;
};

ConditionSummary aggregate_seeds(const std::vector<MetricsReport>& reports,
                                 const ConditionId& id);

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double raw_p = 1.0;
  double adjusted_p = 1.0;  // Bonferroni: min(1, raw_p * m)
  bool significant = false; // adjusted_p < .05
};

struct TTestOptions {
  bool paired = false;  // default: Welch's two-sample test
};

/// Two-sided t-test between two per-seed F1 samples with Bonferroni
/// correction over m comparisons. Identical samples give t = 0, p = 1.
TTestResult compare_conditions(const std::vector<double>& a,
                               const std::vector<double>& b, std::size_t m,
                               const TTestOptions& options = {});

double mean_of(const std::vector<double>& values);
double sample_std(const std::vector<double>& values);

}  // namespace absa
