#include "absa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace absa {
namespace {

MetricsReport from_counts(Granularity granularity, std::size_t tp,
                          std::size_t n_pred, std::size_t n_gold) {
  MetricsReport report;
  report.granularity = granularity;
  report.tp = tp;
  report.n_pred = n_pred;
  report.n_gold = n_gold;
  report.precision = n_pred > 0 ? 100.0 * static_cast<double>(tp) / n_pred : 0.0;
  report.recall = n_gold > 0 ? 100.0 * static_cast<double>(tp) / n_gold : 0.0;
  const double pr = report.precision + report.recall;
  report.f1 = pr > 0 ? 2.0 * report.precision * report.recall / pr : 0.0;
  return report;
}

std::string element_of(const Tuple& tuple, Granularity element) {
  switch (element) {
    case Granularity::aspect_term: return tuple.aspect_term;
    case Granularity::opinion_term: return tuple.opinion_term.value_or("");
    case Granularity::category: return tuple.category;
    case Granularity::polarity: return to_string(tuple.polarity);
    default:
      throw std::invalid_argument("element_of: tuple granularity has no element");
  }
}

std::size_t intersection_size(const LabelSet& a, const LabelSet& b) {
  const LabelSet& small = a.size() <= b.size() ? a : b;
  const LabelSet& large = a.size() <= b.size() ? b : a;
  std::size_t n = 0;
  for (const Tuple& t : small) n += large.count(t);
  return n;
}

/// Two-sided p for a t statistic. Degenerate spread (df <= 0 or a
/// non-finite t) maps to p = 0 for a nonzero difference and p = 1
/// otherwise.
double two_sided_p(double t, double df) {
  if (t == 0.0) return 1.0;
  if (!std::isfinite(t) || df <= 0.0) return 0.0;
  boost::math::students_t_distribution<double> dist(df);
  return 2.0 * boost::math::cdf(dist, -std::abs(t));
}

double variance_of(const std::vector<double>& values, double mean) {
  if (values.size() < 2) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += (v - mean) * (v - mean);
  return sum / static_cast<double>(values.size() - 1);
}

}  // namespace

std::string to_string(Granularity granularity) {
  switch (granularity) {
    case Granularity::tuple: return "tuple";
    case Granularity::aspect_term: return "aspect_term";
    case Granularity::opinion_term: return "opinion_term";
    case Granularity::category: return "category";
    default: return "polarity";
  }
}

MetricsReport micro_prf(const std::vector<LabelSet>& preds,
                        const std::vector<LabelSet>& golds) {
  if (preds.size() != golds.size())
    throw std::invalid_argument("micro_prf: preds and golds differ in length");

  std::size_t tp = 0, n_pred = 0, n_gold = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    tp += intersection_size(preds[i], golds[i]);
    n_pred += preds[i].size();
    n_gold += golds[i].size();
  }
  return from_counts(Granularity::tuple, tp, n_pred, n_gold);
}

MetricsReport element_prf(const std::vector<LabelSet>& preds,
                          const std::vector<LabelSet>& golds,
                          Granularity element, Task task) {
  if (element == Granularity::tuple)
    return micro_prf(preds, golds);
  if (element == Granularity::opinion_term && task == Task::tasd)
    throw std::invalid_argument("element_prf: TASD has no opinion term");
  if (preds.size() != golds.size())
    throw std::invalid_argument("element_prf: preds and golds differ in length");

  auto project = [element](const LabelSet& label) {
    std::set<std::string> values;
    for (const Tuple& tuple : label) values.insert(element_of(tuple, element));
    return values;
  };

  std::size_t tp = 0, n_pred = 0, n_gold = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto pred = project(preds[i]);
    const auto gold = project(golds[i]);
    for (const std::string& value : pred) tp += gold.count(value);
    n_pred += pred.size();
    n_gold += gold.size();
  }
  return from_counts(element, tp, n_pred, n_gold);
}

double mean_of(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double sample_std(const std::vector<double>& values) {
  return std::sqrt(variance_of(values, mean_of(values)));
}

ConditionSummary aggregate_seeds(const std::vector<MetricsReport>& reports,
                                 const ConditionId& id) {
  if (reports.empty())
    throw std::invalid_argument("aggregate_seeds: no reports");

  std::vector<double> f1, precision, recall;
  for (const MetricsReport& report : reports) {
    f1.push_back(report.f1);
    precision.push_back(report.precision);
    recall.push_back(report.recall);
  }

  ConditionSummary summary;
  summary.id = id;
  summary.per_seed_f1 = f1;
  summary.mean_f1 = mean_of(f1);
  summary.std_f1 = sample_std(f1);
  summary.mean_precision = mean_of(precision);
  summary.std_precision = sample_std(precision);
  summary.mean_recall = mean_of(recall);
  summary.std_recall = sample_std(recall);
  return summary;
}

TTestResult compare_conditions(const std::vector<double>& a,
                               const std::vector<double>& b, std::size_t m,
                               const TTestOptions& options) {
  if (a.size() < 2 || b.size() < 2)
    throw std::invalid_argument("compare_conditions: need at least 2 samples per side");
  if (m < 1)
    throw std::invalid_argument("compare_conditions: m must be >= 1");

  TTestResult result;
  if (options.paired) {
    if (a.size() != b.size())
      throw std::invalid_argument("compare_conditions: paired test needs equal sizes");
    std::vector<double> diff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
    const double mean = mean_of(diff);
    const double var = variance_of(diff, mean);
    const auto n = static_cast<double>(diff.size());
    result.df = n - 1.0;
    result.t = mean == 0.0 ? 0.0 : mean / std::sqrt(var / n);
  } else {
    const double mean_a = mean_of(a), mean_b = mean_of(b);
    const double var_a = variance_of(a, mean_a), var_b = variance_of(b, mean_b);
    const auto na = static_cast<double>(a.size());
    const auto nb = static_cast<double>(b.size());
    const double se2 = var_a / na + var_b / nb;
    if (mean_a == mean_b) {
      result.t = 0.0;
      result.df = na + nb - 2.0;
    } else if (se2 == 0.0) {
      result.t = std::numeric_limits<double>::infinity() *
                 (mean_a > mean_b ? 1.0 : -1.0);
      result.df = na + nb - 2.0;
    } else {
      result.t = (mean_a - mean_b) / std::sqrt(se2);
      result.df = se2 * se2 /
                  (var_a * var_a / (na * na * (na - 1.0)) +
                   var_b * var_b / (nb * nb * (nb - 1.0)));
    }
  }

  result.raw_p = two_sided_p(result.t, result.df);
  result.adjusted_p = std::min(1.0, result.raw_p * static_cast<double>(m));
  result.significant = result.adjusted_p < 0.05;
  return result;
}

}  // namespace absa
