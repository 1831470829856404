#include "hiericrf/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hiericrf/error.hpp"

namespace hiericrf {

std::string_view to_string(CrfMode mode) {
  return mode == CrfMode::kStrict ? "strict" : "faithful";
}

CrfMode parse_crf_mode(std::string_view text) {
  if (text == "faithful") return CrfMode::kFaithful;
  if (text == "strict") return CrfMode::kStrict;
  throw InvalidArgument("unknown mode '" + std::string(text) + "' (faithful|strict)");
}

double log_sum_exp(std::span<const double> values) {
  double hi = -std::numeric_limits<double>::infinity();
  for (const double v : values) hi = std::max(hi, v);
  if (!std::isfinite(hi)) return hi;
  double sum = 0.0;
  for (const double v : values) sum += std::exp(v - hi);
  return hi + std::log(sum);
}

CrfParams CrfParams::neutral(int labels) {
  CrfParams p;
  p.transitions = MatrixD(labels, labels, 0.0);
  p.start.assign(labels, 0.0);
  p.frozen = Matrix<std::uint8_t>(labels, labels, 0);
  p.start_frozen.assign(labels, 0);
  return p;
}

CrfParams init_transitions(const Taxonomy& tax, const ChainSchedule& schedule,
                           CrfMode mode, double soft_penalty, double hard_penalty) {
  if (!(soft_penalty < 0.0) || !(hard_penalty < soft_penalty)) {
    throw InvalidArgument("penalties must satisfy hard < soft < 0");
  }
  if (schedule.depth() != tax.depth()) {
    throw InvalidArgument("schedule depth " + std::to_string(schedule.depth()) +
                          " does not match taxonomy depth " + std::to_string(tax.depth()));
  }
  const int m = tax.label_count();
  const int depth = tax.depth();
  const bool strict = mode == CrfMode::kStrict;
  const auto legal = legal_level_pairs(tax, schedule);

  CrfParams p = CrfParams::neutral(m);
  p.mode = mode;
  p.soft_penalty = soft_penalty;
  p.hard_penalty = hard_penalty;
  p.label_levels.resize(m);
  for (const LabelNode& n : tax.nodes()) p.label_levels[n.id] = n.level;
  if (strict) p.slot_levels = schedule.levels();

  const double penalty = strict ? hard_penalty : soft_penalty;
  for (LabelId a = 0; a < m; ++a) {
    const int la = tax.level(a);
    for (LabelId b = 0; b < m; ++b) {
      const int lb = tax.level(b);
      bool allowed = legal.contains({la, lb});
      if (allowed && strict) {
        if (lb == la + 1) {
          allowed = tax.node(b).parent == a;
        } else if (lb == la - 1) {
          allowed = tax.node(a).parent == b;
        } else if (la == 1 && lb == depth) {
          allowed = tax.path_to(b).front() == a;
        } else {
          allowed = false;
        }
      }
      if (!allowed) {
        p.transitions(a, b) = penalty;
        p.frozen(a, b) = strict ? 1 : 0;
      }
    }
  }
  const int first_level = schedule.levels().front();
  for (LabelId y = 0; y < m; ++y) {
    if (tax.level(y) != first_level) {
      p.start[y] = penalty;
      p.start_frozen[y] = strict ? 1 : 0;
    }
  }
  return p;
}

namespace {

// Emissions with strict-mode state masks folded in.
MatrixD effective_emissions(const EmissionMatrix& z, const CrfParams& params) {
  if (z.rows() == 0) throw InvalidArgument("emission matrix has no slots");
  if (static_cast<int>(z.cols()) != params.labels()) {
    throw DimensionMismatch("emissions have " + std::to_string(z.cols()) +
                            " labels, CRF has " + std::to_string(params.labels()));
  }
  if (!params.masks_states()) return z;
  if (z.rows() != params.slot_levels.size()) {
    throw LengthMismatch("emissions have " + std::to_string(z.rows()) +
                         " slots, strict schedule has " +
                         std::to_string(params.slot_levels.size()));
  }
  MatrixD e = z;
  for (std::size_t i = 0; i < e.rows(); ++i) {
    for (std::size_t y = 0; y < e.cols(); ++y) {
      if (!params.state_allowed(static_cast<int>(i), static_cast<LabelId>(y))) {
        e(i, y) += params.hard_penalty;
      }
    }
  }
  return e;
}

void check_finite(double v, const char* where) {
  if (std::isnan(v)) throw NumericalError(std::string("NaN in ") + where);
}

MatrixD forward_scores(const MatrixD& e, const CrfParams& p) {
  const std::size_t l = e.rows();
  const std::size_t m = e.cols();
  MatrixD alpha(l, m);
  for (std::size_t y = 0; y < m; ++y) alpha(0, y) = p.start[y] + e(0, y);
  std::vector<double> terms(m);
  for (std::size_t i = 1; i < l; ++i) {
    for (std::size_t b = 0; b < m; ++b) {
      for (std::size_t a = 0; a < m; ++a) terms[a] = alpha(i - 1, a) + p.transitions(a, b);
      alpha(i, b) = log_sum_exp(terms) + e(i, b);
      check_finite(alpha(i, b), "forward recursion");
    }
  }
  return alpha;
}

MatrixD backward_scores(const MatrixD& e, const CrfParams& p) {
  const std::size_t l = e.rows();
  const std::size_t m = e.cols();
  MatrixD beta(l, m, 0.0);
  std::vector<double> terms(m);
  for (std::size_t i = l - 1; i-- > 0;) {
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < m; ++b) {
        terms[b] = p.transitions(a, b) + e(i + 1, b) + beta(i + 1, b);
      }
      beta(i, a) = log_sum_exp(terms);
      check_finite(beta(i, a), "backward recursion");
    }
  }
  return beta;
}

double raw_score(const MatrixD& e, std::span<const LabelId> y, const CrfParams& p) {
  if (y.size() != e.rows()) {
    throw LengthMismatch("sequence has " + std::to_string(y.size()) + " labels, emissions have " +
                         std::to_string(e.rows()) + " slots");
  }
  const int m = p.labels();
  for (const LabelId v : y) {
    if (v < 0 || v >= m) throw UnknownLabel("label id " + std::to_string(v) + " out of range");
  }
  double s = p.start[y[0]];
  for (std::size_t i = 0; i < y.size(); ++i) {
    s += e(i, y[i]);
    if (i > 0) s += p.transitions(y[i - 1], y[i]);
  }
  return s;
}

}  // namespace

double sequence_score(const EmissionMatrix& z, std::span<const LabelId> y,
                      const CrfParams& params) {
  return raw_score(effective_emissions(z, params), y, params);
}

double log_partition(const EmissionMatrix& z, const CrfParams& params) {
  const MatrixD e = effective_emissions(z, params);
  const MatrixD alpha = forward_scores(e, params);
  const double log_z = log_sum_exp(alpha.row(alpha.rows() - 1));
  check_finite(log_z, "log partition");
  return log_z;
}

namespace {

Marginals marginals_from(const MatrixD& e, const CrfParams& p, double* log_z_out) {
  const std::size_t l = e.rows();
  const std::size_t m = e.cols();
  const MatrixD alpha = forward_scores(e, p);
  const MatrixD beta = backward_scores(e, p);
  const double log_z = log_sum_exp(alpha.row(l - 1));
  check_finite(log_z, "log partition");

  Marginals out{MatrixD(l, m), std::vector<MatrixD>(l - 1, MatrixD(m, m))};
  for (std::size_t i = 0; i < l; ++i) {
    for (std::size_t y = 0; y < m; ++y) {
      out.node(i, y) = std::exp(alpha(i, y) + beta(i, y) - log_z);
    }
  }
  for (std::size_t i = 0; i + 1 < l; ++i) {
    MatrixD& slice = out.edge[i];
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < m; ++b) {
        slice(a, b) = std::exp(alpha(i, a) + p.transitions(a, b) + e(i + 1, b) +
                               beta(i + 1, b) - log_z);
      }
    }
  }
  if (log_z_out) *log_z_out = log_z;
  return out;
}

}  // namespace

Marginals posterior_marginals(const EmissionMatrix& z, const CrfParams& params) {
  return marginals_from(effective_emissions(z, params), params, nullptr);
}

NllGradients nll_and_grads(const EmissionMatrix& z, std::span<const LabelId> gold,
                           const CrfParams& params) {
  const MatrixD e = effective_emissions(z, params);
  const double gold_score = raw_score(e, gold, params);
  double log_z = 0.0;
  const Marginals marg = marginals_from(e, params, &log_z);

  const std::size_t l = e.rows();
  const std::size_t m = e.cols();
  NllGradients g;
  g.nll = log_z - gold_score;
  check_finite(g.nll, "negative log-likelihood");

  g.grad_z = marg.node;
  for (std::size_t i = 0; i < l; ++i) g.grad_z(i, gold[i]) -= 1.0;

  g.grad_start.assign(m, 0.0);
  for (std::size_t y = 0; y < m; ++y) g.grad_start[y] = marg.node(0, y);
  g.grad_start[gold[0]] -= 1.0;

  g.grad_transitions = MatrixD(m, m, 0.0);
  for (const MatrixD& slice : marg.edge) {
    for (std::size_t k = 0; k < slice.size(); ++k) g.grad_transitions.data()[k] += slice.data()[k];
  }
  for (std::size_t i = 1; i < l; ++i) g.grad_transitions(gold[i - 1], gold[i]) -= 1.0;

  for (std::size_t k = 0; k < g.grad_transitions.size(); ++k) {
    if (params.frozen.data()[k]) g.grad_transitions.data()[k] = 0.0;
  }
  for (std::size_t y = 0; y < m; ++y) {
    if (params.start_frozen[y]) g.grad_start[y] = 0.0;
  }
  return g;
}

DecodeResult decode(const EmissionMatrix& z, const CrfParams& params,
                    const ChainSchedule& schedule) {
  const MatrixD e = effective_emissions(z, params);
  const std::size_t l = e.rows();
  const std::size_t m = e.cols();
  if (static_cast<int>(l) != schedule.length()) {
    throw LengthMismatch("emissions have " + std::to_string(l) + " slots, schedule has " +
                         std::to_string(schedule.length()));
  }

  // best(i, a): max score of slots i+1..l-1 given label a at slot i.
  MatrixD best(l, m, 0.0);
  for (std::size_t i = l - 1; i-- > 0;) {
    for (std::size_t a = 0; a < m; ++a) {
      double hi = -std::numeric_limits<double>::infinity();
      for (std::size_t b = 0; b < m; ++b) {
        hi = std::max(hi, params.transitions(a, b) + e(i + 1, b) + best(i + 1, b));
      }
      check_finite(hi, "Viterbi recursion");
      best(i, a) = hi;
    }
  }

  // Greedy forward pass picks the smallest label among optimal choices.
  DecodeResult r;
  r.sequence.resize(l);
  auto pick = [&](auto&& value) {
    LabelId arg = 0;
    double hi = value(0);
    for (std::size_t y = 1; y < m; ++y) {
      const double v = value(y);
      if (v > hi) {
        hi = v;
        arg = static_cast<LabelId>(y);
      }
    }
    return arg;
  };
  r.sequence[0] = pick([&](std::size_t y) { return params.start[y] + e(0, y) + best(0, y); });
  for (std::size_t i = 1; i < l; ++i) {
    const LabelId prev = r.sequence[i - 1];
    r.sequence[i] = pick([&](std::size_t b) {
      return params.transitions(prev, b) + e(i, b) + best(i, b);
    });
  }

  r.score = raw_score(e, r.sequence, params);
  r.log_partition = log_sum_exp(forward_scores(e, params).row(l - 1));
  check_finite(r.log_partition, "log partition");
  r.per_level = read_out(r.sequence, schedule);
  return r;
}

DecodeResult decode_independent(const EmissionMatrix& z, const CrfParams& params,
                                const ChainSchedule& schedule) {
  const MatrixD e = effective_emissions(z, params);
  const std::size_t l = e.rows();
  if (static_cast<int>(l) != schedule.length()) {
    throw LengthMismatch("emissions have " + std::to_string(l) + " slots, schedule has " +
                         std::to_string(schedule.length()));
  }
  DecodeResult r;
  for (std::size_t i = 0; i < l; ++i) {
    const auto row = e.row(i);
    const auto it = std::max_element(row.begin(), row.end());
    check_finite(*it, "independent decode");
    r.sequence.push_back(static_cast<LabelId>(it - row.begin()));
    r.score += *it;
    r.log_partition += log_sum_exp(row);
  }
  r.per_level = read_out(r.sequence, schedule);
  return r;
}

NllGradients independent_nll_and_grads(const EmissionMatrix& z,
                                       std::span<const LabelId> gold,
                                       const CrfParams& params) {
  const MatrixD e = effective_emissions(z, params);
  const std::size_t l = e.rows();
  const std::size_t m = e.cols();
  if (gold.size() != l) {
    throw LengthMismatch("gold has " + std::to_string(gold.size()) + " labels, emissions have " +
                         std::to_string(l) + " slots");
  }
  for (const LabelId v : gold) {
    if (v < 0 || v >= static_cast<LabelId>(m)) {
      throw UnknownLabel("label id " + std::to_string(v) + " out of range");
    }
  }
  NllGradients g;
  g.grad_z = MatrixD(l, m);
  g.grad_transitions = MatrixD(m, m, 0.0);
  g.grad_start.assign(m, 0.0);
  for (std::size_t i = 0; i < l; ++i) {
    const auto row = e.row(i);
    const double lse = log_sum_exp(row);
    g.nll += lse - row[gold[i]];
    for (std::size_t y = 0; y < m; ++y) g.grad_z(i, y) = std::exp(row[y] - lse);
    g.grad_z(i, gold[i]) -= 1.0;
  }
  check_finite(g.nll, "negative log-likelihood");
  return g;
}

}  // namespace hiericrf
