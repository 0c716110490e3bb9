// mbr.cc
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "embr/mbr.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>
#include <thread>
#include <utility>

#include "embr/error.h"
#include "embr/inference.h"
#include "embr/log-math.h"
#include "embr/random.h"

namespace embr {

LossFunction LossFunction::WordEdit(ReferenceTranscript ref) {
  return LossFunction(LossKind::kWordEdit, std::move(ref));
}

LossFunction LossFunction::FrameError(ReferenceAlignment ref) {
  return LossFunction(LossKind::kFrameError, std::move(ref));
}

LossFunction LossFunction::Custom(CustomFn fn) {
  return LossFunction(LossKind::kCustom, std::move(fn));
}

LossFunction LossFunction::WithOffset(double offset) const {
  LossFunction shifted = *this;
  shifted.offset_ += offset;
  return shifted;
}

double LossFunction::Unshifted(const Wfst &fst, const Path &path) const {
  double value = 0.0;
  switch (kind_) {
    case LossKind::kWordEdit: {
      const auto &ref = std::get<ReferenceTranscript>(payload_);
      value = EditDistance(CollapsePath(fst, path), ref.Words());
      break;
    }
    case LossKind::kFrameError: {
      const auto &ref = std::get<ReferenceAlignment>(payload_);
      value = embr::FrameError(InputLabels(fst, path), ref);
      break;
    }
    case LossKind::kCustom:
      value = std::get<CustomFn>(payload_)(fst, path);
      break;
  }
  return value;
}

std::string_view LossKindName(LossKind kind) {
  switch (kind) {
    case LossKind::kWordEdit: return "word-edit";
    case LossKind::kFrameError: return "frame-error";
    case LossKind::kCustom: return "custom";
  }
  return "unknown";
}

namespace {

struct WeightedPaths {
  std::vector<Path> paths;
  std::vector<double> probs;
};

WeightedPaths NormalizedPaths(const Wfst &fst, std::size_t max_paths) {
  WeightedPaths out;
  out.paths = EnumeratePaths(fst, max_paths);
  std::vector<double> log_weights;
  log_weights.reserve(out.paths.size());
  for (const Path &p : out.paths) log_weights.push_back(p.log_weight);
  double log_z = LogSumExp(log_weights);
  if (log_z == kLogZero) {
    throw Error(ErrorKind::kDegenerate, "all paths have zero weight");
  }
  for (double lw : log_weights) out.probs.push_back(std::exp(lw - log_z));
  return out;
}

// Cluster column visited at each frame, checked against z's shape.
std::vector<int> FrameColumns(const Wfst &fst, const Path &path,
                              const LogitMatrix &z) {
  std::vector<Label> labels = InputLabels(fst, path);
  if (labels.size() != z.Frames()) {
    throw Error(ErrorKind::kDimension,
                "path has " + std::to_string(labels.size()) +
                    " non-epsilon input labels but logits have " +
                    std::to_string(z.Frames()) + " frames");
  }
  std::vector<int> cols(labels.size());
  for (std::size_t t = 0; t < labels.size(); ++t) {
    if (labels[t] < 1 || static_cast<std::size_t>(labels[t]) > z.Clusters()) {
      throw Error(ErrorKind::kDimension,
                  "input label " + std::to_string(labels[t]) +
                      " outside clusters 1.." + std::to_string(z.Clusters()));
    }
    cols[t] = labels[t] - 1;
  }
  return cols;
}

}  // namespace

double ExpectedLossExact(const Wfst &fst, const LossFunction &loss,
                         std::size_t max_paths) {
  WeightedPaths wp = NormalizedPaths(fst, max_paths);
  double expected = 0.0;
  for (std::size_t i = 0; i < wp.paths.size(); ++i) {
    if (wp.probs[i] == 0.0) continue;
    expected += wp.probs[i] * loss(fst, wp.paths[i]);
  }
  return expected;
}

Matrix<double> ExpectedLossGradientExact(const Wfst &fst,
                                         const LogitMatrix &z,
                                         const LossFunction &loss,
                                         std::size_t max_paths) {
  WeightedPaths wp = NormalizedPaths(fst, max_paths);
  std::vector<double> losses(wp.paths.size(), 0.0);
  double expected = 0.0;
  for (std::size_t i = 0; i < wp.paths.size(); ++i) {
    if (wp.probs[i] == 0.0) continue;
    losses[i] = loss(fst, wp.paths[i]);
    expected += wp.probs[i] * losses[i];
  }
  // Cov(L, gamma) = E[(L - E[L]) gamma].
  Matrix<double> grad(z.Frames(), z.Clusters(), 0.0);
  for (std::size_t i = 0; i < wp.paths.size(); ++i) {
    if (wp.probs[i] == 0.0) continue;
    std::vector<int> cols = FrameColumns(fst, wp.paths[i], z);
    double scale = wp.probs[i] * (losses[i] - expected);
    for (std::size_t t = 0; t < cols.size(); ++t) grad(t, cols[t]) += scale;
  }
  return grad;
}

SemiringExpectation ExpectedAdditiveLossSemiring(
    const Wfst &fst, const std::vector<double> &edge_losses) {
  if (edge_losses.size() != fst.NumEdges()) {
    throw Error(ErrorKind::kDimension,
                "edge loss table has " + std::to_string(edge_losses.size()) +
                    " entries for " + std::to_string(fst.NumEdges()) +
                    " edges");
  }
  // Each state carries the semiring pair <p, r> as (log p, r / p): the
  // total suffix weight and the expected suffix loss under it.
  std::vector<StateId> order = TopologicalOrder(fst);
  std::vector<double> log_p(fst.NumStates(), kLogZero);
  std::vector<double> mean_r(fst.NumStates(), 0.0);
  log_p[fst.Final()] = 0.0;
  std::vector<double> terms;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    StateId s = *it;
    if (s == fst.Final()) continue;
    terms.clear();
    for (EdgeId id : fst.OutEdges(s)) {
      const Edge &e = fst.GetEdge(id);
      terms.push_back(e.log_weight + log_p[e.dst]);
    }
    log_p[s] = LogSumExp(terms);
    if (log_p[s] == kLogZero) continue;
    double r = 0.0;
    for (EdgeId id : fst.OutEdges(s)) {
      const Edge &e = fst.GetEdge(id);
      double lw = e.log_weight + log_p[e.dst];
      if (lw == kLogZero) continue;
      r += std::exp(lw - log_p[s]) * (edge_losses[id] + mean_r[e.dst]);
    }
    mean_r[s] = r;
  }
  return {log_p[fst.Initial()], mean_r[fst.Initial()]};
}

Matrix<double> ExpectedOccupancies(const Wfst &fst, std::size_t frames,
                                   std::size_t clusters) {
  std::vector<int> depth = FrameDepths(fst);
  BetaTable beta = Backward(fst);
  if (beta.LogZ() == kLogZero) {
    throw Error(ErrorKind::kDegenerate, "total path weight is zero");
  }
  std::vector<double> log_alpha = Forward(fst);
  Matrix<double> occupancy(frames, clusters, 0.0);
  for (const Edge &e : fst.Edges()) {
    if (e.ilabel == kEpsilon || depth[e.src] < 0) continue;
    double lp =
        log_alpha[e.src] + e.log_weight + beta.log_beta[e.dst] - beta.LogZ();
    if (!(lp > kLogZero)) continue;
    std::size_t t = static_cast<std::size_t>(depth[e.src]);
    if (t >= frames || static_cast<std::size_t>(e.ilabel) > clusters) {
      throw Error(ErrorKind::kDimension,
                  "edge at frame " + std::to_string(t) + " with label " +
                      std::to_string(e.ilabel) + " outside " +
                      std::to_string(frames) + "x" + std::to_string(clusters));
    }
    occupancy(t, e.ilabel - 1) += std::exp(lp);
  }
  return occupancy;
}

MbrEstimate EmbrEstimate(const Wfst &fst, const LogitMatrix &z,
                         const LossFunction &loss,
                         const EstimatorOptions &options) {
  const std::size_t count = options.num_samples;
  if (count == 0) {
    throw Error(ErrorKind::kUsage, "number of samples must be positive");
  }
  PathSampler sampler(fst);
  const RandomStream base(options.seed);

  std::vector<double> losses(count);
  std::vector<std::vector<int>> columns(count);
  auto draw = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      RandomStream stream = base.Split(i);
      Path path = sampler.Sample(stream);
      columns[i] = FrameColumns(fst, path, z);
      losses[i] = loss.Unshifted(fst, path);
    }
  };
  std::size_t threads = static_cast<std::size_t>(
      std::clamp<int>(options.num_threads, 1, 64));
  threads = std::min(threads, count);
  if (threads == 1) {
    draw(0, count);
  } else {
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> failures(threads);
    std::size_t chunk = (count + threads - 1) / threads;
    for (std::size_t k = 0; k < threads; ++k) {
      std::size_t begin = std::min(count, k * chunk);
      std::size_t end = std::min(count, begin + chunk);
      workers.emplace_back([&, k, begin, end] {
        try {
          draw(begin, end);
        } catch (...) {
          failures[k] = std::current_exception();
        }
      });
    }
    for (std::thread &w : workers) w.join();
    for (const std::exception_ptr &f : failures) {
      if (f) std::rethrow_exception(f);
    }
  }

  MbrEstimate est;
  est.num_samples = count;
  est.seed = options.seed;
  const double offset = loss.Offset();
  const std::size_t recorded = std::min(count, kMaxRecordedLosses);
  est.per_sample_losses.resize(recorded);
  for (std::size_t i = 0; i < recorded; ++i) {
    est.per_sample_losses[i] = losses[i] + offset;
  }
  double sum = 0.0;
  for (double l : losses) sum += l;
  est.loss_mean = sum / static_cast<double>(count) + offset;
  est.expected_loss = est.loss_mean;

  // Deviations never see the offset, and are pivoted on the first sample.
  std::vector<double> deviation(count);
  double pivot_sum = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    deviation[i] = losses[i] - losses[0];
    pivot_sum += deviation[i];
  }
  double pivot_mean = pivot_sum / static_cast<double>(count);
  double squares = 0.0;
  for (double &d : deviation) {
    d -= pivot_mean;
    squares += d * d;
  }
  est.loss_variance =
      count > 1 ? squares / static_cast<double>(count - 1) : 0.0;

  const double n = static_cast<double>(count);
  est.gradient = Matrix<double>(z.Frames(), z.Clusters(), 0.0);
  if (options.variance_reduction) {
    if (count == 1) return est;
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t t = 0; t < columns[i].size(); ++t) {
        est.gradient(t, columns[i][t]) += deviation[i];
      }
    }
    const double bessel = n / (n - 1.0);
    for (double &g : est.gradient.Data()) g = bessel * (g / n);
  } else {
    Matrix<double> occupancy =
        ExpectedOccupancies(fst, z.Frames(), z.Clusters());
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t t = 0; t < columns[i].size(); ++t) {
        est.gradient(t, columns[i][t]) += losses[i] + offset;
      }
    }
    auto g = est.gradient.Data();
    auto occ = occupancy.Data();
    for (std::size_t k = 0; k < g.size(); ++k) {
      g[k] = g[k] / n - est.loss_mean * occ[k];
    }
  }
  return est;
}

bool LossShiftCheck(const Wfst &fst, const LogitMatrix &z,
                    const LossFunction &loss, const EstimatorOptions &options,
                    double shift) {
  MbrEstimate base = EmbrEstimate(fst, z, loss, options);
  MbrEstimate shifted = EmbrEstimate(fst, z, loss.WithOffset(shift), options);
  auto a = base.gradient.Data();
  auto b = shifted.gradient.Data();
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace embr
