#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "dsotto/parallel.hpp"
#include "dsotto/spectrum.hpp"
#include "dsotto/thermostatics.hpp"

namespace dsotto {

// Insert-once cache of spectra keyed by the full parameter point. Two workers may compute the
// same entry concurrently; the first insertion wins and both get an identical result.
class SpectrumCache {
 public:
  std::shared_ptr<const Spectrum> get(const ModelParams& p, const BasisConfig& b,
                                      const DiagonalizeOptions& opt) {
    const Key key{p, b, opt.eigenvectors, opt.certify, opt.n_kept};
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = map_.find(key);
      if (it != map_.end()) return it->second;
    }
    auto s = std::make_shared<const Spectrum>(diagonalize(p, b, opt));
    std::lock_guard<std::mutex> lock(mu_);
    return map_.emplace(key, std::move(s)).first->second;
  }
  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return map_.size();
  }
  std::vector<std::shared_ptr<const Spectrum>> snapshot() const {
    std::lock_guard<std::mutex> lock(mu_);
    std::vector<std::shared_ptr<const Spectrum>> out;
    for (const auto& [k, v] : map_) out.push_back(v);
    return out;
  }

 private:
  using Key = std::tuple<ModelParams, BasisConfig, bool, bool, int>;
  mutable std::mutex mu_;
  std::map<Key, std::shared_ptr<const Spectrum>> map_;
};

enum class SweepVar { Lambda, U, U2, U4, THot, TCold, NAtoms };

inline std::string to_string(SweepVar v) {
  switch (v) {
    case SweepVar::Lambda: return "lambda";
    case SweepVar::U: return "u";
    case SweepVar::U2: return "u2";
    case SweepVar::U4: return "u4";
    case SweepVar::THot: return "t_hot";
    case SweepVar::TCold: return "t_cold";
    default: return "n_atoms";
  }
}

struct GridAxis {
  SweepVar var = SweepVar::Lambda;
  std::vector<double> values;

  // count evenly spaced points including both ends; values are computed as
  // start + i * step so that they are reproducible bit-for-bit.
  static GridAxis linspace(SweepVar v, double start, double stop, int count) {
    GridAxis a{v, {}};
    if (count == 1) {
      a.values.push_back(start);
      return a;
    }
    const double step = (stop - start) / (count - 1);
    for (int i = 0; i < count; ++i) a.values.push_back(i + 1 == count ? stop : start + i * step);
    return a;
  }
};

inline void apply(QuasistaticCycleSpec& s, SweepVar v, double x) {
  switch (v) {
    case SweepVar::Lambda: s.leg.lambda = x; break;
    case SweepVar::U: s.u_expansion = s.u_compression = x; break;
    case SweepVar::U2: s.u_expansion = x; break;
    case SweepVar::U4: s.u_compression = x; break;
    case SweepVar::THot: s.t_hot = x; break;
    case SweepVar::TCold: s.t_cold = x; break;
    case SweepVar::NAtoms: s.leg.n_atoms = int(std::lround(x)); break;
  }
}

struct SweepRow {
  std::vector<double> coords;
  std::optional<QuasistaticReport> report;
  std::string error;  // empty on success
};

// Cartesian product of the axes, first axis outermost. Rows come back in grid order no matter
// how many workers ran; failures are recorded per row.
inline std::vector<std::vector<double>> grid_points(const std::vector<GridAxis>& axes) {
  std::vector<std::vector<double>> pts{{}};
  for (const auto& ax : axes) {
    std::vector<std::vector<double>> next;
    for (const auto& p : pts)
      for (double x : ax.values) {
        auto q = p;
        q.push_back(x);
        next.push_back(std::move(q));
      }
    pts = std::move(next);
  }
  return pts;
}

inline std::vector<SweepRow> sweep(const std::vector<GridAxis>& axes,
                                   const QuasistaticCycleSpec& tmpl, SpectrumCache& cache,
                                   int workers = 0, bool certify = true) {
  const auto pts = grid_points(axes);
  std::vector<SweepRow> rows(pts.size());
  const DiagonalizeOptions opt{.eigenvectors = false, .certify = certify};
  parallel_for(pts.size(), workers, [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.coords = pts[i];
    try {
      QuasistaticCycleSpec s = tmpl;
      for (std::size_t a = 0; a < axes.size(); ++a) apply(s, axes[a].var, pts[i][a]);
      s.validate();
      const auto hot = cache.get(s.hot(), s.basis, opt);
      const auto cold = cache.get(s.cold(), s.basis, opt);
      row.report = quasistatic_cycle(*hot, *cold, s);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  return rows;
}

}  // namespace dsotto
