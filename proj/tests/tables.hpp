#pragma once

// Hand-built feature tables: users in planted groups with noisy distances and
// overlaps, no geometry involved.

#include <string>
#include <vector>

#include "sixdof/features.hpp"
#include "support.hpp"

namespace testgen {

inline sixdof::FeatureTable grouped_table(Rng& rng, std::size_t users, std::size_t groups,
                                          std::size_t frames, const std::string& id = "c") {
  std::vector<std::string> ids;
  for (std::size_t u = 0; u < users; ++u) ids.push_back("u" + std::to_string(u));
  std::vector<sixdof::FrameFeatures> out;
  for (std::size_t f = 0; f < frames; ++f) {
    sixdof::FrameFeatures ff;
    ff.frame = static_cast<std::int64_t>(f);
    for (std::size_t i = 0; i < users; ++i) {
      for (std::size_t j = i + 1; j < users; ++j) {
        const bool same = i % groups == j % groups;
        sixdof::PairFeatures p;
        p.has_x = true;
        p.has_pr = uniform(rng) > 0.05;
        p.has_gp = p.has_pr;
        p.ex = same ? uniform(rng, 0.0, 0.8) : uniform(rng, 0.5, 4.0);
        if (p.has_pr) {
          p.ri = uniform(rng, 0.8, 2.5);
          p.rj = uniform(rng, 0.8, 2.5);
          p.dr = std::abs(p.ri - p.rj);
          p.ep = same ? uniform(rng, 0.0, 0.6) : uniform(rng, 0.3, 2.0);
          p.gp = p.ep * uniform(rng, 1.0, 1.5);
        }
        ff.pairs.push_back(p);
        ff.overlap.push_back(same ? uniform(rng, 0.6, 1.0) : uniform(rng, 0.0, 0.8));
      }
    }
    out.push_back(std::move(ff));
  }
  return sixdof::FeatureTable(id, ids, 30.0, std::move(out), true, true);
}

}  // namespace testgen
