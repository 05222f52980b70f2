#pragma once

#include <filesystem>
#include <memory>
#include <vector>

#include "sixdof/geometry.hpp"

namespace sixdof {

using CloudPtr = std::shared_ptr<const PointCloudFrame>;

// Frame-indexed access to the content, either held in memory or read lazily
// from a directory of PLY files. Safe to query from several threads.
class CloudSequence {
 public:
  static std::shared_ptr<const CloudSequence> in_memory(std::vector<PointCloudFrame> frames,
                                                        bool loop = false);
  static std::shared_ptr<const CloudSequence> from_directory(const std::filesystem::path& dir,
                                                             bool loop = false);

  std::size_t size() const;
  bool loops() const { return loop_; }

  // Cloud shown at content frame `frame`. Throws MissingFrame past the end
  // unless the sequence loops.
  CloudPtr at(std::int64_t frame) const;

 private:
  CloudSequence() = default;

  std::vector<CloudPtr> frames_;
  std::vector<std::filesystem::path> files_;
  bool loop_ = false;
};

}  // namespace sixdof
