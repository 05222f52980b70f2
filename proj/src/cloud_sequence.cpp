#include "sixdof/cloud_sequence.hpp"

#include <fmt/format.h>

#include "sixdof/error.hpp"
#include "sixdof/ply.hpp"

namespace sixdof {

std::shared_ptr<const CloudSequence> CloudSequence::in_memory(std::vector<PointCloudFrame> frames,
                                                              bool loop) {
  std::shared_ptr<CloudSequence> seq(new CloudSequence());
  seq->loop_ = loop;
  seq->frames_.reserve(frames.size());
  for (auto& f : frames) seq->frames_.push_back(std::make_shared<const PointCloudFrame>(std::move(f)));
  return seq;
}

std::shared_ptr<const CloudSequence> CloudSequence::from_directory(const std::filesystem::path& dir,
                                                                   bool loop) {
  std::shared_ptr<CloudSequence> seq(new CloudSequence());
  seq->loop_ = loop;
  seq->files_ = list_frame_files(dir);
  if (seq->files_.empty()) {
    throw Error(ErrorKind::Io, fmt::format("no .ply frames in '{}'", dir.string()));
  }
  return seq;
}

std::size_t CloudSequence::size() const {
  return files_.empty() ? frames_.size() : files_.size();
}

CloudPtr CloudSequence::at(std::int64_t frame) const {
  const auto n = static_cast<std::int64_t>(size());
  if (frame < 0 || n == 0 || (!loop_ && frame >= n)) {
    throw Error(ErrorKind::MissingFrame,
                fmt::format("content frame {} requested but sequence has {} frames", frame, n));
  }
  const auto slot = static_cast<std::size_t>(frame % n);
  if (files_.empty()) return frames_[slot];
  // Directory frames are read on demand; callers hold the pointer for as long as needed.
  try {
    return std::make_shared<const PointCloudFrame>(frame, read_ply_points(files_[slot]));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidParams) throw Error(ErrorKind::Parse, e.what());
    throw;
  }
}

}  // namespace sixdof
