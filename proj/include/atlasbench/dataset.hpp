#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "atlasbench/qa_codec.hpp"
#include "atlasbench/question_pool.hpp"
#include "atlasbench/scene.hpp"

namespace atlasbench {

struct QaPair {
  Task task = Task::planning;
  std::string question;
  std::string answer;
  std::string scene_id;
  int frame = 0;
  std::optional<ChainSpec> chain;  // planning pairs only

  friend bool operator==(const QaPair&, const QaPair&) = default;
};

struct DatasetOptions {
  std::vector<Task> tasks{Task::planning};
  ChainSpec chain;
  SlotLayout layout = SlotLayout::unified;
  std::uint64_t seed = 0;
};

/// Frames of `scene` that yield a pair for `task`: every frame for perception and caption
/// tasks, frames with full history and future for planning.
std::vector<int> usable_frames(const Scene& scene, Task task);

/// Pairs for one frame and task.
QaPair make_pair(const Scene& scene, int frame, Task task, const DatasetOptions& options);

/// Ordered by (scene, frame, task); deterministic for fixed options.
std::vector<QaPair> build_dataset(const std::vector<Scene>& scenes, const DatasetOptions& options);

void write_qa_jsonl(const std::vector<QaPair>& pairs, std::ostream& out);
/// Throws DataError naming the first malformed line.
std::vector<QaPair> read_qa_jsonl(std::istream& in);

void export_dataset(const std::vector<QaPair>& pairs, const std::filesystem::path& path);
std::vector<QaPair> import_dataset(const std::filesystem::path& path);

}  // namespace atlasbench
