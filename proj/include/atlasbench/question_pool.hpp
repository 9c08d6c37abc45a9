#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "atlasbench/scene.hpp"

namespace atlasbench {

enum class Task { detection, lane, planning, caption };

std::string_view to_string(Task t);
std::optional<Task> parse_task(std::string_view name);

/// Placeholder marking where 3D-token embeddings are spliced into a question.
inline constexpr std::string_view kQuerySlot = "<query>";

/// unified: one slot for all six camera views; per_view: one slot per view.
enum class SlotLayout { unified, per_view };

/// Number of templates in the embedded pool for `task`.
std::size_t pool_size(Task task);

/// Picks a template deterministically from `template_seed`. Planning questions carry the
/// command sentence; detection and lane questions honour `layout`.
std::string build_question(Task task, std::uint64_t template_seed, Command command = Command::go_straight,
                           SlotLayout layout = SlotLayout::unified);

/// Non-overlapping occurrences of `<query>`.
int count_slots(std::string_view text);

/// "The ego car will turn left in future." and friends.
std::string_view command_sentence(Command command);

}  // namespace atlasbench
