#include "atlasbench/question_pool.hpp"

#include <array>
#include <vector>

#include "atlasbench/random.hpp"

namespace atlasbench {

namespace {

constexpr std::string_view kViews =
    "There are six images captured by the surround view cameras in driving vehicle. They are uniformly "
    "represented as queries embeddings<query>.";

constexpr std::array<std::string_view, 3> kDetectionTails = {
    " Define the positive y-axis as the forward direction and the positive x-axis as the right direction. "
    "Please complete the visual detection task under the Bird's Eye View (BEV) perspective. Ensure that the "
    "detection range does not exceed 50 meters.",
    "  Establish the positive y-axis as the frontward direction and the positive x-axis as the rightward "
    "direction. Kindly execute the visual detection task within the Bird's Eye View (BEV) framework. Be mindful "
    "not to exceed a detection range of 50 meters.",
    " Set the forward direction as the positive y-axis and the right direction as the positive x-axis. Please "
    "carry out the visual detection task within the Bird's Eye View (BEV) context. Ensure that the detection "
    "range remains within 50 meters.",
};

constexpr std::array<std::string_view, 3> kLaneTails = {
    " Please complete the centerline detection task under the Bird's Eye View (BEV) perspective. Ensure that the "
    "detection range does not exceed 50 meters.",
    "   Be mindful not to exceed a detection range of 50 meters.",
    " Could you complete the task of detecting the centerline from the Bird's Eye View (BEV) perspective? Ensure "
    "that the detection range remains within 50 meters.",
};

constexpr std::string_view kPlanningHead =
    "The six images include objects that are uniformly represented as 3D detection query embeddings<query> and "
    "map query embeddings<query>. Define the positive y-axis as the forward direction and the positive x-axis as "
    "the right direction.\n"
    "The speed of the vehicle is defined as [velocity along the x-axis, velocity along the y-axis].\n"
    "The acceleration of the vehicle is defined as [acceleration along the x-axis, acceleration along the "
    "y-axis].\n";

constexpr std::array<std::string_view, 3> kPlanningRequests = {
    "Kindly furnish suitable waypoints for the vehicle's trajectory based on the provided particulars. Waypoints "
    "ought to adhere to the [x, y] format, with each waypoint spaced at 0.5-second intervals within a continuous "
    "3.0-second timeframe.",
    "We request your provision of pertinent waypoints for the vehicle's route in accordance with the given "
    "information. Waypoints should conform to the format [x, y], with spacing set at 0.5-second intervals over a "
    "continuous duration of 3.0 seconds.",
    "Please submit fitting waypoints for the vehicle's course based on the supplied data. Ensure waypoints are "
    "structured as [x, y] and spaced at intervals of 0.5 seconds across a continuous 3.0-second period.",
};

constexpr std::string_view kPlanningTail =
    "\nFor planning tasks, please pay attention to driving safety and avoid vehicle collisions during driving in "
    "continous time.";

constexpr std::string_view kCaptionPrompt =
    "Describe the current traffic conditions. If there are traffic lights in the image, describe the status of "
    "all the traffic lights, including any countdowns; if there are none, please do not respond.  If there are "
    "traffic signs in the picture, identify and explain each one; if there are none, no explanation is "
    "necessary. If there are other vehicles in the picture, describe them in more detail.  Please ensure the "
    "answer does not exceed 600 words. Answers must be in English.";

std::string views_prefix(SlotLayout layout) {
  std::string s(kViews);
  if (layout == SlotLayout::per_view) {
    const auto at = s.find(kQuerySlot);
    std::string six;
    for (int i = 0; i < 6; ++i) six += kQuerySlot;
    s.replace(at, kQuerySlot.size(), six);
  }
  return s;
}

}  // namespace

std::string_view to_string(Task t) {
  switch (t) {
    case Task::detection: return "detection";
    case Task::lane: return "lane";
    case Task::planning: return "planning";
    case Task::caption: return "caption";
  }
  return "detection";
}

std::optional<Task> parse_task(std::string_view name) {
  for (Task t : {Task::detection, Task::lane, Task::planning, Task::caption}) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

std::size_t pool_size(Task task) {
  switch (task) {
    case Task::detection: return kDetectionTails.size();
    case Task::lane: return kLaneTails.size();
    case Task::planning: return kPlanningRequests.size();
    case Task::caption: return 1;
  }
  return 0;
}

std::string_view command_sentence(Command command) {
  switch (command) {
    case Command::go_straight: return "The ego car will go straight in future.";
    case Command::turn_left: return "The ego car will turn left in future.";
    case Command::turn_right: return "The ego car will turn right in future.";
  }
  return "";
}

std::string build_question(Task task, std::uint64_t template_seed, Command command, SlotLayout layout) {
  const std::size_t pick = mix64(template_seed, static_cast<std::uint64_t>(task)) % pool_size(task);
  switch (task) {
    case Task::detection: return views_prefix(layout) + std::string(kDetectionTails[pick]);
    case Task::lane: return views_prefix(layout) + std::string(kLaneTails[pick]);
    case Task::planning:
      return std::string(kPlanningHead) + std::string(command_sentence(command)) + "\n" +
             std::string(kPlanningRequests[pick]) + std::string(kPlanningTail);
    case Task::caption: return std::string(kCaptionPrompt);
  }
  return {};
}

int count_slots(std::string_view text) {
  int n = 0;
  for (auto at = text.find(kQuerySlot); at != std::string_view::npos; at = text.find(kQuerySlot, at + kQuerySlot.size())) {
    ++n;
  }
  return n;
}

}  // namespace atlasbench
