#include "gazefuse/task.hpp"

#include <algorithm>
#include <cctype>

#include "gazefuse/error.hpp"

namespace gazefuse {

namespace {
std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}
}  // namespace

std::string to_string(Task task) { return task == Task::MutualGaze ? "MG" : "JA"; }

Task parse_task(std::string_view text) {
  const auto t = lower(text);
  if (t == "mg") return Task::MutualGaze;
  if (t == "ja") return Task::JointAttention;
  throw InputError("unknown task '" + std::string(text) + "' (expected MG or JA)");
}

std::string to_string(View view) { return view == View::Infant ? "infant" : "parent"; }

View parse_view(std::string_view text) {
  const auto t = lower(text);
  if (t == "infant") return View::Infant;
  if (t == "parent") return View::Parent;
  throw InputError("unknown view '" + std::string(text) + "' (expected infant or parent)");
}

}  // namespace gazefuse
