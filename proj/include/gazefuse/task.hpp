#pragma once

#include <string>
#include <string_view>

namespace gazefuse {

/// Behaviour a classifier detects. Each task gets an independently trained model.
enum class Task : unsigned char { MutualGaze = 0, JointAttention = 1 };

/// "MG" / "JA".
std::string to_string(Task task);

/// Accepts MG/JA in any letter case; throws InputError otherwise.
Task parse_task(std::string_view text);

/// Head-camera identity. The infant camera is the reference clock.
enum class View : unsigned char { Infant = 0, Parent = 1 };

std::string to_string(View view);
View parse_view(std::string_view text);

}  // namespace gazefuse
