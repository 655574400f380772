#pragma once

#include <functional>
#include <string>

namespace hwdyn {

/// Receives non-fatal warnings (undefined metrics, weak stratification).
/// The default handler prints "warning: <msg>" to stderr.
using WarningHandler = std::function<void(const std::string&)>;

void set_warning_handler(WarningHandler handler);
void warn(const std::string& message);

}  // namespace hwdyn
