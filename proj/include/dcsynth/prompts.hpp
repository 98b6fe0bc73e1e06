#pragma once

#include <map>
#include <string>
#include <string_view>

namespace dcsynth {

extern const std::string_view kDesignTemplate;   // {assets_lib} {external_inputs} {requirements} {history}
extern const std::string_view kReflectTemplate;  // {requirements} {trajectories} {design}

// Python str.format-style substitution. Throws Error(Validation) on a
// placeholder without a value.
std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& values);

}  // namespace dcsynth
