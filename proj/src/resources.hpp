#pragma once

#include <string_view>

namespace ctrkit::resources {

std::string_view stopwords_en();
std::string_view gazetteer_en();
/// Contents of patterns/<label>.txt, empty for unknown labels.
std::string_view pattern_file(std::string_view label);

}  // namespace ctrkit::resources
