#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cobot/detection/report.hpp"
#include "cobot/llm/prompt_bundle.hpp"

namespace cobot::detection {

/// One YES/NO question per component in a single request. The catalog image and every
/// scene image ride on the first question; a prior report, if any, goes back through
/// the assistant role.
llm::PromptBundle build_detection_prompt(const ComponentCatalog& catalog, const llm::ImageSpec& catalog_image,
                                         const std::vector<llm::ImageSpec>& scene_images,
                                         const std::optional<DetectionReport>& prior);

/// Total over arbitrary text: returns a complete report or throws DetectionError.
DetectionReport parse_detection_response(const std::string& text, const ComponentCatalog& catalog);

}  // namespace cobot::detection
