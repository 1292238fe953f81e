#pragma once

#include <vector>

#include "cobot/domain/catalog.hpp"
#include "cobot/llm/image.hpp"

namespace cobot {

/// What the cameras see at one instant: the physically assembled set plus the image
/// references handed to vision backends (top and side views in the reference cell).
struct SceneSnapshot {
    ComponentSet view;
    std::vector<llm::ImageSpec> images;
    double clock = 0.0;
};

}  // namespace cobot
