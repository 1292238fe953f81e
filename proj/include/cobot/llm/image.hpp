#pragma once

#include <string>

namespace cobot::llm {

enum class Detail { Low, High };

const char* to_string(Detail d);
Detail detail_from_string(const std::string& s);

/// An image attached to a prompt. `payload_ref` is either a file path or a symbolic
/// `sim://` reference used by the simulated workcell.
struct ImageSpec {
    int width = 0;
    int height = 0;
    Detail detail = Detail::High;
    std::string payload_ref;

    bool operator==(const ImageSpec&) const = default;
};

/// Vision-API image cost: 85 tokens flat at low detail; at high detail 85 plus 170 per
/// 512 px tile after downscaling to fit 2048x2048 and then to a short side of at most 768.
int estimate_image_tokens(const ImageSpec& image);

/// `data:` URL carrying the base64 payload. File refs are read from disk; symbolic refs
/// encode the reference text itself.
std::string image_data_url(const ImageSpec& image);

}  // namespace cobot::llm
