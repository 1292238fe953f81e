#include "cobot/llm/image.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/transform_width.hpp>

namespace cobot::llm {

namespace {

constexpr int kBaseTokens = 85;
constexpr int kTileTokens = 170;
constexpr int kTileSize = 512;
constexpr double kMaxLongSide = 2048.0;
constexpr double kMaxShortSide = 768.0;

std::string base64(const std::string& bytes) {
    using namespace boost::archive::iterators;
    using It = base64_from_binary<transform_width<std::string::const_iterator, 6, 8>>;
    std::string out(It(bytes.begin()), It(bytes.end()));
    out.append((3 - bytes.size() % 3) % 3, '=');
    return out;
}

std::string mime_for(const std::filesystem::path& p) {
    auto ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
    if (ext == ".webp") return "image/webp";
    return "image/png";
}

}  // namespace

const char* to_string(Detail d) { return d == Detail::Low ? "low" : "high"; }

Detail detail_from_string(const std::string& s) {
    if (s == "low") return Detail::Low;
    if (s == "high") return Detail::High;
    throw std::invalid_argument("unknown image detail '" + s + "'");
}

int estimate_image_tokens(const ImageSpec& image) {
    if (image.width <= 0 || image.height <= 0) throw std::invalid_argument("image dimensions must be positive");
    if (image.detail == Detail::Low) return kBaseTokens;

    double w = image.width;
    double h = image.height;
    if (double longest = std::max(w, h); longest > kMaxLongSide) {
        w *= kMaxLongSide / longest;
        h *= kMaxLongSide / longest;
    }
    if (double shortest = std::min(w, h); shortest > kMaxShortSide) {
        w *= kMaxShortSide / shortest;
        h *= kMaxShortSide / shortest;
    }
    const auto tiles_w = static_cast<int>(std::ceil(std::floor(w) / kTileSize));
    const auto tiles_h = static_cast<int>(std::ceil(std::floor(h) / kTileSize));
    return kBaseTokens + kTileTokens * tiles_w * tiles_h;
}

std::string image_data_url(const ImageSpec& image) {
    const std::string& ref = image.payload_ref;
    if (ref.rfind("sim://", 0) == 0) return "data:image/png;base64," + base64(ref);

    std::filesystem::path path = ref.rfind("file://", 0) == 0 ? ref.substr(7) : ref;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read image " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return "data:" + mime_for(path) + ";base64," + base64(buf.str());
}

}  // namespace cobot::llm
