#include "cobot/detection/prompt.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace cobot::detection {

namespace {

constexpr const char* kSystemText =
    "You are the vision module of a robot-assisted assembly cell.\n"
    "The first image is the component list: every component of the product with its number and the "
    "components that must be mounted before it.\n"
    "The remaining images show the workbench right now, seen from different cameras.\n"
    "For each question decide whether that component is already mounted on the assembly in at least one "
    "of the workbench images. A component lying loose on the bench or in the magazine is not mounted.\n"
    "Answer every question with YES or NO only, one line per component, in the form "
    "'<number> (<name>): YES' or '<number> (<name>): NO', and nothing else.";

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

bool bounded(const std::string& s, std::size_t pos, std::size_t len) {
    return (pos == 0 || !is_word_char(s[pos - 1])) && (pos + len >= s.size() || !is_word_char(s[pos + len]));
}

struct Ref {
    std::size_t pos = std::string::npos;
    ComponentId id = 0;
};

// Earliest standalone integer within 1..n. Digits glued to other alphanumerics ("680x480")
// are not references.
Ref first_number_ref(const std::string& seg, int n) {
    for (std::size_t i = 0; i < seg.size();) {
        if (!std::isdigit(static_cast<unsigned char>(seg[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < seg.size() && std::isdigit(static_cast<unsigned char>(seg[j]))) ++j;
        bool glued = (i > 0 && std::isalpha(static_cast<unsigned char>(seg[i - 1]))) ||
                     (j < seg.size() && std::isalpha(static_cast<unsigned char>(seg[j])));
        if (!glued && j - i <= 4) {
            int v = std::stoi(seg.substr(i, j - i));
            if (v >= 1 && v <= n) return {i, v};
        }
        i = j;
    }
    return {};
}

// Earliest catalog name; at equal positions the longer name wins ("tail wing" over "wing").
Ref first_name_ref(const std::string& seg, const ComponentCatalog& catalog) {
    Ref best;
    std::size_t best_len = 0;
    for (const auto& c : catalog.components()) {
        std::string name = lower(c.name);
        std::vector<std::string> forms{name};
        if (name.size() > 3 && name.back() == 's') forms.push_back(name.substr(0, name.size() - 1));
        for (const auto& form : forms) {
            for (auto p = seg.find(form); p != std::string::npos; p = seg.find(form, p + 1)) {
                if (!bounded(seg, p, form.size())) continue;
                if (p < best.pos || (p == best.pos && form.size() > best_len)) {
                    best = {p, c.id};
                    best_len = form.size();
                }
                break;
            }
        }
    }
    return best;
}

bool has_token(const std::string& seg, const std::string& token) {
    for (auto p = seg.find(token); p != std::string::npos; p = seg.find(token, p + 1))
        if (bounded(seg, p, token.size())) return true;
    return false;
}

std::vector<std::string> split_segments(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) out.push_back(cur);
        cur.clear();
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        const bool sentence_end = c == '.' && (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1]))) &&
                                  !(i > 0 && std::isdigit(static_cast<unsigned char>(text[i - 1])));
        if (c == '\n' || c == ';' || c == ',') {
            flush();
        } else if (sentence_end) {
            flush();
        } else {
            cur += c;
        }
    }
    flush();
    return out;
}

}  // namespace

llm::PromptBundle build_detection_prompt(const ComponentCatalog& catalog, const llm::ImageSpec& catalog_image,
                                         const std::vector<llm::ImageSpec>& scene_images,
                                         const std::optional<DetectionReport>& prior) {
    if (catalog.size() == 0) throw DetectionError(DetectionError::Kind::EmptyCatalog, {}, "empty catalog");
    if (scene_images.empty()) throw std::invalid_argument("detection prompt needs at least one scene image");

    llm::PromptBundle bundle;
    bundle.system_text = kSystemText;

    // Fixed example: the starting state with only the operator-placed parts mounted.
    ComponentSet example_present;
    for (ComponentId id : catalog.operator_start_order()) example_present.insert(id);
    if (example_present.empty()) example_present.insert(1);
    bundle.assistant_example = serialize_report(make_report(example_present, catalog, Source::Llm), catalog);

    if (prior) bundle.prior_detection = "Components mounted at the previous step:\n" + serialize_report(*prior, catalog);

    llm::ImageSpec list_image = catalog_image;
    list_image.detail = llm::Detail::High;

    std::ostringstream views;
    views << "Image 1 is the component list. ";
    if (scene_images.size() == 1) {
        views << "Image 2 is the current workbench.";
    } else if (scene_images.size() == 2) {
        views << "Images 2 and 3 are the current workbench seen from two cameras.";
    } else {
        views << "Images 2 to " << scene_images.size() + 1 << " are the current workbench from different cameras.";
    }

    for (const auto& c : catalog.components()) {
        llm::UserItem item;
        std::ostringstream q;
        if (c.id == catalog.components().front().id) {
            q << views.str() << "\n";
            item.images.push_back(list_image);
            item.images.insert(item.images.end(), scene_images.begin(), scene_images.end());
        }
        q << "Is component " << c.id << " (" << c.name
          << ") mounted on the assembly in any of the workbench images? Answer YES or NO.";
        item.text = q.str();
        bundle.user_items.push_back(std::move(item));
    }
    return bundle;
}

DetectionReport parse_detection_response(const std::string& text, const ComponentCatalog& catalog) {
    const int n = static_cast<int>(catalog.size());
    std::map<ComponentId, std::set<Verdict>> answers;

    for (const auto& raw : split_segments(text)) {
        std::string seg = lower(raw);
        const bool yes = has_token(seg, "yes");
        const bool no = has_token(seg, "no");
        if (!yes && !no) continue;

        Ref num = first_number_ref(seg, n);
        Ref name = first_name_ref(seg, catalog);
        Ref key = num.pos <= name.pos ? num : name;
        if (key.pos == std::string::npos) continue;

        if (yes) answers[key.id].insert(Verdict::Present);
        if (no) answers[key.id].insert(Verdict::Absent);
    }

    if (answers.empty())
        throw DetectionError(DetectionError::Kind::UnparseableResponse, {}, "no component answers found in response");

    for (const auto& [id, vs] : answers) {
        if (vs.size() > 1)
            throw DetectionError(DetectionError::Kind::AmbiguousAnswer, {id},
                                 "component " + std::to_string(id) + " answered both YES and NO");
    }

    std::vector<ComponentId> missing;
    DetectionReport report;
    report.source = Source::Llm;
    report.raw_text = text;
    for (const auto& c : catalog.components()) {
        auto it = answers.find(c.id);
        if (it == answers.end()) {
            missing.push_back(c.id);
            continue;
        }
        report.verdicts[c.id] = *it->second.begin();
    }
    if (!missing.empty()) {
        std::string ids;
        for (auto id : missing) ids += (ids.empty() ? "" : ", ") + std::to_string(id);
        throw DetectionError(DetectionError::Kind::MissingComponentAnswer, missing, "no answer for components " + ids);
    }
    return report;
}

}  // namespace cobot::detection
