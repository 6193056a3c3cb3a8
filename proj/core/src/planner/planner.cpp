// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#include "storyscene/planner/planner.hpp"

#include <algorithm>
#include <regex>

#include "storyscene/error.hpp"
#include "storyscene/planner/templates.hpp"
#include "storyscene/text.hpp"

namespace storyscene {

namespace {

template <typename F>
auto in_stage(const char* stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const PlanningError&) {
        throw;
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw PlanningError(stage, e.what());
    }
}

std::string strip_enclosing(std::string s) {
    s = trim(s);
    while (s.size() >= 2 && ((s.front() == '[' && s.back() == ']') || (s.front() == '"' && s.back() == '"'))) {
        s = trim(s.substr(1, s.size() - 2));
    }
    return s;
}

std::string clean_story(std::string s) {
    s = trim(s);
    // Trailing ellipses ("......", "…") mark an elided list, not sentence text.
    for (;;) {
        if (s.size() >= 3 && s.compare(s.size() - 3, 3, "\xE2\x80\xA6") == 0) {
            s.resize(s.size() - 3);
        } else if (s.size() >= 2 && s[s.size() - 1] == '.' && s[s.size() - 2] == '.') {
            while (!s.empty() && s.back() == '.') s.pop_back();
        } else {
            break;
        }
        s = trim(s);
    }
    while (s.size() >= 2 && s.front() == '*' && s.back() == '*') s = trim(s.substr(1, s.size() - 2));
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = trim(s.substr(1, s.size() - 2));
    return s;
}

struct Span {
    std::size_t begin;
    std::size_t end;
};

struct RawRegion {
    std::array<std::int64_t, 4> coords;
    Span span;
};

std::vector<RawRegion> find_regions(const std::string& text) {
    static const std::regex re(
        R"(\[\s*(-?\d+)\s*[,\s]\s*(-?\d+)\s*[,\s]\s*(-?\d+)\s*[,\s]\s*(-?\d+)\s*\])"
        R"(|\(?\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*\)?)");
    std::vector<RawRegion> out;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it) {
        const auto& m = *it;
        const int base = m[1].matched ? 1 : 5;
        RawRegion r;
        for (int k = 0; k < 4; ++k) {
            try {
                r.coords[static_cast<std::size_t>(k)] = std::stoll(m[base + k].str());
            } catch (const std::out_of_range&) {
                r.coords[static_cast<std::size_t>(k)] = m[base + k].str()[0] == '-' ? INT64_MIN : INT64_MAX;
            }
        }
        r.span = {static_cast<std::size_t>(m.position(0)), static_cast<std::size_t>(m.position(0) + m.length(0))};
        out.push_back(r);
    }
    return out;
}

struct Marker {
    int number;
    std::size_t begin;  // start of the marker
    std::size_t end;    // start of the item text
};

std::vector<Marker> find_markers(const std::string& text, std::size_t from, std::size_t to) {
    static const std::regex re(R"((^|\s)(\d{1,3})\s*[.)](?!\d))");
    std::vector<Marker> out;
    const auto first = text.begin() + static_cast<std::ptrdiff_t>(from);
    const auto last = text.begin() + static_cast<std::ptrdiff_t>(to);
    for (auto it = std::sregex_iterator(first, last, re); it != std::sregex_iterator(); ++it) {
        const auto& m = *it;
        const std::size_t pos = from + static_cast<std::size_t>(m.position(2));
        out.push_back({std::stoi(m[2].str()), pos, from + static_cast<std::size_t>(m.position(0) + m.length(0))});
    }
    return out;
}

// Items numbered 1, 2, ... (a restart at 1 is accepted when `allow_restart`).
std::vector<std::string> sequential_items(const std::string& text, std::size_t from, std::size_t to,
                                          bool allow_restart) {
    const auto markers = find_markers(text, from, to);
    std::vector<Marker> accepted;
    int expected = 1;
    for (const auto& m : markers) {
        if (m.number == expected || (allow_restart && m.number == 1 && expected > 1)) {
            accepted.push_back(m);
            expected = m.number + 1;
        }
    }
    std::vector<std::string> items;
    for (std::size_t k = 0; k < accepted.size(); ++k) {
        const std::size_t stop = k + 1 < accepted.size() ? accepted[k + 1].begin : to;
        std::string body = text.substr(accepted[k].end, stop - accepted[k].end);
        const std::size_t content = body.find_first_not_of(" \t\r\n");
        if (content != std::string::npos) {
            const std::size_t nl = body.find('\n', content);
            if (nl != std::string::npos) body.resize(nl);
        }
        items.push_back(clean_story(body));
    }
    return items;
}

std::vector<ChatMessage> with_followup(std::vector<ChatMessage> messages, const std::string& reply,
                                       std::string followup) {
    messages.push_back({"assistant", reply, {}});
    messages.push_back({"user", std::move(followup), {}});
    return messages;
}

}  // namespace

ConceptualizeResult conceptualize(const std::string& theme, VlmClient& vlm) {
    if (trim(theme).empty()) throw InputError("conceptualize: empty theme");
    return in_stage("conceptualize", [&] {
        ConceptualizeResult result;
        std::vector<ChatMessage> messages = {{"system", render_conceptualize(theme), {}}, {"user", theme, {}}};
        ChatResult reply = vlm.chat(messages);
        reply.transcript.stage = "conceptualize";
        result.transcripts.push_back(reply.transcript);
        std::string description = strip_enclosing(reply.text);
        if (description.empty()) throw PlanningError("conceptualize", "empty reply from VLM");

        if (word_count(description) > kDescriptionWordLimit) {
            const auto followup = with_followup(
                messages, reply.text,
                "That description has " + std::to_string(word_count(description)) +
                    " words. Rewrite it in no more than " + std::to_string(kDescriptionWordLimit) + " words.");
            ChatResult retry = vlm.chat(followup);
            retry.transcript.stage = "conceptualize";
            result.transcripts.push_back(retry.transcript);
            std::string shorter = strip_enclosing(retry.text);
            if (!shorter.empty()) description = shorter;
            if (word_count(description) > kDescriptionWordLimit) {
                result.warnings.push_back("conceptualize: description truncated from " +
                                          std::to_string(word_count(description)) + " to " +
                                          std::to_string(kDescriptionWordLimit) + " words");
                description = first_words(description, kDescriptionWordLimit);
            }
        }
        result.description = description;
        return result;
    });
}

VisualizeResult visualize(const std::string& description, T2iClient& t2i) {
    if (trim(description).empty()) throw InputError("visualize: empty description");
    return in_stage("visualize", [&] {
        VisualizeResult result;
        ImageResult generated = t2i.generate_image(description);
        result.image = decode_png(generated.png);
        result.png = std::move(generated.png);
        if (result.image.width != kGlobalImageSize || result.image.height != kGlobalImageSize) {
            result.warnings.push_back("visualize: resized " + std::to_string(result.image.width) + "x" +
                                      std::to_string(result.image.height) + " image to 1024x1024");
            result.image = resize_nearest(result.image, kGlobalImageSize, kGlobalImageSize);
            result.png = encode_png(result.image);
        }
        return result;
    });
}

CraftResult parse_craft_reply(const std::string& reply, std::size_t scene_count, std::size_t story_count,
                              std::size_t image_width, std::size_t image_height) {
    const auto regions = find_regions(reply);
    if (regions.size() < scene_count) {
        throw ParseError("expected " + std::to_string(scene_count) + " regions, found " +
                             std::to_string(regions.size()),
                         reply);
    }
    CraftResult result;
    for (std::size_t s = 0; s < scene_count; ++s) {
        const SceneRegion snapped = snap_region(regions[s].coords, image_width, image_height);
        const auto& c = regions[s].coords;
        if (snapped.x1 != c[0] || snapped.y1 != c[1] || snapped.x2 != c[2] || snapped.y2 != c[3]) {
            result.warnings.push_back("craft: region " + std::to_string(s + 1) + " [" + std::to_string(c[0]) +
                                      ", " + std::to_string(c[1]) + ", " + std::to_string(c[2]) + ", " +
                                      std::to_string(c[3]) + "] snapped to [" + std::to_string(snapped.x1) +
                                      ", " + std::to_string(snapped.y1) + ", " + std::to_string(snapped.x2) +
                                      ", " + std::to_string(snapped.y2) + "]");
        }
        result.regions.push_back(snapped);
    }

    // Stories normally follow their own region; fall back to one list chunked per region.
    bool per_region = true;
    std::vector<std::vector<std::string>> stories(scene_count);
    for (std::size_t s = 0; s < scene_count && per_region; ++s) {
        const std::size_t from = regions[s].span.end;
        const std::size_t to = s + 1 < regions.size() ? regions[s + 1].span.begin : reply.size();
        stories[s] = sequential_items(reply, from, to, false);
        per_region = stories[s].size() >= story_count;
    }
    if (!per_region) {
        std::string flat = reply;
        for (const auto& r : regions) std::fill(flat.begin() + r.span.begin, flat.begin() + r.span.end, '\n');
        const auto all = sequential_items(flat, regions.front().span.begin, flat.size(), true);
        if (all.size() < scene_count * story_count) {
            throw ParseError("expected " + std::to_string(story_count) + " stories for each of " +
                                 std::to_string(scene_count) + " regions, found " + std::to_string(all.size()),
                             reply);
        }
        for (std::size_t s = 0; s < scene_count; ++s) {
            stories[s].assign(all.begin() + static_cast<std::ptrdiff_t>(s * story_count),
                              all.begin() + static_cast<std::ptrdiff_t>((s + 1) * story_count));
        }
    }
    for (std::size_t s = 0; s < scene_count; ++s) {
        std::vector<SubPrompt> prompts;
        for (std::size_t k = 0; k < story_count; ++k) {
            if (stories[s][k].empty()) {
                throw ParseError("story " + std::to_string(k + 1) + " of region " + std::to_string(s + 1) +
                                     " is empty",
                                 reply);
            }
            prompts.push_back(SubPrompt::tagged(stories[s][k]));
        }
        result.sub_prompts.push_back(std::move(prompts));
    }
    return result;
}

CraftResult craft(const Image& global_image, const std::vector<std::uint8_t>& global_png,
                  const std::string& theme, VlmClient& vlm, std::size_t scene_count, std::size_t story_count) {
    if (global_image.width == 0 || global_image.height == 0) throw InputError("craft: missing global image");
    if (scene_count < 1 || story_count < 1) throw InputError("craft: scene and story counts must be >= 1");
    return in_stage("craft", [&] {
        std::vector<ChatMessage> messages = {
            {"system", render_craft(theme, global_image.width, global_image.height, scene_count, story_count), {}},
            {"user", "Here is the global scene image.", {ImageAttachment::from_png("global.png", global_png)}}};
        std::vector<ChatTranscript> transcripts;
        ChatResult reply = vlm.chat(messages);
        reply.transcript.stage = "craft";
        transcripts.push_back(reply.transcript);
        CraftResult result;
        try {
            result = parse_craft_reply(reply.text, scene_count, story_count, global_image.width, global_image.height);
        } catch (const ParseError& first) {
            const auto followup = with_followup(
                messages, reply.text,
                std::string("Your reply could not be parsed (") + first.what() +
                    "). Reply again using exactly the requested output format.");
            ChatResult retry = vlm.chat(followup);
            retry.transcript.stage = "craft";
            transcripts.push_back(retry.transcript);
            try {
                result = parse_craft_reply(retry.text, scene_count, story_count, global_image.width,
                                           global_image.height);
            } catch (const ParseError& second) {
                throw ParseError(std::string("craft: ") + second.what(),
                                 "--- reply 1 ---\n" + reply.text + "\n--- reply 2 ---\n" + retry.text);
            }
        }
        result.transcripts = std::move(transcripts);
        return result;
    });
}

JudgeScores parse_judge_reply(const std::string& reply) {
    static const char* const kLabels[3] = {"narrative\\s+coherence", "theme\\s+adherence",
                                           "layout\\s+reasonableness"};
    std::vector<double> values;
    for (const char* label : kLabels) {
        const std::regex re(std::string(label) + R"([^0-9\n]{0,20}?(-?\d+(?:\.\d+)?))", std::regex::icase);
        std::smatch m;
        if (!std::regex_search(reply, m, re)) break;
        values.push_back(std::stod(m[1].str()));
    }
    if (values.size() != 3) {
        values.clear();
        static const std::regex num(R"(-?\d+(?:\.\d+)?)");
        for (auto it = std::sregex_iterator(reply.begin(), reply.end(), num);
             it != std::sregex_iterator() && values.size() < 3; ++it) {
            values.push_back(std::stod(it->str()));
        }
    }
    if (values.size() != 3) throw JudgingError("judge reply does not contain three scores: " + reply);

    static const char* const kNames[3] = {"narrative coherence", "theme adherence", "layout reasonableness"};
    JudgeScores scores;
    double* slots[3] = {&scores.narrative_coherence, &scores.theme_adherence, &scores.layout_reasonableness};
    for (int k = 0; k < 3; ++k) {
        double v = values[static_cast<std::size_t>(k)];
        if (v > 100.0 || v < 0.0) {
            scores.warnings.push_back(std::string("judge: ") + kNames[k] + " score " + std::to_string(v) +
                                      " clamped to [0, 100]");
            v = std::clamp(v, 0.0, 100.0);
        }
        *slots[k] = v / 100.0;
    }
    return scores;
}

JudgeScores judge_plan(const StoryPlan& plan, VlmClient& judge) {
    plan.validate();
    std::vector<ChatMessage> messages = {{"system", render_judge(plan), {}},
                                         {"user", "Please score this plan.", {}}};
    ChatResult reply = judge.chat(messages);
    reply.transcript.stage = "judge";
    std::vector<ChatTranscript> transcripts{reply.transcript};
    JudgeScores scores;
    try {
        scores = parse_judge_reply(reply.text);
    } catch (const JudgingError&) {
        ChatResult retry = judge.chat(with_followup(
            messages, reply.text,
            "Reply with exactly three lines: Narrative Coherence: <score>%, Theme Adherence: <score>%, "
            "Layout Reasonableness: <score>%."));
        retry.transcript.stage = "judge";
        transcripts.push_back(retry.transcript);
        scores = parse_judge_reply(retry.text);
    }
    scores.transcripts = std::move(transcripts);
    return scores;
}

std::string exemplar_conceptualize_reply() {
    return "[A misty forest at dawn, bathed in soft golden light filtering through ancient trees. Delicate ferns "
           "and moss-covered rocks line winding paths, while a serene stream meanders through, reflecting the "
           "sky's pale hues. Birdsong fills the air, and gentle breezes stir the leaves, creating a peaceful, "
           "dreamlike atmosphere.]";
}

std::string exemplar_craft_reply() {
    return "[Location of a local scene]: [18, 8, 506, 499]. 1.A fox explores the meadow, sniffing flowers under "
           "the moonlight. 2.The girl dances among the trees, feeling the magic of the night. 3.An owl perches on "
           "a branch, watching over the serene landscape. 4.A rabbit hops through the grass, seeking shelter for "
           "the night. 5.A deer grazes quietly, enjoying the peaceful evening ......";
}

const std::vector<std::string>& offline_theme_corpus() {
    static const std::vector<std::string> corpus = {
        "Snowy dreams and falling stars",
        "A lighthouse keeper's last summer",
        "Lanterns over the night market",
        "The forgotten greenhouse",
        "Autumn harvest in a hillside village",
        "Whispers of the bamboo forest",
        "A desert caravan at dawn",
        "Rainy afternoons in an old library",
        "The clockmaker's rooftop garden",
        "Tide pools and morning fog",
        "A winter festival by the frozen lake",
        "Fireflies along the riverbank",
    };
    return corpus;
}

}  // namespace storyscene
