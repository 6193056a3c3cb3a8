// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#include <limits>
#include <random>

#include <doctest.h>

#include "storyscene/clients/mock_clients.hpp"
#include "storyscene/error.hpp"
#include "storyscene/image.hpp"
#include "storyscene/planner/planner.hpp"
#include "storyscene/planner/templates.hpp"
#include "storyscene/text.hpp"

using namespace storyscene;

namespace {

std::string golden(const std::string& name) {
    std::string s = read_text_file(std::string(STORYSCENE_GOLDEN_DIR) + "/" + name);
    if (!s.empty() && s.back() == '\n') s.pop_back();
    return s;
}

class BrokenVlm final : public VlmClient {
public:
    ChatResult chat(const std::vector<ChatMessage>&) override { throw TransportError("connection refused", ""); }
    std::string model_id() const override { return "broken"; }
};

std::string long_text(std::size_t words) {
    std::string s;
    for (std::size_t i = 0; i < words; ++i) s += (i ? " " : "") + std::string("word") + std::to_string(i);
    return s;
}

}  // namespace

TEST_CASE("rendered prompts match the golden files") {
    CHECK(render_conceptualize(kExemplarTheme) == golden("conceptualize_snowy.txt"));
    CHECK(render_craft(kExemplarTheme, 1024, 1024, 4, 5) == golden("craft_snowy_1024_m4_n5.txt"));
    CHECK(render_craft("A lighthouse at the edge of the world", 768, 512, 3, 2) ==
          golden("craft_lighthouse_768x512_m3_n2.txt"));
}

TEST_CASE("render_template") {
    CHECK(render_template("a {x} b {y} {z}", {{"x", "1"}, {"y", "{x}"}}) == "a 1 b {x} {z}");
    CHECK_THROWS_AS(render_template("a {x}", {{"x", "1"}, {"q", "2"}}), InputError);
    CHECK(judge_template().find("{theme}") != std::string_view::npos);
}

TEST_CASE("snap_region examples") {
    CHECK(snap_region(18, 8, 506, 499, 1024, 1024) == SceneRegion{18, 8, 506, 499});
    CHECK(snap_region(-40, -5, 2000, 600, 1024, 1024) == SceneRegion{0, 0, 1024, 600});
    CHECK(snap_region(2000, 2000, 2100, 2100, 1024, 1024) == SceneRegion{960, 960, 1024, 1024});
    CHECK(snap_region(500, 10, 400, 300, 1024, 1024) == SceneRegion{418, 10, 482, 300});
    CHECK(snap_region(0, 0, 10, 10, 32, 32) == SceneRegion{0, 0, 10, 10});
    CHECK(snap_region(5, 5, 5, 5, 32, 32) == SceneRegion{0, 0, 32, 32});
    CHECK_THROWS_AS(snap_region(0, 0, 1, 1, 0, 10), InputError);
}

TEST_CASE("snap_region is idempotent and in bounds") {
    std::mt19937_64 rng(99);
    const std::int64_t extremes[] = {std::numeric_limits<std::int64_t>::min(), -1, 0, 1, 63, 64, 1023, 1024, 1025,
                                     std::numeric_limits<std::int64_t>::max()};
    std::uniform_int_distribution<std::int64_t> wide(-5000, 5000);
    std::uniform_int_distribution<int> pick(0, 9);
    std::uniform_int_distribution<std::size_t> dim(1, 2048);
    for (int trial = 0; trial < 10000; ++trial) {
        std::array<std::int64_t, 4> q;
        for (auto& v : q) v = pick(rng) < 3 ? extremes[pick(rng)] : wide(rng);
        const std::size_t w = trial % 3 ? 1024 : dim(rng), h = trial % 3 ? 1024 : dim(rng);
        const SceneRegion r = snap_region(q, w, h);
        REQUIRE(r.valid_for(w, h));
        REQUIRE(snap_region(r.x1, r.y1, r.x2, r.y2, w, h) == r);
    }
}

TEST_CASE("crop_regions copies the exact pixel window") {
    const Image g = gradient_image(64, 48);
    const auto crops = crop_regions(g, {SceneRegion{10, 5, 30, 25}, SceneRegion{0, 0, 64, 48}});
    REQUIRE(crops[0].width == 20);
    REQUIRE(crops[0].height == 20);
    for (std::size_t y = 0; y < 20; ++y)
        for (std::size_t x = 0; x < 20; ++x)
            for (std::size_t c = 0; c < 3; ++c) REQUIRE(crops[0].at(x, y, c) == g.at(x + 10, y + 5, c));
    CHECK(crops[1].pixels == g.pixels);
    CHECK_THROWS(crop_regions(g, {SceneRegion{0, 0, 65, 10}}));
}

TEST_CASE("IoU") {
    CHECK(intersection_over_union({0, 0, 10, 10}, {0, 0, 10, 10}) == 1.0);
    CHECK(intersection_over_union({0, 0, 10, 10}, {10, 0, 20, 10}) == 0.0);
    CHECK(intersection_over_union({0, 0, 10, 10}, {5, 0, 15, 10}) == doctest::Approx(50.0 / 150.0));
    CHECK(max_pairwise_iou({{0, 0, 10, 10}, {5, 0, 15, 10}, {100, 100, 110, 110}}) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("subject tagging") {
    CHECK(tag_subject_token("A fox explores the meadow") == 1);
    CHECK(tag_subject_token("The girl dances") == 1);
    CHECK(tag_subject_token("an owl perches") == 1);
    CHECK(tag_subject_token("Foxes run") == 0);
    CHECK(SubPrompt::tagged("The deer grazes").subject_token_index == 1);
}

TEST_CASE("parse the exemplar craft reply") {
    const CraftResult r = parse_craft_reply(exemplar_craft_reply(), 1, 5, 1024, 1024);
    REQUIRE(r.regions.size() == 1);
    CHECK(r.regions[0] == SceneRegion{18, 8, 506, 499});
    REQUIRE(r.sub_prompts[0].size() == 5);
    CHECK(r.sub_prompts[0][0].text == "A fox explores the meadow, sniffing flowers under the moonlight.");
    CHECK(r.sub_prompts[0][1].text == "The girl dances among the trees, feeling the magic of the night.");
    CHECK(r.sub_prompts[0][4].text == "A deer grazes quietly, enjoying the peaceful evening");
    CHECK(r.sub_prompts[0][4].subject_token_index == 1);
    CHECK(r.warnings.empty());
    CHECK_THROWS_AS(parse_craft_reply(exemplar_craft_reply(), 4, 5, 1024, 1024), ParseError);
}

TEST_CASE("parse multi-scene replies with mixed numbering") {
    const std::string reply =
        "Sub-scene 1: [0, 0, 600, 500]\n1) A cat naps on the sill.\n2) The boy reads by the lamp.\n"
        "Sub-scene 2: 500, 400, 1100, 1000\n1. An owl hoots at midnight.\n2. A girl counts the stars.\n";
    const CraftResult r = parse_craft_reply(reply, 2, 2, 1024, 1024);
    CHECK(r.regions[0] == SceneRegion{0, 0, 600, 500});
    CHECK(r.regions[1] == SceneRegion{500, 400, 1024, 1000});
    CHECK(r.warnings.size() == 1);
    CHECK(r.sub_prompts[1][1].text == "A girl counts the stars.");
    CHECK_THROWS_AS(parse_craft_reply(reply, 2, 3, 1024, 1024), ParseError);
}

TEST_CASE("conceptualize strips brackets from the exemplar reply") {
    MockVlmClient vlm;
    vlm.queue_reply(exemplar_conceptualize_reply());
    const auto r = conceptualize(kExemplarTheme, vlm);
    CHECK(r.description.rfind("A misty forest at dawn", 0) == 0);
    CHECK(r.description.back() == '.');
    CHECK(word_count(r.description) <= 50);
    CHECK(r.transcripts.size() == 1);
    CHECK(r.transcripts[0].messages[0].text == render_conceptualize(kExemplarTheme));
    CHECK(r.transcripts[0].roles_valid());
    CHECK(vlm.call_count() == 1);
}

TEST_CASE("conceptualize re-prompts once then truncates") {
    MockVlmClient vlm;
    vlm.queue_reply(long_text(70));
    vlm.queue_reply(long_text(40));
    auto r = conceptualize("theme", vlm);
    CHECK(word_count(r.description) == 40);
    CHECK(r.warnings.empty());
    CHECK(r.transcripts.size() == 2);

    vlm.queue_reply(long_text(70));
    vlm.queue_reply(long_text(60));
    r = conceptualize("theme", vlm);
    CHECK(word_count(r.description) == 50);
    CHECK(r.warnings.size() == 1);
    CHECK_THROWS_AS(conceptualize("  ", vlm), InputError);
}

TEST_CASE("client failures surface as planning errors with the stage") {
    BrokenVlm vlm;
    try {
        conceptualize("theme", vlm);
        FAIL("expected PlanningError");
    } catch (const PlanningError& e) {
        CHECK(e.stage() == "conceptualize");
    }
}

TEST_CASE("visualize resizes to the global size") {
    MockT2iClient small(512, 256);
    const auto r = visualize("a quiet harbour", small);
    CHECK(r.image.width == 1024);
    CHECK(r.image.height == 1024);
    CHECK(r.warnings.size() == 1);
    MockT2iClient full;
    CHECK(visualize("a quiet harbour", full).warnings.empty());
}

TEST_CASE("craft re-prompts once on an unparseable reply") {
    MockT2iClient t2i;
    const auto v = visualize("a quiet harbour", t2i);
    MockVlmClient vlm;
    vlm.queue_reply("I cannot see any image.");
    const auto r = craft(v.image, v.png, "harbour tales", vlm, 4, 5);
    CHECK(r.regions.size() == 4);
    CHECK(r.transcripts.size() == 2);
    CHECK(r.transcripts[0].messages[1].images.size() == 1);

    vlm.queue_reply("nothing");
    vlm.queue_reply("still nothing");
    CHECK_THROWS_AS(craft(v.image, v.png, "harbour tales", vlm, 4, 5), ParseError);
}

TEST_CASE("judge reply parsing") {
    auto s = parse_judge_reply("Narrative Coherence: 85%\nTheme Adherence: 90%\nLayout Reasonableness: 72.5%");
    CHECK(s.narrative_coherence == doctest::Approx(0.85));
    CHECK(s.theme_adherence == doctest::Approx(0.90));
    CHECK(s.layout_reasonableness == doctest::Approx(0.725));
    s = parse_judge_reply("scores 70, 80 and 140");
    CHECK(s.layout_reasonableness == 1.0);
    CHECK(s.warnings.size() == 1);
    CHECK_THROWS_AS(parse_judge_reply("no numbers"), JudgingError);
}

TEST_CASE("mock end-to-end planning stages compose") {
    MockVlmClient vlm;
    MockT2iClient t2i;
    const auto c = conceptualize(kExemplarTheme, vlm);
    const auto v = visualize(c.description, t2i);
    const auto r = craft(v.image, v.png, kExemplarTheme, vlm, 4, 5);
    StoryPlan plan{kExemplarTheme, c.description, {"global.png", 1024, 1024, "x"}, r.regions, r.sub_prompts, {}};
    CHECK_NOTHROW(plan.validate());
    CHECK(max_pairwise_iou(plan.regions) < 0.1);
    const auto scores = judge_plan(plan, vlm);
    CHECK(scores.narrative_coherence > 0.0);
    CHECK(scores.narrative_coherence <= 1.0);
}
