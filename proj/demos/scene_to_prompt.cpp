// Builds a scene document by hand, then shows what the prompt compiler does
// with it at each extraction granularity.

#include <iostream>

#include "visucraft/visucraft.hpp"

using namespace visucraft;

int main() {
    svi::SviDocument scene;
    scene.level = svi::GranularityLevel::L3;
    scene.objects = {
        {"willow", {"ancient", "leaning"}, std::nullopt, {"tree"}},
        {"river", {"slow", "dark"}, std::nullopt, {}},
        {"heron", {"solitary"}, "wading in the shallows", {}},
    };
    scene.relations = {
        {"willow", "leaning over", "river"},
        {"heron", "standing in", "river"},
    };
    scene.lighting = "late summer dusk";
    scene.palette = {"olive green", "pewter"};
    scene.atmosphere = "patience";
    scene.implied_narrative = "the river keeping an old appointment with the sea";
    scene.source = svi::SviSource::Fixture;

    const auto report = svi::validate(scene);
    if (!report.ok()) {
        std::cerr << "invalid scene: " << report.to_string() << "\n";
        return 1;
    }

    std::cout << "canonical form:\n" << svi::serialize_canonical(scene) << "\n\n";

    const auto instruction = prompt::make_instruction(
        "Write a calm poem about patience and rivers, at least 3 lines.");
    std::cout << "task: " << prompt::to_string(instruction.task) << "\n\n";

    for (const auto level : {svi::GranularityLevel::L1, svi::GranularityLevel::L2,
                             svi::GranularityLevel::L3}) {
        const auto coarse = svi::downgrade(scene, level);
        const auto compiled = prompt::compile(coarse, instruction);
        std::cout << "--- " << svi::to_string(level) << " ("
                  << svi::salient_elements(coarse).size() << " salient elements, prompt hash "
                  << compiled.hash_hex() << ")\n";
        std::cout << compiled.render() << "\n\n";
    }
    return 0;
}
