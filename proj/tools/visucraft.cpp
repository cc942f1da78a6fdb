#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "visucraft/config.hpp"
#include "visucraft/harness.hpp"
#include "visucraft/metrics.hpp"
#include "visucraft/svi.hpp"

namespace {

std::string slurp(const std::filesystem::path& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw visucraft::ConfigError(std::string("cannot read ") + what + ": " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct RunArgs {
    std::string manifest;
    std::vector<std::string> arms;
    std::vector<std::string> levels;
    std::string backend_mode;
    std::string config_path;
    std::string out_dir;
};

int do_run(const RunArgs& args) {
    namespace fs = std::filesystem;
    using visucraft::config::RunConfig;

    RunConfig cfg;
    if (!args.config_path.empty()) cfg = visucraft::config::load_config(args.config_path);
    if (!args.backend_mode.empty()) {
        cfg.backend.mode = visucraft::backend::backend_mode_from_string(args.backend_mode);
    }
    if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;

    const fs::path manifest_path = args.manifest;
    const auto entries = visucraft::harness::load_manifest(manifest_path);

    // Out-of-the-box layout: fixtures and corpus live next to the manifest.
    if (cfg.extractor.mode == visucraft::extract::ExtractorMode::Fixture &&
        !cfg.extractor.fixture_dir) {
        cfg.extractor.fixture_dir = manifest_path.parent_path() / "fixtures";
    }
    if (!cfg.corpus_dir) {
        const auto candidate = manifest_path.parent_path() / "corpus";
        if (fs::is_directory(candidate)) cfg.corpus_dir = candidate;
    }

    std::vector<visucraft::config::PipelineArm> arms;
    for (const auto& name : args.arms) arms.push_back(visucraft::config::arm_from_string(name));
    if (arms.empty()) arms.push_back(cfg.arm);
    std::vector<visucraft::svi::GranularityLevel> levels;
    for (const auto& name : args.levels) levels.push_back(visucraft::svi::level_from_string(name));
    if (levels.empty()) levels.push_back(cfg.granularity);

    const visucraft::harness::PipelineRunner runner(std::move(cfg));
    const auto result = runner.run_suite(entries, arms, levels);

    for (const auto& record : result.records) {
        if (record.ok()) continue;
        std::cerr << record.id << " [" << visucraft::config::to_string(record.arm) << "/"
                  << visucraft::svi::to_string(record.level)
                  << "] failed: " << record.error.value_or("unknown error") << "\n";
    }
    const auto& out = runner.config().output_dir;
    std::cout << "ran " << result.records.size() << " jobs, " << result.failed << " failed\n";
    std::cout << "records: " << (out / "records").string() << "\n";
    std::cout << "reports: " << (out / "reports").string() << "\n";
    for (const auto& [name, table] : result.tables) {
        std::cout << "\n" << table.render_text();
    }
    return result.failed == 0 ? 0 : 1;
}

int do_score(const std::string& text_path, const std::string& svi_path,
             const std::string& instruction) {
    const auto text = slurp(text_path, "text file");
    const auto doc = visucraft::svi::parse(slurp(svi_path, "scene file"));
    const auto scores = visucraft::metrics::score(text, doc, instruction);
    nlohmann::ordered_json out;
    out["vg"] = scores.vg;
    out["c"] = scores.c;
    out["ia"] = scores.ia;
    out["mean"] = scores.mean;
    std::cout << out.dump() << "\n";
    return 0;
}

int do_report(const std::string& records_dir, const std::string& shape,
              const std::string& aggregation) {
    const auto records = visucraft::harness::load_records(records_dir);
    const auto table = visucraft::harness::emit_report(
        records, visucraft::harness::shape_from_string(shape),
        visucraft::config::aggregation_from_string(aggregation));
    std::cout << table.render_text();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Image-grounded creative text generation pipeline", "visucraft"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run_cmd = app.add_subcommand("run", "Run the pipeline over a manifest");
    run_cmd->add_option("--manifest", run_args.manifest, "Manifest file, one JSON object per line")
        ->required();
    run_cmd->add_option("--arm", run_args.arms,
                        "Pipeline arm: full, wo-extractor, or wo-promptgen (repeatable)");
    run_cmd->add_option("--level", run_args.levels,
                        "Extraction granularity: L1, L2, or L3 (repeatable)");
    run_cmd->add_option("--backend", run_args.backend_mode,
                        "Generation backend: remote, template, or replay");
    run_cmd->add_option("--config", run_args.config_path, "Config file with key = value lines");
    run_cmd->add_option("--out", run_args.out_dir, "Output directory for records and reports");

    std::string text_path, svi_path, instruction;
    auto* score_cmd = app.add_subcommand("score", "Score a generated text against a scene");
    score_cmd->add_option("--text", text_path, "File holding the generated text")->required();
    score_cmd->add_option("--svi", svi_path, "File holding the scene JSON")->required();
    score_cmd->add_option("--instruction", instruction, "The original instruction")->required();

    std::string records_dir, shape, aggregation = "mean";
    auto* report_cmd = app.add_subcommand("report", "Aggregate run records into a table");
    report_cmd->add_option("--records", records_dir, "Directory of .run.json files")->required();
    report_cmd->add_option("--shape", shape, "Table shape: table2, table3, or table4")->required();
    report_cmd->add_option("--aggregation", aggregation, "Aggregation: mean or median");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (run_cmd->parsed()) return do_run(run_args);
        if (score_cmd->parsed()) return do_score(text_path, svi_path, instruction);
        return do_report(records_dir, shape, aggregation);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
