#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "visucraft/backend.hpp"
#include "visucraft/config.hpp"
#include "visucraft/errors.hpp"
#include "visucraft/extractor.hpp"
#include "visucraft/http_client.hpp"
#include "visucraft/lexicon.hpp"
#include "visucraft/metrics.hpp"
#include "visucraft/prompt.hpp"
#include "visucraft/svi.hpp"
#include "visucraft/text.hpp"

namespace visucraft::harness {

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

struct ManifestEntry {
    std::string id;
    std::string image_uri;
    std::string caption;
    std::string instruction;
    std::string scenario;
    std::optional<prompt::TaskType> task;
};

// Line-delimited JSON, one object per line. Blank lines are skipped.
inline std::vector<ManifestEntry> parse_manifest(std::istream& in, const std::string& origin) {
    std::vector<ManifestEntry> entries;
    std::map<std::string, std::size_t> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const std::string where = origin + ":" + std::to_string(line_no);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(where + ": invalid JSON: " + e.what());
        }
        if (!j.is_object()) throw ConfigError(where + ": manifest line must be a JSON object");

        ManifestEntry entry;
        for (const auto& [key, value] : j.items()) {
            const bool known = key == "id" || key == "image_uri" || key == "caption" ||
                               key == "instruction" || key == "scenario" || key == "task";
            if (!known) throw ConfigError(where + ": unknown manifest key '" + key + "'");
            if (!value.is_string()) {
                throw ConfigError(where + ": key '" + key + "' must be a string");
            }
        }
        for (const char* key : {"id", "image_uri", "caption", "instruction", "scenario"}) {
            if (!j.contains(key)) throw ConfigError(where + ": missing key '" + std::string(key) + "'");
        }
        entry.id = j["id"].get<std::string>();
        entry.image_uri = j["image_uri"].get<std::string>();
        entry.caption = j["caption"].get<std::string>();
        entry.instruction = j["instruction"].get<std::string>();
        entry.scenario = j["scenario"].get<std::string>();
        if (entry.id.empty()) throw ConfigError(where + ": id must be non-empty");
        if (j.contains("task")) {
            try {
                entry.task = prompt::task_from_string(j["task"].get<std::string>());
            } catch (const ConfigError& e) {
                throw ConfigError(where + ": " + e.what());
            }
        }
        if (const auto [it, inserted] = seen.emplace(entry.id, line_no); !inserted) {
            throw ConfigError(where + ": duplicate id '" + entry.id + "' (first seen at line " +
                              std::to_string(it->second) + ")");
        }
        entries.push_back(std::move(entry));
    }
    return entries;
}

inline std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read manifest: " + path.string());
    return parse_manifest(in, path.string());
}

// ---------------------------------------------------------------------------
// Run records
// ---------------------------------------------------------------------------

struct RunRecord {
    std::string id;
    std::string scenario;
    config::PipelineArm arm = config::PipelineArm::Full;
    svi::GranularityLevel level = svi::GranularityLevel::L3;
    std::string status = "ok";
    std::string prompt_hash;
    std::string backend;
    std::optional<std::string> model_name;
    std::optional<std::string> system;
    std::string text;
    metrics::MetricScores scores;
    std::optional<std::string> error;
    long timing_ms = 0;
    std::string config_fingerprint;
    std::string created_at;

    bool ok() const { return status == "ok"; }

    std::string filename() const {
        return id + "." + config::to_string(arm) + "." + svi::to_string(level) + ".run.json";
    }
};

inline nlohmann::ordered_json record_to_json(const RunRecord& record) {
    nlohmann::ordered_json j;
    j["id"] = record.id;
    j["scenario"] = record.scenario;
    j["arm"] = config::to_string(record.arm);
    j["level"] = svi::to_string(record.level);
    j["status"] = record.status;
    j["prompt_hash"] = record.prompt_hash;
    j["backend"] = record.backend;
    if (record.model_name) j["model_name"] = *record.model_name;
    if (record.system) j["system"] = *record.system;
    j["text"] = record.text;
    j["scores"] = {{"vg", record.scores.vg},
                   {"c", record.scores.c},
                   {"ia", record.scores.ia},
                   {"mean", record.scores.mean}};
    if (record.error) j["error"] = *record.error;
    j["timing_ms"] = record.timing_ms;
    j["config_fingerprint"] = record.config_fingerprint;
    j["created_at"] = record.created_at;
    return j;
}

// Lenient on purpose: externally scored records only need scenario plus a
// scores object; the mean column is always recomputed, never trusted.
inline RunRecord record_from_json(const nlohmann::json& j, const std::string& origin) {
    if (!j.is_object()) throw ConfigError(origin + ": run record must be a JSON object");
    try {
        RunRecord record;
        record.id = j.value("id", std::string{});
        record.scenario = j.value("scenario", std::string{});
        record.arm = config::arm_from_string(j.value("arm", std::string{"full"}));
        record.level = svi::level_from_string(j.value("level", std::string{"L3"}));
        record.status = j.value("status", std::string{"ok"});
        record.prompt_hash = j.value("prompt_hash", std::string{});
        record.backend = j.value("backend", std::string{});
        if (j.contains("model_name")) record.model_name = j["model_name"].get<std::string>();
        if (j.contains("system")) record.system = j["system"].get<std::string>();
        record.text = j.value("text", std::string{});
        if (j.contains("scores")) {
            const auto& s = j["scores"];
            record.scores = metrics::make_scores(s.value("vg", 0.0), s.value("c", 0.0),
                                                 s.value("ia", 0.0));
        }
        if (j.contains("error")) record.error = j["error"].get<std::string>();
        record.timing_ms = j.value("timing_ms", 0L);
        record.config_fingerprint = j.value("config_fingerprint", std::string{});
        record.created_at = j.value("created_at", std::string{});
        return record;
    } catch (const ConfigError& e) {
        throw ConfigError(origin + ": " + e.what());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(origin + ": malformed run record: " + e.what());
    }
}

namespace detail {

inline void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw PipelineError("cannot write file: " + tmp.string());
        out << content;
        if (!out) throw PipelineError("short write: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace detail

inline std::filesystem::path write_record(const std::filesystem::path& dir,
                                          const RunRecord& record) {
    const auto path = dir / record.filename();
    detail::write_text_atomic(path, record_to_json(record).dump(2) + "\n");
    return path;
}

inline std::vector<RunRecord> load_records(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw ConfigError("records directory does not exist: " + dir.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& item : std::filesystem::directory_iterator(dir)) {
        if (!item.is_regular_file()) continue;
        const auto name = item.path().filename().string();
        if (name.size() > 9 && name.substr(name.size() - 9) == ".run.json") {
            files.push_back(item.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<RunRecord> records;
    records.reserve(files.size());
    for (const auto& file : files) {
        std::ifstream in(file);
        if (!in) throw ConfigError("cannot read run record: " + file.string());
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(file.string() + ": invalid JSON: " + e.what());
        }
        records.push_back(record_from_json(j, file.string()));
    }
    return records;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

enum class ReportShape { Table2, Table3, Table4 };

inline std::string to_string(ReportShape shape) {
    switch (shape) {
        case ReportShape::Table2: return "table2";
        case ReportShape::Table3: return "table3";
        case ReportShape::Table4: return "table4";
    }
    return "table2";
}

inline ReportShape shape_from_string(std::string_view s) {
    if (s == "table2") return ReportShape::Table2;
    if (s == "table3") return ReportShape::Table3;
    if (s == "table4") return ReportShape::Table4;
    throw ConfigError("unknown report shape '" + std::string(s) + "'");
}

struct ReportRow {
    std::string label;
    double vg = 0.0;
    double c = 0.0;
    double ia = 0.0;
    double mean = 0.0;
    std::size_t n = 0;
};

struct ReportTable {
    ReportShape shape = ReportShape::Table2;
    std::string title;
    std::string label_header;
    std::vector<ReportRow> rows;

    std::string render_text() const {
        std::size_t width = label_header.size();
        for (const auto& row : rows) width = std::max(width, row.label.size());
        std::ostringstream out;
        out << title << "\n";
        out << pad(label_header, width) << "  " << pad("VG", 6) << pad("C", 6) << pad("IA", 6)
            << pad("Mean", 6) << "n" << "\n";
        for (const auto& row : rows) {
            out << pad(row.label, width) << "  " << fixed3(row.vg) << " " << fixed3(row.c) << " "
                << fixed3(row.ia) << " " << fixed3(row.mean) << " " << row.n << "\n";
        }
        return out.str();
    }

    std::string render_csv() const {
        std::ostringstream out;
        out << "label,vg,c,ia,mean,n\n";
        for (const auto& row : rows) {
            out << csv_field(row.label) << "," << fixed3(row.vg) << "," << fixed3(row.c) << ","
                << fixed3(row.ia) << "," << fixed3(row.mean) << "," << row.n << "\n";
        }
        return out.str();
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["shape"] = harness::to_string(shape);
        j["title"] = title;
        j["rows"] = nlohmann::ordered_json::array();
        for (const auto& row : rows) {
            j["rows"].push_back({{"label", row.label},
                                 {"vg", row.vg},
                                 {"c", row.c},
                                 {"ia", row.ia},
                                 {"mean", row.mean},
                                 {"n", row.n}});
        }
        return j;
    }

private:
    static std::string fixed3(double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3f", v);
        return buf;
    }

    static std::string pad(std::string s, std::size_t width) {
        if (s.size() < width) s.append(width - s.size(), ' ');
        return s;
    }

    static std::string csv_field(const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string quoted = "\"";
        for (const char ch : s) {
            if (ch == '"') quoted += '"';
            quoted += ch;
        }
        quoted += '"';
        return quoted;
    }
};

namespace detail {

inline double aggregate(std::vector<double> values, config::Aggregation how) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    if (how == config::Aggregation::Median) {
        const auto n = values.size();
        return n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
    }
    double sum = 0.0;
    for (const double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

inline std::string system_label(const RunRecord& record) {
    if (record.system && !record.system->empty()) return *record.system;
    switch (record.arm) {
        case config::PipelineArm::Full: return "VisuCraft";
        case config::PipelineArm::WithoutPromptgen: return "VisuCraft w/o G";
        case config::PipelineArm::WithoutExtractor: return "VisuCraft w/o E";
    }
    return "VisuCraft";
}

inline int system_rank(const std::string& label) {
    static const std::vector<std::string> order = {"LVLM-Base", "LVLM-Enhanced", "VisuCraft",
                                                   "VisuCraft w/o G", "VisuCraft w/o E"};
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (order[i] == label) return static_cast<int>(i);
    }
    return static_cast<int>(order.size());
}

inline int scenario_rank(const std::string& scenario) {
    if (scenario == "StoryGen") return 0;
    if (scenario == "Poetry") return 1;
    if (scenario == "AdCopyGen") return 2;
    return 3;
}

inline svi::GranularityLevel max_level(const std::vector<const RunRecord*>& records) {
    auto level = svi::GranularityLevel::L1;
    for (const auto* record : records) level = std::max(level, record->level);
    return level;
}

struct Group {
    std::string label;
    long rank_a = 0;
    long rank_b = 0;
    std::vector<double> vg, c, ia;
};

inline ReportRow finish(Group& group, config::Aggregation how) {
    ReportRow row;
    row.label = std::move(group.label);
    row.n = group.vg.size();
    row.vg = aggregate(std::move(group.vg), how);
    row.c = aggregate(std::move(group.c), how);
    row.ia = aggregate(std::move(group.ia), how);
    row.mean = (row.vg + row.c + row.ia) / 3.0;
    return row;
}

}  // namespace detail

inline ReportTable emit_report(const std::vector<RunRecord>& records, ReportShape shape,
                               config::Aggregation aggregation = config::Aggregation::Mean) {
    std::vector<const RunRecord*> usable;
    for (const auto& record : records) {
        if (record.ok()) usable.push_back(&record);
    }

    ReportTable table;
    table.shape = shape;
    std::map<std::pair<std::pair<long, long>, std::string>, detail::Group> groups;

    const auto add = [&groups](const RunRecord& record, std::string label, long rank_a,
                               long rank_b) {
        auto& group = groups[{{rank_a, rank_b}, label}];
        if (group.vg.empty()) {
            group.label = std::move(label);
            group.rank_a = rank_a;
            group.rank_b = rank_b;
        }
        group.vg.push_back(record.scores.vg);
        group.c.push_back(record.scores.c);
        group.ia.push_back(record.scores.ia);
    };

    if (shape == ReportShape::Table2) {
        table.title = "Generation quality by system and scenario (VisuGen-auto)";
        table.label_header = "system / scenario";
        if (!usable.empty()) {
            const auto level = detail::max_level(usable);
            for (const auto* record : usable) {
                if (record->level != level) continue;
                const auto system = detail::system_label(*record);
                add(*record, system + " - " + record->scenario, detail::system_rank(system),
                    detail::scenario_rank(record->scenario));
            }
        }
    } else if (shape == ReportShape::Table3) {
        table.title = "Pipeline component ablations (VisuGen-auto)";
        table.label_header = "system";
        std::vector<const RunRecord*> own;
        for (const auto* record : usable) {
            if (!record->system) own.push_back(record);
        }
        if (!own.empty()) {
            const auto level = detail::max_level(own);
            for (const auto* record : own) {
                if (record->level != level) continue;
                switch (record->arm) {
                    case config::PipelineArm::WithoutExtractor:
                        add(*record, "VisuCraft - w/o E (Generic Visual Features)", 0, 0);
                        break;
                    case config::PipelineArm::WithoutPromptgen:
                        add(*record, "VisuCraft - w/o G (Simple Prompting)", 1, 0);
                        break;
                    case config::PipelineArm::Full:
                        add(*record, "VisuCraft (Full)", 2, 0);
                        break;
                }
            }
        }
    } else {
        table.title = "Extraction granularity sweep (VisuGen-auto)";
        table.label_header = "granularity";
        for (const auto* record : usable) {
            if (record->system || record->arm != config::PipelineArm::Full) continue;
            switch (record->level) {
                case svi::GranularityLevel::L1:
                    add(*record, "Level 1: Basic Object Detection", 0, 0);
                    break;
                case svi::GranularityLevel::L2:
                    add(*record, "Level 2: Objects + Attributes", 1, 0);
                    break;
                case svi::GranularityLevel::L3:
                    add(*record, "Level 3: Full Structured Information", 2, 0);
                    break;
            }
        }
    }

    for (auto& [key, group] : groups) table.rows.push_back(detail::finish(group, aggregation));
    return table;
}

// ---------------------------------------------------------------------------
// Pipeline runner
// ---------------------------------------------------------------------------

struct SuiteResult {
    std::vector<RunRecord> records;
    std::vector<std::filesystem::path> record_files;
    std::map<std::string, ReportTable> tables;
    std::size_t failed = 0;
};

class PipelineRunner {
public:
    explicit PipelineRunner(config::RunConfig cfg, net::Transport transport = net::http_post)
        : cfg_(std::move(cfg)) {
        cfg_.backend.seed = cfg_.seed;
        cfg_.check();
        fingerprint_ = config::config_fingerprint(cfg_);
        styles_ = cfg_.style_lexicon ? lexicon::load_style_lexicon(*cfg_.style_lexicon)
                                     : lexicon::default_style_lexicon();
        if (cfg_.corpus_dir) {
            corpus_ = metrics::ReferenceCorpus::from_directory(*cfg_.corpus_dir);
        }
        auto reference_cfg = cfg_.extractor;
        reference_cfg.requested_level = svi::GranularityLevel::L3;
        reference_ = std::make_unique<extract::Extractor>(reference_cfg, transport);
        backend_ = std::make_unique<backend::LvlmBackend>(cfg_.backend, transport);
    }

    const config::RunConfig& config() const { return cfg_; }
    const std::string& fingerprint() const { return fingerprint_; }

    // One entry through one arm at one granularity. Failures become failed
    // records; nothing is skipped silently.
    RunRecord run(const ManifestEntry& entry, config::PipelineArm arm,
                  svi::GranularityLevel level) const {
        RunRecord record;
        record.id = entry.id;
        record.scenario = entry.scenario;
        record.arm = arm;
        record.level = level;
        record.backend = backend::to_string(cfg_.backend.mode);
        record.config_fingerprint = fingerprint_;
        record.created_at = backend::now_iso8601();
        const auto started = std::chrono::steady_clock::now();
        try {
            const auto instruction = prompt::make_instruction(entry.instruction, styles_, entry.task);
            const extract::ImageRef image{entry.id, entry.image_uri, std::nullopt};
            const auto reference = reference_->extract(image, &entry.caption);

            prompt::OptimizedPrompt compiled;
            if (arm == config::PipelineArm::WithoutExtractor) {
                const auto generic = extract::caption_to_svi(entry.caption);
                compiled = prompt::compile(generic, instruction, cfg_.weights);
            } else {
                const auto working = svi::downgrade(reference, std::min(level, reference.level));
                compiled = arm == config::PipelineArm::WithoutPromptgen
                               ? prompt::simple_concat(working, instruction)
                               : prompt::compile(working, instruction, cfg_.weights);
            }
            record.prompt_hash = compiled.hash_hex();

            auto result = backend_->generate(compiled);
            record.model_name = result.model_name;
            record.text = std::move(result.text);
            record.scores = metrics::score(record.text, reference, instruction.constraints,
                                           corpus_, cfg_.creativity, styles_);
            record.status = "ok";
        } catch (const std::exception& e) {
            record.status = "failed";
            record.error = e.what();
        }
        record.timing_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                               std::chrono::steady_clock::now() - started)
                               .count();
        return record;
    }

    // Cross product of entries, arms, and levels with bounded parallelism.
    // Records are persisted as they finish; reports after a full barrier.
    SuiteResult run_suite(const std::vector<ManifestEntry>& entries,
                          const std::vector<config::PipelineArm>& arms,
                          const std::vector<svi::GranularityLevel>& levels) const {
        if (arms.empty()) throw ConfigError("no pipeline arms selected");
        if (levels.empty()) throw ConfigError("no granularity levels selected");

        struct Job {
            const ManifestEntry* entry;
            config::PipelineArm arm;
            svi::GranularityLevel level;
        };
        std::vector<Job> jobs;
        jobs.reserve(entries.size() * arms.size() * levels.size());
        for (const auto& entry : entries) {
            for (const auto arm : arms) {
                for (const auto level : levels) jobs.push_back({&entry, arm, level});
            }
        }

        const auto records_dir = cfg_.output_dir / "records";
        const auto reports_dir = cfg_.output_dir / "reports";
        std::filesystem::create_directories(records_dir);
        std::filesystem::create_directories(reports_dir);

        SuiteResult result;
        result.records.resize(jobs.size());
        result.record_files.resize(jobs.size());

        std::atomic<std::size_t> next{0};
        const auto worker = [&] {
            while (true) {
                const auto i = next.fetch_add(1);
                if (i >= jobs.size()) break;
                result.records[i] = run(*jobs[i].entry, jobs[i].arm, jobs[i].level);
                result.record_files[i] = write_record(records_dir, result.records[i]);
            }
        };
        const auto thread_count =
            std::min<std::size_t>(static_cast<std::size_t>(cfg_.parallelism), jobs.size());
        if (thread_count <= 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            pool.reserve(thread_count);
            for (std::size_t i = 0; i < thread_count; ++i) pool.emplace_back(worker);
            for (auto& thread : pool) thread.join();
        }

        for (const auto& record : result.records) {
            if (!record.ok()) ++result.failed;
        }
        for (const auto shape : {ReportShape::Table2, ReportShape::Table3, ReportShape::Table4}) {
            auto table = emit_report(result.records, shape, cfg_.aggregation);
            const auto stem = harness::to_string(shape);
            detail::write_text_atomic(reports_dir / (stem + ".txt"), table.render_text());
            detail::write_text_atomic(reports_dir / (stem + ".csv"), table.render_csv());
            detail::write_text_atomic(reports_dir / (stem + ".json"), table.to_json().dump(2) + "\n");
            result.tables.emplace(stem, std::move(table));
        }
        return result;
    }

private:
    config::RunConfig cfg_;
    std::string fingerprint_;
    lexicon::StyleLexicon styles_;
    metrics::ReferenceCorpus corpus_;
    std::unique_ptr<extract::Extractor> reference_;
    std::unique_ptr<backend::LvlmBackend> backend_;
};

}  // namespace visucraft::harness
