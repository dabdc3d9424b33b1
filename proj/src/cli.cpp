#include "seisnoise/cli.hpp"

#include "seisnoise/errors.hpp"
#include "seisnoise/io.hpp"
#include "seisnoise/pipeline.hpp"
#include "seisnoise/synth.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <ostream>

namespace seisnoise {

namespace fs = std::filesystem;

namespace {

struct Overrides {
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
    std::optional<double> alpha;
    std::optional<double> rate;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--config", config, "key = value pipeline configuration file");
        cmd->add_option("--seed", seed, "random seed (overrides the config)");
        cmd->add_option("--alpha", alpha, "significance level (overrides the config)");
        cmd->add_option("--rate", rate, "sample rate in sps (overrides CSV headers)");
    }

    PipelineConfig resolve() const {
        PipelineConfig cfg = config ? load_pipeline_config(*config) : PipelineConfig{};
        if (seed) cfg.seed = *seed;
        if (alpha) cfg.alpha = *alpha;
        cfg.validate();
        return cfg;
    }
};

void print_report_summary(const CharacterizationReport& r, std::ostream& out) {
    for (const auto& e : r.stage_log) out << "  " << e.stage << ": " << e.summary << "\n";
    for (const auto& w : r.warnings) out << "  warning: " << w << "\n";
}

std::vector<std::string> read_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open manifest " + path.string());
    std::vector<std::string> items;
    for (std::string line; std::getline(in, line);) {
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos || line[b] == '#') continue;
        const auto e = line.find_last_not_of(" \t\r");
        items.push_back(line.substr(b, e - b + 1));
    }
    if (items.empty()) throw ArgumentError("manifest " + path.string() + " lists no inputs");
    return items;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Seismic noise characterization and ARIMA-GARCH modeling", "seisnoise"};
    app.require_subcommand(1);

    // characterize
    auto* ch = app.add_subcommand("characterize", "run the full characterization on a CSV series");
    std::string ch_input;
    std::string ch_out = ".";
    bool ch_plots = false;
    Overrides ch_over;
    ch->add_option("input", ch_input, "CSV input")->required();
    ch->add_option("--out", ch_out, "output directory for report.json");
    ch->add_flag("--plots", ch_plots, "also write plot-data CSVs to <out>/plots");
    ch_over.add_to(ch);

    // fetch
    auto* fe = app.add_subcommand("fetch", "download a record from an FDSN timeseries service");
    DatasetRequest req;
    FetchOptions fopts;
    std::string fe_out;
    bool no_cache = false;
    fe->add_option("net", req.network)->required();
    fe->add_option("sta", req.station)->required();
    fe->add_option("cha", req.channel)->required();
    fe->add_option("loc", req.location)->required();
    fe->add_option("start", req.start, "UTC start, YYYY-MM-DDTHH:MM:SS")->required();
    fe->add_option("end", req.end, "UTC end")->required();
    fe->add_option("--rate", req.sample_rate, "expected sample rate in sps");
    fe->add_option("--endpoint", fopts.endpoint, "FDSN timeseries query URL");
    fe->add_option("--cache", fopts.cache_dir, "cache directory");
    fe->add_flag("--no-cache", no_cache, "bypass the on-disk cache");
    fe->add_option("--out", fe_out, "output CSV (default NET.STA.LOC.CHA.csv)");

    // simulate
    auto* si = app.add_subcommand("simulate", "generate a synthetic series from a process spec");
    std::string si_spec;
    std::string si_out = "simulated.csv";
    std::optional<std::uint64_t> si_seed;
    std::optional<std::size_t> si_n;
    si->add_option("--spec", si_spec, "process spec file")->required();
    si->add_option("--out", si_out, "output CSV");
    si->add_option("--seed", si_seed, "override the spec's seed");
    si->add_option("--n", si_n, "override the spec's length");

    // batch
    auto* ba = app.add_subcommand("batch", "characterize every CSV listed in a manifest");
    std::string ba_manifest;
    std::string ba_out = "batch";
    int ba_jobs = 4;
    Overrides ba_over;
    ba->add_option("manifest", ba_manifest, "one CSV path per line, relative to the manifest")->required();
    ba->add_option("--out", ba_out, "output directory");
    ba->add_option("--jobs", ba_jobs, "concurrent characterizations");
    ba_over.add_to(ba);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        err << sub->help();
        return kExitArgument;
    }

    try {
        if (*ch) {
            const auto cfg = ch_over.resolve();
            const auto s = read_csv(ch_input, ch_over.rate);
            const auto r = characterize(s, cfg);
            const fs::path dir = ch_out;
            write_report(r, dir / "report.json");
            if (ch_plots) emit_plot_data(r, dir / "plots");
            out << "report: " << (dir / "report.json").string() << "\n";
            print_report_summary(r, out);
            if (!r.complete) {
                err << "error: characterization incomplete: " << r.failure << "\n";
                return kExitComputation;
            }
        } else if (*fe) {
            fopts.use_cache = !no_cache;
            const auto s = fetch_fdsn(req, fopts);
            const fs::path path = fe_out.empty() ? req.network + "." + req.station + "." + req.location + "." +
                                                       req.channel + ".csv"
                                                 : fe_out;
            write_csv(s, path);
            out << s.size() << " samples at " << s.sample_rate() << " sps -> " << path.string() << "\n";
        } else if (*si) {
            auto spec = load_process_spec(si_spec);
            if (si_seed) spec.seed = *si_seed;
            if (si_n) spec.n = *si_n;
            const auto s = generate(spec);
            write_csv(s, si_out);
            out << s.size() << " samples (" << to_string(spec.kind) << ") -> " << si_out << "\n";
        } else if (*ba) {
            const auto cfg = ba_over.resolve();
            const fs::path manifest = ba_manifest;
            const auto items = read_manifest(manifest);
            std::vector<BatchEntry> entries(items.size());
            std::vector<Series> inputs;
            std::vector<std::size_t> where;
            std::vector<std::string> labels;
            for (std::size_t i = 0; i < items.size(); ++i) {
                fs::path p = items[i];
                if (p.is_relative()) p = manifest.parent_path() / p;
                entries[i].label = items[i];
                try {
                    inputs.push_back(read_csv(p, ba_over.rate));
                    where.push_back(i);
                    labels.push_back(items[i]);
                } catch (const std::exception& e) {
                    entries[i].error = e.what();
                }
            }
            if (!inputs.empty()) {
                auto res = batch_characterize(inputs, cfg, ba_jobs, labels);
                for (std::size_t k = 0; k < where.size(); ++k) entries[where[k]] = std::move(res.entries[k]);
            }
            BatchResult b{std::move(entries), {}};
            b.summary = summarize(b.entries);
            write_batch(b, ba_out);
            out << b.summary.succeeded << " of " << b.summary.total << " inputs characterized, " << b.summary.failed
                << " failed -> " << ba_out << "\n";
            for (const auto& e : b.entries)
                if (!e.error.empty()) out << "  failed: " << e.label << ": " << e.error << "\n";
        }
    } catch (const ArgumentError& e) {
        err << "error: " << e.what() << "\n";
        return kExitArgument;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitArgument;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitComputation;
    }
    return kExitOk;
}

}  // namespace seisnoise
