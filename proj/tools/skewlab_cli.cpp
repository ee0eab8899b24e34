// skewlab: experiment runner for skew products over shifts of finite type.
//
//   skewlab <subcommand> --config FILE [--seed N] [--threads N] [--out DIR]
//
// Flags fall back to SKEWLAB_CONFIG, SKEWLAB_SEED, SKEWLAB_THREADS and
// SKEWLAB_OUT, then to the [run] section of the config.
// Exit codes: 0 pass, 1 experiment failed its criterion, 2 config error.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>

#include "skewlab/cli/experiments.hpp"

namespace {

using namespace skewlab;

using Runner = std::function<Artifact(const ExperimentConfig&, std::uint64_t, unsigned)>;

const std::map<std::string, std::pair<Runner, std::string>>& commands() {
    static const std::map<std::string, std::pair<Runner, std::string>> table{
        {"gibbs", {run_gibbs, "Gibbs measure: Perron-Frobenius data and cylinder masses"}},
        {"clt", {run_clt, "central limit theorem for Birkhoff sums against the Green-Kubo variance"}},
        {"mllt", {run_mllt, "mixing local limit theorem ratio surface"}},
        {"qe-verify", {run_qe, "quasi-ellipticity conditions from a rigidity-tower witness"}},
        {"partition", {run_partition, "regularity and generation of the fiber partition"}},
        {"vwb", {run_vwb, "very weak Bernoulli d-bar experiment"}},
        {"match-demo", {run_match, "matching of conditional futures between two atoms"}},
        {"dbar", {run_dbar, "d-bar estimator on Bernoulli names"}},
    };
    return table;
}

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ResourceError("cannot write " + path.string());
    body(out);
    if (!out) throw ResourceError("write failed for " + path.string());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"skewlab: skew products over shifts of finite type"};
    app.require_subcommand(1);
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::string> out;
    for (const auto& [name, entry] : commands()) {
        CLI::App* sub = app.add_subcommand(name, entry.second);
        sub->add_option("--config", config, "experiment config file")->envname("SKEWLAB_CONFIG")->required();
        sub->add_option("--seed", seed, "master seed")->envname("SKEWLAB_SEED");
        sub->add_option("--threads", threads, "worker threads")->envname("SKEWLAB_THREADS")->check(CLI::PositiveNumber);
        sub->add_option("--out", out, "output directory")->envname("SKEWLAB_OUT");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    const std::string kind = app.get_subcommands().front()->get_name();
    try {
        const ExperimentConfig cfg = ExperimentConfig::load(config);
        const std::uint64_t s = seed.value_or(cfg.seed);
        const unsigned t = threads.value_or(cfg.threads);
        const std::filesystem::path dir = out.value_or(cfg.out);
        const Artifact a = commands().at(kind).first(cfg, s, t);

        std::filesystem::create_directories(dir);
        write_file(dir / (kind + ".csv"), [&](std::ostream& o) { a.table.write_csv(o); });
        write_file(dir / (kind + ".json"), [&](std::ostream& o) { o << a.json.dump(2) << '\n'; });
        if (a.plot) write_file(dir / (kind + ".svg"), [&](std::ostream& o) { write_svg(o, *a.plot); });

        std::cout << kind << ": " << (a.pass ? "PASS" : "FAIL") << " (" << (dir / (kind + ".json")).string() << ")\n";
        if (!a.pass) {
            std::cerr << kind << ": " << a.diagnostic << '\n';
            return 1;
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << kind << ": experiment failed: " << e.what() << '\n';
        return 1;
    }
}
