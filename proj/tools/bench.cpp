// bench: run experiment suites, summarize record files, emit market fixtures.

#include "blpinner/bench.hpp"
#include "blpinner/io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void spit(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace blp;
    CLI::App app{"Inner-loop benchmark harness for random-coefficient demand inversion"};
    app.require_subcommand(1);

    std::string suite_name, config_path, out_dir = "bench_out";
    int replications = 0, threads = 0;
    std::int64_t seed = -1;
    auto* run = app.add_subcommand("run", "run a suite and write records.csv / summary files");
    run->add_option("--suite", suite_name, "suite name")->required();
    run->add_option("--config", config_path, "JSON document with ExperimentConfig fields");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--replications", replications, "override the replication count");
    run->add_option("--seed", seed, "override the master seed");
    run->add_option("--threads", threads, "worker threads");

    std::string in_path, format = "md";
    auto* summ = app.add_subcommand("summarize", "summarize a records CSV");
    summ->add_option("--in", in_path, "records CSV")->required();
    summ->add_option("--format", format, "md or csv")->check(CLI::IsMember({"md", "markdown", "csv"}));

    std::string kind = "static", gen_out;
    std::uint64_t gen_seed = 1, gen_index = 0;
    Index gJ = 0, gI = 0, gT = 0;
    auto* gen = app.add_subcommand("gen", "write a generated market as JSON");
    gen->add_option("--kind", kind, "static, nested or dynamic")->check(CLI::IsMember({"static", "nested", "dynamic"}));
    gen->add_option("--seed", gen_seed, "master seed");
    gen->add_option("--index", gen_index, "replication index");
    gen->add_option("--J", gJ, "products");
    gen->add_option("--I", gI, "consumer types");
    gen->add_option("--T", gT, "periods (dynamic)");
    gen->add_option("--out", gen_out, "output file (stdout when omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            const bench::Suite suite = bench::parse_suite(suite_name);
            bench::ExperimentConfig cfg = config_path.empty()
                                              ? bench::default_config(suite)
                                              : bench::config_from_json(io::read_json(config_path), suite);
            if (replications > 0) cfg.replications = replications;
            if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
            if (threads > 0) cfg.threads = threads;
            cfg.out_dir = out_dir;
            cfg.validate();
            std::filesystem::create_directories(out_dir);
            const auto records = bench::run_suite(cfg);
            const auto rows = bench::summarize(records);
            const std::filesystem::path dir(out_dir);
            spit(dir / "records.csv", bench::records_to_csv(records));
            spit(dir / "summary.csv", bench::render(rows, bench::Format::csv));
            spit(dir / "summary.md", bench::render(rows, bench::Format::markdown));
            io::write_json((dir / "config.json").string(), bench::to_json(cfg));
            std::cout << bench::render(rows, bench::Format::markdown);
        } else if (*summ) {
            const auto records = bench::records_from_csv(slurp(in_path));
            std::cout << bench::render(bench::summarize(records), bench::parse_format(format));
        } else if (*gen) {
            io::json j;
            if (kind == "static") {
                StaticDgpParams p;
                if (gJ > 0) p.J = gJ;
                if (gI > 0) p.I = gI;
                j = io::to_json(gen_static_market(p, gen_seed, gen_index).market);
            } else if (kind == "nested") {
                StaticDgpParams p;
                if (gI > 0) p.I = gI;
                const Index per = gJ > 0 ? std::max<Index>(1, gJ / 3) : 25;
                j = io::to_json(gen_nested_market(p, 3, per, 0.5, gen_seed, gen_index).market);
            } else {
                DynamicDgpParams p;
                if (gJ > 0) p.J = gJ;
                if (gI > 0) p.I = gI;
                if (gT > 0) p.T = gT;
                j = io::to_json(gen_dynamic_market(p, gen_seed, gen_index).market);
            }
            if (gen_out.empty()) std::cout << j.dump(1) << "\n";
            else io::write_json(gen_out, j);
        }
    } catch (const std::exception& e) {
        std::cerr << "bench: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
