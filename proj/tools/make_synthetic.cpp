#include <iostream>

#include "CLI11.hpp"

#include "ake/synthetic.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Writes the planted-signal corpus, HITs, gold standard and LM text", "make_synthetic"};
    ake::SyntheticOptions opts;
    std::string out_dir = "data/synthetic";
    bool no_bad_hits = false;
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--docs-per-category", opts.docs_per_category)->check(CLI::PositiveNumber);
    app.add_option("--annotators", opts.annotators)->check(CLI::Range(7, 40));
    app.add_option("--seed", opts.seed);
    app.add_flag("--no-bad-hits", no_bad_hits, "omit the fast, rule-violating HITs");
    CLI11_PARSE(app, argc, argv);
    opts.include_bad_hits = !no_bad_hits;
    try {
        const auto data = ake::generate_synthetic(opts);
        ake::write_synthetic(data, out_dir);
        std::cout << "stories: " << data.records.size() << "\nHITs: " << data.hits.size() << "\nwrote " << out_dir
                  << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
