// globenv command line front-end.
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "globenv/applications.hpp"
#include "globenv/composite.hpp"
#include "globenv/ftests.hpp"
#include "globenv/io.hpp"
#include "globenv/parallel.hpp"
#include "globenv/svg.hpp"

namespace fs = std::filesystem;
using namespace globenv;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kInfeasible = 3 };

struct Common {
    std::string json_path;
    std::string svg_path;
    int threads = 0;
};

struct MeasureOptions {
    std::string type = "erl";
    std::string alternative = "two.sided";
    double beta = 2.5;
    int nstep = 2;

    MeasureSpec spec() const {
        MeasureSpec s;
        s.type = parse_measure_type(type);
        s.alternative = parse_alternative(alternative);
        s.beta_percent = beta;
        return s;
    }
    CombineMode mode() const { return nstep == 1 ? CombineMode::OneStep : CombineMode::TwoStep; }
};

void add_measure_options(CLI::App* app, MeasureOptions& m, const std::string& default_type) {
    m.type = default_type;
    app->add_option("--type", m.type, "measure: rank, erl, cont, area, qdir, st, unscaled")
        ->check(CLI::IsMember({"rank", "erl", "cont", "area", "qdir", "st", "unscaled"}))
        ->capture_default_str();
    app->add_option("--alternative", m.alternative, "two.sided, less or greater")
        ->check(CLI::IsMember({"two.sided", "less", "greater"}))
        ->capture_default_str();
    app->add_option("--beta", m.beta, "qdir quantile level in percent")->capture_default_str();
}

void add_output_options(CLI::App* app, Common& c) {
    app->add_option("--json", c.json_path, "write the JSON result here (default: standard output)");
    app->add_option("--svg", c.svg_path, "write an SVG plot here");
    app->add_option("--threads", c.threads, "worker threads (default: $GLOBENV_THREADS or 1)");
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << text;
}

void emit(const Common& c, const json& result, const std::string& svg) {
    const std::string text = result.dump(2) + "\n";
    if (c.json_path.empty() || c.json_path == "-")
        std::cout << text;
    else
        write_text(c.json_path, text);
    if (!c.svg_path.empty()) write_text(c.svg_path, svg);
}

std::vector<CurveSet> read_sets(const std::vector<std::string>& paths) {
    std::vector<CurveSet> sets;
    for (const std::string& p : paths) sets.push_back(read_curve_set_csv(fs::path(p)));
    return sets;
}

std::set<std::string> split_names(const std::string& list) {
    std::set<std::string> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.insert(item);
    return out;
}

Grouping read_grouping(const std::string& path, const std::string& column) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::string header;
    std::getline(in, header);
    in.seekg(0);
    std::set<std::string> all;
    {
        std::stringstream ss(header);
        std::string name;
        while (std::getline(ss, name, ',')) {
            while (!name.empty() && (name.back() == '\r' || name.back() == ' ')) name.pop_back();
            all.insert(name);
        }
    }
    const FactorTable table = read_factor_csv(in, all, path);
    if (table.factors().empty()) throw Error(ErrorCode::HeaderError, path + ": no columns");
    const Factor* f = column.empty() ? &table.factors().front() : table.find(column);
    if (f == nullptr) throw Error(ErrorCode::HeaderError, path + ": no column named '" + column + "'");
    return f->groups;
}

PermutationOptions permutation_options(const MeasureOptions& m, std::size_t nsim, double alpha, std::uint64_t seed) {
    PermutationOptions o;
    o.nsim = nsim;
    o.alpha = alpha;
    o.spec = m.spec();
    o.seed = seed;
    return o;
}

std::string ftest_svg(const FTestResult& r) { return envelope_svg(r.envelope, r.statistics, r.labels); }

// Cubic least-squares fit evaluated on x.
Vector cubic_design_fit(const Matrix& design, const LeastSquares& ls, const Vector& y) {
    return design * ls.coefficients(y);
}

json demo_polynomial(std::uint64_t seed, std::size_t n, std::size_t nboot, double sd, double coverage,
                     const MeasureSpec& spec, std::string& svg) {
    std::mt19937_64 rng = stream_rng(seed, 0);
    std::normal_distribution<double> noise(0.0, sd);
    std::vector<double> x = linspace(0.0, 1.0, n);
    Matrix design(static_cast<Eigen::Index>(n), 4);
    Vector y(static_cast<Eigen::Index>(n)), truth(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double t = x[i];
        const auto r = static_cast<Eigen::Index>(i);
        design.row(r) << 1.0, t, t * t, t * t * t;
        truth(r) = 0.8 * t - 1.8 * t * t + 1.05 * t * t * t;
        y(r) = truth(r) + noise(rng);
    }
    const LeastSquares ls(design);
    const Vector fitted = cubic_design_fit(design, ls, y);
    const Vector resid = y - fitted;

    Matrix curves(static_cast<Eigen::Index>(nboot), static_cast<Eigen::Index>(n));
    parallel_for(nboot, [&](std::size_t b) {
        std::mt19937_64 brng = stream_rng(seed, b + 1);
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), brng);
        Vector ystar(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i)
            ystar(static_cast<Eigen::Index>(i)) = fitted(static_cast<Eigen::Index>(i)) + resid(static_cast<Eigen::Index>(perm[i]));
        curves.row(static_cast<Eigen::Index>(b)) = cubic_design_fit(design, ls, ystar).transpose();
    });
    const CurveSet set(ArgGrid::one_d(x), std::move(curves), 0);
    const GlobalEnvelope band = central_region(set, spec, coverage);

    PlotPanel panel;
    panel.title = "cubic regression, " + std::to_string(nboot) + " residual-permutation bootstrap fits";
    panel.envelope = &band;
    panel.curve = fitted;
    svg = render_svg(std::span<const PlotPanel>(&panel, 1));

    json out;
    out["band"] = to_json(band);
    out["x"] = x;
    out["y"] = std::vector<double>(y.data(), y.data() + y.size());
    out["fitted"] = std::vector<double>(fitted.data(), fitted.data() + fitted.size());
    out["truth"] = std::vector<double>(truth.data(), truth.data() + truth.size());
    out["bootstrap"] = nboot;
    return out;
}

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::AlphaInfeasible:
        case ErrorCode::BetaTooSmall:
        case ErrorCode::DegenerateScale:
        case ErrorCode::DegenerateData:
        case ErrorCode::DegenerateGroupVariance:
        case ErrorCode::RankDeficient:
            return kInfeasible;
        case ErrorCode::InvalidArgument:
        case ErrorCode::UnknownTerm:
            return kUsage;
        default:
            return kData;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Global envelopes, functional orderings and graphical tests for curve data"};
    app.require_subcommand(1);
    Common common;
    MeasureOptions measure;
    std::vector<std::string> files;
    double alpha = 0.05, coverage = 0.5, factor = 1.5;
    std::size_t nsim = 999;
    std::uint64_t seed = 0;
    bool contrasts = false;

    auto* order = app.add_subcommand("order", "order curves from the most to the least extreme");
    add_measure_options(order, measure, "erl");
    order->add_option("--nstep", measure.nstep, "combine several files in 1 or 2 steps")->check(CLI::Range(1, 2));
    order->add_option("files", files, "curve CSV files")->required()->check(CLI::ExistingFile);
    add_output_options(order, common);

    auto* central = app.add_subcommand("central-region", "central region of a set of curves");
    add_measure_options(central, measure, "erl");
    central->add_option("--coverage", coverage, "coverage of the region")->capture_default_str();
    central->add_option("--nstep", measure.nstep, "combine several files in 1 or 2 steps")->check(CLI::Range(1, 2));
    central->add_option("files", files, "curve CSV files")->required()->check(CLI::ExistingFile);
    add_output_options(central, common);

    auto* test = app.add_subcommand("envelope-test", "global envelope test of the observed curve");
    add_measure_options(test, measure, "erl");
    test->add_option("--alpha", alpha, "significance level")->capture_default_str();
    test->add_option("--nstep", measure.nstep, "combine several files in 1 or 2 steps")->check(CLI::Range(1, 2));
    test->add_option("--seed", seed, "accepted for uniformity; the test itself is not random");
    test->add_option("files", files, "curve CSV files")->required()->check(CLI::ExistingFile);
    add_output_options(test, common);

    auto* box = app.add_subcommand("fboxplot", "functional boxplot with outlier detection");
    add_measure_options(box, measure, "area");
    box->add_option("--coverage", coverage, "coverage of the central region")->capture_default_str();
    box->add_option("--factor", factor, "whisker inflation factor")->capture_default_str();
    box->add_option("files", files, "curve CSV files")->required()->check(CLI::ExistingFile);
    add_output_options(box, common);

    std::string groups_path, group_column, method = "graph", variances = "equal";
    auto* fanova = app.add_subcommand("fanova", "functional one-way ANOVA by permutation");
    add_measure_options(fanova, measure, "erl");
    fanova->add_option("--groups", groups_path, "CSV with one group label per curve")->required()->check(CLI::ExistingFile);
    fanova->add_option("--group-column", group_column, "column of the groups file (default: first)");
    fanova->add_option("--method", method, "graph or frank")->check(CLI::IsMember({"graph", "frank"}))->capture_default_str();
    fanova->add_flag("--contrasts", contrasts, "test pairwise differences of group means");
    fanova->add_option("--variances", variances, "equal or unequal")->check(CLI::IsMember({"equal", "unequal"}))->capture_default_str();
    fanova->add_option("--nsim", nsim, "number of permutations")->capture_default_str();
    fanova->add_option("--alpha", alpha, "significance level")->capture_default_str();
    fanova->add_option("--seed", seed, "random seed")->required();
    fanova->add_option("files", files, "curve CSV file")->required()->expected(1)->check(CLI::ExistingFile);
    add_output_options(fanova, common);

    std::string factors_path, full_formula, reduced_formula, categorical;
    std::vector<std::string> varying;
    auto* flm = app.add_subcommand("flm", "functional general linear model by Freedman-Lane permutation");
    add_measure_options(flm, measure, "erl");
    flm->add_option("--factors", factors_path, "CSV with one row of covariates per curve")->required()->check(CLI::ExistingFile);
    flm->add_option("--full", full_formula, "full model, e.g. \"Y ~ Group + Age\"")->required();
    flm->add_option("--reduced", reduced_formula, "reduced model, e.g. \"Y ~ Age\"")->required();
    flm->add_option("--categorical", categorical, "comma separated categorical columns");
    flm->add_option("--varying", varying, "NAME=FILE regressor curves on the response grid (repeatable)")
        ->allow_extra_args(false);
    flm->add_option("--method", method, "graph or frank")->check(CLI::IsMember({"graph", "frank"}))->capture_default_str();
    flm->add_flag("--contrasts", contrasts, "test pairwise differences of coefficients");
    flm->add_option("--nsim", nsim, "number of permutations")->capture_default_str();
    flm->add_option("--alpha", alpha, "significance level")->capture_default_str();
    flm->add_option("--seed", seed, "random seed")->required();
    flm->add_option("files", files, "response curve CSV file")->required()->expected(1)->check(CLI::ExistingFile);
    add_output_options(flm, common);

    std::size_t grid_cap = 100;
    auto* necdf = app.add_subcommand("necdf", "n-sample test of equal distributions through ecdfs");
    add_measure_options(necdf, measure, "erl");
    necdf->add_option("--grid-points", grid_cap, "largest number of grid points")->capture_default_str();
    necdf->add_option("--nsim", nsim, "number of permutations")->capture_default_str();
    necdf->add_option("--alpha", alpha, "significance level")->capture_default_str();
    necdf->add_option("--seed", seed, "random seed")->required();
    necdf->add_option("files", files, "CSV with one column per sample")->required()->expected(1)->check(CLI::ExistingFile);
    add_output_options(necdf, common);

    std::string primary;
    auto* composite = app.add_subcommand("composite", "two-stage adjusted test for a composite null");
    add_measure_options(composite, measure, "erl");
    composite->add_option("--alpha", alpha, "significance level")->capture_default_str();
    composite->add_option("--primary", primary, "first-stage file (default: first in lexicographic order)");
    composite->add_option("files", files, "directory of curve CSV files, or the files themselves")->required();
    add_output_options(composite, common);

    std::size_t s = 199, s2 = 199, grid_size = 100, n = 115;
    bool take_log = false;
    std::string data_path;
    auto* normality = app.add_subcommand("demo-normality", "graphical normality test through ecdf envelopes");
    add_measure_options(normality, measure, "erl");
    normality->add_option("--data", data_path, "CSV whose first column is the sample (default: lognormal draws)");
    normality->add_option("--n", n, "size of the generated sample")->capture_default_str();
    normality->add_flag("--log", take_log, "test the logarithm of the data");
    normality->add_option("--s", s, "number of first-stage sets")->capture_default_str();
    normality->add_option("--s2", s2, "curves per set")->capture_default_str();
    normality->add_option("--grid-size", grid_size, "ecdf grid points")->capture_default_str();
    normality->add_option("--alpha", alpha, "significance level")->capture_default_str();
    normality->add_option("--seed", seed, "random seed")->required();
    add_output_options(normality, common);

    std::size_t nboot = 2000, npoints = 100;
    double noise_sd = 0.1;
    auto* poly = app.add_subcommand("demo-polynomial", "bootstrap confidence band for a cubic regression");
    add_measure_options(poly, measure, "erl");
    poly->add_option("--coverage", coverage, "coverage of the band")->capture_default_str();
    poly->add_option("--bootstrap", nboot, "bootstrap replicates")->capture_default_str();
    poly->add_option("--n", npoints, "number of design points")->capture_default_str();
    poly->add_option("--sd", noise_sd, "noise standard deviation")->capture_default_str();
    poly->add_option("--seed", seed, "random seed")->required();
    add_output_options(poly, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (common.threads <= 0) {
            const char* env = std::getenv("GLOBENV_THREADS");
            common.threads = env ? std::max(1, std::atoi(env)) : 1;
        }
        set_thread_count(static_cast<std::size_t>(common.threads));
        const MeasureSpec spec = measure.spec();

        if (order->parsed()) {
            const std::vector<CurveSet> sets = read_sets(files);
            const MeasureResult m =
                sets.size() == 1 ? forder(sets.front(), spec) : forder(sets, spec, measure.mode());
            emit(common, ordering_to_json(m), "");
        } else if (central->parsed()) {
            const std::vector<CurveSet> sets = read_sets(files);
            const CombinedEnvelope env = central_region(sets, spec, coverage, measure.mode());
            emit(common, to_json(env), envelope_svg(env, sets));
        } else if (test->parsed()) {
            const std::vector<CurveSet> sets = read_sets(files);
            const CombinedEnvelope env = global_envelope_test(sets, spec, alpha, measure.mode());
            emit(common, to_json(env), envelope_svg(env, sets));
        } else if (box->parsed()) {
            const std::vector<CurveSet> sets = read_sets(files);
            const FBoxplotResult r = fboxplot(sets, spec, coverage, factor, measure.mode());
            std::vector<PlotPanel> panels;
            for (std::size_t g = 0; g < sets.size(); ++g) {
                PlotPanel p;
                p.title = fs::path(files[g]).filename().string();
                p.envelope = &r.central.components[g];
                p.extra_lower = r.whisker_lower[g];
                p.extra_upper = r.whisker_upper[g];
                panels.push_back(std::move(p));
            }
            emit(common, to_json(r), render_svg(panels));
        } else if (fanova->parsed()) {
            const CurveSet set = read_curve_set_csv(fs::path(files.front()));
            const Grouping groups = read_grouping(groups_path, group_column);
            const PermutationOptions o = permutation_options(measure, nsim, alpha, seed);
            const Variances v = variances == "unequal" ? Variances::Unequal : Variances::Equal;
            const FTestResult r =
                method == "frank" ? frank_fanova(set, groups, o, v) : graph_fanova(set, groups, contrasts, v, o);
            emit(common, to_json(r), ftest_svg(r));
        } else if (flm->parsed()) {
            FlmInput input{read_curve_set_csv(fs::path(files.front())),
                           read_factor_csv(fs::path(factors_path), split_names(categorical)),
                           {},
                           full_formula,
                           reduced_formula};
            for (const std::string& item : varying) {
                const auto eq = item.find('=');
                if (eq == std::string::npos) throw Error(ErrorCode::InvalidArgument, "--varying expects NAME=FILE");
                input.varying.emplace_back(item.substr(0, eq), read_curve_set_csv(fs::path(item.substr(eq + 1))));
            }
            const PermutationOptions o = permutation_options(measure, nsim, alpha, seed);
            const FTestResult r = method == "frank" ? frank_flm(input, o) : graph_flm(input, contrasts, o);
            emit(common, to_json(r), ftest_svg(r));
        } else if (necdf->parsed()) {
            const Samples samples = read_samples_csv(fs::path(files.front()));
            const std::vector<double> grid = default_ecdf_grid(samples.values, grid_cap);
            const FTestResult r =
                necdf_test(samples.values, grid, permutation_options(measure, nsim, alpha, seed), samples.names);
            emit(common, to_json(r), ftest_svg(r));
        } else if (composite->parsed()) {
            std::vector<std::string> paths;
            for (const std::string& f : files) {
                if (fs::is_directory(f)) {
                    for (const auto& entry : fs::directory_iterator(f))
                        if (entry.is_regular_file() && entry.path().extension() == ".csv")
                            paths.push_back(entry.path().string());
                } else {
                    paths.push_back(f);
                }
            }
            std::sort(paths.begin(), paths.end());
            if (!primary.empty()) {
                paths.erase(std::remove(paths.begin(), paths.end(), primary), paths.end());
                paths.insert(paths.begin(), primary);
            }
            if (paths.size() < 2) throw Error(ErrorCode::InconsistentReplicates, "at least two curve-set files are needed");
            std::vector<CurveSet> sets = read_sets(paths);
            CompositeInput input{sets.front(), std::vector<CurveSet>(sets.begin() + 1, sets.end())};
            const AdjustedResult r = adjusted_test(input, spec, alpha);
            emit(common, to_json(r), envelope_svg(r.envelope, input.primary, "adjusted envelope"));
        } else if (normality->parsed()) {
            std::vector<double> data;
            if (!data_path.empty()) {
                const Samples samples = read_samples_csv(fs::path(data_path));
                if (samples.values.empty()) throw Error(ErrorCode::ParseError, data_path + ": no columns");
                data = samples.values.front();
            } else {
                std::mt19937_64 rng = stream_rng(seed, 0x6c6f67);
                std::lognormal_distribution<double> law(0.0, 1.0);
                data.resize(n);
                for (double& v : data) v = law(rng);
            }
            if (take_log)
                for (double& v : data) {
                    if (!(v > 0.0)) throw Error(ErrorCode::DegenerateData, "log needs positive data");
                    v = std::log(v);
                }
            const CompositeInput input = gaussian_ecdf_pipeline(data, s, s2, grid_size, seed);
            const AdjustedResult r = adjusted_test(input, spec, alpha);
            json out = to_json(r);
            out["n"] = data.size();
            emit(common, out, envelope_svg(r.envelope, input.primary, "data ecdf against the fitted normal"));
        } else if (poly->parsed()) {
            std::string svg;
            const json out = demo_polynomial(seed, npoints, nboot, noise_sd, coverage, spec, svg);
            emit(common, out, svg);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kData;
    }
    return kOk;
}
