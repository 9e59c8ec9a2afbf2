// Command-line front end: reproducible matrix generation, neighbor-set
// Monte-Carlo statistics, neighbor-set tail bounds, phase-transition curves,
// SSMP/ER recovery, all emitted as CSV / plain-text artifacts.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "expander/bounds.hpp"
#include "expander/matrices.hpp"
#include "expander/phase.hpp"
#include "expander/recovery.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

std::string g_invocation;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_header(std::ostream& os) {
    os << "# expander_cli " << g_invocation << '\n';
    os << "# version " << kVersion << '\n';
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open output file " + path);
    return os;
}

// epsilon accepted as an exact fraction string ("1/6") or a decimal
double parse_epsilon(const std::string& text) {
    const auto slash = text.find('/');
    if (slash != std::string::npos) {
        const double num = std::stod(text.substr(0, slash));
        const double den = std::stod(text.substr(slash + 1));
        if (den == 0.0) throw std::invalid_argument("epsilon fraction has zero denominator");
        return num / den;
    }
    return std::stod(text);
}

// vectors are "index:value" lines; '#' starts a comment
std::vector<double> read_vector(const std::string& path, std::size_t length) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open vector file " + path);
    std::vector<double> v(length, 0.0);
    std::string line;
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        long long idx = 0;
        char sep = 0;
        double val = 0;
        if (!(ls >> idx >> sep >> val)) continue;
        if (sep != ':') throw std::runtime_error("bad vector entry in " + path);
        if (idx < 0 || static_cast<std::size_t>(idx) >= length)
            throw std::runtime_error("vector index out of range in " + path);
        v[static_cast<std::size_t>(idx)] = val;
    }
    return v;
}

void write_vector(std::ostream& os, std::span<const double> v) {
    for (std::size_t i = 0; i < v.size(); ++i)
        if (v[i] != 0.0) os << i << ':' << fmt17(v[i]) << '\n';
}

// ---------------------------------------------------------------------------

struct GenConfig {
    int n = 0, N = 0, d = 0;
    bool sse = false;
    bool with_replacement = false;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_gen(const GenConfig& cfg) {
    const auto model = cfg.with_replacement ? expander::SupportModel::WithReplacement
                                            : expander::SupportModel::WithoutReplacement;
    const auto m = expander::generate(cfg.n, cfg.N, cfg.d, cfg.sse, cfg.seed, model);
    auto os = open_out(cfg.out);
    expander::write_matrix(os, m);
    return 0;
}

struct NeighborStatsConfig {
    int n = 0, d = 0, kmin = 1, kmax = 0, kstep = 1;
    long long trials = 0;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out;
};

int cmd_neighbor_stats(const NeighborStatsConfig& cfg) {
    std::vector<int> grid;
    for (int k = cfg.kmin; k <= cfg.kmax; k += cfg.kstep) grid.push_back(k);
    const auto stats =
        expander::monte_carlo_neighbors(cfg.n, cfg.d, grid, cfg.trials, cfg.seed, cfg.threads);
    auto os = open_out(cfg.out);
    write_header(os);
    os << "k,mean,std,expected,rel_error\n";
    for (std::size_t i = 0; i < stats.k.size(); ++i)
        os << stats.k[i] << ',' << fmt17(stats.mean[i]) << ',' << fmt17(stats.stddev[i]) << ','
           << fmt17(stats.expected[i]) << ',' << fmt17(stats.rel_error[i]) << '\n';
    return 0;
}

struct BoundConfig {
    int n = 0, d = 0, s = 0;
    double as_min = -1, as_max = -1, as_step = 1;
    std::string out;
};

int cmd_bound(const BoundConfig& cfg) {
    const double a_cap = std::min<double>(static_cast<double>(cfg.d) * cfg.s, cfg.n);
    const double lo = cfg.as_min < 0 ? cfg.d : cfg.as_min;
    const double hi = cfg.as_max < 0 ? a_cap : cfg.as_max;
    if (!(lo >= cfg.d && hi <= a_cap && lo <= hi))
        throw std::invalid_argument("bound: a_s sweep outside [d, min(ds, n)]");
    const double a_hat = expander::expected_neighbors(cfg.n, cfg.d, cfg.s);

    auto os = open_out(cfg.out);
    write_header(os);
    os << "a_s,bound,vacuous";
    {
        const auto chain = expander::expected_chain(cfg.n, cfg.d, cfg.s);
        for (int j = 0; j <= chain.levels(); ++j) os << ",a_" << fmt17(chain.index_of(j));
    }
    os << '\n';
    for (double a = hi; a >= lo - 1e-12; a -= cfg.as_step) {
        const expander::NeighborChain chain =
            a < a_hat ? expander::solve_constrained_chain(cfg.n, cfg.d, cfg.s, a)
                      : expander::expected_chain(cfg.n, cfg.d, cfg.s);
        const double bound =
            expander::p_max(cfg.s, cfg.d) *
            std::exp(cfg.n * expander::big_psi(cfg.n, cfg.d, cfg.s, chain));
        os << fmt17(a) << ',' << fmt17(bound) << ',' << (bound > 1.0 ? 1 : 0);
        for (double v : chain.values) os << ',' << fmt17(v);
        os << '\n';
    }
    return 0;
}

struct PhaseConfig {
    std::string kind = "exp";
    int n = 0, d = 0;
    std::string eps_text;
    double delta_min = 0.05, delta_max = 0.95, delta_step = 0.05;
    double sparsity_rescale = 1.0;
    int threads = 1;
    std::string overlay;
    std::string out;
};

int cmd_phase(const PhaseConfig& cfg) {
    static const std::map<std::string, expander::CurveKind> kinds = {
        {"exp", expander::CurveKind::Exp},
        {"bi", expander::CurveKind::Bi},
        {"l1", expander::CurveKind::AlgL1},
        {"ssmp", expander::CurveKind::AlgSsmp},
        {"er", expander::CurveKind::AlgEr}};
    const auto it = kinds.find(cfg.kind);
    if (it == kinds.end()) throw std::invalid_argument("phase: unknown kind " + cfg.kind);
    const bool needs_eps = it->second == expander::CurveKind::Exp || it->second == expander::CurveKind::Bi;
    if (needs_eps && cfg.eps_text.empty())
        throw std::invalid_argument("phase: --eps required for kind exp/bi");
    if (!needs_eps && !cfg.eps_text.empty())
        throw std::invalid_argument("phase: --eps is fixed by kind " + cfg.kind +
                                    " and cannot be overridden");
    const double eps = needs_eps ? parse_epsilon(cfg.eps_text) : 0.0;
    if (cfg.sparsity_rescale <= 0.0) throw std::invalid_argument("phase: rescale must be positive");

    std::vector<double> grid;
    for (double x = cfg.delta_min; x <= cfg.delta_max + 1e-12; x += cfg.delta_step)
        grid.push_back(x);
    const auto curve = expander::phase_curve(grid, cfg.d, eps, cfg.n, it->second, cfg.threads);

    std::optional<std::map<double, double>> overlay;
    if (!cfg.overlay.empty()) {
        overlay.emplace();
        std::ifstream is(cfg.overlay);
        if (!is) throw std::runtime_error("cannot open overlay file " + cfg.overlay);
        std::string line;
        while (std::getline(is, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::replace(line.begin(), line.end(), ',', ' ');
            std::istringstream ls(line);
            double dd = 0, rr = 0;
            if (ls >> dd >> rr) (*overlay)[dd] = rr;
        }
    }

    auto os = open_out(cfg.out);
    write_header(os);
    os << "delta,rho";
    if (overlay) os << ",rho_overlay";
    os << '\n';
    for (std::size_t i = 0; i < curve.delta.size(); ++i) {
        os << fmt17(curve.delta[i]) << ',';
        if (curve.status[i] == expander::RootStatus::Ok)
            os << fmt17(curve.rho[i] / cfg.sparsity_rescale);
        // no-root markers are emitted as empty cells
        if (overlay) {
            os << ',';
            for (const auto& [dd, rr] : *overlay)
                if (std::abs(dd - curve.delta[i]) < 1e-9) { os << fmt17(rr); break; }
        }
        os << '\n';
    }
    return 0;
}

struct RecoverConfig {
    std::string alg = "er";
    std::string matrix_path;
    std::string y_path;
    int synth_k = 0;
    std::uint64_t synth_seed = 0;
    int k = 0;
    std::string eps_text = "1/4";
    int c = 2;
    int T = 0;
    std::string out;
};

int cmd_recover(const RecoverConfig& cfg) {
    const auto m = expander::load_matrix(cfg.matrix_path);
    std::vector<double> y;
    std::optional<std::vector<double>> truth;
    int k = cfg.k;

    if (!cfg.y_path.empty()) {
        y = read_vector(cfg.y_path, static_cast<std::size_t>(m.rows()));
        if (k <= 0) throw std::invalid_argument("recover: --k required with --y");
    } else if (cfg.synth_k > 0) {
        k = cfg.synth_k;
        if (k > m.cols()) throw std::invalid_argument("recover: synth k exceeds N");
        auto rng = expander::derive_stream(cfg.synth_seed, 1, 0);
        std::vector<double> x(m.cols(), 0.0);
        for (int placed = 0; placed < k;) {
            const int j = static_cast<int>(rng.uniform_below(m.cols() - 1));
            if (x[j] != 0.0) continue;
            const double mag = 1.0 + static_cast<double>(rng.uniform_below(1));  // {1, 2}
            x[j] = (rng.next() & 1) ? mag : -mag;
            ++placed;
        }
        truth = x;
        y = m.multiply(x);
    } else {
        throw std::invalid_argument("recover: provide --y or --synth-k");
    }

    expander::RecoveryProblem problem(m, y, k);
    expander::RecoveryResult result;
    if (cfg.alg == "er") {
        result = expander::er_recover(problem, parse_epsilon(cfg.eps_text));
    } else if (cfg.alg == "ssmp") {
        result = expander::ssmp_recover(problem, cfg.c, cfg.T);
    } else {
        throw std::invalid_argument("recover: unknown algorithm " + cfg.alg);
    }

    bool exact = false;
    if (truth) {
        exact = true;
        for (int j = 0; j < m.cols(); ++j)
            if (std::abs((*truth)[j] - result.estimate[j]) > 1e-9) { exact = false; break; }
    }

    std::cout << "algorithm:  " << cfg.alg << '\n'
              << "n x N, d:   " << m.rows() << " x " << m.cols() << ", " << m.degree() << '\n'
              << "k:          " << k << '\n'
              << "iterations: " << result.iterations << '\n'
              << "converged:  " << (result.converged ? "yes" : "no") << '\n'
              << "residual_l1: " << fmt17(result.residual_l1) << '\n';
    if (truth) std::cout << "exact_recovery: " << (exact ? "yes" : "no") << '\n';

    if (!cfg.out.empty()) {
        auto os = open_out(cfg.out);
        write_header(os);
        os << "# estimate as index:value\n";
        write_vector(os, result.estimate);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        if (i > 1) g_invocation += ' ';
        g_invocation += argv[i];
    }

    CLI::App app{"sparse expander matrices: tail bounds, phase transitions, recovery"};
    app.require_subcommand(1);

    GenConfig gen;
    auto* cgen = app.add_subcommand("gen", "generate an SE/SSE matrix file");
    cgen->add_option("--n", gen.n, "rows")->required();
    cgen->add_option("--N", gen.N, "columns")->required();
    cgen->add_option("--d", gen.d, "nonzeros per column")->required();
    cgen->add_flag("--sse", gen.sse, "signed entries (+-1) instead of all-ones");
    cgen->add_flag("--with-replacement", gen.with_replacement,
                   "draw row indices with replacement (duplicates collapse)");
    cgen->add_option("--seed", gen.seed, "RNG seed")->required();
    cgen->add_option("--out", gen.out, "output matrix file")->required();

    NeighborStatsConfig ns;
    auto* cns = app.add_subcommand("neighbor-stats", "Monte-Carlo |A_k| statistics vs expected");
    cns->add_option("--n", ns.n, "rows")->required();
    cns->add_option("--d", ns.d, "nonzeros per column")->required();
    cns->add_option("--kmin", ns.kmin, "smallest set size");
    cns->add_option("--kmax", ns.kmax, "largest set size")->required();
    cns->add_option("--kstep", ns.kstep, "set size stride");
    cns->add_option("--trials", ns.trials, "number of matrix realizations")->required();
    cns->add_option("--seed", ns.seed, "RNG seed")->required();
    cns->add_option("--threads", ns.threads, "worker threads");
    cns->add_option("--out", ns.out, "output CSV")->required();

    BoundConfig bd;
    auto* cbd = app.add_subcommand("bound", "neighbor-set tail bound over an a_s sweep");
    cbd->add_option("--n", bd.n, "rows")->required();
    cbd->add_option("--d", bd.d, "nonzeros per column")->required();
    cbd->add_option("--s", bd.s, "set size")->required();
    cbd->add_option("--as-min", bd.as_min, "sweep start (default d)");
    cbd->add_option("--as-max", bd.as_max, "sweep end (default min(ds, n))");
    cbd->add_option("--as-step", bd.as_step, "sweep step");
    cbd->add_option("--out", bd.out, "output CSV")->required();

    PhaseConfig ph;
    auto* cph = app.add_subcommand("phase", "phase-transition curve rho(delta)");
    cph->add_option("--kind", ph.kind, "exp | bi | l1 | ssmp | er")->required();
    cph->add_option("--n", ph.n, "rows")->required();
    cph->add_option("--d", ph.d, "nonzeros per column")->required();
    cph->add_option("--eps", ph.eps_text, "expansion deficit (fraction like 1/6, or decimal)");
    cph->add_option("--delta-min", ph.delta_min, "grid start");
    cph->add_option("--delta-max", ph.delta_max, "grid end");
    cph->add_option("--delta-step", ph.delta_step, "grid step");
    cph->add_option("--sparsity-rescale", ph.sparsity_rescale,
                    "divide emitted rho by this factor (guarantee-level sparsity rescale)");
    cph->add_option("--threads", ph.threads, "worker threads");
    cph->add_option("--overlay", ph.overlay, "external delta,rho CSV passed through as a column");
    cph->add_option("--out", ph.out, "output CSV")->required();

    RecoverConfig rc;
    auto* crc = app.add_subcommand("recover", "run ER or SSMP on a measurement vector");
    crc->add_option("--alg", rc.alg, "er | ssmp")->required();
    crc->add_option("--matrix", rc.matrix_path, "matrix file from gen")->required();
    crc->add_option("--y", rc.y_path, "measurement vector file (index:value lines)");
    crc->add_option("--k", rc.k, "target sparsity (required with --y)");
    crc->add_option("--synth-k", rc.synth_k, "synthesize a k-sparse signal instead of reading --y");
    crc->add_option("--seed", rc.synth_seed, "seed for the synthesized signal");
    crc->add_option("--eps", rc.eps_text, "ER gap-election threshold parameter");
    crc->add_option("--c", rc.c, "SSMP expansion factor (inner steps = (c-1)k)");
    crc->add_option("--T", rc.T, "SSMP outer iterations (0 = auto)");
    crc->add_option("--out", rc.out, "write the estimate as index:value CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (cgen->parsed()) return cmd_gen(gen);
        if (cns->parsed()) return cmd_neighbor_stats(ns);
        if (cbd->parsed()) return cmd_bound(bd);
        if (cph->parsed()) return cmd_phase(ph);
        if (crc->parsed()) {
            if (rc.synth_k > 0 && crc->count("--seed") == 0)
                throw std::invalid_argument("recover: --seed is required with --synth-k");
            return cmd_recover(rc);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
