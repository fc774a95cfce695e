// qnc — joint photocount statistics and non-classicality analysis.
//
// Subcommands:
//   gen        generate a model photocount histogram (JSON/CSV)
//   eval       evaluate criteria on a histogram and print verdicts
//   depth      non-classicality depth (ordering-parameter root) per criterion
//   nccp       non-classicality counting parameter (noise resistance)
//   scan       family scans over index grids, with optional bootstrap errors
//   transform  ordering transform of a distribution / kernel matrix dump
//   check      built-in property suites (deterministic, exit 3 on failure)
//   defaults   machine-readable list of every tunable default
//
// Exit codes: 0 success, 1 usage, 2 validation or bad input, 3 numerical.
// All output is deterministic: identical invocations print identical bytes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qnc/qnc.hpp"

namespace {

/// Command-grammar failures that CLI11 cannot catch itself (exit code 1).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ------------------------------------------------------------------- helpers

/// CSV field quoting: quote iff the field contains ',' or '"'.
std::string csv_field(const std::string& s) {
    if (s.find(',') == std::string::npos && s.find('"') == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

/// Split a criterion label into family head and index part at the first ':'.
std::pair<std::string, std::string> split_label(const std::string& label) {
    auto pos = label.find(':');
    if (pos == std::string::npos) return {label, ""};
    return {label.substr(0, pos), label.substr(pos + 1)};
}

qnc::HistFormat parse_format(const std::string& s) {
    if (s == "json") return qnc::HistFormat::json;
    if (s == "csv") return qnc::HistFormat::csv;
    return qnc::HistFormat::autodetect;
}

qnc::RawHistogram load_input(const std::string& path, const std::string& format) {
    std::ifstream f(path);
    if (!f.good()) throw qnc::ValidationError("cannot open input file: " + path);
    return qnc::load_counts(f, parse_format(format));
}

/// Stream sink: --out file when given, stdout otherwise.
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_.good())
                throw qnc::ValidationError("cannot open output file: " + path);
        }
    }
    std::ostream& os() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

int parse_int_token(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    int v = 0;
    try {
        v = std::stoi(s, &pos);
    } catch (...) {
        throw UsageError(what + ": '" + s + "' is not an integer");
    }
    if (pos != s.size()) throw UsageError(what + ": '" + s + "' is not an integer");
    return v;
}

std::vector<int> parse_int_list(const std::string& s, std::size_t want,
                                const std::string& what) {
    std::vector<int> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i)
        if (i == s.size() || s[i] == ',') {
            out.push_back(parse_int_token(s.substr(start, i - start), what));
            start = i + 1;
        }
    if (out.size() != want)
        throw UsageError(what + ": expected " + std::to_string(want) +
                         " comma-separated integers, got '" + s + "'");
    return out;
}

std::vector<qnc::Criterion> parse_selectors(const std::vector<std::string>& specs) {
    std::vector<qnc::Criterion> out;
    out.reserve(specs.size());
    for (const std::string& s : specs) out.push_back(qnc::parse_criterion(s));
    return out;
}

// ---------------------------------------------------------------------- gen

struct GenOpts {
    bool ideal_twin = false, coherent = false, thermal = false, noisy_twin = false;
    std::vector<std::string> params;
    int cutoff = -1;
    std::string format = "json";
    std::string out;
};

/// Parse KEY=value tokens against the exact key set a model requires.
std::map<std::string, double> model_params(const std::vector<std::string>& tokens,
                                           const std::vector<std::string>& keys) {
    std::map<std::string, double> m;
    for (const std::string& t : tokens) {
        auto eq = t.find('=');
        if (eq == std::string::npos || eq == 0)
            throw UsageError("expected KEY=value, got '" + t + "'");
        std::string key = t.substr(0, eq), val = t.substr(eq + 1);
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            std::string allowed;
            for (const std::string& k : keys) allowed += (allowed.empty() ? "" : ", ") + k;
            throw UsageError("unknown parameter '" + key + "' (expected: " + allowed + ")");
        }
        if (m.count(key)) throw UsageError("duplicate parameter '" + key + "'");
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(val, &pos);
        } catch (...) {
            pos = std::string::npos;
        }
        if (pos != val.size())
            throw UsageError("parameter '" + key + "': '" + val + "' is not a number");
        m[key] = v;
    }
    for (const std::string& k : keys)
        if (!m.count(k)) throw UsageError("missing parameter '" + k + "='");
    return m;
}

int run_gen(const GenOpts& o) {
    int models = int(o.ideal_twin) + int(o.coherent) + int(o.thermal) + int(o.noisy_twin);
    if (models != 1)
        throw UsageError("pick exactly one source model: --ideal-twin, --coherent, "
                         "--thermal or --noisy-twin");
    qnc::JointPMF pmf = [&] {
        if (o.ideal_twin) {
            auto p = model_params(o.params, {"B", "Mp"});
            return qnc::gen_ideal_twin(p["B"], p["Mp"], o.cutoff);
        }
        if (o.coherent) {
            auto p = model_params(o.params, {"mus", "mui"});
            return qnc::gen_coherent_product(p["mus"], p["mui"], o.cutoff);
        }
        if (o.thermal) {
            auto p = model_params(o.params, {"nus", "Ms", "nui", "Mi"});
            return qnc::gen_thermal_product(p["nus"], p["Ms"], p["nui"], p["Mi"], o.cutoff);
        }
        auto p = model_params(o.params, {"B", "Mp", "noise_s_mean", "noise_s_modes",
                                         "noise_i_mean", "noise_i_modes"});
        return qnc::gen_noisy_twin(p["B"], p["Mp"], {p["noise_s_mean"], p["noise_s_modes"]},
                                   {p["noise_i_mean"], p["noise_i_modes"]}, o.cutoff);
    }();
    Output sink(o.out);
    if (o.format == "csv")
        qnc::save_histogram_csv(sink.os(), pmf);
    else
        qnc::save_histogram_json(sink.os(), pmf);
    return 0;
}

// --------------------------------------------------------- eval/depth/nccp

struct EvalOpts {
    std::vector<std::string> criteria;
    std::string in, format = "auto", out;
    double boundary_eps = 1e-12;
    int workers = 1;
};

int run_eval(const EvalOpts& o) {
    std::vector<qnc::Criterion> crits = parse_selectors(o.criteria);
    qnc::JointPMF pmf = load_input(o.in, o.format).to_pmf();
    Output sink(o.out);
    sink.os() << "criterion,indices,value,verdict\n";
    for (const qnc::Criterion& c : crits) {
        double v = qnc::eval_probability(c, pmf);
        const char* verdict = v < -o.boundary_eps
                                  ? "nonclassical"
                                  : (v <= o.boundary_eps ? "classical boundary" : "classical");
        auto [head, idx] = split_label(c.label);
        sink.os() << csv_field(head) << ',' << csv_field(idx) << ','
                  << qnc::format_double(v) << ',' << verdict << '\n';
    }
    return 0;
}

struct QuantOpts {
    std::vector<std::string> criteria;
    std::string in, format = "auto", out;
    double modes = 1.0;
    double eps_stat = 0.0;
    double nu_cap = 1e3;
    int workers = 1;
};

int run_depth(const QuantOpts& o) {
    std::vector<qnc::Criterion> crits = parse_selectors(o.criteria);
    qnc::JointPMF pmf = load_input(o.in, o.format).to_pmf();
    qnc::OrderingEvaluator ev(pmf, o.modes);
    Output sink(o.out);
    sink.os() << "criterion,indices,value,tau,m_tau,bracket_lo,bracket_hi,flag\n";
    for (const qnc::Criterion& c : crits) {
        qnc::NCResult r = qnc::ncd(c, ev, o.eps_stat);
        auto [head, idx] = split_label(c.label);
        sink.os() << csv_field(head) << ',' << csv_field(idx) << ','
                  << qnc::format_double(r.origin_value) << ','
                  << (r.tau ? qnc::format_double(*r.tau) : "") << ','
                  << (r.tau ? qnc::format_double(o.modes * *r.tau) : "") << ','
                  << qnc::format_double(r.bracket.first) << ','
                  << qnc::format_double(r.bracket.second) << ','
                  << qnc::detail::flag_string(r) << '\n';
    }
    return 0;
}

int run_nccp(const QuantOpts& o) {
    std::vector<qnc::Criterion> crits = parse_selectors(o.criteria);
    qnc::JointPMF pmf = load_input(o.in, o.format).to_pmf();
    Output sink(o.out);
    sink.os() << "criterion,indices,value,nu,bracket_lo,bracket_hi,flag\n";
    for (const qnc::Criterion& c : crits) {
        qnc::NCResult r = qnc::nccp(c, pmf, o.modes, o.eps_stat, o.nu_cap);
        auto [head, idx] = split_label(c.label);
        sink.os() << csv_field(head) << ',' << csv_field(idx) << ','
                  << qnc::format_double(r.origin_value) << ','
                  << (r.nu ? qnc::format_double(*r.nu) : "") << ','
                  << qnc::format_double(r.bracket.first) << ','
                  << qnc::format_double(r.bracket.second) << ','
                  << qnc::detail::flag_string(r) << '\n';
    }
    return 0;
}

// --------------------------------------------------------------------- scan

struct ScanOpts {
    std::string scenario, family, range, sum;
    int max_index = -1, radius = -1;
    std::string in, format = "auto", out;
    double modes = 1.0, eps_stat = 0.0;
    int resamples = 0;
    std::uint64_t seed = 1;
    int workers = 1;
    bool has_max_index = false, has_radius = false;
};

qnc::GridRange parse_range(const std::string& s) {
    std::vector<int> v = parse_int_list(s, 4, "--range");
    return {v[0], v[1], v[2], v[3]};
}

int run_scan(const ScanOpts& o) {
    // validate the scenario's option grammar before touching any input
    qnc::GridFamily grid_fam{};
    qnc::MinBallFamily ball_fam{};
    qnc::GridRange range{};
    std::vector<int> sum;
    if (o.scenario == "grid") {
        static const std::map<std::string, qnc::GridFamily> fams = {
            {"Ec1", qnc::GridFamily::ec_l1},
            {"Ec2", qnc::GridFamily::ec_l2},
            {"D3sys2", qnc::GridFamily::sys2_m1},
            {"Dsys3", qnc::GridFamily::sys3_m1}};
        auto it = fams.find(o.family);
        if (it == fams.end())
            throw UsageError("grid scans need --family Ec1|Ec2|D3sys2|Dsys3");
        if (o.range.empty()) throw UsageError("grid scans need --range a_lo,a_hi,b_lo,b_hi");
        grid_fam = it->second;
        range = parse_range(o.range);
    } else if (o.scenario == "touching") {
        if (!o.has_max_index) throw UsageError("touching scans need --max-index");
    } else if (o.scenario == "local") {
        if (!o.has_radius) throw UsageError("local scans need --radius");
        if (o.range.empty()) throw UsageError("local scans need --range a_lo,a_hi,b_lo,b_hi");
        range = parse_range(o.range);
    } else {  // index-sum (membership enforced by the option check)
        if (o.family == "DB3")
            ball_fam = qnc::MinBallFamily::triples;
        else if (o.family == "DB4")
            ball_fam = qnc::MinBallFamily::quadruples;
        else
            throw UsageError("index-sum scans need --family DB3|DB4");
        if (o.sum.empty()) throw UsageError("index-sum scans need --sum lo,hi");
        sum = parse_int_list(o.sum, 2, "--sum");
    }

    qnc::RawHistogram h = load_input(o.in, o.format);
    qnc::JointPMF pmf = h.to_pmf();
    qnc::ScanReport rep;
    if (o.scenario == "grid")
        rep = qnc::scan_grid(grid_fam, pmf, o.modes, range, o.eps_stat);
    else if (o.scenario == "touching")
        rep = qnc::scan_touching(pmf, o.modes, o.max_index, o.eps_stat);
    else if (o.scenario == "local")
        rep = qnc::scan_local(pmf, o.modes, o.radius, range, o.eps_stat);
    else
        rep = qnc::scan_index_sum(ball_fam, pmf, o.modes, sum[0], sum[1], o.eps_stat);
    if (o.resamples > 0)
        rep.errors = qnc::bootstrap_errors(h, rep, o.resamples, o.seed);
    Output sink(o.out);
    sink.os() << qnc::scan_report_csv(rep);
    return 0;
}

// ---------------------------------------------------------------- transform

struct TransformOpts {
    std::string in, format = "auto", out;
    double s = 1.0;
    double modes = 1.0;
    bool dump_kernel = false;
    int max_n = 10;
    int precision_bits = 0;
};

int run_transform(const TransformOpts& o) {
    Output sink(o.out);
    if (o.dump_kernel) {
        sink.os() << "n,m,value\n";
        for (int n = 0; n <= o.max_n; ++n)
            for (int m = 0; m <= o.max_n; ++m) {
                double v = o.precision_bits > 0
                               ? qnc::kernel_entry(n, m, o.s, o.modes, o.precision_bits)
                               : qnc::kernel_entry_auto(n, m, o.s, o.modes);
                sink.os() << n << ',' << m << ',' << qnc::format_double(v) << '\n';
            }
        return 0;
    }
    if (o.in.empty()) throw UsageError("transform needs --in FILE or --dump-kernel");
    qnc::JointPMF pmf = load_input(o.in, o.format).to_pmf();
    qnc::SignedTable t = qnc::apply_ordering(pmf, o.s, o.modes);
    sink.os() << "n_s,n_i,value\n";
    for (int n = 0; n <= t.n_max_s; ++n)
        for (int m = 0; m <= t.n_max_i; ++m)
            sink.os() << n << ',' << m << ',' << qnc::format_double(t.at(n, m)) << '\n';
    return 0;
}

// -------------------------------------------------------------------- check

struct SuiteResult {
    int checks = 0;
    std::string failure;  ///< empty = pass

    void expect(bool ok, const std::string& what) {
        ++checks;
        if (!ok && failure.empty()) failure = what;
    }
};

qnc::JointPMF random_pmf(std::mt19937_64& rng, int cs, int ci) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::vector<double>> rows(cs + 1, std::vector<double>(ci + 1, 0.0));
    double total = 0.0;
    for (auto& r : rows)
        for (double& x : r) {
            x = u(rng);
            total += x;
        }
    for (auto& r : rows)
        for (double& x : r) x /= total;
    return qnc::JointPMF::from_dense(rows);
}

/// Triangular/diagonal values of the exact ordering weight, kernel column
/// sums, and the photocount-ordering identity.
SuiteResult suite_kernel_identities() {
    SuiteResult r;
    for (double alpha : {0.0, 0.5, 1.0, 79.0})
        for (int n = 0; n <= 12; ++n)
            for (int m = 0; m <= 12; ++m) {
                if (n < m)
                    r.expect(qnc::s_function_exact(n, m, qnc::rational(alpha)) == 0,
                             "weight not zero above the diagonal");
                else if (n == m)
                    r.expect(qnc::s_function_exact(n, m, qnc::rational(alpha)) == 1,
                             "weight not one on the diagonal");
            }
    for (double s : {-0.5, 0.0, 0.5})
        for (double modes : {1.0, 80.0}) {
            qnc::OrderingKernel k = qnc::build_kernel(s, modes, 12);
            for (int m = 0; m <= k.N_in; ++m) {
                double sum = 0.0;
                for (int n = 0; n <= k.N_out; ++n) sum += k.entry(n, m);
                r.expect(std::abs(sum - 1.0) < 1e-9, "kernel column sum off unity");
            }
        }
    qnc::OrderingKernel id = qnc::build_kernel(1.0, 7.5, 10);
    for (int n = 0; n <= id.N_out; ++n)
        for (int m = 0; m <= id.N_in; ++m)
            r.expect(id.entry(n, m) == (n == m ? 1.0 : 0.0),
                     "photocount ordering is not the identity");
    return r;
}

/// Factorial moments of the transformed table equal the transformed moments.
SuiteResult suite_transform_duality() {
    SuiteResult r;
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 3; ++rep) {
        qnc::JointPMF pmf = random_pmf(rng, 5, 5);
        qnc::MomentVector mv = qnc::moments_of(pmf, 3);
        for (double s : {0.5, -0.5})
            for (double modes : {1.0, 8.0}) {
                qnc::MomentVector tv = qnc::transform_moments(mv, s, modes);
                qnc::SignedTable tab = qnc::apply_ordering(pmf, s, modes);
                for (int k = 0; k <= 3; ++k)
                    for (int l = 0; l <= 3; ++l) {
                        double a = tab.factorial_moment(k, l), b = tv.at(k, l);
                        r.expect(std::abs(a - b) <= 1e-6 * std::max(std::abs(b), 1e-300),
                                 "moment/distribution transform mismatch");
                    }
            }
    }
    return r;
}

/// The two-sided decomposition of the parametric difference criteria.
SuiteResult suite_majorization_ladder() {
    SuiteResult r;
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        qnc::JointPMF pmf = random_pmf(rng, 5, 5);
        std::uniform_int_distribution<int> dk(1, 5);
        int k = dk(rng);
        std::uniform_int_distribution<int> dl(1, std::min(k, 3));
        int l = dl(rng);
        std::uniform_int_distribution<int> dm(1, l);
        int m = dm(rng);
        r.expect(qnc::majorization_identity_residual(pmf, k, l, m) < 1e-10,
                 "ladder identity residual too large");
    }
    return r;
}

/// No implemented criterion may flag coherent or chaotic product light.
SuiteResult suite_classical_soundness() {
    SuiteResult r;
    std::vector<qnc::Criterion> crits;
    for (const char* spec :
         {"E:2,1,1", "Ec:1,1,1", "Ec:2,2,2", "E4:0,0,1,1", "E4c:2,1,1,1",
          "CS:N=1,1;L=2,0", "M2:L=1,0;N=0,1", "M:K=0,0;L=1,0;N=0,1",
          "D3:(3,1,0)/(2,1,1)", "D4:(3,2,1,0)/(2,2,1,1)", "D3sys1:2,1,1",
          "D3sys2:2,1,1", "Dsys3:2,2,1", "DB3:2,1,1", "DB4:2,1,1,1", "Dmn:1,1,2,1"})
        crits.push_back(qnc::parse_criterion(spec));
    for (const qnc::CatalogEntry& e : qnc::catalog())
        crits.push_back(qnc::catalog_criterion(e));

    const std::vector<qnc::JointPMF> fields = {
        qnc::gen_coherent_product(0.4, 1.1, 15),
        qnc::gen_coherent_product(1.0, 1.0, 15),
        qnc::gen_thermal_product(0.5, 2.0, 0.3, 1.0, 15),
    };
    for (const qnc::JointPMF& pmf : fields)
        for (const qnc::Criterion& c : crits)
            r.expect(qnc::eval_probability(c, pmf) >= -1e-10,
                     "criterion " + c.label + " fired on classical light");

    qnc::Criterion c = qnc::parse_criterion("A:E001");
    qnc::NCResult d = qnc::ncd(c, fields[1], 1.0, 1e-10);
    r.expect(d.tau && *d.tau == 0.0 && !d.nonclassical, "nonzero depth on classical light");
    qnc::NCResult n = qnc::nccp(c, fields[1], 1.0, 1e-10);
    r.expect(n.nu && *n.nu == 0.0, "nonzero noise resistance on classical light");
    return r;
}

int run_check() {
    const std::vector<std::pair<std::string, SuiteResult (*)()>> suites = {
        {"kernel-identities", suite_kernel_identities},
        {"transform-duality", suite_transform_duality},
        {"majorization-ladder", suite_majorization_ladder},
        {"classical-soundness", suite_classical_soundness},
    };
    int passed = 0;
    for (const auto& [name, fn] : suites) {
        SuiteResult r = fn();
        if (r.failure.empty()) {
            ++passed;
            std::cout << "ok " << name << " (" << r.checks << " checks)\n";
        } else {
            std::cout << "FAIL " << name << ": " << r.failure << '\n';
        }
    }
    std::cout << "check: " << passed << "/" << suites.size() << " suites passed\n";
    return passed == int(suites.size()) ? 0 : 3;
}

// ----------------------------------------------------------------- defaults

int run_defaults() {
    // keys sorted so the output doubles as a stable config reference
    std::cout << "bisection_abs_width=0.0001\n"
              << "bisection_rel_width=0.0001\n"
              << "boundary_eps=1e-12\n"
              << "delta_s=0.001\n"
              << "eps_stat=0\n"
              << "format=auto\n"
              << "generator_tail_tol=" << qnc::format_double(qnc::kGeneratorTailTol) << '\n'
              << "grid_points=33\n"
              << "kernel_residual_target=1e-10\n"
              << "min_resamples=100\n"
              << "modes=1\n"
              << "nu_cap=1000\n"
              << "nu_start=0.01\n"
              << "precision_bits=0\n"
              << "seed=1\n"
              << "tail_tol=1e-12\n"
              << "workers=1\n";
    return 0;
}

// ------------------------------------------------------------------- wiring

void add_input_opts(CLI::App* cmd, std::string& in, std::string& format) {
    cmd->add_option("--in", in, "input histogram (JSON or CSV)")->required();
    cmd->add_option("--format", format, "input format: json, csv or auto")
        ->check(CLI::IsMember({"json", "csv", "auto"}))
        ->capture_default_str();
}

void add_workers_opt(CLI::App* cmd, int& workers) {
    cmd->add_option("--workers", workers,
                    "worker count; evaluation is sequential and bit-stable, so any "
                    "value yields identical output")
        ->check(CLI::Range(1, 1 << 20))
        ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"joint photocount statistics and non-classicality analysis"};
    app.require_subcommand(1);

    GenOpts g;
    CLI::App* gen = app.add_subcommand("gen", "generate a model photocount histogram");
    gen->add_flag("--ideal-twin", g.ideal_twin, "ideal pair source (B=, Mp=)");
    gen->add_flag("--coherent", g.coherent, "coherent product (mus=, mui=)");
    gen->add_flag("--thermal", g.thermal, "chaotic product (nus=, Ms=, nui=, Mi=)");
    gen->add_flag("--noisy-twin", g.noisy_twin,
                  "pair source with chaotic noise (B=, Mp=, noise_s_mean=, "
                  "noise_s_modes=, noise_i_mean=, noise_i_modes=)");
    gen->add_option("params", g.params, "model parameters as KEY=value");
    gen->add_option("--cutoff", g.cutoff,
                    "photocount cutoff per arm (default: auto, tail below 1e-13)");
    gen->add_option("--format", g.format, "output format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    gen->add_option("--out", g.out, "output file (default: stdout)");

    EvalOpts e;
    CLI::App* eval = app.add_subcommand("eval", "evaluate criteria and print verdicts");
    eval->add_option("--criterion", e.criteria, "criterion selector (repeatable)")
        ->required();
    add_input_opts(eval, e.in, e.format);
    eval->add_option("--boundary-eps", e.boundary_eps,
                     "half-width of the 'classical boundary' verdict band")
        ->capture_default_str();
    eval->add_option("--out", e.out, "output file (default: stdout)");
    add_workers_opt(eval, e.workers);

    QuantOpts d;
    CLI::App* depth = app.add_subcommand("depth", "ordering depth per criterion");
    depth->add_option("--criterion", d.criteria, "criterion selector (repeatable)")
        ->required();
    add_input_opts(depth, d.in, d.format);
    depth->add_option("--modes", d.modes, "effective mode count M")->capture_default_str();
    depth->add_option("--eps-stat", d.eps_stat,
                      "statistical floor: origin values above -eps count as classical")
        ->capture_default_str();
    depth->add_option("--out", d.out, "output file (default: stdout)");
    add_workers_opt(depth, d.workers);

    QuantOpts n;
    CLI::App* nccp = app.add_subcommand("nccp", "noise resistance per criterion");
    nccp->add_option("--criterion", n.criteria, "criterion selector (repeatable)")
        ->required();
    add_input_opts(nccp, n.in, n.format);
    nccp->add_option("--modes", n.modes, "modes of the admixed chaotic noise")
        ->capture_default_str();
    nccp->add_option("--eps-stat", n.eps_stat,
                     "statistical floor: origin values above -eps count as classical")
        ->capture_default_str();
    nccp->add_option("--nu-cap", n.nu_cap, "largest noise level probed before giving up")
        ->capture_default_str();
    nccp->add_option("--out", n.out, "output file (default: stdout)");
    add_workers_opt(nccp, n.workers);

    ScanOpts s;
    CLI::App* scan = app.add_subcommand("scan", "family scan over an index grid");
    scan->add_option("--scenario", s.scenario, "grid, touching, local or index-sum")
        ->check(CLI::IsMember({"grid", "touching", "local", "index-sum"}))
        ->required();
    scan->add_option("--family", s.family,
                     "criterion family (grid: Ec1|Ec2|D3sys2|Dsys3; index-sum: DB3|DB4)");
    scan->add_option("--range", s.range, "index rectangle a_lo,a_hi,b_lo,b_hi");
    auto* mi = scan->add_option("--max-index", s.max_index,
                                "largest photocount index (touching scans)");
    auto* rad = scan->add_option("--radius", s.radius, "index box radius (local scans)");
    scan->add_option("--sum", s.sum, "inclusive index-sum window lo,hi");
    add_input_opts(scan, s.in, s.format);
    scan->add_option("--modes", s.modes, "effective mode count M")->capture_default_str();
    scan->add_option("--eps-stat", s.eps_stat, "statistical floor for depth verdicts")
        ->capture_default_str();
    scan->add_option("--resamples", s.resamples,
                     "bootstrap resamples for error bars (0 = off, minimum 100)")
        ->capture_default_str();
    scan->add_option("--seed", s.seed, "bootstrap RNG seed")->capture_default_str();
    scan->add_option("--out", s.out, "output file (default: stdout)");
    add_workers_opt(scan, s.workers);

    TransformOpts t;
    CLI::App* transform =
        app.add_subcommand("transform", "ordering transform / kernel matrix dump");
    transform->add_option("--in", t.in, "input histogram (JSON or CSV)");
    transform->add_option("--format", t.format, "input format: json, csv or auto")
        ->check(CLI::IsMember({"json", "csv", "auto"}))
        ->capture_default_str();
    transform->add_option("--s", t.s, "ordering parameter in (-1, 1]")->required();
    transform->add_option("--modes", t.modes, "effective mode count M")
        ->capture_default_str();
    transform->add_flag("--dump-kernel", t.dump_kernel,
                        "print the kernel matrix as n,m,value rows instead");
    transform->add_option("--max-n", t.max_n, "largest kernel index to dump")
        ->capture_default_str();
    transform->add_option("--precision-bits", t.precision_bits,
                          "pin the big-float working precision (0 = automatic)")
        ->check(CLI::Range(0, 1 << 20))
        ->capture_default_str();
    transform->add_option("--out", t.out, "output file (default: stdout)");

    CLI::App* check = app.add_subcommand("check", "run the built-in property suites");
    CLI::App* defaults =
        app.add_subcommand("defaults", "print every tunable default as key=value");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& h) {
        return app.exit(h);
    } catch (const CLI::CallForAllHelp& h) {
        return app.exit(h);
    } catch (const CLI::ParseError& pe) {
        app.exit(pe);
        return 1;
    }
    s.has_max_index = mi->count() > 0;
    s.has_radius = rad->count() > 0;

    try {
        if (gen->parsed()) return run_gen(g);
        if (eval->parsed()) return run_eval(e);
        if (depth->parsed()) return run_depth(d);
        if (nccp->parsed()) return run_nccp(n);
        if (scan->parsed()) return run_scan(s);
        if (transform->parsed()) return run_transform(t);
        if (check->parsed()) return run_check();
        if (defaults->parsed()) return run_defaults();
    } catch (const UsageError& ue) {
        std::cerr << "usage error: " << ue.what() << '\n';
        return 1;
    } catch (const qnc::PrecisionEscalation& pe) {
        std::cerr << "numerical failure: " << pe.what() << '\n';
        return 3;
    } catch (const qnc::Error& qe) {
        std::cerr << "error: " << qe.what() << '\n';
        return 2;
    } catch (const std::exception& ex) {
        std::cerr << "internal error: " << ex.what() << '\n';
        return 3;
    }
    return 0;
}
