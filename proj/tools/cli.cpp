#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "ellipq/seqcomb.hpp"
#include "ellipq/tensor.hpp"
#include "ellipq/theta.hpp"
#include "ellipq/verify.hpp"

using namespace ellipq;
using nlohmann::ordered_json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// "a+bi", "a-bi", "bi", "a", "-i"
Complex parse_complex(std::string s) {
    s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
    static const std::string num = R"((?:[0-9]+\.?[0-9]*|\.[0-9]+)(?:[eE][+-]?[0-9]+)?)";
    static const std::regex real("^([+-]?" + num + ")$");
    static const std::regex imag("^([+-]?)(" + num + ")?i$");
    static const std::regex both("^([+-]?" + num + ")([+-])(" + num + ")?i$");
    std::smatch m;
    if (std::regex_match(s, m, real)) return {std::stod(m[1]), 0.0};
    if (std::regex_match(s, m, imag)) return {0.0, (m[1] == "-" ? -1.0 : 1.0) * (m[2].matched ? std::stod(m[2]) : 1.0)};
    if (std::regex_match(s, m, both))
        return {std::stod(m[1]), (m[2] == "-" ? -1.0 : 1.0) * (m[3].matched ? std::stod(m[3]) : 1.0)};
    throw UsageError("bad complex number: " + s);
}

Seq parse_seq(const std::string& s) {
    Seq out;
    std::stringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        tok.erase(std::remove_if(tok.begin(), tok.end(), [](char c) { return c == '(' || c == ')' || c == ' '; }),
                  tok.end());
        try {
            out.push_back(std::stoi(tok));
        } catch (const std::exception&) {
            throw UsageError("bad sequence: " + s);
        }
    }
    if (out.empty()) throw UsageError("empty sequence");
    return out;
}

std::string fmt(double x) {
    std::ostringstream o;
    o.precision(17);
    o << x;
    return o.str();
}

ordered_json cjson(Complex z) { return {{"re", z.real()}, {"im", z.imag()}}; }

struct Common {
    std::string eta = "0.3+0.8i", tau = "0.031+0.017i", out;
    std::optional<int> radius;
    std::optional<double> tol;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    bool json = false;

    LatticeParams lattice() const {
        const Complex e = parse_complex(eta);
        if (e.imag() <= 0) throw UsageError("eta needs a positive imaginary part");
        LatticeParams lat = LatticeParams::make(e);
        if (radius) {
            lat.radius = *radius;
            lat.validate();
        }
        return lat;
    }
};

class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw UsageError("cannot write " + path);
        }
    }
    std::ostream& operator()() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

int cmd_dims(const Common& c, const std::vector<std::string>& seqs) {
    const auto lat = c.lattice();
    Output out(c.out);
    ordered_json rows = ordered_json::array();
    if (!c.json) out() << "n_vec\td\tcosets\trank\n";
    for (const auto& s : seqs) {
        const Seq n = parse_seq(s);
        const long long dn = d(n);
        const auto cosets = coset_representatives(n).size();
        auto basis = multi_theta_basis(n, lat);
        SampleSpec spec;
        spec.seed = c.seed;
        Sampler smp(spec, lat.eta);
        std::vector<std::vector<Complex>> pts;
        for (std::size_t i = 0; i < 3 * basis.size() + 6; ++i) pts.push_back(smp.tuple(n.size()));
        const int rank = gram_rank(basis, pts);
        if (c.json) rows.push_back({{"n_vec", n}, {"d", dn}, {"cosets", cosets}, {"rank", rank}});
        else out() << to_string(n) << '\t' << dn << '\t' << cosets << '\t' << rank << '\n';
    }
    if (c.json) out() << rows.dump(2) << '\n';
    return 0;
}

int cmd_hilbert(const Common& c, const std::vector<std::string>& seq_args, int cutoff) {
    if (cutoff <= 0) throw UsageError("cutoff must be positive");
    std::vector<Seq> seqs;
    for (const auto& s : seq_args) seqs.push_back(parse_seq(s));
    const auto series = hilbert_tensor(seqs, cutoff);
    const auto factors = hilbert_factors(seqs);
    Output out(c.out);
    if (c.json) {
        ordered_json j;
        ordered_json fs = ordered_json::array();
        for (const auto& f : factors)
            fs.push_back({{"first", f.first}, {"last", f.last}, {"merged", f.merged}, {"exponent", f.exponent}});
        j["factors"] = fs;
        ordered_json cs = ordered_json::array();
        for (const auto& [e, v] : series.coefficients())
            cs.push_back({{"exponent", e}, {"coefficient", v.str()}});
        j["coefficients"] = cs;
        out() << j.dump(2) << '\n';
        return 0;
    }
    out() << "# factors: first,last,merged,exponent\n";
    for (const auto& f : factors)
        out() << "# " << f.first + 1 << ',' << f.last + 1 << ',' << to_string(f.merged) << ',' << f.exponent << '\n';
    for (std::size_t t = 0; t < seqs.size(); ++t) out() << "a" << t + 1 << ',';
    out() << "coefficient\n";
    for (const auto& [e, v] : series.coefficients()) {
        for (int a : e) out() << a << ',';
        out() << v.str() << '\n';
    }
    return 0;
}

int cmd_verify(const Common& c, const std::string& suite, SuiteParams p) {
    p.seed = c.seed;
    p.tol = c.tol;
    p.eta = parse_complex(c.eta);
    if (p.eta.imag() <= 0) throw UsageError("eta needs a positive imaginary part");
    p.tau = parse_complex(c.tau);
    p.radius = c.radius;
    p.threads = c.threads;
    const auto rep = run_suite(suite, p);
    Output out(c.out);
    if (c.json) {
        out() << rep.to_json(2) << '\n';
    } else {
        out() << rep.suite << ": " << (rep.pass ? "pass" : "FAIL") << "  max " << rep.max_residual << "  mean "
                << rep.mean_residual << "  tol " << rep.tol << "  count " << rep.count << '\n';
        for (const auto& [k, v] : rep.scalars) {
            out() << "  " << k << " = ";
            std::visit(
                [&](const auto& x) {
                    using T = std::decay_t<decltype(x)>;
                    if constexpr (std::is_same_v<T, Complex>) out() << x.real() << (x.imag() < 0 ? "" : "+") << x.imag() << "i";
                    else out() << x;
                },
                v);
            out() << '\n';
        }
    }
    return rep.pass ? 0 : 1;
}

std::vector<std::string> variable_names(const TensorShape& s) {
    std::vector<std::string> out(s.arity());
    for (std::size_t t = 0; t < s.h(); ++t)
        for (int b = 0; b < s.degrees[t]; ++b)
            for (std::size_t mu = 0; mu < s.p(t); ++mu)
                out[s.index(t, b, mu)] = "x_{" + std::to_string(mu + 1) + "," + std::to_string(b + 1) + "," +
                                         std::to_string(t + 1) + "}";
    for (std::size_t t = 0; t + 1 < s.h(); ++t)
        out[s.z_index(t)] = "z_{" + std::to_string(t + 1) + "," + std::to_string(t + 2) + "}";
    return out;
}

std::vector<std::vector<Complex>> read_points(const std::string& path, const std::vector<std::string>& names) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read " + path);
    // cells may be double-quoted since variable names contain commas
    auto split = [](const std::string& line) {
        std::vector<std::string> cells(1);
        bool quoted = false;
        for (char ch : line) {
            if (ch == '"') quoted = !quoted;
            else if (ch == ',' && !quoted) cells.emplace_back();
            else if (!std::isspace(static_cast<unsigned char>(ch))) cells.back() += ch;
        }
        return cells;
    };
    std::string line;
    if (!std::getline(in, line)) throw UsageError("points file has no header");
    auto head = split(line);
    if (head.size() != 2 * names.size()) throw UsageError("points file needs " + std::to_string(2 * names.size()) + " columns");
    for (std::size_t v = 0; v < names.size(); ++v)
        if (head[2 * v] != names[v] + "_re" || head[2 * v + 1] != names[v] + "_im")
            throw UsageError("column " + std::to_string(2 * v + 1) + " should be " + names[v] + "_re");
    std::vector<std::vector<Complex>> pts;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto cells = split(line);
        if (cells.size() != head.size()) throw UsageError("row " + std::to_string(row) + ": wrong column count");
        std::vector<Complex> z(names.size());
        try {
            for (std::size_t v = 0; v < names.size(); ++v) z[v] = {std::stod(cells[2 * v]), std::stod(cells[2 * v + 1])};
        } catch (const std::exception&) {
            throw UsageError("row " + std::to_string(row) + ": not a number");
        }
        pts.push_back(std::move(z));
    }
    return pts;
}

// element spec "k" (factor 1) or "t:k", both 1-based
std::pair<std::size_t, std::size_t> parse_element(const std::string& s, const std::vector<Seq>& seqs) {
    std::size_t t = 1, k;
    try {
        const auto colon = s.find(':');
        if (colon == std::string::npos) k = std::stoul(s);
        else {
            t = std::stoul(s.substr(0, colon));
            k = std::stoul(s.substr(colon + 1));
        }
    } catch (const std::exception&) {
        throw UsageError("bad element: " + s);
    }
    if (t < 1 || t > seqs.size() || k < 1 || k > std::size_t(d(seqs[t - 1])))
        throw UsageError("element out of range: " + s);
    return {t - 1, k - 1};
}

int cmd_bracket_eval(const Common& c, const std::vector<std::string>& seq_args, const std::string& fs,
                     const std::string& gs, const std::string& points, std::size_t sample, ZCoupling z) {
    std::vector<Seq> seqs;
    for (const auto& s : seq_args) seqs.push_back(parse_seq(s));
    const auto lat = c.lattice();
    auto element = [&](const std::string& spec) {
        auto [t, k] = parse_element(spec, seqs);
        return TensorElement::from_theta(multi_theta_basis(seqs[t], lat)[k], seqs, t);
    };
    const auto F = element(fs), G = element(gs);
    GeneratorBracketTable tab(seqs, z);
    const auto fg = tensor_bracket(F, G, tab), gf = tensor_bracket(G, F, tab), ff = tensor_bracket(F, F, tab);
    // {f,f} lives on the same variables only when f and g sit in the same factor
    const bool with_ff = ff.shape().degrees == fg.shape().degrees;
    const auto names = variable_names(fg.shape());

    std::vector<std::vector<Complex>> pts;
    if (!points.empty()) pts = read_points(points, names);
    else {
        SampleSpec spec;
        spec.seed = c.seed;
        spec.count = sample;
        Sampler smp(spec, lat.eta);
        for (std::size_t i = 0; i < sample; ++i) pts.push_back(tensor_point(smp, fg.shape()));
    }
    Output out(c.out);
    for (const auto& n : names) out() << '"' << n << "_re\",\"" << n << "_im\",";
    out() << "fg_re,fg_im,gf_re,gf_im" << (with_ff ? ",ff_re,ff_im\n" : "\n");
    for (const auto& p : pts) {
        for (auto v : p) out() << fmt(v.real()) << ',' << fmt(v.imag()) << ',';
        std::vector<Complex> v{fg(p), gf(p)};
        if (with_ff) v.push_back(ff(p));
        for (std::size_t i = 0; i < v.size(); ++i)
            out() << fmt(v[i].real()) << ',' << fmt(v[i].imag()) << (i + 1 < v.size() ? "," : "\n");
    }
    return 0;
}

int cmd_theta_eval(const Common& c, const std::vector<std::string>& zs) {
    const auto lat = c.lattice();
    Output out(c.out);
    if (c.json) {
        ordered_json rows = ordered_json::array();
        for (const auto& s : zs) {
            const Complex z = parse_complex(s);
            rows.push_back({{"z", cjson(z)}, {"theta", cjson(theta_eval(z, lat))}, {"dtheta", cjson(theta_deriv(z, lat))}});
        }
        out() << rows.dump(2) << '\n';
        return 0;
    }
    out() << "z_re,z_im,theta_re,theta_im,dtheta_re,dtheta_im\n";
    for (const auto& s : zs) {
        const Complex z = parse_complex(s), t = theta_eval(z, lat), dt = theta_deriv(z, lat);
        out() << fmt(z.real()) << ',' << fmt(z.imag()) << ',' << fmt(t.real()) << ',' << fmt(t.imag()) << ','
                << fmt(dt.real()) << ',' << fmt(dt.imag()) << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"elliptic Poisson and quantum algebra computations"};
    app.require_subcommand(1);
    Common c;
    auto common = [&](CLI::App* s) {
        s->add_option("--eta", c.eta, "lattice parameter a+bi, Im > 0");
        s->add_option("--tau", c.tau, "quantization parameter a+bi");
        s->add_option("--radius", c.radius, "theta truncation radius");
        s->add_option("--tol", c.tol, "pass tolerance");
        s->add_option("--seed", c.seed, "sampling seed");
        s->add_option("--threads", c.threads, "worker threads (default: ELLIPQ_THREADS, then hardware)");
        s->add_flag("--json", c.json, "JSON output");
        s->add_option("--out", c.out, "write to FILE instead of stdout");
    };

    std::vector<std::string> dims_seqs;
    auto* dims = app.add_subcommand("dims", "d, coset count and Gram rank of theta spaces");
    dims->add_option("seqs", dims_seqs, "sequences such as 3,2")->required();
    common(dims);

    std::vector<std::string> h_seqs;
    int cutoff = 4;
    auto* hil = app.add_subcommand("hilbert", "Hilbert series of a tensor product");
    hil->add_option("seqs", h_seqs, "one sequence per factor")->required();
    hil->add_option("--cutoff", cutoff, "total degree cutoff");
    common(hil);

    std::string suite;
    SuiteParams sp;
    std::vector<std::string> v_seqs;
    std::string zc = "printed";
    std::optional<std::size_t> count;
    auto* ver = app.add_subcommand("verify", "run a verification suite");
    ver->add_option("suite", suite, "suite name")->required();
    ver->add_option("--n", sp.n, "n for the one-variable suites");
    ver->add_option("--seq", v_seqs, "n_vec, or one per tensor factor");
    ver->add_option("--family", sp.family, "boson relation family");
    ver->add_option("--zcoupling", zc, "printed or completed")->check(CLI::IsMember({"printed", "completed"}));
    ver->add_option("--count", count, "sample count");
    common(ver);

    std::vector<std::string> b_seqs;
    std::string fs = "1", gs = "2", points;
    std::size_t sample = 5;
    auto* be = app.add_subcommand("bracket-eval", "evaluate brackets of basis elements at points");
    be->add_option("--seq", b_seqs, "one sequence per tensor factor")->required();
    be->add_option("--f", fs, "element k or t:k, 1-based");
    be->add_option("--g", gs, "element k or t:k, 1-based");
    be->add_option("--points", points, "CSV of points; header names the variables");
    be->add_option("--sample", sample, "seeded points when no file is given");
    be->add_option("--zcoupling", zc, "printed or completed")->check(CLI::IsMember({"printed", "completed"}));
    common(be);

    std::vector<std::string> zs;
    auto* te = app.add_subcommand("theta-eval", "theta and its derivative");
    te->add_option("z", zs, "points a+bi")->required();
    common(te);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    const ZCoupling z = zc == "completed" ? ZCoupling::completed : ZCoupling::printed;
    try {
        if (*dims) return cmd_dims(c, dims_seqs);
        if (*hil) return cmd_hilbert(c, h_seqs, cutoff);
        if (*ver) {
            for (const auto& s : v_seqs) sp.seqs.push_back(parse_seq(s));
            sp.count = count;
            sp.zcoupling = z;
            return cmd_verify(c, suite, sp);
        }
        if (*be) return cmd_bracket_eval(c, b_seqs, fs, gs, points, sample, z);
        if (*te) return cmd_theta_eval(c, zs);
    } catch (const UnknownSuiteError& e) {
        std::cerr << e.what() << "\n  suites:";
        for (const auto& s : suite_names()) std::cerr << ' ' << s;
        std::cerr << '\n';
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
