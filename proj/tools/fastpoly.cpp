// fastpoly: command-line front end.  Grammar: fastpoly -<task> <precision> [arguments] [options].
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "fpe/benchmark.hpp"
#include "fpe/csv.hpp"
#include "fpe/engine.hpp"
#include "fpe/points.hpp"
#include "fpe/poly_factory.hpp"

namespace {

using fpe::BigComplex;
using fpe::Polynomial;
using fpe::Precision;
using List = std::vector<BigComplex>;

/// Bad command-line arguments (exit code 1).
class usage_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Task {
    std::string summary;
    std::function<void(CLI::App&)> declare;  // positionals and options after the precision
    std::function<void()> run;
};

// Argument storage shared by the task declarations.
struct Args {
    int precision = 0;
    std::string in1, in2, out, errors, status;
    int count = 0;
    int threads = 1;
    int max_iter = 100;
    int tol_bits = -1;
    int reps = 10;
    std::uint64_t seed = 1;
    std::string lo = "0", hi = "1";
    std::string family;
} args;

Precision prec() { return Precision(args.precision); }

void write_poly(const Polynomial& poly) {
    if (poly.is_zero()) std::cerr << "fastpoly: note: the result is the zero polynomial\n";
    fpe::csv::write_polynomial(args.out, poly);
}

Polynomial read_poly(const std::string& path) {
    Polynomial poly = fpe::csv::read_polynomial(path, prec());
    if (poly.is_zero()) throw fpe::csv::data_error(path + ": the polynomial is zero");
    return poly;
}

/// Runs body(i) for every index, in contiguous shards over worker threads; results land by index.
void sharded(std::size_t n, const std::function<void(std::size_t)>& body) {
    int t = std::max(1, std::min<int>(args.threads, static_cast<int>(n)));
    if (t <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> failures(t);
    for (int w = 0; w < t; ++w)
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = n * w / t; i < n * (w + 1) / t; ++i) body(i);
            } catch (...) {
                failures[w] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& f : failures)
        if (f) std::rethrow_exception(f);
}

std::string bits_text(const fpe::Scale& s) {
    if (s.is_neg_inf()) return "-inf";
    return std::to_string(s.value());
}

void write_errors(const std::vector<fpe::EvalReport>& reports) {
    if (args.errors.empty()) return;
    std::ofstream out(args.errors);
    if (!out) throw fpe::csv::data_error("cannot write '" + args.errors + "'");
    for (const auto& r : reports)
        out << bits_text(r.error_bound_scale) << ", " << r.trusted_bits << ", " << r.kept_terms << '\n';
}

enum class EvalKind { value, derivative, newton };

void evaluate(EvalKind kind) {
    Polynomial poly = read_poly(args.in1);
    List pts = fpe::csv::read(args.in2, prec());
    auto pp = fpe::precondition(poly, prec());
    std::optional<fpe::PreconditionedPoly> ppd;
    if (kind != EvalKind::value) {
        Polynomial d = fpe::derivative(poly);
        if (d.is_zero()) throw fpe::csv::data_error(args.in1 + ": the derivative is the zero polynomial");
        ppd = fpe::precondition(d, prec());
    }
    List values(pts.size(), BigComplex(prec()));
    std::vector<fpe::EvalReport> reports(pts.size());
    std::vector<std::string> failures(pts.size());
    sharded(pts.size(), [&](std::size_t i) {
        switch (kind) {
            case EvalKind::value: reports[i] = fpe::evaluate(pp, pts[i]); values[i] = reports[i].value; break;
            case EvalKind::derivative: reports[i] = fpe::evaluate_derivative(*ppd, pts[i]); values[i] = reports[i].value; break;
            case EvalKind::newton:
                try {
                    auto st = fpe::newton_step(pp, *ppd, pts[i]);
                    values[i] = st.next;
                    reports[i] = st.report;
                } catch (const fpe::derivative_zero&) {
                    failures[i] = "DERIVATIVE_ZERO";
                    values[i] = pts[i].rounded(prec());
                }
                break;
        }
    });
    for (std::size_t i = 0; i < failures.size(); ++i)
        if (!failures[i].empty()) std::cerr << "fastpoly: point " << i + 1 << ": " << failures[i] << '\n';
    fpe::csv::write(args.out, values);
    write_errors(reports);
}

void iterate_newton() {
    Polynomial poly = read_poly(args.in1);
    List starts = fpe::csv::read(args.in2, prec());
    if (args.max_iter < 1) throw usage_error("--max-iter must be at least 1");
    int tol = args.tol_bits >= 0 ? args.tol_bits : std::max(1, args.precision - 4);
    auto pp = fpe::precondition(poly, prec());
    Polynomial d = fpe::derivative(poly);
    if (d.is_zero()) throw fpe::csv::data_error(args.in1 + ": the derivative is the zero polynomial");
    auto ppd = fpe::precondition(d, prec());
    std::vector<fpe::NewtonOutcome> outcomes(starts.size());
    sharded(starts.size(), [&](std::size_t i) {
        outcomes[i] = std::move(fpe::newton_iterate(pp, ppd, {starts[i]}, args.max_iter, tol).front());
    });
    List roots;
    for (const auto& o : outcomes) roots.push_back(o.root);
    fpe::csv::write(args.out, roots);
    if (!args.status.empty()) {
        std::ofstream out(args.status);
        if (!out) throw fpe::csv::data_error("cannot write '" + args.status + "'");
        for (const auto& o : outcomes)
            out << o.iterations << ", " << (o.converged ? 1 : 0) << ", " << (o.failure.empty() ? "ok" : o.failure) << '\n';
    }
}

std::string number(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

void analyse() {
    Polynomial poly = read_poly(args.in1);
    auto rep = fpe::analyse(fpe::precondition(poly, prec()));
    std::ofstream out(args.out);
    if (!out) throw fpe::csv::data_error("cannot write '" + args.out + "'");
    out << "# concave cover vertices: index, scale\n";
    for (const auto& v : rep.vertices) out << v.k << ", " << v.height << '\n';
    out << "# good indices\n";
    for (std::size_t i = 0; i < rep.good.size(); ++i) out << (i ? ", " : "") << rep.good[i];
    out << "\n# regimes: log2|z| low, log2|z| high, |z| low, |z| high, kept indices\n";
    for (const auto& r : rep.regimes) {
        out << number(r.lambda_low) << ", " << number(r.lambda_high) << ", " << number(std::exp2(r.lambda_low)) << ", "
            << number(std::exp2(r.lambda_high)) << ",";
        for (int k : r.kept) out << ' ' << k;
        out << '\n';
    }
}

void point_count() {
    if (args.count < 1) throw usage_error("the count must be at least 1");
}

std::map<std::string, Task> tasks() {
    auto in_out = [](CLI::App& a) {
        a.add_option("input", args.in1, "input CSV")->required();
        a.add_option("output", args.out, "output CSV")->required();
    };
    auto two_in_out = [](CLI::App& a) {
        a.add_option("first", args.in1, "first input CSV")->required();
        a.add_option("second", args.in2, "second input CSV")->required();
        a.add_option("output", args.out, "output CSV")->required();
    };
    auto degree_out = [](CLI::App& a) {
        a.add_option("degree", args.count, "degree")->required();
        a.add_option("output", args.out, "output CSV")->required();
    };
    auto eval_args = [](CLI::App& a) {
        a.add_option("polynomial", args.in1, "coefficients CSV, a_0 first")->required();
        a.add_option("points", args.in2, "evaluation points CSV")->required();
        a.add_option("output", args.out, "output CSV")->required();
        a.add_option("--errors", args.errors, "per-point 'error_bound_bits, correct_bits, terms_kept' CSV");
        a.add_option("--threads", args.threads, "worker threads (output order is preserved)")->check(CLI::PositiveNumber);
    };
    auto seeded = [](CLI::App& a) { a.add_option("--seed", args.seed, "random seed"); };
    auto list_op = [](List (*f)(const List&)) {
        return [f] { fpe::csv::write(args.out, f(fpe::csv::read(args.in1, prec()))); };
    };
    auto pair_op = [](List (*f)(const List&, const List&)) {
        return [f] { fpe::csv::write(args.out, f(fpe::csv::read(args.in1, prec()), fpe::csv::read(args.in2, prec()))); };
    };
    auto family = [](fpe::Family f) {
        return [f] {
            if (args.count < 1) throw usage_error("the degree must be at least 1");
            write_poly(fpe::generate({f, args.count, std::nullopt}, prec()));
        };
    };
    auto pair_poly = [](Polynomial (*f)(const Polynomial&, const Polynomial&)) {
        return [f] {
            write_poly(f(fpe::csv::read_polynomial(args.in1, prec()), fpe::csv::read_polynomial(args.in2, prec())));
        };
    };

    std::map<std::string, Task> t;
    t["-sum"] = {"sum of two polynomials", two_in_out, pair_poly(fpe::sum)};
    t["-diff"] = {"difference of two polynomials", two_in_out, pair_poly(fpe::diff)};
    t["-prod"] = {"product of two polynomials", two_in_out, pair_poly(fpe::product)};
    t["-der"] = {"derivative of a polynomial", in_out, [] { write_poly(fpe::derivative(read_poly(args.in1))); }};
    t["-roots"] = {"monic polynomial with the given roots", in_out,
                   [] { write_poly(fpe::from_roots(fpe::csv::read(args.in1, prec()), prec())); }};
    t["-Chebyshev"] = {"Chebyshev polynomial T_n", degree_out, family(fpe::Family::chebyshev)};
    t["-Legendre"] = {"Legendre polynomial P_n", degree_out, family(fpe::Family::legendre)};
    t["-Hermite"] = {"Hermite polynomial H_n (physicists')", degree_out, family(fpe::Family::hermite)};
    t["-Laguerre"] = {"Laguerre polynomial L_n", degree_out, family(fpe::Family::laguerre)};
    t["-hyperbolic"] = {"hyperbolic polynomial p_n, p_1 = z, p_(n+1) = p_n^2 + z (degree 2^(n-1))",
                        [](CLI::App& a) {
                            a.add_option("n", args.count, "iteration count n")->required();
                            a.add_option("output", args.out, "output CSV")->required();
                        },
                        [] {
                            if (args.count < 1 || args.count > 20) throw usage_error("n must be in [1, 20]");
                            write_poly(fpe::hyperbolic(args.count, prec()));
                        }};
    t["-family"] = {"named benchmark family of a given degree",
                    [seeded](CLI::App& a) {
                        a.add_option("name", args.family, "chebyshev, legendre, hermite, laguerre, hyperbolic, normal_real, "
                                                          "normal_complex, half_circle_real or half_circle_complex")
                            ->required();
                        a.add_option("degree", args.count, "degree")->required();
                        a.add_option("output", args.out, "output CSV")->required();
                        seeded(a);
                    },
                    [] {
                        fpe::Family f;
                        try {
                            f = fpe::family_from_name(args.family);
                        } catch (const std::invalid_argument& e) {
                            throw usage_error(e.what());
                        }
                        if (args.count < 1) throw usage_error("the degree must be at least 1");
                        write_poly(fpe::generate({f, args.count, args.seed}, prec()));
                    }};

    t["-cat"] = {"concatenation of two lists", two_in_out, pair_op(fpe::points::cat)};
    t["-re"] = {"real parts", in_out, list_op(fpe::points::re)};
    t["-im"] = {"imaginary parts", in_out, list_op(fpe::points::im)};
    t["-conj"] = {"conjugates", in_out, list_op(fpe::points::conj)};
    t["-join"] = {"(re a_i, re b_i)", two_in_out, pair_op(fpe::points::join)};
    t["-tensor"] = {"products a_i * b_i", two_in_out, pair_op(fpe::points::tensor)};
    t["-grid"] = {"all pairs (re a_i, re b_j)", two_in_out, pair_op(fpe::points::grid)};
    t["-exp"] = {"complex exponentials", in_out, list_op(fpe::points::exp)};
    t["-rot"] = {"(a, b) -> a exp(ib)", in_out, list_op(fpe::points::rot)};
    t["-polar"] = {"(latitude, longitude) on the Riemann sphere -> complex plane", in_out, list_op(fpe::points::polar)};
    auto range_args = [](CLI::App& a) {
        a.add_option("count", args.count, "number of values")->required();
        a.add_option("low", args.lo, "lower end")->required();
        a.add_option("high", args.hi, "upper end")->required();
        a.add_option("output", args.out, "output CSV")->required();
    };
    t["-unif"] = {"count reals in arithmetic progression from low to high", range_args, [] {
                      point_count();
                      fpe::BigFloat lo(args.lo, prec()), hi(args.hi, prec());
                      fpe::csv::write(args.out, fpe::points::unif(args.count, lo, hi, prec()));
                  }};
    t["-rand"] = {"count reals uniform in [low, high)",
                  [range_args, seeded](CLI::App& a) {
                      range_args(a);
                      seeded(a);
                  },
                  [] {
                      point_count();
                      fpe::csv::write(args.out, fpe::points::rand(args.count, std::stod(args.lo), std::stod(args.hi),
                                                                  args.seed, prec()));
                  }};
    auto count_out = [seeded](CLI::App& a) {
        a.add_option("count", args.count, "number of values")->required();
        a.add_option("output", args.out, "output CSV")->required();
        seeded(a);
    };
    t["-normal"] = {"count standard normal reals", count_out, [] {
                        point_count();
                        fpe::csv::write(args.out, fpe::points::normal(args.count, args.seed, prec()));
                    }};
    t["-sphere"] = {"count (latitude, longitude) pairs spread by area on the Riemann sphere", count_out, [] {
                        point_count();
                        fpe::csv::write(args.out, fpe::points::sphere(args.count, args.seed, prec()));
                    }};
    t["-comp"] = {"compares two lists under phase-shift similarity at the precision",
                  [](CLI::App& a) {
                      a.add_option("first", args.in1, "first CSV")->required();
                      a.add_option("second", args.in2, "second CSV")->required();
                  },
                  [] {
                      auto c = fpe::points::compare(fpe::csv::read(args.in1, prec()), fpe::csv::read(args.in2, prec()), prec());
                      std::cout << "compared: " << c.compared << ", mismatches: " << c.mismatches;
                      if (c.mismatches) std::cout << ", first mismatch: " << c.first_mismatch + 1;
                      std::cout << ", worst log2 relative difference: " << number(c.worst_log2_rel) << '\n';
                  }};

    t["-eval"] = {"lazy evaluation of a polynomial", eval_args, [] { evaluate(EvalKind::value); }};
    t["-evalD"] = {"lazy evaluation of the derivative", eval_args, [] { evaluate(EvalKind::derivative); }};
    t["-evalN"] = {"one Newton step z - P(z)/P'(z)", eval_args, [] { evaluate(EvalKind::newton); }};
    t["-iterN"] = {"Newton iteration from each start",
                   [](CLI::App& a) {
                       a.add_option("polynomial", args.in1, "coefficients CSV")->required();
                       a.add_option("starts", args.in2, "starting points CSV")->required();
                       a.add_option("output", args.out, "final iterates CSV")->required();
                       a.add_option("--max-iter", args.max_iter, "iteration limit per start");
                       a.add_option("--tol-bits", args.tol_bits,
                                    "stop once |increment| <= 2^(s(z) - tol); default precision - 4");
                       a.add_option("--status", args.status, "per-start 'iterations, converged, failure' CSV");
                       a.add_option("--threads", args.threads, "worker threads")->check(CLI::PositiveNumber);
                   },
                   iterate_newton};
    t["-analyse"] = {"concave cover, good indices and the |z| ranges where the kept set changes",
                     [](CLI::App& a) {
                         a.add_option("polynomial", args.in1, "coefficients CSV")->required();
                         a.add_option("output", args.out, "report file")->required();
                     },
                     analyse};
    t["-bench"] = {"timing and accuracy of lazy evaluation against Horner",
                   [](CLI::App& a) {
                       a.add_option("polynomial", args.in1, "coefficients CSV")->required();
                       a.add_option("points", args.in2, "evaluation points CSV")->required();
                       a.add_option("--reps", args.reps, "lazy evaluation runs (at least 3)");
                       a.add_option("--out", args.out, "write the report to this file instead of stdout");
                   },
                   [] {
                       if (args.reps < 3) throw usage_error("--reps must be at least 3");
                       auto rep = fpe::benchmark(read_poly(args.in1), fpe::csv::read(args.in2, prec()), prec(), args.reps);
                       if (args.out.empty()) {
                           fpe::print(std::cout, rep);
                       } else {
                           std::ofstream out(args.out);
                           if (!out) throw fpe::csv::data_error("cannot write '" + args.out + "'");
                           fpe::print(out, rep);
                       }
                   }};
    return t;
}

void usage(std::ostream& os, const std::map<std::string, Task>& t) {
    os << "usage: fastpoly -<task> <precision> [arguments]   (fastpoly -<task> --help for details)\n\ntasks:\n";
    for (const auto& [name, task] : t) os << "  " << name << std::string(std::max<std::size_t>(2, 14 - name.size()), ' ')
                                          << task.summary << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    auto t = tasks();
    if (argc < 2) {
        usage(std::cerr, t);
        return 1;
    }
    std::string name = argv[1];
    if (name == "-h" || name == "--help" || name == "-help") {
        usage(std::cout, t);
        return 0;
    }
    auto it = t.find(name);
    if (it == t.end()) {
        std::cerr << "fastpoly: unknown task '" << name << "'\n";
        return 1;
    }
    CLI::App app{it->second.summary, "fastpoly " + name};
    app.add_option("precision", args.precision, "precision in bits")->required();
    it->second.declare(app);
    try {
        app.parse(argc - 1, argv + 1);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "fastpoly " << name << ": " << e.what() << '\n';
        return 1;
    }
    if (args.precision < 1) {
        std::cerr << "fastpoly " << name << ": precision must be at least 1 bit\n";
        return 1;
    }
    try {
        it->second.run();
    } catch (const usage_error& e) {
        std::cerr << "fastpoly " << name << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "fastpoly " << name << ": " << e.what() << '\n';
        return 2;
    }
    return 0;
}
