// Command-line entry point: certify, rho, simulate, compare-2x2, max-length,
// and sweep, with JSON/CSV outputs written atomically.
//
// Exit codes: 0 success, 1 usage or input error, 2 condition failure
// (certification or envelope check did not hold).

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hypiss/certifier.hpp"
#include "hypiss/json_io.hpp"
#include "hypiss/planar.hpp"
#include "hypiss/scaling.hpp"
#include "hypiss/sim.hpp"

namespace {

using hypiss::json;

void emit(const std::string& out_path, const std::string& text) {
    if (out_path.empty())
        std::cout << text;
    else
        hypiss::write_text_atomic(out_path, text);
}

void emit_json(const std::string& out_path, const json& j) { emit(out_path, j.dump(2) + "\n"); }

Eigen::MatrixXd parse_matrix(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw hypiss::ParseError(std::string("matrix must be JSON: ") + e.what());
    }
    if (!j.is_array() || j.empty()) throw hypiss::ParseError("matrix must be a nested array");
    Eigen::MatrixXd m(static_cast<long>(j.size()), static_cast<long>(j[0].size()));
    for (size_t r = 0; r < j.size(); ++r) {
        if (j[r].size() != j[0].size())
            throw hypiss::ParseError("matrix rows must have equal length");
        for (size_t c = 0; c < j[r].size(); ++c)
            m(static_cast<long>(r), static_cast<long>(c)) = j[r][c].get<double>();
    }
    return m;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

hypiss::DisturbanceSpec disturbance_from_file(const std::string& path, int n) {
    hypiss::DisturbanceSpec dist;
    dist.boundary.resize(static_cast<size_t>(n));
    dist.boundary_prime.resize(static_cast<size_t>(n));
    if (path.empty()) return dist;
    std::ifstream in(path);
    if (!in) throw hypiss::ParseError("cannot open " + path);
    json j;
    in >> j;
    if (j.contains("bound")) dist.bound = j.at("bound").get<double>();
    const auto& b = j.at("boundary");
    for (size_t i = 0; i < b.size() && i < static_cast<size_t>(n); ++i) {
        if (b[i].is_null()) continue;
        hypiss::Coefficient c = hypiss::coefficient_from_json(b[i]);
        dist.boundary[i] = [c](double t) { return c(t); };
        dist.boundary_prime[i] = [c](double t) { return c.derivative_at(t); };
    }
    return dist;
}

Eigen::MatrixXd u0_from_file(const std::string& path, const hypiss::SystemSpec& sys,
                             const hypiss::SpatialGrid& grid) {
    Eigen::MatrixXd u0 = Eigen::MatrixXd::Zero(sys.n, grid.count());
    if (path.empty()) return u0;
    std::ifstream in(path);
    if (!in) throw hypiss::ParseError("cannot open " + path);
    json j;
    in >> j;
    for (size_t i = 0; i < j.size() && i < static_cast<size_t>(sys.n); ++i) {
        hypiss::Coefficient c = hypiss::coefficient_from_json(j[i]);
        for (int k = 0; k < grid.count(); ++k)
            u0(static_cast<long>(i), k) = c(grid.points[static_cast<size_t>(k)]);
    }
    return u0;
}

int cmd_rho(const std::string& matrix_text, unsigned seed, const std::string& out) {
    Eigen::MatrixXd K = parse_matrix(matrix_text);
    hypiss::ScalingResult inf = hypiss::rho_inf(K);
    hypiss::ScalingResult two = hypiss::rho_two(K, 16, 10000, seed);
    json delta_inf = json::array(), delta_two = json::array();
    for (int i = 0; i < inf.delta.size(); ++i) delta_inf.push_back(inf.delta(i));
    for (int i = 0; i < two.delta.size(); ++i) delta_two.push_back(two.delta(i));
    emit_json(out, json{{"rho_inf", inf.value},
                        {"rho_two", two.value},
                        {"delta_inf", delta_inf},
                        {"delta_two", delta_two},
                        {"converged", inf.converged && two.converged}});
    return 0;
}

int cmd_certify(const std::string& system_path, double mu, int grid_points,
                const std::string& init_sweep, const std::string& out) {
    hypiss::SystemSpec sys = hypiss::load_system(system_path);
    hypiss::CertifyOptions opt;
    opt.mu = mu;
    opt.grid_points = grid_points;
    if (!init_sweep.empty()) opt.init_sweep = parse_list(init_sweep);
    hypiss::CertifyResult res = hypiss::certify(sys, opt);
    json j{{"success", res.success()},
           {"interior", hypiss::report_to_json(res.interior)},
           {"boundary", hypiss::report_to_json(res.boundary)}};
    if (res.success())
        j["certificate"] = hypiss::certificate_to_json(*res.certificate);
    else
        j["reason"] = res.reason;
    emit_json(out, j);
    return res.success() ? 0 : 2;
}

int cmd_max_length(const std::string& system_path, const std::string& c_list, double step,
                   double cap, const std::string& out) {
    hypiss::SystemSpec sys = hypiss::load_system(system_path);
    std::ostringstream csv;
    csv << "C,L\n";
    for (double C : parse_list(c_list))
        csv << C << "," << hypiss::max_iss_length(sys, C, step, cap) << "\n";
    emit(out, csv.str());
    return 0;
}

int cmd_compare(double a, double b, double l1, double l2, double k1, double k2,
                const std::string& out) {
    hypiss::PlanarParams p;
    p.a = hypiss::Coefficient(a);
    p.b = hypiss::Coefficient(b);
    p.lambda1 = l1;
    p.lambda2 = l2;
    p.k1 = k1;
    p.k2 = k2;
    hypiss::ConditionReport ours = hypiss::check_planar(p);
    std::optional<double> kk = hypiss::kk_exists(p, hypiss::default_kk_grid());
    json j{{"ours", hypiss::report_to_json(ours)},
           {"kk_holds", kk.has_value()}};
    if (kk) j["kk_K"] = *kk;
    emit_json(out, j);
    return 0;
}

int cmd_sweep(double a, double b, double l1, double l2, const std::string& k1_range,
              const std::string& k2_range, const std::string& out) {
    std::vector<double> r1 = parse_list(k1_range), r2 = parse_list(k2_range);
    if (r1.size() != 3 || r2.size() != 3)
        throw hypiss::ParseError("ranges must be min,max,points");
    std::vector<double> k_grid = hypiss::default_kk_grid();
    std::ostringstream csv;
    csv << "k1,k2,ours_holds,ours_margin,kk_holds\n";
    int n1 = static_cast<int>(r1[2]), n2 = static_cast<int>(r2[2]);
    for (int i = 0; i < n1; ++i) {
        double k1 = r1[0] + (r1[1] - r1[0]) * (n1 > 1 ? i / double(n1 - 1) : 0.0);
        for (int j = 0; j < n2; ++j) {
            double k2 = r2[0] + (r2[1] - r2[0]) * (n2 > 1 ? j / double(n2 - 1) : 0.0);
            hypiss::PlanarParams p;
            p.a = hypiss::Coefficient(a);
            p.b = hypiss::Coefficient(b);
            p.lambda1 = l1;
            p.lambda2 = l2;
            p.k1 = k1;
            p.k2 = k2;
            hypiss::ConditionReport ours = hypiss::check_planar(p);
            bool kk = hypiss::kk_exists(p, k_grid).has_value();
            csv << k1 << "," << k2 << "," << (ours.holds ? 1 : 0) << "," << ours.margin
                << "," << (kk ? 1 : 0) << "\n";
        }
    }
    emit(out, csv.str());
    return 0;
}

int cmd_simulate(const std::string& system_path, const std::string& u0_path,
                 const std::string& dist_path, double T, int grid_points, double cfl,
                 int record_every, const std::string& p_list, const std::string& envelope,
                 const std::string& out, const std::string& report_path) {
    hypiss::SystemSpec sys = hypiss::load_system(system_path);
    hypiss::SpatialGrid grid = hypiss::SpatialGrid::uniform(sys.L, grid_points);
    Eigen::MatrixXd u0 = u0_from_file(u0_path, sys, grid);
    hypiss::DisturbanceSpec dist = disturbance_from_file(dist_path, sys.n);
    hypiss::SimOptions opt;
    opt.cfl = cfl;
    opt.record_every = record_every;
    hypiss::Trajectory traj = hypiss::simulate(sys, u0, dist, grid, T, opt);

    std::vector<double> ps = p_list.empty() ? std::vector<double>{} : parse_list(p_list);
    hypiss::FProfile unit;
    unit.grid = grid;
    unit.values = Eigen::MatrixXd::Ones(sys.n, grid.count());
    double mu = 0.05 / sys.L;

    std::ostringstream csv;
    csv << "t,c0,c1";
    for (double p : ps) csv << ",W1_p" << p << ",W2_p" << p;
    csv << "\n";
    for (size_t k = 0; k < traj.times.size(); ++k) {
        csv << traj.times[k] << "," << traj.c0_norms[k] << "," << traj.c1_norms[k];
        for (double p : ps) {
            auto [w1, w2] = hypiss::lyapunov_w(sys, grid, traj.snapshots[k], unit, mu, p);
            csv << "," << w1 << "," << w2;
        }
        csv << "\n";
    }
    emit(out, csv.str());

    int code = 0;
    if (!envelope.empty()) {
        hypiss::EnvelopeReport rep;
        if (envelope == "fit") {
            hypiss::IssGains g = hypiss::envelope_fit({traj}, {dist});
            rep = hypiss::envelope_check(traj, dist, g);
            rep.fitted = g;
        } else {
            std::ifstream in(envelope);
            if (!in) throw hypiss::ParseError("cannot open " + envelope);
            json gj;
            in >> gj;
            hypiss::IssGains g;
            g.C1 = gj.at("C1").get<double>();
            g.C2 = gj.at("C2").get<double>();
            g.gamma = gj.at("gamma").get<double>();
            rep = hypiss::envelope_check(traj, dist, g);
        }
        emit_json(report_path, hypiss::envelope_report_to_json(rep));
        if (!rep.holds) code = 2;
    }
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ISS certification and validation toolkit for 1-D hyperbolic "
                 "boundary-control systems"};
    app.require_subcommand(1);

    std::string matrix, system_path, u0_path, dist_path, init_sweep, out, report_path;
    std::string c_list = "1,10,100,1000", k1_range = "0,1,21", k2_range = "0,1,21";
    std::string p_list, envelope;
    double mu = 0.0, step = 1e-4, cap = 50.0, T = 1.0, cfl = 0.9;
    double a = 0.0, b = 0.0, l1 = 1.0, l2 = -1.0, k1 = 0.0, k2 = 0.0;
    int grid_points = 257, sim_points = 512, record_every = 1;
    unsigned seed = 42;

    auto* rho = app.add_subcommand("rho", "Scaled-norm infima of a matrix");
    rho->add_option("--matrix", matrix, "Matrix as JSON, e.g. [[0,2],[0.125,0]]")->required();
    rho->add_option("--seed", seed, "Multi-start seed");
    rho->add_option("--out", out, "Output JSON path (default stdout)");

    auto* cert = app.add_subcommand("certify", "Certify ISS of a system");
    cert->add_option("--system", system_path, "System JSON path")->required();
    cert->add_option("--mu", mu, "Decay weight (default 0.05/L)");
    cert->add_option("--grid-points", grid_points, "Spatial grid points");
    cert->add_option("--init-sweep", init_sweep, "Comma list of initial weight values");
    cert->add_option("--out", out, "Output JSON path (default stdout)");

    auto* ml = app.add_subcommand("max-length", "Maximal ISS length over a C grid");
    ml->add_option("--system", system_path, "System JSON path")->required();
    ml->add_option("--C", c_list, "Comma list of C values");
    ml->add_option("--step", step, "Integration step");
    ml->add_option("--cap", cap, "Length cap");
    ml->add_option("--out", out, "Output CSV path (default stdout)");

    auto* cmp = app.add_subcommand("compare-2x2", "Compare planar conditions");
    cmp->add_option("--a", a, "Coupling a")->required();
    cmp->add_option("--b", b, "Coupling b")->required();
    cmp->add_option("--lambda1", l1, "Positive speed");
    cmp->add_option("--lambda2", l2, "Negative speed");
    cmp->add_option("--k1", k1, "Reflection k1")->required();
    cmp->add_option("--k2", k2, "Reflection k2")->required();
    cmp->add_option("--out", out, "Output JSON path (default stdout)");

    auto* sw = app.add_subcommand("sweep", "Region map over a (k1,k2) grid");
    sw->add_option("--a", a, "Coupling a")->required();
    sw->add_option("--b", b, "Coupling b")->required();
    sw->add_option("--lambda1", l1, "Positive speed");
    sw->add_option("--lambda2", l2, "Negative speed");
    sw->add_option("--k1-range", k1_range, "min,max,points");
    sw->add_option("--k2-range", k2_range, "min,max,points");
    sw->add_option("--out", out, "Output CSV path (default stdout)");

    auto* sim = app.add_subcommand("simulate", "Simulate and check envelopes");
    sim->add_option("--system", system_path, "System JSON path")->required();
    sim->add_option("--u0", u0_path, "Initial data JSON (coefficients per component)");
    sim->add_option("--disturbance", dist_path, "Disturbance JSON");
    sim->add_option("--T", T, "Horizon")->required();
    sim->add_option("--grid-points", sim_points, "Spatial grid points");
    sim->add_option("--cfl", cfl, "CFL number (<= 0.9)");
    sim->add_option("--record-every", record_every, "Recording cadence in steps");
    sim->add_option("--lyapunov", p_list, "Comma list of p values");
    sim->add_option("--envelope", envelope, "'fit' or path to gains JSON");
    sim->add_option("--out", out, "Trajectory CSV path (default stdout)");
    sim->add_option("--report", report_path, "Envelope report JSON path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (rho->parsed()) return cmd_rho(matrix, seed, out);
        if (cert->parsed()) return cmd_certify(system_path, mu, grid_points, init_sweep, out);
        if (ml->parsed()) return cmd_max_length(system_path, c_list, step, cap, out);
        if (cmp->parsed()) return cmd_compare(a, b, l1, l2, k1, k2, out);
        if (sw->parsed()) return cmd_sweep(a, b, l1, l2, k1_range, k2_range, out);
        if (sim->parsed())
            return cmd_simulate(system_path, u0_path, dist_path, T, sim_points, cfl,
                                record_every, p_list, envelope, out, report_path);
    } catch (const hypiss::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
