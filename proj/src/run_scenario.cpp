#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "coalition_nash/errors.hpp"
#include "coalition_nash/harness.hpp"
#include "coalition_nash/log.hpp"

namespace coalition_nash {

namespace {

using nlohmann::json;

// 17 significant digits: lossless round-trip for 64-bit floats.
std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Short form for log messages.
std::string fmt6(double v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

struct Fit {
    std::optional<double> slope, r_squared;
};

// Least-squares line through (k, log dist(k)) for k = 1..window.
Fit fit_log_distance(const Vec& dist_series, long window) {
    Fit fit;
    const long n = std::min<long>(window, static_cast<long>(dist_series.size()));
    if (n < 2) return fit;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::vector<double> ys(n);
    for (long i = 0; i < n; ++i) {
        if (!(dist_series[i] > 0.0)) return fit;  // log undefined: no fit
        const double x = static_cast<double>(i + 1);
        ys[i] = std::log(dist_series[i]);
        sx += x;
        sy += ys[i];
        sxx += x * x;
        sxy += x * ys[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) return fit;
    const double slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;
    double ss_res = 0.0, ss_tot = 0.0;
    const double mean = sy / n;
    for (long i = 0; i < n; ++i) {
        const double predicted = slope * (i + 1) + intercept;
        ss_res += (ys[i] - predicted) * (ys[i] - predicted);
        ss_tot += (ys[i] - mean) * (ys[i] - mean);
    }
    fit.slope = slope;
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

void write_csv(const std::filesystem::path& path, const NetworkTopology& topo,
               const Trajectory& traj, bool general) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write trajectory file " + path.string());
    out << "k";
    for (int a = 0; a < topo.n_sum; ++a) {
        const AgentId id = topo.unflat(a);
        out << ",x_" << id.coalition << id.member;
    }
    out << ",constraint_res,e_xi_norm,e_psi_norm,V,dist_to_ne,kkt_res\n";
    auto cell = [&](double v) -> std::string { return std::isnan(v) ? "" : fmt(v); };
    for (size_t row = 0; row < traj.diagnostics.size(); ++row) {
        const Diagnostics& d = traj.diagnostics[row];
        out << d.k;
        for (double v : traj.x_rows[row]) out << ',' << fmt(v);
        out << ',' << fmt(d.constraint_residual);
        out << ',' << fmt(d.e_xi_norm);
        out << ',' << (general ? cell(d.e_psi_norm) : std::string());
        out << ',' << cell(general ? d.Vtilde : d.V);
        out << ',' << cell(d.dist_to_ne);
        out << ',' << fmt(d.kkt_residual);
        out << '\n';
    }
}

json certificate_json(const StepSizeCertificate& c) {
    json j;
    j["mode"] = c.mode == AlgorithmMode::Special ? "special" : "general";
    j["bound"] = c.bound;
    j["rate"] = c.rate;
    j["b"] = c.b;
    j["W_M_norm"] = c.W_M_norm;
    j["MTW_M_norm"] = c.MTW_M_norm;
    j["I_minus_M_norm"] = c.I_minus_M_norm;
    j["lambda2_Lsq"] = c.lambda2_Lsq;
    j["mu"] = c.constants.mu;
    j["l_i"] = c.constants.l_i;
    if (c.mode == AlgorithmMode::Special) {
        j["gamma"] = c.gamma;
    } else {
        j["gamma_psi"] = c.gamma_psi;
        j["gamma_xi"] = c.gamma_xi;
        j["W_c_norm"] = c.W_c_norm;
    }
    return j;
}

}  // namespace

std::string certificate_to_json(const StepSizeCertificate& c) {
    return certificate_json(c).dump(2) + "\n";
}

std::string RunReport::to_json() const {
    json j;
    j["name"] = name;
    j["mode"] = mode == AlgorithmMode::Special ? "special" : "general";
    j["step"] = step;
    j["iterations"] = iterations;
    j["stopped_by_tolerance"] = stopped_by_tolerance;
    j["final_x"] = final_x;
    j["final_f"] = final_f;
    j["kkt_residual"] = kkt_residual;
    j["constraint_residual"] = constraint_residual;
    j["slope"] = slope ? json(*slope) : json(nullptr);
    j["r_squared"] = r_squared ? json(*r_squared) : json(nullptr);
    j["csv"] = csv_path;
    j["certificate"] = have_certificate ? certificate_json(certificate) : json(nullptr);
    if (reference_max_deviation) {
        j["reference"]["max_deviation"] = *reference_max_deviation;
        j["reference"]["passed"] = reference_passed;
    }
    return j.dump(2) + "\n";
}

RunReport run_scenario(const Scenario& s, const std::filesystem::path& output_dir) {
    const Game game = make_game(s);
    const NetworkTopology& topo = game.topology();
    log::info("scenario \"" + s.name + "\": " + std::to_string(topo.n_sum) + " agents in " +
              std::to_string(topo.n_coalitions) + " coalitions");

    const NEResult oracle = solve_ne(game, 1e-9);
    log::info("oracle equilibrium residual " + fmt6(oracle.kkt_residual));

    RunReport report;
    report.name = s.name;
    report.mode = s.mode;

    // The certificate powers both the "certified" step choice and the
    // composite-function column; a degenerate topology only forbids the former.
    const StepSizeCertificate* cert_ptr = nullptr;
    try {
        report.certificate =
            s.mode == AlgorithmMode::Special ? alpha_bound(game) : beta_bound(game);
        report.have_certificate = true;
        cert_ptr = &report.certificate;
    } catch (const DegenerateTopology&) {
        if (s.certified_step) throw;
    }
    report.step = s.certified_step ? report.certificate.bound : s.step;
    if (report.have_certificate && !s.certified_step && report.step > report.certificate.bound)
        log::info("step " + fmt6(report.step) + " exceeds the certified bound " +
                  fmt6(report.certificate.bound) +
                  " (allowed; the bound is sufficient, not necessary)");

    RunOptions opts;
    opts.mode = s.mode;
    opts.step = report.step;
    opts.max_iters = s.max_iters;
    opts.stop_tol = s.stop_tol;
    opts.log_stride = s.log_stride;
    opts.oracle_ne = oracle.x_star;
    opts.certificate = cert_ptr;
    const Trajectory traj = run(game, opts);

    report.iterations = traj.iterations;
    report.stopped_by_tolerance = traj.stopped_by_tolerance;
    report.final_x = traj.final_x;
    report.final_f = coalition_values(game, traj.final_x);
    const NEResult at_end = verify_ne(game, traj.final_x, 1e-9);
    report.kkt_residual = at_end.kkt_residual;
    report.constraint_residual = at_end.constraint_residual;
    const Fit fit = fit_log_distance(traj.dist_series, 2000);
    report.slope = fit.slope;
    report.r_squared = fit.r_squared;

    std::filesystem::create_directories(output_dir);
    const std::filesystem::path csv = output_dir / (s.name + ".csv");
    write_csv(csv, topo, traj, s.mode == AlgorithmMode::General);
    report.csv_path = csv.string();

    if (s.reference_ne) {
        double dev = 0.0;
        for (size_t i = 0; i < report.final_x.size(); ++i)
            dev = std::max(dev, std::fabs(report.final_x[i] - (*s.reference_ne)[i]));
        report.reference_max_deviation = dev;
        report.reference_passed = dev <= s.reference_tolerance;
        log::info("reference deviation " + fmt6(dev) + " (tolerance " +
                  fmt6(s.reference_tolerance) + ")");
    }

    const std::filesystem::path report_path = output_dir / (s.name + ".report.json");
    std::ofstream out(report_path);
    if (!out) throw Error("cannot write report file " + report_path.string());
    out << report.to_json();
    log::info("wrote " + csv.string() + " and " + report_path.string());
    return report;
}

}  // namespace coalition_nash
