#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "scefis/error.hpp"
#include "scefis/pipeline.hpp"

namespace scefis {
namespace fs = std::filesystem;

namespace {

std::string num(double v, int precision = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p);
    if (!out) throw IoError("cannot write " + p.string());
    return out;
}

}  // namespace

std::string rule_trajectory_svg(const std::vector<std::vector<std::size_t>>& trajectories, const std::string& title) {
    constexpr int W = 640, H = 360, L = 56, R = 20, T = 36, B = 44;
    std::size_t max_len = 1, max_rules = 1;
    for (const auto& t : trajectories) {
        max_len = std::max(max_len, t.size());
        for (auto v : t) max_rules = std::max(max_rules, v);
    }
    const double xs = (W - L - R) / static_cast<double>(std::max<std::size_t>(max_len - 1, 1));
    const double ys = (H - T - B) / static_cast<double>(max_rules);
    static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10
       << "\" text-anchor=\"middle\">images processed</text>\n";
    os << "<text x=\"14\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 14 " << (T + H - B) / 2
       << ")\" text-anchor=\"middle\">rules</text>\n";
    for (int k = 0; k <= 4; ++k) {
        const double v = max_rules * k / 4.0;
        const double y = H - B - v * ys;
        os << "<text x=\"" << L - 6 << "\" y=\"" << num(y + 4, 1) << "\" text-anchor=\"end\">" << num(v, 0)
           << "</text>\n";
    }
    for (std::size_t r = 0; r < trajectories.size(); ++r) {
        const auto& t = trajectories[r];
        os << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" << colors[r % 10] << "\" points=\"";
        for (std::size_t i = 0; i < t.size(); ++i)
            os << (i ? " " : "") << num(L + i * xs, 1) << "," << num(H - B - t[i] * ys, 1);
        os << "\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string format_report(const ExperimentReport& report) {
    std::ostringstream os;
    os << "dataset " << report.dataset << ", segmenter " << report.segmenter << ", "
       << report.self_config.config.selected_columns.size() << " selected features, Z = "
       << report.self_config.config.window_z << "\n";
    std::vector<std::string> names;
    if (!report.runs.empty())
        for (const auto& m : report.runs.front().methods) names.push_back(m.method);
    os << "run";
    for (const auto& n : names) os << "  " << n << "(J, sd)";
    os << "  rules  p(paired)\n";
    for (const auto& run : report.runs) {
        os << run.run;
        for (const auto& n : names) {
            const auto& s = run.method(n).summary;
            os << "  " << num(100 * s.mean, 1) << " " << num(100 * s.sd, 1);
        }
        os << "  " << (run.rule_trajectory.empty() ? 0 : run.rule_trajectory.back()) << "  "
           << num(run.paired_vs_default.p, 4) << "\n";
    }
    os << "mean";
    for (const auto& n : names) {
        const auto it = report.aggregate.find(n);
        if (it != report.aggregate.end()) os << "  " << num(100 * it->second.mean, 1) << " " << num(100 * it->second.sd, 1);
    }
    os << "\n";
    return os.str();
}

void write_report(const ExperimentReport& report, const fs::path& dir) {
    fs::create_directories(dir);
    {
        auto out = open_out(dir / "runs.csv");
        out << "run,method,n,mean,sd,ci_lo,ci_hi\n";
        for (const auto& run : report.runs)
            for (const auto& m : run.methods)
                out << run.run << "," << m.method << "," << m.summary.n << "," << num(m.summary.mean) << ","
                    << num(m.summary.sd) << "," << num(m.summary.ci_lo) << "," << num(m.summary.ci_hi) << "\n";
    }
    {
        auto out = open_out(dir / "summary.csv");
        out << "method,runs,mean,sd,ci_lo,ci_hi\n";
        for (const auto& [name, s] : report.aggregate)
            out << name << "," << s.n << "," << num(s.mean) << "," << num(s.sd) << "," << num(s.ci_lo) << ","
                << num(s.ci_hi) << "\n";
    }
    {
        auto out = open_out(dir / "tests.csv");
        out << "run,test,t,dof,p\n";
        for (const auto& run : report.runs) {
            out << run.run << ",paired," << num(run.paired_vs_default.t) << "," << num(run.paired_vs_default.dof)
                << "," << num(run.paired_vs_default.p) << "\n";
            out << run.run << ",welch," << num(run.welch_vs_default.t) << "," << num(run.welch_vs_default.dof) << ","
                << num(run.welch_vs_default.p) << "\n";
        }
    }
    {
        auto out = open_out(dir / "images.csv");
        out << "run,image_id,t_star,score,t_b,best_score,appended_rows,rule_count,rows_m,skipped\n";
        for (const auto& run : report.runs)
            for (const auto& e : run.log.entries)
                out << run.run << "," << e.image_id << "," << num(e.t_star) << "," << num(e.score) << ","
                    << num(e.t_b) << "," << num(e.best_score) << "," << e.appended_rows << "," << e.rule_count
                    << "," << e.rows_m << "," << (e.skipped ? 1 : 0) << "\n";
    }
    write_best_params_csv(report.maa_records, dir / "maa.csv");
    {
        auto out = open_out(dir / "selection.txt");
        out << format_trace(report.self_config.trace);
        out << "window_z " << report.self_config.config.window_z << "\n";
        out << "normalization: statistics from each run's training images only\n";
    }
    std::vector<std::vector<std::size_t>> all;
    for (const auto& run : report.runs) {
        auto out = open_out(dir / ("rules_run" + std::to_string(run.run) + ".svg"));
        out << rule_trajectory_svg({run.rule_trajectory}, "rule count, run " + std::to_string(run.run));
        all.push_back(run.rule_trajectory);
    }
    auto out = open_out(dir / "rules_all.svg");
    out << rule_trajectory_svg(all, "rule count per run");
}

}  // namespace scefis
