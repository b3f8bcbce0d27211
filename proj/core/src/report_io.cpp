#include "jdqm/report_io.hpp"

#include "jdqm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace jdqm {

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, sep)) out.push_back(field);
    return out;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& s, const char* what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(std::string("cannot parse number for ") + what + ": '" + s + "'");
    }
}

} // namespace

void write_report_csv(const ConvergenceReport& report, std::ostream& out) {
    out << "scheme,delta,mean_cost,cost_se,p,error,error_ci_lo,error_ci_hi,"
           "slope_vs_cost,slope_vs_delta,excluded\n";
    for (const auto& r : report.rows) {
        out << r.scheme << ',' << fmt17(r.delta) << ',' << fmt17(r.mean_cost) << ','
            << fmt17(r.cost_se) << ',' << fmt17(r.p) << ',' << fmt17(r.error) << ','
            << fmt17(r.error_ci_lo) << ',' << fmt17(r.error_ci_hi) << ','
            << fmt17(r.slope_vs_cost) << ',' << fmt17(r.slope_vs_delta) << ',' << r.excluded
            << '\n';
    }
}

ConvergenceReport parse_report_csv(std::istream& in) {
    ConvergenceReport report;
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("report csv: missing header");
    const std::string expected =
        "scheme,delta,mean_cost,cost_se,p,error,error_ci_lo,error_ci_hi,"
        "slope_vs_cost,slope_vs_delta,excluded";
    if (trim(line) != expected) throw ConfigError("report csv: unexpected header");
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 11) throw ConfigError("report csv: bad row: " + line);
        ConvergenceReport::Row r;
        r.scheme = f[0];
        r.delta = parse_double(f[1], "delta");
        r.mean_cost = parse_double(f[2], "mean_cost");
        r.cost_se = parse_double(f[3], "cost_se");
        r.p = parse_double(f[4], "p");
        r.error = parse_double(f[5], "error");
        r.error_ci_lo = parse_double(f[6], "error_ci_lo");
        r.error_ci_hi = parse_double(f[7], "error_ci_hi");
        r.slope_vs_cost = parse_double(f[8], "slope_vs_cost");
        r.slope_vs_delta = parse_double(f[9], "slope_vs_delta");
        r.excluded = static_cast<std::uint64_t>(parse_double(f[10], "excluded"));
        report.rows.push_back(std::move(r));
    }
    // Recover the per-(scheme, p) slope list from the rows.
    for (const auto& r : report.rows) {
        if (!report.find_slope(r.scheme, r.p)) {
            ConvergenceReport::SlopeFit fit;
            fit.scheme = r.scheme;
            fit.p = r.p;
            fit.vs_cost = fit.vs_cost_lo = fit.vs_cost_hi = r.slope_vs_cost;
            fit.vs_delta = fit.vs_delta_lo = fit.vs_delta_hi = r.slope_vs_delta;
            report.slopes.push_back(fit);
        }
    }
    return report;
}

void write_cost_csv(const std::vector<CostRow>& rows, std::ostream& out) {
    out << "delta,mean_cost,normalized_cost\n";
    for (const auto& r : rows)
        out << fmt17(r.delta) << ',' << fmt17(r.mean_cost) << ',' << fmt17(r.normalized_cost)
            << '\n';
}

namespace {

struct Series {
    std::string label;
    std::vector<double> x, y; // log10 cost, log10 error
    double slope = 0.0;       // convergence rate (positive)
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

} // namespace

void write_svg_plot(const ConvergenceReport& report, std::ostream& out) {
    std::vector<Series> series;
    for (const auto& fit : report.slopes) {
        Series s;
        std::ostringstream label;
        label << fit.scheme << " (p=" << fit.p << ", rate " << std::fixed << std::setprecision(2)
              << fit.vs_cost << ")";
        s.label = label.str();
        s.slope = fit.vs_cost;
        for (const auto& r : report.rows) {
            if (r.scheme != fit.scheme || r.p != fit.p) continue;
            s.x.push_back(std::log10(r.mean_cost));
            s.y.push_back(std::log10(r.error));
        }
        if (!s.x.empty()) series.push_back(std::move(s));
    }

    const double width = 720, height = 520;
    const double ml = 70, mr = 20, mt = 30, mb = 55;

    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool first = true;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (first) {
                xmin = xmax = s.x[i];
                ymin = ymax = s.y[i];
                first = false;
            }
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    }
    if (first) { xmin = ymin = 0; xmax = ymax = 1; }
    const double xpad = 0.05 * std::max(1e-9, xmax - xmin);
    const double ypad = 0.08 * std::max(1e-9, ymax - ymin);
    xmin -= xpad; xmax += xpad; ymin -= ypad; ymax += ypad;

    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (width - ml - mr); };
    auto py = [&](double y) { return height - mb - (y - ymin) / (ymax - ymin) * (height - mt - mb); };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2
        << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">strong error vs mean cost "
           "(log-log)</text>\n";

    // Frame and decade grid lines.
    out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << width - ml - mr
        << "\" height=\"" << height - mt - mb << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int e = static_cast<int>(std::ceil(xmin)); e <= static_cast<int>(std::floor(xmax)); ++e) {
        out << "<line x1=\"" << px(e) << "\" y1=\"" << py(ymin) << "\" x2=\"" << px(e)
            << "\" y2=\"" << py(ymax) << "\" stroke=\"#dddddd\"/>\n";
        out << "<text x=\"" << px(e) << "\" y=\"" << height - mb + 18
            << "\" text-anchor=\"middle\" font-size=\"11\">1e" << e << "</text>\n";
    }
    for (int e = static_cast<int>(std::ceil(ymin)); e <= static_cast<int>(std::floor(ymax)); ++e) {
        out << "<line x1=\"" << px(xmin) << "\" y1=\"" << py(e) << "\" x2=\"" << px(xmax)
            << "\" y2=\"" << py(e) << "\" stroke=\"#dddddd\"/>\n";
        out << "<text x=\"" << ml - 8 << "\" y=\"" << py(e) + 4
            << "\" text-anchor=\"end\" font-size=\"11\">1e" << e << "</text>\n";
    }
    out << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-size=\"12\">mean cost n&#772;</text>\n";
    out << "<text x=\"16\" y=\"" << (mt + height - mb) / 2
        << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
        << (mt + height - mb) / 2 << ")\">L^p error</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = kPalette[si % 6];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
        out << "\"/>\n";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            out << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i])
                << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        // Fitted line through the centroid with the fitted slope.
        if (s.x.size() >= 2) {
            double cx = 0, cy = 0;
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                cx += s.x[i];
                cy += s.y[i];
            }
            cx /= static_cast<double>(s.x.size());
            cy /= static_cast<double>(s.x.size());
            const double x0 = *std::min_element(s.x.begin(), s.x.end());
            const double x1 = *std::max_element(s.x.begin(), s.x.end());
            auto fy = [&](double x) { return cy - s.slope * (x - cx); };
            out << "<line x1=\"" << px(x0) << "\" y1=\"" << py(fy(x0)) << "\" x2=\"" << px(x1)
                << "\" y2=\"" << py(fy(x1)) << "\" stroke=\"" << color
                << "\" stroke-dasharray=\"6 4\" stroke-width=\"1\"/>\n";
        }
        out << "<rect x=\"" << ml + 12 << "\" y=\"" << mt + 10 + 18.0 * si
            << "\" width=\"12\" height=\"4\" fill=\"" << color << "\"/>\n";
        out << "<text x=\"" << ml + 30 << "\" y=\"" << mt + 16 + 18.0 * si
            << "\" font-size=\"11\">" << s.label << "</text>\n";
    }
    out << "</svg>\n";
}

void emit_report(const ConvergenceReport& report, ReportFormat format, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output path '" + path + "'");
    if (format == ReportFormat::csv)
        write_report_csv(report, out);
    else
        write_svg_plot(report, out);
    if (!out.good()) throw ConfigError("write failed for '" + path + "'");
}

namespace {

double parse_delta_token(const std::string& tok) {
    // Accept "2^-8" alongside plain decimals.
    const auto caret = tok.find("^");
    if (caret != std::string::npos) {
        const double base = parse_double(trim(tok.substr(0, caret)), "delta base");
        const double exp = parse_double(trim(tok.substr(caret + 1)), "delta exponent");
        return std::pow(base, exp);
    }
    return parse_double(tok, "delta");
}

} // namespace

ExperimentConfig parse_config_text(std::istream& in) {
    ExperimentConfig cfg;
    cfg.deltas.clear();
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            std::ostringstream os;
            os << "config line " << lineno << ": expected key=value, got '" << line << "'";
            throw ConfigError(os.str());
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (key == "problem") {
            cfg.problem = value;
        } else if (key == "xi") {
            cfg.xi_override = parse_double(value, "xi");
        } else if (key == "horizon") {
            cfg.horizon_override = parse_double(value, "horizon");
        } else if (key == "lambda") {
            cfg.lambda_override = parse_double(value, "lambda");
        } else if (key == "schemes") {
            cfg.schemes.clear();
            for (const auto& tok : split(value, ','))
                cfg.schemes.push_back(scheme_kind_from_string(trim(tok)));
        } else if (key == "deltas") {
            for (const auto& tok : split(value, ','))
                cfg.deltas.push_back(parse_delta_token(trim(tok)));
        } else if (key == "reference_refinement") {
            cfg.reference_refinement = static_cast<int>(parse_double(value, key.c_str()));
        } else if (key == "samples") {
            cfg.samples = static_cast<int>(parse_double(value, key.c_str()));
        } else if (key == "p_list") {
            cfg.p_list.clear();
            for (const auto& tok : split(value, ','))
                cfg.p_list.push_back(parse_double(trim(tok), "p"));
        } else if (key == "seed") {
            cfg.seed = static_cast<std::uint64_t>(parse_double(value, key.c_str()));
        } else if (key == "nu_fraction") {
            cfg.nu_fraction = parse_double(value, key.c_str());
        } else if (key == "eps0") {
            cfg.eps0 = parse_double(value, key.c_str());
        } else if (key == "threads") {
            cfg.threads = static_cast<int>(parse_double(value, key.c_str()));
        } else if (key == "output_csv") {
            cfg.output_csv = value;
        } else if (key == "output_svg") {
            cfg.output_svg = value;
        } else {
            throw ConfigError("config: unknown key '" + key + "'");
        }
    }
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config_text(in);
}

} // namespace jdqm
