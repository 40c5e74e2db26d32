#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace snninit {

// ---------------------------------------------------------------------------
// CSV: header row mandatory, '.' decimal separator regardless of locale.

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add_row(std::initializer_list<double> vals) {
        if (vals.size() != columns.size())
            throw std::invalid_argument("CsvTable: row width does not match header");
        rows.emplace_back(vals);
    }
    void add_row(std::vector<double> vals) {
        if (vals.size() != columns.size())
            throw std::invalid_argument("CsvTable: row width does not match header");
        rows.push_back(std::move(vals));
    }
};

inline std::string format_number(double v, int precision = 10) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << std::setprecision(precision) << v;
    return os.str();
}

inline void write_csv(const std::string& path, const CsvTable& table) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_csv: cannot open " + path);
    for (std::size_t c = 0; c < table.columns.size(); ++c)
        f << (c ? "," : "") << table.columns[c];
    f << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) f << (c ? "," : "") << format_number(row[c]);
        f << '\n';
    }
    if (!f) throw std::runtime_error("write_csv: write failed for " + path);
}

// ---------------------------------------------------------------------------
// Nested key-value text: dotted keys, one "key = value" per line, '#'
// comments. Used for both config files and run manifests, so a manifest can
// be fed back in as a config.

class KeyValueTree {
  public:
    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    void set(const std::string& key, double value) { values_[key] = format_number(value, 17); }
    void set(const std::string& key, std::size_t value) { values_[key] = std::to_string(value); }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback = "") const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }
    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::istringstream is(it->second);
        is.imbue(std::locale::classic());
        double v;
        if (!(is >> v)) throw std::invalid_argument("config key '" + key + "' is not a number: " + it->second);
        return v;
    }
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return std::stoull(it->second);
    }

    const std::map<std::string, std::string>& entries() const { return values_; }

    void save(const std::string& path) const {
        std::ofstream f(path);
        if (!f) throw std::runtime_error("KeyValueTree: cannot open " + path);
        for (const auto& [k, v] : values_) f << k << " = " << v << '\n';
        if (!f) throw std::runtime_error("KeyValueTree: write failed for " + path);
    }

    static KeyValueTree load(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw std::runtime_error("KeyValueTree: cannot open " + path);
        KeyValueTree t;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(f, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            auto trim = [](std::string s) {
                const auto b = s.find_first_not_of(" \t\r");
                const auto e = s.find_last_not_of(" \t\r");
                return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
            };
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                            ": expected 'key = value'");
            const std::string key = trim(line.substr(0, eq));
            const std::string val = trim(line.substr(eq + 1));
            if (key.empty())
                throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": empty key");
            t.values_[key] = val;
        }
        return t;
    }

  private:
    std::map<std::string, std::string> values_;
};

// ---------------------------------------------------------------------------
// Minimal SVG line plot with optional error bars; one series per call to
// add_series. Purely a convenience — the CSVs are the contract.

class SvgPlot {
  public:
    SvgPlot(std::string title, std::string x_label, std::string y_label)
        : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

    void add_series(std::string name, std::vector<double> x, std::vector<double> y,
                    std::vector<double> yerr = {}) {
        if (x.size() != y.size() || (!yerr.empty() && yerr.size() != y.size()))
            throw std::invalid_argument("SvgPlot: series length mismatch");
        series_.push_back({std::move(name), std::move(x), std::move(y), std::move(yerr)});
    }

    void save(const std::string& path) const {
        double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
        for (const auto& s : series_)
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                const double lo = s.y[i] - (s.yerr.empty() ? 0.0 : s.yerr[i]);
                const double hi = s.y[i] + (s.yerr.empty() ? 0.0 : s.yerr[i]);
                x0 = std::min(x0, s.x[i]);
                x1 = std::max(x1, s.x[i]);
                y0 = std::min(y0, lo);
                y1 = std::max(y1, hi);
            }
        if (x0 > x1) { x0 = 0; x1 = 1; y0 = 0; y1 = 1; }
        if (x1 == x0) x1 = x0 + 1;
        if (y1 == y0) y1 = y0 + 1;
        const double pad_y = 0.08 * (y1 - y0);
        y0 -= pad_y;
        y1 += pad_y;

        const int w = 760, h = 480, ml = 70, mr = 20, mt = 40, mb = 55;
        auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (w - ml - mr); };
        auto py = [&](double y) { return h - mb - (y - y0) / (y1 - y0) * (h - mt - mb); };
        static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

        std::ofstream f(path);
        if (!f) throw std::runtime_error("SvgPlot: cannot open " + path);
        f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n"
          << "<rect width='100%' height='100%' fill='white'/>\n"
          << "<text x='" << w / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title_
          << "</text>\n";
        // axes + ticks
        f << "<line x1='" << ml << "' y1='" << h - mb << "' x2='" << w - mr << "' y2='" << h - mb
          << "' stroke='black'/>\n"
          << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << h - mb
          << "' stroke='black'/>\n";
        for (int i = 0; i <= 5; ++i) {
            const double xv = x0 + (x1 - x0) * i / 5.0, yv = y0 + (y1 - y0) * i / 5.0;
            f << "<text x='" << px(xv) << "' y='" << h - mb + 18
              << "' text-anchor='middle' font-size='11'>" << format_number(xv, 4) << "</text>\n"
              << "<text x='" << ml - 6 << "' y='" << py(yv) + 4
              << "' text-anchor='end' font-size='11'>" << format_number(yv, 4) << "</text>\n";
        }
        f << "<text x='" << (ml + w - mr) / 2 << "' y='" << h - 12
          << "' text-anchor='middle' font-size='13'>" << x_label_ << "</text>\n"
          << "<text x='16' y='" << (mt + h - mb) / 2
          << "' text-anchor='middle' font-size='13' transform='rotate(-90 16 "
          << (mt + h - mb) / 2 << ")'>" << y_label_ << "</text>\n";

        for (std::size_t si = 0; si < series_.size(); ++si) {
            const auto& s = series_[si];
            const char* col = colors[si % 5];
            f << "<polyline fill='none' stroke='" << col << "' stroke-width='1.5' points='";
            for (std::size_t i = 0; i < s.x.size(); ++i)
                f << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
            f << "'/>\n";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                f << "<circle cx='" << px(s.x[i]) << "' cy='" << py(s.y[i]) << "' r='2.5' fill='"
                  << col << "'/>\n";
                if (!s.yerr.empty() && s.yerr[i] > 0.0)
                    f << "<line x1='" << px(s.x[i]) << "' y1='" << py(s.y[i] - s.yerr[i])
                      << "' x2='" << px(s.x[i]) << "' y2='" << py(s.y[i] + s.yerr[i])
                      << "' stroke='" << col << "'/>\n";
            }
            f << "<text x='" << w - mr - 8 << "' y='" << mt + 16 * (si + 1)
              << "' text-anchor='end' font-size='12' fill='" << col << "'>" << s.name
              << "</text>\n";
        }
        f << "</svg>\n";
        if (!f) throw std::runtime_error("SvgPlot: write failed for " + path);
    }

  private:
    struct Series {
        std::string name;
        std::vector<double> x, y, yerr;
    };
    std::string title_, x_label_, y_label_;
    std::vector<Series> series_;
};

}  // namespace snninit
