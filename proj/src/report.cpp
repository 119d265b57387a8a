#include <imbcal/csv.hpp>
#include <imbcal/errors.hpp>
#include <imbcal/report.hpp>
#include <imbcal/svg.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace imbcal {

namespace {

std::string optional_number(const std::optional<double>& v)
{
    return v ? format_double(*v) : std::string();
}

std::vector<std::string> split(const std::string& text, char sep)
{
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(text);
    while (std::getline(in, cur, sep)) {
        parts.push_back(cur);
    }
    if (!text.empty() && text.back() == sep) {
        parts.emplace_back();
    }
    return parts;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

class CellReader
{
public:
    CellReader(const CsvTable& t, std::size_t row) : table_(t), row_(row) {}

    const std::string& text(std::size_t col) const { return table_.rows[row_][col]; }

    std::optional<double> number(std::size_t col) const
    {
        const auto& s = text(col);
        if (s.empty()) {
            return std::nullopt;
        }
        double v = 0.0;
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) {
            fail(col, "'" + s + "' is not a number");
        }
        return v;
    }

    double required(std::size_t col) const
    {
        const auto v = number(col);
        if (!v) {
            fail(col, "missing value");
        }
        return *v;
    }

    int integer(std::size_t col) const
    {
        const auto& s = text(col);
        int v = 0;
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
            fail(col, "'" + s + "' is not an integer");
        }
        return v;
    }

    [[noreturn]] void fail(std::size_t col, const std::string& what) const
    {
        throw IngestionError("row " + std::to_string(row_ + 2) + ", column '" + table_.header[col] + "': " + what);
    }

private:
    const CsvTable& table_;
    std::size_t row_;
};

template <class F>
auto guarded(const CellReader& r, std::size_t col, F&& f)
{
    try {
        return f(r.text(col));
    } catch (const IngestionError&) {
        throw;
    } catch (const Error& e) {
        r.fail(col, e.what());
    }
}

std::string model_label(const ModelKey& k)
{
    std::string s = std::string(to_string(k.algorithm)) + " " + std::string(to_string(k.dataset));
    if (k.recalibrated) {
        s += " recalibrated";
    }
    return s;
}

Metric at_event_fraction(Metric at_half)
{
    switch (at_half) {
    case Metric::acc_t50: return Metric::acc_tef;
    case Metric::sens_t50: return Metric::sens_tef;
    case Metric::spec_t50: return Metric::spec_tef;
    default: throw ConfigurationError("threshold_columns: not a threshold metric: " + std::string(to_string(at_half)));
    }
}

std::string fixed2(double v)
{
    if (v <= -100.0) {
        return "<-100";
    }
    if (v >= 100.0) {
        return ">100";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    std::string s = buf;
    return s == "-0.00" ? "0.00" : s;
}

void scenario_prefix(std::vector<std::string>& row, const Scenario& s)
{
    row.push_back(std::to_string(s.id));
    row.push_back(format_double(s.event_fraction));
    row.push_back(std::to_string(s.n_train));
    row.push_back(std::to_string(s.p));
}

constexpr ResampleKind datasets[] = {ResampleKind::none, ResampleKind::rus, ResampleKind::ros, ResampleKind::smote};
constexpr Algorithm algorithms[] = {Algorithm::slr, Algorithm::ridge};

} // namespace

void write_run_csv(std::ostream& out, std::vector<RunResult> results)
{
    std::sort(results.begin(), results.end(), [](const RunResult& a, const RunResult& b) {
        return std::tie(a.scenario_id, a.run_id) < std::tie(b.scenario_id, b.run_id);
    });
    out << run_csv_header << '\n';
    for (const auto& r : results) {
        std::map<ModelKey, std::vector<std::string>> rows;
        const auto prefix = [&](const ModelKey& k) {
            return std::vector<std::string>{std::to_string(r.scenario_id), std::to_string(r.run_id),
                                            std::string(to_string(k.dataset)), std::string(to_string(k.algorithm)),
                                            k.recalibrated ? "1" : "0"};
        };
        for (const auto& rec : r.records) {
            auto row = prefix(rec.key);
            row.push_back(format_double(rec.auroc));
            row.push_back(format_double(rec.calib_intercept));
            row.push_back(optional_number(rec.calib_slope));
            row.push_back(format_double(rec.at_half.accuracy));
            row.push_back(optional_number(rec.at_half.sensitivity));
            row.push_back(optional_number(rec.at_half.specificity));
            if (rec.at_event_fraction) {
                row.push_back(format_double(rec.at_event_fraction->accuracy));
                row.push_back(optional_number(rec.at_event_fraction->sensitivity));
                row.push_back(optional_number(rec.at_event_fraction->specificity));
            } else {
                row.insert(row.end(), 3, std::string());
            }
            row.emplace_back();
            rows[rec.key] = std::move(row);
        }
        for (const auto& ex : r.exclusions) {
            auto row = prefix(ex.key);
            row.insert(row.end(), 9, std::string());
            row.emplace_back(to_string(ex.reason));
            rows[ex.key] = std::move(row);
        }
        for (const auto& [key, row] : rows) {
            write_csv_row(out, row);
        }
    }
}

std::vector<RunResult> read_run_csv(std::istream& in, double intercept_cap)
{
    const auto table = parse_csv(in);
    const auto expected = split(run_csv_header, ',');
    if (table.header != expected) {
        throw IngestionError(std::string("per-run csv: header must be ") + run_csv_header);
    }
    std::map<std::pair<int, int>, RunResult> runs;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const CellReader r(table, i);
        const int scenario = r.integer(0);
        const int run = r.integer(1);
        ModelKey key;
        key.dataset = guarded(r, 2, [](const std::string& s) { return parse_resample_kind(s); });
        key.algorithm = guarded(r, 3, [](const std::string& s) { return parse_algorithm(s); });
        const auto& recal = r.text(4);
        if (recal == "1" || recal == "true" || recal == "TRUE") {
            key.recalibrated = true;
        } else if (!(recal == "0" || recal == "false" || recal == "FALSE")) {
            r.fail(4, "expected 0 or 1, found '" + recal + "'");
        }
        auto& result = runs[{scenario, run}];
        result.scenario_id = scenario;
        result.run_id = run;

        const auto reason = guarded(r, 14, [](const std::string& s) { return parse_exclusion_reason(s); });
        if (reason != ExclusionReason::none) {
            result.exclusions.push_back({key, reason});
            continue;
        }
        MetricRecord rec;
        rec.key = key;
        rec.auroc = r.required(5);
        rec.calib_intercept = r.required(6);
        rec.intercept_capped = std::abs(rec.calib_intercept) >= intercept_cap;
        rec.calib_slope = r.number(7);
        rec.at_half.accuracy = r.required(8);
        rec.at_half.sensitivity = r.number(9);
        rec.at_half.specificity = r.number(10);
        if (const auto acc = r.number(11)) {
            rec.at_event_fraction = ThresholdMetrics{*acc, r.number(12), r.number(13)};
        }
        result.records.push_back(rec);
    }
    std::vector<RunResult> out;
    out.reserve(runs.size());
    for (auto& [id, r] : runs) {
        std::sort(r.records.begin(), r.records.end(),
                  [](const MetricRecord& a, const MetricRecord& b) { return a.key < b.key; });
        std::sort(r.exclusions.begin(), r.exclusions.end(),
                  [](const Exclusion& a, const Exclusion& b) { return a.key < b.key; });
        out.push_back(std::move(r));
    }
    return out;
}

void write_summary_csv(std::ostream& out, const ScenarioSummary& summary)
{
    out << "scenario_id,dataset,algorithm,recalibrated,metric,included,median,q25,q75\n";
    for (const auto& c : summary.cells) {
        std::vector<std::string> row{std::to_string(c.scenario_id), std::string(to_string(c.key.dataset)),
                                     std::string(to_string(c.key.algorithm)), c.key.recalibrated ? "1" : "0",
                                     std::string(to_string(c.metric)), std::to_string(c.included)};
        if (c.summary) {
            row.push_back(format_double(c.summary->median));
            row.push_back(format_double(c.summary->q25));
            row.push_back(format_double(c.summary->q75));
        } else {
            row.insert(row.end(), 3, std::string());
        }
        write_csv_row(out, row);
    }
}

void write_exclusion_csv(std::ostream& out, const ScenarioSummary& summary)
{
    out << "scenario_id,dataset,algorithm,recalibrated,runs,separation,one_class,non_convergence,capped\n";
    for (const auto& e : summary.exclusions) {
        write_csv_row(out, {std::to_string(e.scenario_id), std::string(to_string(e.key.dataset)),
                            std::string(to_string(e.key.algorithm)), e.key.recalibrated ? "1" : "0",
                            std::to_string(e.runs), std::to_string(e.separation), std::to_string(e.one_class),
                            std::to_string(e.non_convergence), std::to_string(e.capped)});
    }
}

std::vector<TableColumn> model_columns(Metric metric, bool recalibrated)
{
    std::vector<TableColumn> cols;
    for (Algorithm a : algorithms) {
        for (ResampleKind d : datasets) {
            const ModelKey key{d, a, recalibrated && d != ResampleKind::none};
            cols.push_back({model_label(key), key, metric});
        }
    }
    return cols;
}

std::vector<TableColumn> threshold_columns(Metric at_half)
{
    const Metric at_ef = at_event_fraction(at_half);
    std::vector<TableColumn> cols;
    for (Algorithm a : algorithms) {
        const ModelKey unadjusted{ResampleKind::none, a, false};
        cols.push_back({model_label(unadjusted) + " (0.5)", unadjusted, at_half});
        cols.push_back({model_label(unadjusted) + " (EF)", unadjusted, at_ef});
        for (ResampleKind d : {ResampleKind::rus, ResampleKind::ros, ResampleKind::smote}) {
            const ModelKey key{d, a, false};
            cols.push_back({model_label(key) + " (0.5)", key, at_half});
        }
    }
    return cols;
}

std::string format_summary(const std::optional<MedianIqr>& s)
{
    if (!s) {
        return "NA";
    }
    return fixed2(s->median) + " (" + fixed2(s->q25) + ";" + fixed2(s->q75) + ")";
}

void write_wide_table(std::ostream& out, const ScenarioSummary& summary, const std::vector<Scenario>& scenarios,
                      const std::vector<TableColumn>& columns)
{
    std::vector<std::string> header{"scenario", "EF", "N", "p"};
    for (const auto& c : columns) {
        header.push_back(c.label);
    }
    write_csv_row(out, header);
    for (const auto& s : scenarios) {
        std::vector<std::string> row;
        scenario_prefix(row, s);
        for (const auto& c : columns) {
            const auto* cell = find_cell(summary, s.id, c.key, c.metric);
            row.push_back(cell ? format_summary(cell->summary) : "NA");
        }
        write_csv_row(out, row);
    }
}

void write_separation_table(std::ostream& out, const ScenarioSummary& summary,
                            const std::vector<Scenario>& scenarios)
{
    std::vector<std::string> header{"scenario", "EF", "N", "p"};
    for (ResampleKind d : datasets) {
        header.emplace_back(to_string(d));
    }
    write_csv_row(out, header);
    for (const auto& s : scenarios) {
        std::vector<std::string> row;
        scenario_prefix(row, s);
        for (ResampleKind d : datasets) {
            const ModelKey key{d, Algorithm::slr, false};
            const auto it = std::find_if(summary.exclusions.begin(), summary.exclusions.end(),
                                         [&](const ExclusionCount& e) { return e.scenario_id == s.id && e.key == key; });
            if (it == summary.exclusions.end() || it->separation == 0) {
                row.emplace_back("0");
                continue;
            }
            char buf[64];
            std::snprintf(buf, sizeof buf, "%d (%.1f%%)", it->separation, 100.0 * it->separation / it->runs);
            row.emplace_back(buf);
        }
        write_csv_row(out, row);
    }
}

void RunConfig::validate() const
{
    if (n_runs < 1) {
        throw ConfigurationError("runs must be at least 1");
    }
    if (n_test < 10) {
        throw ConfigurationError("test-n must be at least 10");
    }
    if (workers < 1) {
        throw ConfigurationError("workers must be at least 1");
    }
    if (!(loess_span > 0.0 && loess_span <= 1.0)) {
        throw ConfigurationError("loess span must lie in (0, 1]");
    }
    if (bootstrap_resamples < 1) {
        throw ConfigurationError("bootstrap resamples must be at least 1");
    }
    for (int id : scenarios) {
        if (id < 1 || id > 24) {
            throw ConfigurationError("scenario id out of range 1..24: " + std::to_string(id));
        }
    }
}

std::vector<int> parse_scenario_filter(const std::string& text)
{
    const auto t = trim(text);
    if (t.empty()) {
        throw ConfigurationError("empty scenario filter; use \"all\" or a list such as 1,4,9-12");
    }
    std::set<int> ids;
    if (t == "all") {
        for (int i = 1; i <= 24; ++i) {
            ids.insert(i);
        }
        return {ids.begin(), ids.end()};
    }
    const auto to_int = [&](const std::string& s) {
        const auto v = trim(s);
        int out = 0;
        const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (v.empty() || ec != std::errc() || p != v.data() + v.size()) {
            throw ConfigurationError("bad scenario id '" + v + "' in filter '" + t + "'");
        }
        if (out < 1 || out > 24) {
            throw ConfigurationError("scenario id out of range 1..24: " + std::to_string(out));
        }
        return out;
    };
    for (const auto& part : split(t, ',')) {
        const auto dash = part.find('-');
        if (dash == std::string::npos) {
            ids.insert(to_int(part));
            continue;
        }
        const int a = to_int(part.substr(0, dash));
        const int b = to_int(part.substr(dash + 1));
        if (b < a) {
            throw ConfigurationError("descending scenario range '" + trim(part) + "'");
        }
        for (int i = a; i <= b; ++i) {
            ids.insert(i);
        }
    }
    return {ids.begin(), ids.end()};
}

int default_workers()
{
    if (const char* env = std::getenv("IMBCAL_WORKERS")) {
        const std::string s = env;
        int v = 0;
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec == std::errc() && p == s.data() + s.size() && v > 0) {
            return v;
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

NetBenefitWeight parse_net_benefit_weight(const std::string& name)
{
    if (name == "odds") {
        return NetBenefitWeight::odds;
    }
    if (name == "inverse_complement") {
        return NetBenefitWeight::inverse_complement;
    }
    throw ConfigurationError("unknown net benefit weight '" + name + "' (odds or inverse_complement)");
}

std::vector<Scenario> configured_scenarios(const RunConfig& config, const std::vector<DgmSpec>& cache)
{
    config.validate();
    auto all = study_scenarios(config.n_test, config.n_runs);
    std::vector<Scenario> chosen;
    for (auto& s : all) {
        if (config.scenarios.empty() ||
            std::find(config.scenarios.begin(), config.scenarios.end(), s.id) != config.scenarios.end()) {
            chosen.push_back(s);
        }
    }
    attach_coefficients(chosen, cache);
    return chosen;
}

std::vector<RunResult> run_study(const std::vector<Scenario>& scenarios, const RunConfig& config,
                                 const SimulationOptions& options, const ProgressFn& progress)
{
    std::vector<RunResult> all;
    for (const auto& s : scenarios) {
        auto r = run_scenario(s, config.master_seed, config.workers, options, progress);
        all.insert(all.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
    }
    return all;
}

std::string study_boxplot(const std::vector<Scenario>& scenarios, const std::vector<RunResult>& results,
                          Metric metric, double event_fraction, Algorithm algorithm, bool recalibrated)
{
    BoxplotData plot;
    std::vector<int> ids;
    for (const auto& s : scenarios) {
        if (s.event_fraction == event_fraction) {
            ids.push_back(s.id);
            plot.groups.push_back(std::to_string(s.id) + " (" + std::to_string(s.n_train) + ", " +
                                  std::to_string(s.p) + ")");
        }
    }
    std::string metric_name(to_string(metric));
    if (metric == Metric::auroc) {
        plot.y_label = "AUROC";
    } else if (metric == Metric::calib_intercept) {
        plot.y_label = "Calibration intercept";
        plot.reference = 0.0;
    } else if (metric == Metric::calib_slope) {
        plot.y_label = "Calibration slope";
        plot.reference = 1.0;
    } else {
        plot.y_label = metric_name;
    }
    char ef[32];
    std::snprintf(ef, sizeof ef, "%g", event_fraction);
    plot.title = plot.y_label + (recalibrated ? " after recalibration" : "") + ", event fraction " + ef + ", " +
                 std::string(to_string(algorithm));

    for (ResampleKind d : datasets) {
        const ModelKey key{d, algorithm, recalibrated && d != ResampleKind::none};
        BoxSeries series{model_label(key).substr(to_string(algorithm).size() + 1), {}};
        series.values.resize(ids.size());
        bool any = false;
        for (const auto& r : results) {
            const auto g = std::find(ids.begin(), ids.end(), r.scenario_id);
            if (g == ids.end()) {
                continue;
            }
            for (const auto& rec : r.records) {
                if (rec.key == key) {
                    if (const auto v = metric_value(rec, metric)) {
                        series.values[std::size_t(g - ids.begin())].push_back(*v);
                        any = true;
                    }
                }
            }
        }
        if (any) {
            plot.series.push_back(std::move(series));
        }
    }
    return render_boxplot(plot);
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IngestionError("cannot open " + path.string());
    }
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const std::filesystem::path& path, const std::string& content)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) {
        throw Error("cannot write " + path.string());
    }
}

void write_study_outputs(const std::filesystem::path& dir, const std::vector<Scenario>& scenarios,
                         const std::vector<RunResult>& results, bool figures)
{
    std::ostringstream runs;
    write_run_csv(runs, results);
    write_file(dir / "runs.csv", runs.str());
    write_study_reports(dir, scenarios, results, figures);
}

void write_study_reports(const std::filesystem::path& dir, const std::vector<Scenario>& scenarios,
                         const std::vector<RunResult>& results, bool figures)
{
    const auto summary = aggregate(results);
    const auto emit = [&](const std::string& name, auto&& writer) {
        std::ostringstream s;
        writer(s);
        write_file(dir / name, s.str());
    };
    emit("summary.csv", [&](std::ostream& o) { write_summary_csv(o, summary); });
    emit("exclusions.csv", [&](std::ostream& o) { write_exclusion_csv(o, summary); });
    emit("table_separation.csv", [&](std::ostream& o) { write_separation_table(o, summary, scenarios); });
    const std::vector<std::pair<std::string, std::vector<TableColumn>>> tables{
        {"table_auroc.csv", model_columns(Metric::auroc)},
        {"table_calibration_intercept.csv", model_columns(Metric::calib_intercept)},
        {"table_recalibrated_intercept.csv", model_columns(Metric::calib_intercept, true)},
        {"table_calibration_slope.csv", model_columns(Metric::calib_slope)},
        {"table_recalibrated_slope.csv", model_columns(Metric::calib_slope, true)},
        {"table_accuracy.csv", threshold_columns(Metric::acc_t50)},
        {"table_sensitivity.csv", threshold_columns(Metric::sens_t50)},
        {"table_specificity.csv", threshold_columns(Metric::spec_t50)},
    };
    for (const auto& [name, cols] : tables) {
        emit(name, [&](std::ostream& o) { write_wide_table(o, summary, scenarios, cols); });
    }
    if (!figures) {
        return;
    }
    std::vector<double> efs;
    for (const auto& s : scenarios) {
        if (std::find(efs.begin(), efs.end(), s.event_fraction) == efs.end()) {
            efs.push_back(s.event_fraction);
        }
    }
    const std::vector<std::pair<Metric, bool>> plots{{Metric::auroc, false},
                                                      {Metric::calib_intercept, false},
                                                      {Metric::calib_slope, false},
                                                      {Metric::calib_intercept, true}};
    for (const auto& [metric, recal] : plots) {
        for (double ef : efs) {
            for (Algorithm a : algorithms) {
                char name[128];
                std::snprintf(name, sizeof name, "boxplot_%s%s_ef%g_%s.svg", recal ? "recalibrated_" : "",
                              std::string(to_string(metric)).c_str(), ef,
                              a == Algorithm::slr ? "slr" : "ridge");
                try {
                    write_file(dir / "figures" / name, study_boxplot(scenarios, results, metric, ef, a, recal));
                } catch (const DomainError&) {
                    // every model of this panel was excluded; nothing to draw
                }
            }
        }
    }
}

} // namespace imbcal
