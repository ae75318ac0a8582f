#include "qfund/ledger_io.hpp"

#include "qfund/errors.hpp"
#include "qfund/stats.hpp"
#include "qfund/text.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

namespace qf {

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

struct Header {
    std::unordered_map<std::string, std::size_t> columns;
    std::size_t width = 0;

    std::size_t at(const std::string& name) const { return columns.at(name); }
};

Header read_header(std::istream& in, std::initializer_list<const char*> required, const char* what) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError(std::string(what) + ": missing header");
    if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    const auto fields = text::split_csv(line);
    Header h;
    h.width = fields.size();
    for (std::size_t i = 0; i < fields.size(); ++i) h.columns.emplace(std::string(text::trim(fields[i])), i);
    for (const char* name : required)
        if (!h.columns.count(name))
            throw FormatError(std::string(what) + ": header lacks column '" + name + "'");
    return h;
}

bool blank(const std::string& line) {
    return text::trim(line).empty();
}

} // namespace

ContributionLoad parse_contributions(std::istream& in) {
    const Header h = read_header(in, {"day", "category", "project_id", "contributor_id", "amount"}, "contributions");
    ContributionLoad out;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank(line)) continue;
        const auto f = text::split_csv(line);
        if (f.size() < h.width) {
            out.errors.push_back({lineno, "expected " + std::to_string(h.width) + " fields, got " +
                                              std::to_string(f.size())});
            continue;
        }
        Contribution c;
        c.category = std::string(text::trim(f[h.at("category")]));
        c.project_id = std::string(text::trim(f[h.at("project_id")]));
        c.contributor_id = std::string(text::trim(f[h.at("contributor_id")]));
        if (!text::parse_int(f[h.at("day")], c.day) || c.day < 0) {
            out.errors.push_back({lineno, "bad day '" + f[h.at("day")] + "'"});
            continue;
        }
        if (!text::parse_double(f[h.at("amount")], c.amount) || !std::isfinite(c.amount)) {
            out.errors.push_back({lineno, "bad amount '" + f[h.at("amount")] + "'"});
            continue;
        }
        if (!(c.amount > 0.0)) {
            out.errors.push_back({lineno, "nonpositive amount " + f[h.at("amount")]});
            continue;
        }
        if (c.project_id.empty() || c.contributor_id.empty()) {
            out.errors.push_back({lineno, "empty project_id or contributor_id"});
            continue;
        }
        out.records.push_back(std::move(c));
    }
    return out;
}

ContributionLoad load_contributions(const std::filesystem::path& path) {
    auto in = open_in(path);
    return parse_contributions(in);
}

void write_contributions(std::ostream& out, std::span<const Contribution> records) {
    out << "day,category,project_id,contributor_id,amount\n";
    for (const auto& c : records)
        out << c.day << ',' << text::csv_field(c.category) << ',' << text::csv_field(c.project_id) << ','
            << text::csv_field(c.contributor_id) << ',' << text::format_double(c.amount) << '\n';
}

void write_contributions(const std::filesystem::path& path, std::span<const Contribution> records) {
    auto out = open_out(path);
    write_contributions(out, records);
}

TeamRoster parse_roster(std::istream& in) {
    const Header h = read_header(in, {"project_id", "member_id"}, "teams");
    TeamRoster roster;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank(line)) continue;
        const auto f = text::split_csv(line);
        if (f.size() < h.width) throw FormatError("teams: short row at line " + std::to_string(lineno));
        const auto project = std::string(text::trim(f[h.at("project_id")]));
        const auto member = std::string(text::trim(f[h.at("member_id")]));
        if (project.empty() || member.empty())
            throw FormatError("teams: empty id at line " + std::to_string(lineno));
        roster.members[project].insert(member);
    }
    return roster;
}

TeamRoster load_roster(const std::filesystem::path& path) {
    auto in = open_in(path);
    return parse_roster(in);
}

std::vector<CategoryPool> parse_pools(std::istream& in) {
    const Header h = read_header(in, {"category", "pool"}, "pools");
    std::vector<CategoryPool> out;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank(line)) continue;
        const auto f = text::split_csv(line);
        CategoryPool p;
        if (f.size() < h.width || !text::parse_double(f[h.at("pool")], p.pool))
            throw FormatError("pools: bad row at line " + std::to_string(lineno));
        if (!(p.pool > 0.0)) throw DomainError("pools: pool must be positive at line " + std::to_string(lineno));
        p.category = std::string(text::trim(f[h.at("category")]));
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<CategoryPool> load_pools(const std::filesystem::path& path) {
    auto in = open_in(path);
    return parse_pools(in);
}

std::vector<Valuation> parse_valuations(std::istream& in) {
    const Header h = read_header(in, {"contributor_id", "project_id", "family", "scale"}, "valuations");
    std::vector<Valuation> out;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank(line)) continue;
        const auto f = text::split_csv(line);
        Valuation v;
        if (f.size() < h.width || !text::parse_double(f[h.at("scale")], v.scale))
            throw FormatError("valuations: bad row at line " + std::to_string(lineno));
        v.contributor_id = std::string(text::trim(f[h.at("contributor_id")]));
        v.project_id = std::string(text::trim(f[h.at("project_id")]));
        v.family = parse_family(std::string(text::trim(f[h.at("family")])));
        if (!(v.scale > 0.0)) throw DomainError("valuations: scale must be positive at line " + std::to_string(lineno));
        out.push_back(std::move(v));
    }
    return out;
}

std::vector<Valuation> load_valuations(const std::filesystem::path& path) {
    auto in = open_in(path);
    return parse_valuations(in);
}

std::map<std::string, double> load_budgets(const std::filesystem::path& path) {
    auto in = open_in(path);
    const Header h = read_header(in, {"contributor_id", "budget"}, "budgets");
    std::map<std::string, double> out;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank(line)) continue;
        const auto f = text::split_csv(line);
        double b = 0.0;
        if (f.size() < h.width || !text::parse_double(f[h.at("budget")], b) || b < 0.0)
            throw FormatError("budgets: bad row at line " + std::to_string(lineno));
        out[std::string(text::trim(f[h.at("contributor_id")]))] = b;
    }
    return out;
}

bool ContributionGraph::has_edge(const std::string& from, const std::string& to) const {
    return edges.count({from, to}) != 0;
}

std::vector<std::string> ContributionGraph::successors(const std::string& from) const {
    std::vector<std::string> out;
    for (auto it = edges.lower_bound({from, std::string()}); it != edges.end() && it->first.first == from; ++it)
        out.push_back(it->first.second);
    return out;
}

ContributionGraph build_graph(std::span<const Contribution> contributions, const TeamRoster& roster) {
    ContributionGraph g;
    std::unordered_map<std::string, std::vector<std::string>> teams_of; // member -> projects
    for (const auto& [project, members] : roster.members) {
        if (members.empty()) throw DomainError("team roster for " + project + " is empty");
        g.teams.insert(project);
        g.categories.try_emplace(project, std::string());
        for (const auto& m : members) teams_of[m].push_back(project);
    }
    for (const auto& c : contributions) {
        auto& cat = g.categories[c.project_id];
        if (cat.empty()) cat = c.category;
        auto it = teams_of.find(c.contributor_id);
        if (it == teams_of.end()) continue;
        for (const auto& team : it->second) {
            EdgeWeight& w = team == c.project_id ? g.self_support[team] : g.edges[{team, c.project_id}];
            ++w.count;
            w.amount += c.amount;
        }
    }
    return g;
}

namespace {

std::optional<double> slope_of(std::span<const double> xs, std::span<const double> ys,
                               std::optional<double>* intercept = nullptr) {
    if (auto fit = stats::ols_line(xs, ys)) {
        if (intercept) *intercept = fit->intercept;
        return fit->slope;
    }
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    if (!(sx > 0.0)) return std::nullopt;
    if (intercept) *intercept = 0.0;
    return sy / sx;
}

} // namespace

ReciprocityReport reciprocity_stats(const ContributionGraph& graph, bool weighted) {
    ReciprocityReport report;
    report.weighted = weighted;
    auto category_of = [&](const std::string& p) {
        auto it = graph.categories.find(p);
        return it == graph.categories.end() ? std::string() : it->second;
    };

    for (const auto& project : graph.teams) {
        ReciprocityRow row;
        row.project_id = project;
        row.category = category_of(project);
        for (auto it = graph.edges.lower_bound({project, std::string()});
             it != graph.edges.end() && it->first.first == project; ++it) {
            const auto& target = it->first.second;
            const bool cross = category_of(target) != row.category;
            const bool mutual = graph.has_edge(target, project);
            ++row.outdegree;
            row.out_amount += it->second.amount;
            if (cross) ++row.cross_outdegree;
            if (mutual) {
                ++row.reciprocal;
                row.reciprocal_amount += it->second.amount;
                if (cross) ++row.cross_reciprocal;
            }
        }
        if (auto s = graph.self_support.find(project); s != graph.self_support.end()) {
            row.self_support_count = s->second.count;
            row.self_support_amount = s->second.amount;
        }
        report.rows.push_back(std::move(row));
    }

    std::vector<double> out, rec, cross_out, cross_rec;
    for (const auto& r : report.rows) {
        out.push_back(weighted ? r.out_amount : static_cast<double>(r.outdegree));
        rec.push_back(weighted ? r.reciprocal_amount : static_cast<double>(r.reciprocal));
        cross_out.push_back(static_cast<double>(r.cross_outdegree));
        cross_rec.push_back(static_cast<double>(r.cross_reciprocal));
    }
    std::vector<double> total_out;
    for (const auto& r : report.rows) total_out.push_back(static_cast<double>(r.outdegree));

    report.slope = slope_of(out, rec, &report.intercept);
    report.cross_slope_cross_outdegree = slope_of(cross_out, cross_rec);
    report.cross_slope_total_outdegree = slope_of(total_out, cross_rec);
    return report;
}

std::vector<CrossCategoryRow> cross_category_stats(const ContributionGraph& graph) {
    std::map<std::string, CrossCategoryRow> by_cat;
    for (const auto& [project, cat] : graph.categories) ++by_cat[cat].project_count;
    const auto total_projects = static_cast<double>(graph.categories.size());

    for (const auto& [edge, w] : graph.edges) {
        const auto& [a, b] = edge;
        if (!graph.has_edge(b, a)) continue;
        const auto& ca = graph.categories.at(a);
        auto& row = by_cat[ca];
        ++row.reciprocal_pairs;
        if (graph.categories.at(b) != ca) ++row.cross_pairs;
    }

    const bool single = by_cat.size() < 2;
    std::vector<CrossCategoryRow> out;
    for (auto& [cat, row] : by_cat) {
        row.category = cat;
        row.project_share = static_cast<double>(row.project_count) / total_projects;
        row.outside_share = static_cast<double>(graph.categories.size() - row.project_count) / total_projects;
        row.cross_share = row.reciprocal_pairs > 0
                              ? static_cast<double>(row.cross_pairs) / static_cast<double>(row.reciprocal_pairs)
                              : 0.0;
        row.single_category_warning = single;
        out.push_back(row);
    }
    return out;
}

void write_reciprocal_report(std::ostream& out, const ReciprocityReport& report) {
    out << "project_id,category,outdegree,reciprocal_count,cross_outdegree,cross_reciprocal_count,"
           "out_amount,reciprocal_amount,self_support_count,self_support_amount\n";
    for (const auto& r : report.rows)
        out << text::csv_field(r.project_id) << ',' << text::csv_field(r.category) << ',' << r.outdegree << ','
            << r.reciprocal << ',' << r.cross_outdegree << ',' << r.cross_reciprocal << ','
            << text::format_double(r.out_amount) << ',' << text::format_double(r.reciprocal_amount) << ','
            << r.self_support_count << ',' << text::format_double(r.self_support_amount) << '\n';
}

void write_cross_category(std::ostream& out, std::span<const CrossCategoryRow> rows) {
    out << "category,project_count,project_share,outside_share,reciprocal_pairs,cross_pairs,cross_share,"
           "single_category_warning\n";
    for (const auto& r : rows)
        out << text::csv_field(r.category) << ',' << r.project_count << ',' << text::format_double(r.project_share)
            << ',' << text::format_double(r.outside_share) << ',' << r.reciprocal_pairs << ',' << r.cross_pairs
            << ',' << text::format_double(r.cross_share) << ',' << (r.single_category_warning ? 1 : 0) << '\n';
}

} // namespace qf
