#pragma once

// File ingestion for contribution ledgers, team rosters, pools and
// valuations, plus reciprocal-backing forensics on the project graph.
//
// contributions.csv : day,category,project_id,contributor_id,amount
//                     (any column order; extra columns are ignored)
// teams.csv         : project_id,member_id
// pools.csv         : category,pool
// valuations.csv    : contributor_id,project_id,family,scale
//
// reciprocal_report.csv : project_id,category,outdegree,reciprocal_count,
//                         cross_outdegree,cross_reciprocal_count,
//                         out_amount,reciprocal_amount,self_support_count,
//                         self_support_amount
// cross_category.csv    : category,project_count,project_share,outside_share,
//                         reciprocal_pairs,cross_pairs,cross_share,
//                         single_category_warning

#include "qfund/equilibrium.hpp"
#include "qfund/funding_core.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qf {

struct RowError {
    std::size_t line = 0; // 1-based, header is line 1
    std::string message;
};

struct ContributionLoad {
    std::vector<Contribution> records;
    std::vector<RowError> errors;
};

struct CategoryPool {
    std::string category;
    double pool = 0.0;
};

struct TeamRoster {
    std::map<std::string, std::set<std::string>> members; // project -> member ids
};

ContributionLoad parse_contributions(std::istream& in);
ContributionLoad load_contributions(const std::filesystem::path& path);
void write_contributions(std::ostream& out, std::span<const Contribution> records);
void write_contributions(const std::filesystem::path& path, std::span<const Contribution> records);

TeamRoster parse_roster(std::istream& in);
TeamRoster load_roster(const std::filesystem::path& path);

std::vector<CategoryPool> parse_pools(std::istream& in);
std::vector<CategoryPool> load_pools(const std::filesystem::path& path);

std::vector<Valuation> parse_valuations(std::istream& in);
std::vector<Valuation> load_valuations(const std::filesystem::path& path);

/// contributor_id,budget
std::map<std::string, double> load_budgets(const std::filesystem::path& path);

struct EdgeWeight {
    std::size_t count = 0; // distinct contributions
    double amount = 0.0;
};

/// Directed project graph: A -> B when a member of A's team contributed to B.
struct ContributionGraph {
    std::map<std::string, std::string> categories; // every known project -> category
    std::set<std::string> teams;                   // projects with a registered roster
    std::map<std::pair<std::string, std::string>, EdgeWeight> edges;
    std::map<std::string, EdgeWeight> self_support; // members funding their own project

    bool has_edge(const std::string& from, const std::string& to) const;
    std::vector<std::string> successors(const std::string& from) const;
};

ContributionGraph build_graph(std::span<const Contribution> contributions, const TeamRoster& roster);

struct ReciprocityRow {
    std::string project_id;
    std::string category;
    std::size_t outdegree = 0;
    std::size_t reciprocal = 0;
    std::size_t cross_outdegree = 0;   // edges into other categories
    std::size_t cross_reciprocal = 0;  // mutual pairs with other categories
    double out_amount = 0.0;
    double reciprocal_amount = 0.0;    // amount sent to mutual partners
    std::size_t self_support_count = 0;
    double self_support_amount = 0.0;
};

struct ReciprocityReport {
    std::vector<ReciprocityRow> rows; // one per project with a roster
    bool weighted = false;
    std::optional<double> slope;      // reciprocal vs outdegree (amounts when weighted)
    std::optional<double> intercept;
    std::optional<double> cross_slope_cross_outdegree; // cross reciprocal vs cross outdegree
    std::optional<double> cross_slope_total_outdegree; // cross reciprocal vs total outdegree
};

struct CrossCategoryRow {
    std::string category;
    std::size_t project_count = 0;
    double project_share = 0.0; // share of all projects in this category
    double outside_share = 0.0; // share of all projects outside it
    std::size_t reciprocal_pairs = 0; // (A in category, B) mutual, counted from A's side
    std::size_t cross_pairs = 0;      // ... with B outside the category
    double cross_share = 0.0;
    bool single_category_warning = false;
};

/// Reciprocal count of A = |{B : A->B and B->A}|. The slope is OLS with
/// intercept over rostered projects; when every rostered project has the same
/// positive outdegree the line through the origin is reported, since a project
/// with no outgoing edges has no reciprocal ones either.
ReciprocityReport reciprocity_stats(const ContributionGraph& graph, bool weighted = false);

std::vector<CrossCategoryRow> cross_category_stats(const ContributionGraph& graph);

void write_reciprocal_report(std::ostream& out, const ReciprocityReport& report);
void write_cross_category(std::ostream& out, std::span<const CrossCategoryRow> rows);

} // namespace qf
