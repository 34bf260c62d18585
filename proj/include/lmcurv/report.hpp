#pragma once
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lmcurv/config.hpp"
#include "lmcurv/grad_iteration.hpp"
#include "lmcurv/shooting.hpp"
#include "lmcurv/thresholds.hpp"

namespace lmcurv {

inline constexpr int kReportSchemaVersion = 1;

struct Match {
    std::size_t cert = 0;
    std::size_t root = 0;
    double linf = 0.0;
};

struct MatchTable {
    double tolerance = 0.0;
    std::vector<Match> matches;
    std::vector<std::size_t> unmatched_certs;
    std::vector<std::size_t> unmatched_roots;
    std::vector<std::size_t> collapsed;  // certificates dropped as duplicates of an earlier one
};

// Duplicates (not distinct by the shared thresholds) collapse to the first occurrence,
// then pairs are matched greedily by smallest L-infinity distance of the node profiles.
MatchTable cross_validate(const std::vector<CriticalPointCertificate>& certs,
                          const std::vector<ShootingRoot>& roots, double tol_linf);

struct InvariantResult {
    std::string name;
    bool passed = false;
    double margin = 0.0;
    std::string witness;  // set when the check fails
};

// I(w) > 0 > I(v) >= -R^N > I(u), each gap at least min_margin.
std::vector<InvariantResult> energy_ordering_suite(const CriticalPointCertificate& u,
                                                   const CriticalPointCertificate& v,
                                                   const CriticalPointCertificate& w, double R, int N,
                                                   double min_margin = 1e-6);
std::vector<InvariantResult> seventh_suite(const CriticalPointCertificate& s,
                                           const CriticalPointCertificate& vp,
                                           const CriticalPointCertificate& vm, double R, double tol);
// u' one-signed and sup|u'| <= 1 - eps with eps > 0 for every one-signed certificate.
std::vector<InvariantResult> monotonicity_suite(const std::vector<CriticalPointCertificate>& certs);

struct SweepPoint {
    double fraction = 0.0;
    double lambda = 0.0;
    bool path_negative = false;
    double path_max = 0.0;
    bool seventh_ok = false;
    double seventh_energy = 0.0;
    double seventh_residual = 0.0;
    bool ordering_ok = false;  // six one-signed certificates with the ordering margins
};

struct SweepResult {
    std::vector<SweepPoint> points;
    double lambda_star_star = 0.0;
    double lambda_triple_star = 0.0;  // largest lambda found with a certified seventh solution
    bool lambda_triple_star_found = false;
};

struct RunReport {
    std::string command;
    RunConfig config;
    std::optional<ThresholdReport> thresholds;
    std::vector<CriticalPointCertificate> certificates;
    std::vector<ShootingRoot> roots_positive, roots_negative;
    std::optional<ScanResult> scan_positive, scan_negative;
    std::optional<MatchTable> match_positive, match_negative;
    std::vector<std::size_t> match_positive_certs, match_negative_certs;  // indices into certificates
    std::vector<InvariantResult> invariants;
    std::optional<SweepResult> sweep;
    std::vector<IterationTrace> iterations;
    std::vector<std::pair<std::string, double>> timings;
    std::vector<std::string> notes;

    bool all_passed() const;
};

nlohmann::ordered_json to_json(const ThresholdReport& t);
nlohmann::ordered_json to_json(const CriticalPointCertificate& c);
nlohmann::ordered_json to_json(const MatchTable& m);
nlohmann::ordered_json to_json(const IterationTrace& t);
nlohmann::ordered_json to_json(const RunReport& r, bool deterministic);
std::string report_text(const RunReport& r, bool deterministic);

// 17 significant digits, header r,u,du. du at interior nodes is the mean of the adjacent
// cell slopes, 0 at the origin.
void write_profile_csv(const std::string& path, const CriticalPointCertificate& c);
void write_profile_csv(const std::string& path, std::span<const double> r, std::span<const double> u,
                       std::span<const double> du);
void write_scan_csv(const std::string& path, const std::vector<const ScanResult*>& scans);
// Writes report.json, profiles/<name>.csv and scan.csv (if any scan) under dir.
void write_run(const std::string& dir, const RunReport& r, bool deterministic);

std::vector<double> node_slopes(const RadialMesh& mesh, std::span<const double> v);

}  // namespace lmcurv
