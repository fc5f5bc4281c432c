#pragma once
// Experiment orchestration: one spec type for every subcommand, a replica
// pool with deterministic seeding, and CSV/JSON emission with a manifest.
//
// Reproducibility contract: replica r always draws its randomness from
// derive_seed(spec.seed, r), and every per-replica result lands in a slot
// indexed by r.  Workers only race for the next undone index; the reduction
// walks the slots in replica order after the pool joins.  Thread count (and
// scheduling) therefore cannot change a single output byte.
//
// Replicas that end in a domain error (a window overflow, an exceeded search
// cap) are gaps, not aborts: they are excluded from the moments and counted
// in the manifest.  Anything outside the library's error hierarchy still
// aborts the run.

#include <cstdint>
#include <string>
#include <vector>

#include "fpplab/config.hpp"
#include "fpplab/lattice.hpp"

namespace fpplab {

// One invocation, fully serializable; identical specs reproduce identical
// value fields.  `n_values` doubles as the x-list for tails --stat sx, the
// j-list for mj, and the horizon list for cle renewal.
struct ExperimentSpec {
    std::string command;            // verify | estimate | cle | tails | shape
    std::string target;             // subcommand-specific selector, see cli help
    std::vector<long long> n_values;
    double r = 0.0;                 // annulus radii where applicable
    double R = 0.0;
    long long reps = 0;
    std::uint64_t seed = 0;
    int threads = 1;
    double window_factor = 3.0;     // halfplane window margin for b0n
    bool exhaustive = false;        // verify: enumerate instead of sampling
    std::string output_path;        // empty = stdout
    std::string format = "csv";     // csv | json

    friend bool operator==(const ExperimentSpec&, const ExperimentSpec&) = default;
};

// Everything needed to re-run the spec exactly, shipped with every bundle.
struct Manifest {
    std::string artifact_version;
    ExperimentSpec spec;
    std::uint64_t master_seed = 0;
    std::string seed_rule;          // kSeedRule
    double wall_seconds = 0.0;      // the one field allowed to vary across runs
    long long replicas_total = 0;
    long long replicas_failed = 0;
};

inline constexpr const char* kArtifactVersion = "1.0.0";

// One CSV row.  `n` is the row's integer parameter: the ball radius for cn,
// the inner radius for tprime, the tail offset t for tails, the horizon for
// renewal.  Rows with fewer than two contributing replicas report NaN
// moments rather than failing the whole run.
struct ReportRow {
    std::string quantity;
    long long n = 0;
    long long reps = 0;             // replicas contributing to this row
    double mean = 0.0;
    double var = 0.0;
    double std_err = 0.0;

    friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct ExperimentReport {
    std::vector<ReportRow> rows;
    Manifest manifest;
    std::vector<std::string> notes;  // human-readable verification summaries
    long long checks_failed = 0;     // verification failures; drives exit 1
};

// Dispatches on spec.command / spec.target.  InvalidSpec names the offending
// field; per-replica domain errors are absorbed as described above.
ExperimentReport run(const ExperimentSpec& spec);

// Header exactly `quantity,n,reps,mean,var,stderr,master_seed`; floats as
// shortest round-trip decimals; an empty report is just the header line.
std::string to_csv(const ExperimentReport& report);

// JSON mirrors the CSV rows and adds the manifest and notes; doubles survive
// a round trip bit-exactly.
std::string to_json_text(const ExperimentReport& report);
ExperimentReport report_from_json_text(const std::string& text);

// Writes the chosen format to `path`, or to stdout when `path` is empty.
// Throws IoError when the file cannot be written.
void emit(const ExperimentReport& report, const std::string& path);

}  // namespace fpplab
