#ifndef CSCORR_JSON_IO_H_
#define CSCORR_JSON_IO_H_

#include <Eigen/Core>

#include <string>

#include "json.hpp"

#include "cscorr/bp_solver.h"
#include "cscorr/experiment.h"
#include "cscorr/golfing.h"
#include "cscorr/problem_gen.h"
#include "cscorr/rip.h"
#include "cscorr/theory_bounds.h"

namespace cscorr {

using Json = nlohmann::ordered_json;

// Serializes with every floating-point number printed as %.17g; non-finite
// values become null. indent < 0 gives a single line.
std::string DumpJson(const Json& j, int indent = 2);

Json ReadJsonFile(const std::string& path);
// Writes `text` to `path`, throwing kIo with the path on failure.
void WriteTextFile(const std::string& path, const std::string& text);

Json ToJson(const Eigen::VectorXd& v);
Json ToJson(const Eigen::MatrixXd& m);  // row-major nested arrays
Eigen::VectorXd VectorFromJson(const Json& j);
Eigen::MatrixXd MatrixFromJson(const Json& j);

Json ToJson(const SparseGroundTruth& truth);
SparseGroundTruth SparseGroundTruthFromJson(const Json& j);

Json ToJson(const ProblemInstance& instance);
// Accepts documents without "signal"/"corruption"; the instance then carries
// no ground truth.
ProblemInstance InstanceFromJson(const Json& j);

Json ToJson(const SolverConfig& config);
SolverConfig SolverConfigFromJson(const Json& j, SolverConfig base = {});
Json ToJson(const SolveResult& result);
Json ToJson(const KktReport& report);

Json ToJson(const GolfingParams& params);
Json ToJson(const GolfingState& state);
Json ToJson(const CertReport& report);
Json ToJson(const CertificateEventTable& table);

Json ToJson(const RipEstimate& estimate);

Json ToJson(const TheoryConfig& config);
Json ToJson(const Thm21Budgets& budgets);
Json ToJson(const Thm22Conditions& conditions);
Json ToJson(const Thm22Probabilities& probabilities);

Json ToJson(const GridSpec& spec);
// Fields absent from `j` keep their values from `base`.
GridSpec GridSpecFromJson(const Json& j, GridSpec base = {});
Json ToJson(const HeatMap& map);
HeatMap HeatMapFromJson(const Json& j);

}  // namespace cscorr

#endif  // CSCORR_JSON_IO_H_
