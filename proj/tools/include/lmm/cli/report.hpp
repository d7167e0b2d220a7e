#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lmm/bootstrap.hpp"
#include "lmm/inference.hpp"
#include "lmm/profile.hpp"

namespace lmm::cli {

using Json = nlohmann::ordered_json;

/// Non-finite values serialize as null; finite ones round-trip exactly.
Json number(double x);
Json to_json(const Eigen::VectorXd& v);
Json to_json(const Eigen::MatrixXd& m);  ///< array of rows

Json fit_json(const FitResult& fit, const std::string& data_label);
Json profile_json(const ProfileResult& prof, double level);
Json bootstrap_json(const BootResult& boot, double level);
Json anova_json(const std::vector<AnovaRow>& rows);
Json compare_json(const std::vector<CompareRow>& rows);

void print_fit(std::ostream& os, const FitResult& fit, const std::string& data_label);
void print_profile(std::ostream& os, const ProfileResult& prof, double level);
void print_bootstrap(std::ostream& os, const BootResult& boot, double level);
void print_anova(std::ostream& os, const std::vector<AnovaRow>& rows);
void print_compare(std::ostream& os, const std::vector<CompareRow>& rows);

/// printf-style formatting into a std::string.
std::string strf(const char* fmt, ...) __attribute__((format(printf, 1, 2)));

}  // namespace lmm::cli
