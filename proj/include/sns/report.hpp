#ifndef SNS_REPORT_HPP
#define SNS_REPORT_HPP

#include "sns/estimators.hpp"
#include "sns/identities.hpp"

#include "json.hpp"

namespace sns {

/// Finite values as numbers; inf, -inf and nan as the strings "inf", "-inf", "nan".
nlohmann::ordered_json number(double x);

nlohmann::ordered_json to_json(const Estimate& e);
nlohmann::ordered_json to_json(const LogMeanEstimate& e);
nlohmann::ordered_json to_json(const InequalityReport& r);
nlohmann::ordered_json to_json(const BoundConstants& c);
nlohmann::ordered_json to_json(const Hypothesis& h);
nlohmann::ordered_json to_json(const HypothesisReport& r);
nlohmann::ordered_json to_json(const EntropyEstimate& e);
nlohmann::ordered_json to_json(const ZhDecayReport& r);
nlohmann::ordered_json to_json(const ProbeCell& c);
nlohmann::ordered_json to_json(const DgammaCell& c);
nlohmann::ordered_json to_json(const IdentityCheck& c);
nlohmann::ordered_json to_json(const IdentityReport& r);
nlohmann::ordered_json to_json(const MlhConstants& c);

}  // namespace sns

#endif  // SNS_REPORT_HPP
