#pragma once

#include <stdexcept>
#include <string>

namespace eqcont {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define EQCONT_ERROR(Name)                      \
    class Name : public Error {                 \
    public:                                     \
        using Error::Error;                     \
    }

EQCONT_ERROR(SingularWeights);
EQCONT_ERROR(DomainError);
EQCONT_ERROR(EtaInfinite);
EQCONT_ERROR(ApproximationInfeasible);
EQCONT_ERROR(PathBudgetExceeded);
EQCONT_ERROR(OverflowRisk);
EQCONT_ERROR(BadStart);
EQCONT_ERROR(NoConvergence);
EQCONT_ERROR(NotSingular);
EQCONT_ERROR(SchemaError);
EQCONT_ERROR(HierarchyError);
EQCONT_ERROR(ConfigError);
EQCONT_ERROR(IoError);

#undef EQCONT_ERROR

}  // namespace eqcont
