#pragma once

#include <stdexcept>
#include <string>

namespace switchgame {

/// Base class for all library failures. `kind()` names the failure category.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define SWITCHGAME_ERROR(Name)                                              \
    class Name : public Error {                                             \
    public:                                                                 \
        explicit Name(const std::string& what) : Error(#Name, what) {}      \
    };

SWITCHGAME_ERROR(DomainError)
SWITCHGAME_ERROR(QuadratureError)
SWITCHGAME_ERROR(OrderingError)
SWITCHGAME_ERROR(ConfigError)
SWITCHGAME_ERROR(UnsupportedProfit)
SWITCHGAME_ERROR(MissingNeighbor)
SWITCHGAME_ERROR(PreemptionIncentive)
SWITCHGAME_ERROR(NoBracket)
SWITCHGAME_ERROR(CyclicDependency)
SWITCHGAME_ERROR(NoConvergence)
SWITCHGAME_ERROR(SingularJacobian)
SWITCHGAME_ERROR(Diverged)
SWITCHGAME_ERROR(OrderingViolated)
SWITCHGAME_ERROR(CascadeLoop)
SWITCHGAME_ERROR(NotSymmetric)
SWITCHGAME_ERROR(OutOfOrderThresholds)
SWITCHGAME_ERROR(AbsorbingChain)
SWITCHGAME_ERROR(RecurrentChain)
SWITCHGAME_ERROR(InadmissiblePerturbation)

#undef SWITCHGAME_ERROR

} // namespace switchgame
