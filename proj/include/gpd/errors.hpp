// errors.hpp: Exception hierarchy shared by every gpdist module

#pragma once

#include <stdexcept>
#include <string>

namespace gpd {

// Base class for all library errors. `numerical()` separates failures of the
// physics (undefined phases, diverging integrators) from malformed input.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what, bool numerical = false)
        : std::runtime_error(what), numerical_(numerical) {}
    bool numerical() const noexcept { return numerical_; }

private:
    bool numerical_;
};

#define GPD_DEFINE_ERROR(Name, IsNumerical)                                    \
    class Name : public Error {                                                \
    public:                                                                    \
        explicit Name(const std::string& what)                                 \
            : Error(std::string(#Name ": ") + what, IsNumerical) {}            \
    }

GPD_DEFINE_ERROR(InvalidOperand, false);
GPD_DEFINE_ERROR(DimensionError, false);
GPD_DEFINE_ERROR(InvalidState, false);
GPD_DEFINE_ERROR(InvalidChannel, false);
GPD_DEFINE_ERROR(InvalidBlock, false);
GPD_DEFINE_ERROR(InvalidDecomposition, false);
GPD_DEFINE_ERROR(InconsistentModel, false);
GPD_DEFINE_ERROR(DegenerateTrajectory, true);
GPD_DEFINE_ERROR(UndefinedGP, true);
GPD_DEFINE_ERROR(IntegrationDiverged, true);
GPD_DEFINE_ERROR(RCondViolated, true);

#undef GPD_DEFINE_ERROR

} // namespace gpd
