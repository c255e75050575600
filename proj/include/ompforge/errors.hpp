#pragma once

#include <stdexcept>
#include <string>

namespace ompforge {

// Base for all pipeline errors so the CLI can map them to exit codes.
struct ForgeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Configuration / usage problems (CLI exit code 2).
struct ConfigError : ForgeError {
    using ForgeError::ForgeError;
};

struct UnreadableSource : ForgeError {
    using ForgeError::ForgeError;
};
struct ArtifactWriteFailure : ForgeError {
    using ForgeError::ForgeError;
};
struct MissingArtifact : ForgeError {
    using ForgeError::ForgeError;
};
struct NoOffloadCandidates : ForgeError {
    using ForgeError::ForgeError;
};
struct PlanIncomplete : ForgeError {
    using ForgeError::ForgeError;
};
struct MissingSection : ForgeError {
    using ForgeError::ForgeError;
};
struct InvalidOptimum : ForgeError {
    using ForgeError::ForgeError;
};
struct BaselineBuildFailure : ForgeError {
    using ForgeError::ForgeError;
};
struct BaselineRunFailure : ForgeError {
    using ForgeError::ForgeError;
};
struct DuplicateLabel : ForgeError {
    using ForgeError::ForgeError;
};
struct RepairExhausted : ForgeError {
    using ForgeError::ForgeError;
};
struct UnboundPlaceholder : ForgeError {
    explicit UnboundPlaceholder(const std::string& name)
        : ForgeError("unbound placeholder: {" + name + "}"), placeholder(name) {}
    std::string placeholder;
};
struct TransportError : ForgeError {
    using ForgeError::ForgeError;
};
struct ReplayMismatch : ForgeError {
    using ForgeError::ForgeError;
};
struct NonPositiveTime : ForgeError {
    using ForgeError::ForgeError;
};
struct AccountingMismatch : ForgeError {
    using ForgeError::ForgeError;
};
struct PatchApplyError : ForgeError {
    using ForgeError::ForgeError;
};

} // namespace ompforge
