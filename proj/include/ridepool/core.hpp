#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ridepool {

using NodeId = int32_t;
using ZoneId = int32_t;
using RequestId = int32_t;
using VehicleId = int32_t;
using TripId = int32_t;

// Times are integer seconds throughout the engine; distances are meters.
using Seconds = int64_t;
using Meters = double;

constexpr NodeId kInvalidNode = -1;
constexpr Seconds kInfTime = INT64_MAX / 4;

// Input/validation failures. Infeasibility of a routing or matching
// subproblem is a normal outcome and is never reported through these.
struct InputError : std::runtime_error {
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

struct MalformedRecordError : InputError {
    explicit MalformedRecordError(const std::string& what) : InputError(what) {}
};

struct DanglingEdgeError : InputError {
    explicit DanglingEdgeError(const std::string& what) : InputError(what) {}
};

struct NonPositiveWeightError : InputError {
    explicit NonPositiveWeightError(const std::string& what) : InputError(what) {}
};

struct DisconnectedError : InputError {
    explicit DisconnectedError(const std::string& what) : InputError(what) {}
};

struct UnreachableError : InputError {
    explicit UnreachableError(const std::string& what) : InputError(what) {}
};

struct UnknownNodeError : InputError {
    explicit UnknownNodeError(const std::string& what) : InputError(what) {}
};

struct DuplicateIdError : InputError {
    explicit DuplicateIdError(const std::string& what) : InputError(what) {}
};

struct EmptyHistoryError : InputError {
    explicit EmptyHistoryError(const std::string& what) : InputError(what) {}
};

struct HorizonTooLongError : InputError {
    explicit HorizonTooLongError(const std::string& what) : InputError(what) {}
};

struct ParamViolationError : InputError {
    explicit ParamViolationError(const std::string& what) : InputError(what) {}
};

struct EmptyZoneSetError : InputError {
    explicit EmptyZoneSetError(const std::string& what) : InputError(what) {}
};

struct NoNodesInBoundingBoxError : InputError {
    explicit NoNodesInBoundingBoxError(const std::string& what) : InputError(what) {}
};

// Violations of internal contracts (solver returned an inconsistent
// solution, journal out of order, ...). Always a bug, never bad input.
struct InternalFault : std::logic_error {
    explicit InternalFault(const std::string& what) : std::logic_error(what) {}
};

}  // namespace ridepool
