#pragma once

#include "fleetrel/classify.hpp"
#include "fleetrel/failure_model.hpp"
#include "fleetrel/stats.hpp"
#include "fleetrel/trace_io.hpp"
#include "fleetrel/types.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace fleetrel {

/// Physical layout used to place generated DRAM errors and to map them to pages.
struct DramGeometry
{
    int sockets = 2;
    int channels = 4;
    int banks = 8;
    std::int64_t rows = 65536;
    std::int64_t columns = 1024;
    std::int64_t bytes_per_column = 8;

    std::int64_t total_bytes() const
    {
        return std::int64_t{sockets} * channels * banks * rows * columns * bytes_per_column;
    }
    /// Linear physical byte address of an error.
    std::int64_t byte_address(const MemErrorEvent& e) const;
};

enum class DramCountMode { per_class, pareto };

struct DramGenSpec
{
    bool enabled = true;
    DramCountMode count_mode = DramCountMode::per_class;
    /// Share of all errors attributed to each component class; normalized on use.
    std::array<double, component_class_count> class_weights{0.638, 0.212, 0.0606, 0.0002, 0.002, 0.0093, 0.078};
    /// Errors emitted by one faulty component in per_class mode.
    std::array<std::int64_t, component_class_count> burst_sizes{2000, 1500, 1200, 4, 4, 2, 1};
    double pareto_alpha = 2.0;
    double pareto_x_min = 100.0;
    double uncorrectable_prob = 0.01;
    DramGeometry geometry;
};

struct SsdGenSpec
{
    bool enabled = true;
    /// Servers carrying SSDs; 0 means fleet_size.
    std::int64_t servers = 0;
    std::array<double, 6> platform_mix{1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6};
    /// Probability that a server sees at least one failed SSD.
    double failure_prob = 0.1;
    /// On two-SSD servers with a failure, probability that both devices failed.
    double pair_both_prob = 0.422;
    double weibull_shape = 0.3;
    double weibull_scale = 5000.0;
    /// Mean flash bytes written per byte the OS reports writing.
    double coalescing = 0.7;
};

struct NetGenSpec
{
    bool enabled = true;
    std::map<DeviceType, std::int64_t> population{{DeviceType::core, 100}, {DeviceType::CSA, 50},
                                                  {DeviceType::CSW, 200},  {DeviceType::ESW, 400},
                                                  {DeviceType::SSW, 800},  {DeviceType::FSW, 1600},
                                                  {DeviceType::RSW, 20000}};
    /// Incidents per device per year.
    std::map<DeviceType, double> incident_rate{{DeviceType::core, 0.8}, {DeviceType::CSA, 1.2},
                                               {DeviceType::CSW, 0.5},  {DeviceType::ESW, 0.3},
                                               {DeviceType::SSW, 0.1},  {DeviceType::FSW, 0.05},
                                               {DeviceType::RSW, 0.01}};
    std::array<double, 7> root_cause_weights{0.17, 0.13, 0.13, 0.12, 0.11, 0.05, 0.29};
    std::array<double, 3> sev_weights{0.05, 0.15, 0.80};
    /// Probability that an incident carries a second, distinct root cause.
    double multi_cause_prob = 0.0;
    /// Resolution time is lognormal with this median (hours) and log-sd.
    double resolution_median_h = 4.0;
    double resolution_sigma = 1.0;
    double days = 365.0;
};

struct FiberGenSpec
{
    bool enabled = true;
    std::int64_t links = 200;
    int vendors = 5;
    std::array<double, 6> continent_weights{0.37, 0.33, 0.14, 0.10, 0.04, 0.02};
    /// Per-link MTBF / MTTR in hours drawn as a * e^(b p) with p ~ U(0, 1).
    ExponentialCurve mtbf{462.88, 2.3408, 1.0};
    ExponentialCurve mttr{1.513, 4.256, 1.0};
    double years = 5.0;
    double maintenance_frac = 0.1;
};

struct DesignGenSpec
{
    std::int64_t count = 0;
    std::string model = "paper-2015";
};

struct GeneratorSpec
{
    std::uint64_t seed = 1;
    std::int64_t fleet_size = 1000;
    EpochSeconds start = 1388534400; // 2014-01-01
    int months = 1;
    DramGenSpec dram;
    SsdGenSpec ssd;
    NetGenSpec net;
    FiberGenSpec fiber;
    DesignGenSpec designs;
};

/// Throws Error(invalid_argument) naming the first offending field.
void validate(const GeneratorSpec& spec);

Json to_json(const GeneratorSpec& spec);
/// Missing keys keep their defaults. Weights must sum to 1 (within 1e-3).
GeneratorSpec generator_spec_from_json(const Json& j);

struct TraceBundle
{
    /// Ordered by server id, then timestamp.
    std::vector<MemErrorEvent> dram;
    /// Component that produced each DRAM error; kept in memory only.
    std::vector<ComponentClass> dram_truth;
    std::vector<SSDSnapshot> ssd;
    std::vector<IncidentRecord> incidents;
    std::map<DeviceType, std::int64_t> population;
    std::vector<FiberRepairTicket> fiber;
    std::vector<LabeledDesign> designs;
};

/// Deterministic in the spec: every entity draws from its own substream.
TraceBundle generate_traces(const GeneratorSpec& spec);

/// Per-server error counts of the Pareto count mode without building the events.
std::vector<double> generate_dram_counts(const GeneratorSpec& spec);

/// Designs spread over the factor ranges, labeled by a Bernoulli draw on the model's F.
std::vector<LabeledDesign> generate_design_samples(const LogisticFailureModel& model, std::int64_t count,
                                                   std::uint64_t seed);

std::string server_name(std::int64_t index);

} // namespace fleetrel
