#pragma once

// Cascaded reservoirs. Layer 0 receives the external input; layer i+1 is
// driven, on the same input clock, by layer i's states through a random
// feedforward coupling matrix. For delay layers one clock tick is one input
// period T.

#include "photorc/core.hpp"
#include "photorc/delay.hpp"
#include "photorc/esn.hpp"
#include "photorc/readout.hpp"
#include "photorc/tasks.hpp"

#include <string>
#include <variant>
#include <vector>

namespace prc {

struct DelayLayerSpec {
    DelayParams params;
    MaskKind mask_kind = MaskKind::uniform;
    DelayRegime regime = DelayRegime::map;
    long oversample = kDefaultOversample;
};

using LayerSpec = std::variant<EsnParams, DelayLayerSpec>;

/// Which states feed the readout of a cascade.
enum class CascadeReadout {
    concatenated,  ///< all layers side by side
    last_layer,
};

CascadeReadout parse_cascade_readout(std::string_view name);
std::string_view to_string(CascadeReadout r);

struct CascadeSpec {
    std::vector<LayerSpec> layers;
    double coupling_scale = 1.0;
    /// Substream label per layer boundary; empty means "coupling-<i>".
    std::vector<std::string> coupling_seeds;
    CascadeReadout readout = CascadeReadout::concatenated;

    void validate() const;
};

/// Substream labels used by build_cascade, exposed so a plain single-layer run
/// can reproduce a cascade layer exactly.
std::string layer_stream_label(std::size_t layer);
std::string coupling_stream_label(const CascadeSpec& spec, std::size_t boundary);

using Layer = std::variant<EsnReservoir, DelayReservoir>;

long layer_nodes(const Layer& layer);
long layer_input_width(const Layer& layer);

struct DeepReservoir {
    std::vector<Layer> layers;
    /// couplings[i] maps layer i states to layer i+1 input:
    /// (input width of layer i+1) x (nodes of layer i).
    std::vector<Matrix> couplings;
    CascadeReadout readout = CascadeReadout::concatenated;
};

/// Layer i is drawn from rng.substream(layer_stream_label(i)); coupling i from
/// rng.substream(coupling_stream_label(spec, i)), uniform [-1, 1) times the
/// coupling scale. `rng` itself is not advanced.
DeepReservoir build_cascade(const CascadeSpec& spec, RandomSource& rng);

struct CascadeRun {
    std::vector<StateMatrix> layers;
    StateMatrix concatenated;

    /// States selected by the cascade's readout mode.
    const StateMatrix& readout_states(CascadeReadout mode) const {
        return mode == CascadeReadout::last_layer ? layers.back() : concatenated;
    }
};

/// Runs every layer over the whole input and drops `washout` rows from each.
CascadeRun run_cascade(const DeepReservoir& d, const TimeSeries& input, long washout);

enum class PerturbationMode { multiplicative, additive };

PerturbationMode parse_perturbation_mode(std::string_view name);

struct PerturbationSpec {
    double amplitude = 0.0;  ///< sigma
    PerturbationMode mode = PerturbationMode::multiplicative;
};

/// Copy with every coupling entry w replaced by w (1 + sigma g), or w + sigma g
/// in additive mode, g standard normal. Layers are untouched.
DeepReservoir perturb_couplings(const DeepReservoir& d, const PerturbationSpec& p,
                                RandomSource& rng);

struct ToleranceRow {
    double sigma = 0.0;
    double median_nmse = 0.0;
    long n_seeds = 0;
};

struct ToleranceConfig {
    ReadoutConfig readout;
    PerturbationMode mode = PerturbationMode::multiplicative;
};

/// For each seed: build the cascade and task data, train the readout on the
/// unperturbed cascade, then score that fixed readout on the test split of
/// perturbed copies, one per sigma. All sigmas of a seed share the same
/// Gaussian draws. Returns the median test NMSE per sigma.
std::vector<ToleranceRow> tolerance_experiment(const CascadeSpec& spec, const TaskSpec& task,
                                               const std::vector<double>& sigmas, long seeds,
                                               RandomSource& rng,
                                               const ToleranceConfig& cfg = {});

/// Median per sigma of tolerance cells (result[s][j] is seed s at sigmas[j]).
std::vector<ToleranceRow> summarize_tolerance(const std::vector<double>& sigmas,
                                              const std::vector<std::vector<double>>& cells);

/// Per-seed test NMSE behind tolerance_experiment: result[s][j] is seed s at
/// sigmas[j].
std::vector<std::vector<double>> tolerance_cells(const CascadeSpec& spec, const TaskSpec& task,
                                                 const std::vector<double>& sigmas, long seeds,
                                                 RandomSource& rng,
                                                 const ToleranceConfig& cfg = {});

}  // namespace prc
