#pragma once

#include <stdexcept>
#include <string>

namespace bearing {

enum class Errc {
    // ingest
    malformed_row,
    empty_file,
    non_finite_sample,
    no_snapshots,
    inconsistent_length,
    // dsp
    indivisible_length,
    non_finite_input,
    too_short,
    // features
    degenerate_signal,
    out_of_range_n,
    zero_variance,
    // embed
    too_few_spectra,
    diverged_loss,
    shape_mismatch,
    // label
    model_not_trained,
    degenerate_points,
    length_mismatch,
    missing_stage,
    // synth
    invalid_config,
    // persistence / cli
    io_error,
    corrupt_file,
    wrong_kind,
    config_error,
    invalid_argument,
};

const char* errc_name(Errc c);

/// Exception carrying a stable error code alongside the message.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace bearing
