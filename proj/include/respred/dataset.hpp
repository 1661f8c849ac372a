#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "respred/errors.hpp"
#include "respred/types.hpp"

namespace respred {

/// Column names of a CSV file mapped onto the three channel groups.
struct ChannelSchema {
  std::vector<std::string> u;   ///< control inputs
  std::vector<std::string> ws;  ///< structured (measured) disturbances, may be empty
  std::vector<std::string> y;   ///< outputs
};

/// Immutable multichannel time series on a uniform grid. Channels are stored
/// one column per step. All operations downstream treat the combined
/// exogenous signal exog() = [u; ws] as a single input.
struct Dataset {
  std::vector<double> timestamps;  ///< epoch seconds, strictly increasing
  Matrix u;                        ///< n_u x size()
  Matrix ws;                       ///< n_ws x size() (0 rows allowed)
  Matrix y;                        ///< n_y x size()
  double sample_period = 0.0;      ///< seconds between consecutive samples
  ChannelSchema names;

  Index size() const { return y.cols(); }
  Index n_u() const { return u.rows(); }
  Index n_ws() const { return ws.rows(); }
  Index n_y() const { return y.rows(); }
  Index n_exog() const { return u.rows() + ws.rows(); }

  /// Controls stacked over structured disturbances, n_exog() x size().
  Matrix exog() const;

  /// Checks lengths, finiteness and grid uniformity; throws ValidationError.
  void validate() const;
};

/// Loads a CSV file with a "timestamp" column and the schema's channels.
/// Errors: SchemaError (missing column), ParseError (bad or non-finite cell,
/// reported with its data row index), ValidationError (non-uniform grid).
Dataset load_csv(const std::string& path, const ChannelSchema& schema);

/// Writes a dataset back to CSV. Values are printed with enough digits that
/// reloading reproduces them bit-exactly.
void write_csv(const Dataset& ds, const std::string& path);

/// One rolling-horizon experiment window anchored at step t.
///
/// The past covers steps [t - length - lag, t - 1]; the initial condition
/// stacks the trailing `lag` steps, exogenous samples first, then outputs.
struct ExperimentWindow {
  Matrix past_exog;    ///< n_exog x (length + lag)
  Matrix past_out;     ///< n_out x (length + lag)
  Vector init_cond;    ///< dimension lag * (n_exog + n_out)
  Matrix future_exog;  ///< n_exog x horizon
  Matrix future_truth; ///< n_out x horizon; 0 columns when truth is absent
  Index t = 0;
  Index length = 0;   ///< estimation-data length (columns of the regressor)
  Index lag = 0;
  Index horizon = 0;

  Index n_exog() const { return past_exog.rows(); }
  Index n_out() const { return past_out.rows(); }
  Index n_init() const { return lag * (n_exog() + n_out()); }
  bool has_truth() const { return future_truth.cols() == horizon; }

  /// Stable hash of the window content, used to tag derived operators.
  std::uint64_t fingerprint() const;
};

/// Minimum estimation length for the excitation check behind the predictors
/// (order lag*(n_exog+n_out) + horizon over an (n_exog + n_out)-dimensional
/// signal) to be satisfiable at all.
Index min_window_length(Index lag, Index horizon, Index n_exog, Index n_out);

/// Slices an experiment window out of a dataset. Requires
/// t - length - lag >= 0; when with_truth (the default), also t + horizon <=
/// ds.size() and the truth block is filled. Throws BoundsError on bad indices.
ExperimentWindow make_window(const Dataset& ds, Index t, Index length, Index lag,
                             Index horizon, bool with_truth = true);

}  // namespace respred
