//! Disorder-ensemble estimators: propagator localization, Lieb-Robinson
//! constants, commutator sweeps, gap statistics and ground-state
//! correlation decay.

mod clustering;
mod correlations;
mod dynloc;
mod fit;
mod lr;
mod pairs;
mod stats;
mod wegner;

pub use clustering::{
    classify, clustering_check, clustering_parameters, clustering_rhs, ClusteringReport, ClusteringRow, RowStatus,
    CLUSTERING_TOLERANCE,
};
pub use correlations::{correlation_decay_sweep, CorrelationReport, DecayRow};
pub use dynloc::{
    correlator_pairs, dynloc_correlator, envelope_from, realization_correlator, CorrelatorRow, DistanceRow, Envelope,
    LocalizationReport, METHOD_TAG,
};
pub use fit::{fit_exponential, slope_through_origin, ExpFit};
pub use lr::{
    left_operator, lr_bound_rows, lr_constant, lr_constant_from_fit, oracle_context, realization_commutators,
    right_operator, sector_rule_for, small_time_constant, small_time_profile, spin_commutator_sweep, CommutatorSweep,
    LrBoundRow, SmallTimeReport, SupRow, SweepRow,
};
pub use pairs::sample_pairs;
pub use stats::{Table, Welford};
pub use wegner::{wegner_gap_stats, HistogramBin, WegnerReport};
