//! Covering nets, frequency witnesses, and the spectral hardness quantities.

pub mod cover;
pub mod hardness;
pub mod witness;

pub use cover::{build_cover, build_cover_capped, predicted_cover_size, Cover, DEFAULT_COVER_CAP};
pub use hardness::{
    band_l2_mass, cf_l2_norm, delta_quantity, l2_linfty_check, BandL2Options, DeltaResult,
    DeltaScan, FrequencySet, L2LinftyCheck,
};
pub use witness::{find_witness, is_witness, scan_grid_witness, witness_norm_bound, WitnessResult, WitnessSource};
