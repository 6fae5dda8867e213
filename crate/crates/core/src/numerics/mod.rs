//! Complex linear-algebra primitives shared by the estimators and the
//! simulator: DFT matrices, circulant diagonalization, Walsh codes and
//! block-diagonal grouping of a parameter vector.

mod channel;
mod circulant;
mod dft;
mod grouping;
mod walsh;

pub use channel::ChannelRealization;
pub use circulant::{circulant_from_first_column, diagonalize_circulant};
pub use dft::{dft_matrix, partial_dft, DftMatrix};
pub use grouping::{block_diag_groups, pad_to_partition, GroupEnergies, GroupPartition};
pub use walsh::walsh_codes;
