//! Block-parallel pseudo-random sequence generation with arithmetic
//! fault tolerance.
//!
//! The pipeline has four stages, each usable on its own:
//!
//! 1. [`lfsr`] — serial shift-register generation and its
//!    block-parallel form via the GF(2) block transform matrix.
//! 2. [`guard`] — separable linear-code check symbols (block parity
//!    by default) that detect odd-weight block errors.
//! 3. [`lnp`] — packing of the whole block system into one integer
//!    linear polynomial whose bit fields carry every output function.
//! 4. [`rns`] — execution of that polynomial in a redundant residue
//!    number system, giving detection, localization and correction of
//!    single-channel faults plus reconfiguration around a dead
//!    channel.
//!
//! [`fault`] drives any stage under injected faults and measures what
//! each protection layer catches.

pub mod bits;
pub mod error;
pub mod fault;
pub mod guard;
pub mod lfsr;
pub mod lnp;
pub mod matrix;
pub mod rns;

pub use error::{Error, Result};
pub use fault::{
    analyze_divergence, run_campaign, run_pipeline, CampaignConfig, DetectionReport, Divergence,
    FaultModel, FaultPlan, FaultSpec, FaultTarget, GeneratorMode, ModelKind, Persistence,
    PipelineRun, TrialRecord, TrialStatus,
};
pub use guard::{derive_check_rows, encode_block, verify_block, CheckSpec, GuardedBlock};
pub use lfsr::{block_step, block_stream, Lfsr, PrsBlock, TapPolynomial};
pub use lnp::{eval_lnp, extract_block, mask_bit, pack_system, LnpRow, LnpValue, PackedLnp};
pub use matrix::BitMatrix;
pub use rns::{
    basis_table, encode_lnp_residues, eval_channels, localize_fault, protected_step, range_check,
    reconstruct_crt, BasisTable, Capability, ChannelId, CrtPlan, Localization, ModuliSet,
    ProtectedGenerator, ResidueLnp, ResidueVector, StepOutcome, StepStatus,
    DEFAULT_EXCLUSION_THRESHOLD,
};
