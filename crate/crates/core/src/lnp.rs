//! Arithmetization of the block system: the tau Boolean output
//! functions are packed into one linear numerical polynomial
//! L(X) = h_1 x_1 + ... + h_tau x_tau evaluated over the integers.
//!
//! Each function occupies its own bit field of U = L(X), sized to hold
//! the largest possible arithmetic sum plus one guard bit, so no carry
//! ever crosses a field boundary. The field's least significant bit is
//! the sum mod 2, i.e. exactly the XOR the Boolean system would have
//! produced; masking it out recovers the block bit.
//!
//! Field order follows the written block: the highest-index function
//! sits in the least significant field.

use crate::error::{Error, Result};
use crate::lfsr::PrsBlock;
use crate::matrix::BitMatrix;
use num_bigint::BigUint;
use num_traits::Zero;

/// One output function of the block system: which inputs it sums and
/// how many bits that sum needs.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LnpRow {
    weights: Vec<bool>,
    sum_width: u32,
}

impl LnpRow {
    pub fn weights(&self) -> &[bool] {
        &self.weights
    }

    pub fn tap_count(&self) -> u32 {
        self.weights.iter().filter(|&&b| b).count() as u32
    }

    /// l_i = floor(log2(tap count)) + 1; zero for an empty row.
    pub fn sum_width(&self) -> u32 {
        self.sum_width
    }
}

/// The packed polynomial: per-input integer coefficients plus the
/// field layout needed to take U apart again.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PackedLnp {
    rows: Vec<LnpRow>,
    coefficients: Vec<BigUint>,
    offsets: Vec<u64>,
    widths: Vec<u32>,
    slot_order: Vec<usize>,
    total_width: u64,
}

impl PackedLnp {
    pub fn width(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[LnpRow] {
        &self.rows
    }

    /// h_j, indexed by input position j.
    pub fn coefficients(&self) -> &[BigUint] {
        &self.coefficients
    }

    /// gamma_k, indexed by slot (least significant field first).
    pub fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    pub fn widths(&self) -> &[u32] {
        &self.widths
    }

    /// Function index held by each slot: (tau-1, tau-2, ..., 0).
    pub fn slot_order(&self) -> &[usize] {
        &self.slot_order
    }

    pub fn total_width(&self) -> u64 {
        self.total_width
    }

    /// Raw field value of slot k.
    pub fn field(&self, u: &LnpValue, k: usize) -> u64 {
        let mut v = 0u64;
        for b in 0..self.widths[k] {
            if u.0.bit(self.offsets[k] + b as u64) {
                v |= 1 << b;
            }
        }
        v
    }
}

/// U = L(X); plain nonnegative integer, no modular reduction.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LnpValue(pub BigUint);

/// Builds the packed polynomial for a square block transform. A zero
/// row (function with no inputs) degenerates to a one-bit constant-0
/// field.
pub fn pack_system(block_matrix: &BitMatrix) -> PackedLnp {
    assert_eq!(
        block_matrix.rows(),
        block_matrix.cols(),
        "block transform must be square"
    );
    let tau = block_matrix.rows();
    let rows: Vec<LnpRow> = (0..tau)
        .map(|i| {
            let weights = block_matrix.row(i);
            let count = weights.iter().filter(|&&b| b).count() as u32;
            let sum_width = if count == 0 { 0 } else { count.ilog2() + 1 };
            LnpRow { weights, sum_width }
        })
        .collect();

    let slot_order: Vec<usize> = (0..tau).rev().collect();
    let mut offsets = Vec::with_capacity(tau);
    let mut widths = Vec::with_capacity(tau);
    let mut at = 0u64;
    for &f in &slot_order {
        let w = if rows[f].tap_count() == 0 {
            1
        } else {
            rows[f].sum_width + 1
        };
        offsets.push(at);
        widths.push(w);
        at += w as u64;
    }

    let mut coefficients = vec![BigUint::zero(); tau];
    for (k, &f) in slot_order.iter().enumerate() {
        for (j, &g) in rows[f].weights.iter().enumerate() {
            if g {
                coefficients[j] += BigUint::from(1u8) << offsets[k];
            }
        }
    }

    PackedLnp {
        rows,
        coefficients,
        offsets,
        widths,
        slot_order,
        total_width: at,
    }
}

/// Evaluates the polynomial at a 0/1 assignment in chronological
/// input order (x_{q-1,0} first).
pub fn eval_lnp(lnp: &PackedLnp, x: &[bool]) -> Result<LnpValue> {
    if x.len() != lnp.width() {
        return Err(Error::DimensionMismatch {
            want: lnp.width(),
            got: x.len(),
        });
    }
    let mut u = BigUint::zero();
    for (h, &xi) in lnp.coefficients.iter().zip(x) {
        if xi {
            u += h;
        }
    }
    Ok(LnpValue(u))
}

/// Bit phi of U, 0-based from the least significant end. Positions
/// beyond the packed width read as 0.
pub fn mask_bit(u: &LnpValue, phi: u64) -> bool {
    u.0.bit(phi)
}

/// Recovers the output block: the least significant bit of each field
/// is that function's XOR value.
pub fn extract_block(lnp: &PackedLnp, u: &LnpValue) -> PrsBlock {
    // Slot k holds function tau-1-k, which is also position k of the
    // written (descending) block order.
    let descending = lnp.offsets.iter().map(|&o| mask_bit(u, o)).collect();
    PrsBlock::from_descending(descending, 0)
}
