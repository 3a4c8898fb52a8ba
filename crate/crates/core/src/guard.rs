//! Separable linear-code guard for block generation: alongside each
//! block, r redundant check symbols are produced from the previous
//! block and verified against the emitted one.
//!
//! A check j is declared on the output side as a selector v^{(j)}
//! applied to the new block. Folding the selector through the block
//! transform gives the row a^{(j)} = v^{(j)} * G that computes the
//! same symbol from the previous block, so generation and checking
//! run concurrently. The default single check uses the all-ones
//! selector, i.e. block parity.

use crate::error::{Error, Result};
use crate::lfsr::{block_step, PrsBlock};
use crate::matrix::BitMatrix;

fn dot(a: &[bool], b: &[bool]) -> bool {
    a.iter().zip(b).fold(false, |acc, (&x, &y)| acc ^ (x & y))
}

fn independent(vectors: &[Vec<bool>]) -> bool {
    let mut basis: Vec<Vec<bool>> = Vec::new();
    for v in vectors {
        let mut v = v.clone();
        for b in &basis {
            let lead = b.iter().position(|&x| x).unwrap();
            if v[lead] {
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi ^= bi;
                }
            }
        }
        if v.iter().all(|&x| !x) {
            return false;
        }
        basis.push(v);
    }
    true
}

/// Check-symbol layout: r output selectors and the derived rows that
/// evaluate the same symbols from the previous block.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CheckSpec {
    check_rows: Vec<Vec<bool>>,
    output_selectors: Vec<Vec<bool>>,
}

impl CheckSpec {
    pub fn r(&self) -> usize {
        self.output_selectors.len()
    }

    /// a^{(j)}, indexed by input-bit position of the previous block.
    pub fn check_rows(&self) -> &[Vec<bool>] {
        &self.check_rows
    }

    pub fn output_selectors(&self) -> &[Vec<bool>] {
        &self.output_selectors
    }

    /// Single parity check: all-ones selector over the output block.
    pub fn parity(block_matrix: &BitMatrix) -> Result<Self> {
        derive_check_rows(block_matrix, &[vec![true; block_matrix.cols()]])
    }
}

/// Folds each output selector through the block transform:
/// a^{(j)} = v^{(j)} * G, so x*_{q,j} = a^{(j)}.X_{q-1} = v^{(j)}.X_q.
pub fn derive_check_rows(block_matrix: &BitMatrix, selectors: &[Vec<bool>]) -> Result<CheckSpec> {
    if selectors.is_empty() {
        return Err(Error::NoSelectors);
    }
    let tau = block_matrix.rows();
    for v in selectors {
        if v.len() != tau {
            return Err(Error::DimensionMismatch {
                want: tau,
                got: v.len(),
            });
        }
    }
    if !independent(selectors) {
        return Err(Error::DependentSelectors);
    }
    let check_rows = selectors
        .iter()
        .map(|v| {
            (0..tau)
                .map(|col| {
                    (0..tau).fold(false, |acc, row| {
                        acc ^ (v[row] & block_matrix.get(row, col))
                    })
                })
                .collect()
        })
        .collect();
    Ok(CheckSpec {
        check_rows,
        output_selectors: selectors.to_vec(),
    })
}

/// A block together with its check symbols, stored like the block
/// itself in written order (x*_{q,r-1}, ..., x*_{q,0}).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GuardedBlock {
    pub block: PrsBlock,
    checks: Vec<bool>,
}

impl GuardedBlock {
    pub fn new(block: PrsBlock, checks_descending: Vec<bool>) -> Self {
        GuardedBlock {
            block,
            checks: checks_descending,
        }
    }

    pub fn r(&self) -> usize {
        self.checks.len()
    }

    /// x*_{q,j}.
    pub fn check(&self, j: usize) -> bool {
        self.checks[self.checks.len() - 1 - j]
    }

    pub fn flip_check(&mut self, j: usize) {
        let r = self.checks.len();
        self.checks[r - 1 - j] ^= true;
    }

    pub fn checks_descending(&self) -> &[bool] {
        &self.checks
    }
}

/// Advances one block and computes its check symbols, both from the
/// previous block.
pub fn encode_block(
    block_matrix: &BitMatrix,
    spec: &CheckSpec,
    prev: &PrsBlock,
) -> Result<GuardedBlock> {
    let block = block_step(block_matrix, prev)?;
    let prev_asc = prev.ascending();
    for row in spec.check_rows() {
        if row.len() != prev_asc.len() {
            return Err(Error::DimensionMismatch {
                want: prev_asc.len(),
                got: row.len(),
            });
        }
    }
    let mut checks: Vec<bool> = spec
        .check_rows()
        .iter()
        .map(|a| dot(a, &prev_asc))
        .collect();
    checks.reverse();
    Ok(GuardedBlock { block, checks })
}

/// Syndrome of a guarded block: syndrome[j] = (v^{(j)}.X_q) xor x*_{q,j}.
/// All-zero means no detected error.
pub fn verify_block(spec: &CheckSpec, guarded: &GuardedBlock) -> Vec<bool> {
    assert_eq!(spec.r(), guarded.r(), "check count mismatch");
    let asc = guarded.block.ascending();
    spec.output_selectors()
        .iter()
        .enumerate()
        .map(|(j, v)| {
            assert_eq!(v.len(), asc.len(), "selector width mismatch");
            dot(v, &asc) ^ guarded.check(j)
        })
        .collect()
}
