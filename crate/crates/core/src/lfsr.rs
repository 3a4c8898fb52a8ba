//! Serial and block-parallel generation of pseudo-random binary
//! sequences from a tap polynomial.
//!
//! The forming polynomial D(x) = x^tau + x^{t_l} + ... + x^{t_1} + 1
//! induces the recurrence x_{p+tau} = x_p ^ x_{p+t_1} ^ ... ^ x_{p+t_l}.
//! A register state is kept in ascending order (x_p, ..., x_{p+tau-1}),
//! so stepping shifts left and feeds the recurrence bit in at the top.
//!
//! Stacking tau characteristic equations yields the one-step transform
//! matrix; raising it to the tau-th power gives the block transform
//! whose row i expresses bit i of the next block in terms of the
//! previous block. That matrix is what the arithmetic evaluation layer
//! consumes.

use crate::error::{Error, Result};
use crate::matrix::BitMatrix;
use std::fmt;

/// Forming polynomial, held as its degree and the interior tap
/// exponents (the terms between x^tau and the constant 1).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TapPolynomial {
    degree: usize,
    taps: Vec<usize>,
}

impl TapPolynomial {
    /// Validates degree >= 2 and taps inside 1..=degree-1, distinct
    /// and non-empty. Taps are stored sorted ascending.
    pub fn new(degree: usize, taps: &[usize]) -> Result<Self> {
        if degree < 2 {
            return Err(Error::DegreeTooSmall(degree));
        }
        if taps.is_empty() {
            return Err(Error::EmptyTaps);
        }
        let mut sorted = taps.to_vec();
        sorted.sort_unstable();
        for pair in sorted.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::DuplicateTap(pair[0]));
            }
        }
        for &t in &sorted {
            if t == 0 || t >= degree {
                return Err(Error::TapOutOfRange {
                    tap: t,
                    max: degree - 1,
                });
            }
        }
        Ok(TapPolynomial {
            degree,
            taps: sorted,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn taps(&self) -> &[usize] {
        &self.taps
    }

    /// Recurrence coefficients c_0..c_{tau-1}; c_0 is always 1
    /// (constant term of the polynomial), c_t = 1 for each tap t.
    pub fn coefficients(&self) -> Vec<bool> {
        let mut c = vec![false; self.degree];
        c[0] = true;
        for &t in &self.taps {
            c[t] = true;
        }
        c
    }

    /// One-step transform on the ascending register state: rows
    /// 0..tau-2 shift, the last row applies the recurrence.
    pub fn companion_matrix(&self) -> BitMatrix {
        let tau = self.degree;
        let mut m = BitMatrix::zero(tau, tau);
        for i in 0..tau - 1 {
            m.set(i, i + 1, true);
        }
        for (j, c) in self.coefficients().into_iter().enumerate() {
            m.set(tau - 1, j, c);
        }
        m
    }

    /// `span`-step transform: companion matrix to the span-th power.
    /// With span = degree this is the block transform, row i giving
    /// the coefficients of bit i of the next block over the previous
    /// block's bits.
    pub fn block_matrix(&self, span: usize) -> Result<BitMatrix> {
        if span < 1 {
            return Err(Error::SpanTooSmall);
        }
        Ok(self.companion_matrix().pow(span as u64))
    }
}

impl fmt::Display for TapPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x^{}", self.degree)?;
        for &t in self.taps.iter().rev() {
            if t == 1 {
                write!(f, " + x")?;
            } else {
                write!(f, " + x^{t}")?;
            }
        }
        write!(f, " + 1")
    }
}

/// Serial bit-by-bit generator.
#[derive(Clone, Debug)]
pub struct Lfsr {
    poly: TapPolynomial,
    register: Vec<bool>,
    step_index: u64,
}

impl Lfsr {
    /// Seed is the ascending register content: seed[0] = x_p is the
    /// first bit emitted.
    pub fn new(poly: TapPolynomial, seed: &[bool]) -> Result<Self> {
        if seed.len() != poly.degree() {
            return Err(Error::SeedLengthMismatch {
                want: poly.degree(),
                got: seed.len(),
            });
        }
        Ok(Lfsr {
            poly,
            register: seed.to_vec(),
            step_index: 0,
        })
    }

    pub fn poly(&self) -> &TapPolynomial {
        &self.poly
    }

    /// Ascending register content (next output first).
    pub fn register(&self) -> &[bool] {
        &self.register
    }

    /// Mutable register access for fault injection harnesses.
    pub fn register_mut(&mut self) -> &mut [bool] {
        &mut self.register
    }

    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    /// Emits the current x_p and shifts, passing the freshly computed
    /// feedback bit through `tamper` before it enters the register.
    /// The identity closure gives fault-free operation.
    pub fn step_with<F: FnOnce(bool) -> bool>(&mut self, tamper: F) -> bool {
        let out = self.register[0];
        let mut fb = false;
        for (i, c) in self.poly.coefficients().into_iter().enumerate() {
            if c {
                fb ^= self.register[i];
            }
        }
        let fb = tamper(fb);
        self.register.rotate_left(1);
        *self.register.last_mut().unwrap() = fb;
        self.step_index += 1;
        out
    }

    pub fn step(&mut self) -> bool {
        self.step_with(|fb| fb)
    }

    pub fn generate(&mut self, n: usize) -> Vec<bool> {
        (0..n).map(|_| self.step()).collect()
    }
}

/// One block of tau sequence bits, stored high-index-first
/// (x_{q,tau-1}, ..., x_{q,0}), matching the written block notation.
/// Chronological emission order is the reverse.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PrsBlock {
    bits: Vec<bool>,
    block_index: u64,
}

impl PrsBlock {
    /// Builds from chronological bit order (x_{q,0} first).
    pub fn from_ascending(bits: &[bool], block_index: u64) -> Self {
        let mut b = bits.to_vec();
        b.reverse();
        PrsBlock {
            bits: b,
            block_index,
        }
    }

    /// Builds from written order (x_{q,tau-1} first).
    pub fn from_descending(bits: Vec<bool>, block_index: u64) -> Self {
        PrsBlock { bits, block_index }
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }

    pub fn block_index(&self) -> u64 {
        self.block_index
    }

    pub fn with_index(mut self, block_index: u64) -> Self {
        self.block_index = block_index;
        self
    }

    /// x_{q,i} for i in 0..width.
    pub fn bit(&self, i: usize) -> bool {
        self.bits[self.bits.len() - 1 - i]
    }

    pub fn flip_bit(&mut self, i: usize) {
        let w = self.bits.len();
        self.bits[w - 1 - i] ^= true;
    }

    pub fn set_bit(&mut self, i: usize, value: bool) {
        let w = self.bits.len();
        self.bits[w - 1 - i] = value;
    }

    /// Written order, x_{q,tau-1} first.
    pub fn descending(&self) -> &[bool] {
        &self.bits
    }

    /// Chronological order, x_{q,0} first.
    pub fn ascending(&self) -> Vec<bool> {
        self.bits.iter().rev().copied().collect()
    }
}

impl fmt::Display for PrsBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// Advances one whole block: row i of the block matrix produces bit i
/// of the next block from the previous block's ascending bits.
pub fn block_step(block_matrix: &BitMatrix, block: &PrsBlock) -> Result<PrsBlock> {
    if block_matrix.cols() != block.width() || block_matrix.rows() != block.width() {
        return Err(Error::DimensionMismatch {
            want: block.width(),
            got: block_matrix.cols(),
        });
    }
    let next = block_matrix.apply(&block.ascending());
    Ok(PrsBlock::from_ascending(&next, block.block_index() + 1))
}

/// Fault-free block-mode stream: the seed block's bits followed by
/// each successive block, all in chronological order.
pub fn block_stream(poly: &TapPolynomial, seed: &[bool], n: usize) -> Result<Vec<bool>> {
    let tau = poly.degree();
    if seed.len() != tau {
        return Err(Error::SeedLengthMismatch {
            want: tau,
            got: seed.len(),
        });
    }
    let g = poly.block_matrix(tau)?;
    let mut out = Vec::with_capacity(n.div_ceil(tau) * tau);
    let mut block = PrsBlock::from_ascending(seed, 0);
    out.extend_from_slice(seed);
    while out.len() < n {
        block = block_step(&g, &block)?;
        out.extend(block.ascending());
    }
    out.truncate(n);
    Ok(out)
}
