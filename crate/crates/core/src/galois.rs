//! Arithmetic in GF(2^ν) for 3 ≤ ν ≤ 12 via log/antilog tables.
//!
//! Elements are stored as `u16` bitmasks over the polynomial basis
//! {1, α, …, α^(ν-1)}. The primitive polynomial for each degree is the
//! numerically smallest primitive bitmask, so every table in the crate is
//! reproducible.

use crate::error::{Error, Result};

pub const MIN_DEGREE: u32 = 3;
pub const MAX_DEGREE: u32 = 12;

/// A field element, `0 <= value < 2^nu`.
pub type Element = u16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldTable {
    nu: u32,
    prim_poly: u32,
    /// `exp[i] = α^i`, stored twice over so sums of two logs index directly.
    exp: Vec<Element>,
    /// `log[a]` for nonzero `a`; `log[0]` is unused.
    log: Vec<u16>,
}

impl FieldTable {
    /// Builds GF(2^nu) over the smallest primitive polynomial of degree `nu`.
    pub fn new(nu: u32) -> Result<Self> {
        if !(MIN_DEGREE..=MAX_DEGREE).contains(&nu) {
            return Err(Error::Parameter(format!(
                "field degree nu={nu} outside supported range {MIN_DEGREE}..={MAX_DEGREE}"
            )));
        }
        let top = 1u32 << nu;
        // Constant term must be 1 or x divides the polynomial.
        let prim_poly = (top + 1..2 * top)
            .step_by(2)
            .find(|&poly| multiplicative_order_of_x(poly, nu) == top - 1)
            .expect("a primitive polynomial exists for every degree");
        Ok(Self::with_polynomial(nu, prim_poly))
    }

    fn with_polynomial(nu: u32, prim_poly: u32) -> Self {
        let order = (1usize << nu) - 1;
        let mut exp = vec![0 as Element; 2 * order];
        let mut log = vec![0u16; order + 1];
        let mut x: u32 = 1;
        for i in 0..order {
            exp[i] = x as Element;
            exp[i + order] = x as Element;
            log[x as usize] = i as u16;
            x <<= 1;
            if x & (1 << nu) != 0 {
                x ^= prim_poly;
            }
        }
        debug_assert_eq!(x, 1, "α must have order 2^ν-1");
        Self {
            nu,
            prim_poly,
            exp,
            log,
        }
    }

    pub fn nu(&self) -> u32 {
        self.nu
    }

    /// Primitive polynomial as a bitmask, bit `i` holding the coefficient of x^i.
    pub fn prim_poly(&self) -> u32 {
        self.prim_poly
    }

    /// Number of field elements, 2^ν.
    pub fn size(&self) -> usize {
        1 << self.nu
    }

    /// Multiplicative group order, 2^ν − 1.
    pub fn order(&self) -> usize {
        self.size() - 1
    }

    /// Antilog table α^0 … α^(2^ν−2).
    pub fn exp_table(&self) -> &[Element] {
        &self.exp[..self.order()]
    }

    pub fn log_table(&self) -> &[u16] {
        &self.log
    }

    /// α^i for any integer exponent (reduced modulo the group order).
    #[inline]
    pub fn alpha_pow(&self, i: i64) -> Element {
        let ord = self.order() as i64;
        self.exp[i.rem_euclid(ord) as usize]
    }

    /// Discrete log of a nonzero element.
    #[inline]
    pub fn log(&self, a: Element) -> Option<usize> {
        (a != 0).then(|| self.log[a as usize] as usize)
    }

    #[inline]
    pub fn mul(&self, a: Element, b: Element) -> Element {
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
        }
    }

    pub fn inv(&self, a: Element) -> Result<Element> {
        if a == 0 {
            return Err(Error::Domain("zero has no multiplicative inverse".into()));
        }
        let l = self.log[a as usize] as usize;
        Ok(self.exp[(self.order() - l) % self.order()])
    }

    pub fn pow(&self, a: Element, e: u64) -> Element {
        if a == 0 {
            return if e == 0 { 1 } else { 0 };
        }
        let l = self.log[a as usize] as u64;
        self.exp[((l * e) % self.order() as u64) as usize]
    }

    #[inline]
    pub fn square(&self, a: Element) -> Element {
        self.mul(a, a)
    }
}

/// Order of x in GF(2)[x]/(poly), or 0 if x^k never returns to 1 within 2^nu steps.
fn multiplicative_order_of_x(poly: u32, nu: u32) -> u32 {
    let top = 1u32 << nu;
    let mut x: u32 = 1;
    for k in 1..=top {
        x <<= 1;
        if x & top != 0 {
            x ^= poly;
        }
        if x == 1 {
            return k;
        }
    }
    0
}
