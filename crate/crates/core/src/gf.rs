//! Arithmetic over GF(2^m), m <= 12.
//!
//! Elements are stored as their polynomial-basis bit pattern. Multiplication,
//! inversion and powers of the primitive element go through log/antilog
//! tables built once per [`Field`]; [`clmul_reduce`] is the slow carry-less
//! reference path the tables are checked against.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported extension degree.
pub const MAX_M: u32 = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GfError {
    #[error("field degree m = {0} outside 1..={MAX_M}")]
    UnsupportedDegree(u32),
    #[error("reduction polynomial {poly:#x} does not have degree {m}")]
    BadReductionPoly { poly: u32, m: u32 },
    #[error("{0:#x} is not a primitive element for this reduction polynomial")]
    NotPrimitive(u16),
    #[error("inversion of zero")]
    InverseOfZero,
}

/// A field element, `value < 2^m`.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Gf(pub u16);

impl Gf {
    pub const ZERO: Gf = Gf(0);
    pub const ONE: Gf = Gf(1);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for Gf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#04x}", self.0)
    }
}

/// Addition in characteristic 2 is XOR.
impl std::ops::Add for Gf {
    type Output = Gf;
    #[inline]
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, rhs: Gf) -> Gf {
        Gf(self.0 ^ rhs.0)
    }
}

impl std::ops::AddAssign for Gf {
    #[inline]
    #[allow(clippy::suspicious_op_assign_impl)]
    fn add_assign(&mut self, rhs: Gf) {
        self.0 ^= rhs.0;
    }
}

/// Defines a concrete field: degree, reduction polynomial (with the x^m bit
/// set) and the primitive element used as α.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldParams {
    pub m: u32,
    pub reduction_poly: u32,
    pub generator: u16,
}

impl FieldParams {
    /// x^8 + x^4 + x^3 + x^2 + 1 with α = x, the HQC field.
    pub const GF256: FieldParams = FieldParams {
        m: 8,
        reduction_poly: 0x11D,
        generator: 0x02,
    };
}

impl Default for FieldParams {
    fn default() -> Self {
        Self::GF256
    }
}

/// Carry-less multiply of `a` and `b` reduced modulo `poly` (degree `m`).
pub fn clmul_reduce(a: u16, b: u16, poly: u32, m: u32) -> u16 {
    let mut acc: u32 = 0;
    for i in 0..m {
        if (b >> i) & 1 == 1 {
            acc ^= (a as u32) << i;
        }
    }
    for bit in (m..2 * m).rev() {
        if (acc >> bit) & 1 == 1 {
            acc ^= poly << (bit - m);
        }
    }
    acc as u16
}

/// Log/antilog tables for one GF(2^m).
#[derive(Clone)]
pub struct Field {
    params: FieldParams,
    order: u32,
    // exp[i] = α^i for i in 0..2*order, so log a + log b never needs a reduction.
    exp: Vec<u16>,
    // log[0] is unused.
    log: Vec<u16>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("params", &self.params)
            .finish()
    }
}

impl Field {
    pub fn new(params: FieldParams) -> Result<Self, GfError> {
        let m = params.m;
        if m == 0 || m > MAX_M {
            return Err(GfError::UnsupportedDegree(m));
        }
        if params.reduction_poly >> m != 1 {
            return Err(GfError::BadReductionPoly {
                poly: params.reduction_poly,
                m,
            });
        }
        let size = 1u32 << m;
        let order = size - 1;
        let g = params.generator;
        if g == 0 || u32::from(g) >= size {
            return Err(GfError::NotPrimitive(g));
        }

        let mut exp = vec![0u16; 2 * order as usize];
        let mut log = vec![0u16; size as usize];
        let mut x: u16 = 1;
        for i in 0..order {
            if i > 0 && x == 1 {
                return Err(GfError::NotPrimitive(g));
            }
            exp[i as usize] = x;
            log[x as usize] = i as u16;
            x = clmul_reduce(x, g, params.reduction_poly, m);
        }
        if x != 1 {
            return Err(GfError::NotPrimitive(g));
        }
        for i in order..2 * order {
            exp[i as usize] = exp[(i - order) as usize];
        }
        Ok(Field {
            params,
            order,
            exp,
            log,
        })
    }

    /// The default GF(2^8).
    pub fn gf256() -> Self {
        Field::new(FieldParams::GF256).expect("0x11D is primitive")
    }

    pub fn params(&self) -> FieldParams {
        self.params
    }

    /// Size of the multiplicative group, 2^m - 1.
    #[inline]
    pub fn order(&self) -> u32 {
        self.order
    }

    #[inline]
    pub fn size(&self) -> u32 {
        self.order + 1
    }

    #[inline]
    pub fn contains(&self, a: Gf) -> bool {
        u32::from(a.0) <= self.order
    }

    #[inline]
    pub fn add(&self, a: Gf, b: Gf) -> Gf {
        a + b
    }

    #[inline]
    pub fn mul(&self, a: Gf, b: Gf) -> Gf {
        if a.0 == 0 || b.0 == 0 {
            return Gf::ZERO;
        }
        let s = self.log[a.0 as usize] as usize + self.log[b.0 as usize] as usize;
        Gf(self.exp[s])
    }

    pub fn inv(&self, a: Gf) -> Result<Gf, GfError> {
        if a.is_zero() {
            return Err(GfError::InverseOfZero);
        }
        let l = self.log[a.0 as usize] as u32;
        Ok(Gf(self.exp[((self.order - l) % self.order) as usize]))
    }

    pub fn div(&self, a: Gf, b: Gf) -> Result<Gf, GfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    #[inline]
    pub fn square(&self, a: Gf) -> Gf {
        self.mul(a, a)
    }

    /// α^j for any integer j.
    #[inline]
    pub fn pow_alpha(&self, j: i64) -> Gf {
        let e = j.rem_euclid(self.order as i64) as usize;
        Gf(self.exp[e])
    }

    /// a^e, with 0^0 = 1.
    pub fn pow(&self, a: Gf, e: i64) -> Gf {
        if a.is_zero() {
            return if e == 0 { Gf::ONE } else { Gf::ZERO };
        }
        let l = self.log[a.0 as usize] as i64;
        self.pow_alpha(l * e.rem_euclid(self.order as i64))
    }

    /// Discrete logarithm base α; `None` for zero.
    #[inline]
    pub fn log(&self, a: Gf) -> Option<u32> {
        if a.is_zero() {
            None
        } else {
            Some(u32::from(self.log[a.0 as usize]))
        }
    }

    /// Horner evaluation of `p` (lowest degree first) at `x`.
    #[inline]
    pub fn eval(&self, p: &[Gf], x: Gf) -> Gf {
        p.iter()
            .rev()
            .fold(Gf::ZERO, |acc, &c| self.mul(acc, x) + c)
    }

    /// Iterator over every element of the field, zero first.
    pub fn elements(&self) -> impl Iterator<Item = Gf> {
        (0..self.size() as u16).map(Gf)
    }
}
