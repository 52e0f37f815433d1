//! Polynomials over a [`Field`], stored lowest degree first.

use crate::gf::{Field, Gf};

pub type Poly = Vec<Gf>;

/// Degree of `p`, `None` for the zero polynomial.
pub fn degree(p: &[Gf]) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

/// Drops trailing zero coefficients.
pub fn trim(mut p: Poly) -> Poly {
    let len = degree(&p).map_or(0, |d| d + 1);
    p.truncate(len);
    p
}

pub fn add(a: &[Gf], b: &[Gf]) -> Poly {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or_default() + b.get(i).copied().unwrap_or_default())
        .collect()
}

pub fn scale(f: &Field, p: &[Gf], c: Gf) -> Poly {
    p.iter().map(|&x| f.mul(x, c)).collect()
}

/// x * p(x).
pub fn shift(p: &[Gf]) -> Poly {
    let mut out = Vec::with_capacity(p.len() + 1);
    out.push(Gf::ZERO);
    out.extend_from_slice(p);
    out
}

pub fn mul(f: &Field, a: &[Gf], b: &[Gf]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Gf::ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += f.mul(x, y);
        }
    }
    out
}

/// (x + a) * p(x); in characteristic 2 this is also (x - a) * p(x).
pub fn mul_linear(f: &Field, p: &[Gf], a: Gf) -> Poly {
    let mut out = shift(p);
    for (i, &c) in p.iter().enumerate() {
        out[i] += f.mul(c, a);
    }
    out
}

/// Odd part Σ p_{2k+1} x^{2k+1}, which equals x·p'(x) in characteristic 2.
pub fn odd_part(p: &[Gf]) -> Poly {
    p.iter()
        .enumerate()
        .map(|(i, &c)| if i % 2 == 1 { c } else { Gf::ZERO })
        .collect()
}

/// Formal derivative.
pub fn derivative(p: &[Gf]) -> Poly {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| if i % 2 == 1 { c } else { Gf::ZERO })
        .collect()
}

/// Quotient and remainder of `a / b`. Returns `None` when `b` is zero.
pub fn div_rem(f: &Field, a: &[Gf], b: &[Gf]) -> Option<(Poly, Poly)> {
    let db = degree(b)?;
    let lead_inv = f.inv(b[db]).ok()?;
    let mut rem = a.to_vec();
    let Some(da) = degree(a) else {
        return Some((Vec::new(), Vec::new()));
    };
    if da < db {
        return Some((Vec::new(), trim(rem)));
    }
    let mut quot = vec![Gf::ZERO; da - db + 1];
    for d in (db..=da).rev() {
        let c = f.mul(rem[d], lead_inv);
        if c.is_zero() {
            continue;
        }
        quot[d - db] = c;
        for (j, &bj) in b.iter().enumerate().take(db + 1) {
            rem[d - db + j] += f.mul(c, bj);
        }
    }
    Some((trim(quot), trim(rem)))
}

/// Π (1 + X_j x) for the given locators.
pub fn from_locators(f: &Field, locators: impl IntoIterator<Item = Gf>) -> Poly {
    let mut p = vec![Gf::ONE];
    for x in locators {
        p = add(&p, &scale(f, &shift(&p), x));
    }
    p
}
