/// Deterministic Miller-Rabin for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let pow = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mul(r, b);
            }
            b = mul(b, b);
            e >>= 1;
        }
        r
    };
    'witness: for &a in &WITNESSES {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Least prime strictly greater than `x`.
pub fn smallest_prime_above(x: u64) -> u64 {
    let mut c = x + 1;
    while !is_prime(c) {
        c += 1;
    }
    c
}

/// True when 2 generates the multiplicative group mod the prime `p`, so that
/// (X^p - 1)/(X - 1) is irreducible over GF(2).
pub fn two_is_primitive_root(p: u64) -> bool {
    if p == 2 {
        return false;
    }
    if p == 3 {
        return true;
    }
    let order = p - 1;
    let mut rest = order;
    let mut factors = Vec::new();
    let mut d = 2;
    while d * d <= rest {
        if rest.is_multiple_of(d) {
            factors.push(d);
            while rest.is_multiple_of(d) {
                rest /= d;
            }
        }
        d += 1;
    }
    if rest > 1 {
        factors.push(rest);
    }
    factors.iter().all(|&f| pow_mod(2, order / f, p) != 1)
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = ((r as u128 * b as u128) % m as u128) as u64;
        }
        b = ((b as u128 * b as u128) % m as u128) as u64;
        e >>= 1;
    }
    r
}

/// Ambient HQC length for a payload of `x` bits: the least prime above `x`
/// for which 2 is a primitive root.
pub fn ambient_length(x: u64) -> u64 {
    let mut c = smallest_prime_above(x);
    while !two_is_primitive_root(c) {
        c = smallest_prime_above(c);
    }
    c
}
