//! Small integer helpers shared across the crate: primality, modular
//! arithmetic, quadratic residue symbols, integer square roots.

/// Trial-division primality test. Inputs in this crate stay far below 10^6.
pub fn is_prime(n: i64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3i64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Floor of the square root of a non-negative integer, exact.
pub fn isqrt(n: i64) -> i64 {
    if n < 0 {
        panic!("isqrt of negative number");
    }
    let mut r = (n as f64).sqrt() as i64;
    while r > 0 && r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

pub fn is_square(n: i64) -> bool {
    if n < 0 {
        return false;
    }
    let r = isqrt(n);
    r * r == n
}

/// `base^exp mod m` for m < 2^32.
pub fn modpow(base: u64, mut exp: u64, m: u64) -> u64 {
    assert!(m > 0);
    let mut b = base % m;
    let mut acc = 1u64 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m` (extended Euclid); `a` must be a unit mod m.
pub fn inv_mod(a: u64, m: u64) -> u64 {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    assert!(r0 == 1, "inv_mod: {a} is not invertible mod {m}");
    (s0.rem_euclid(m as i128)) as u64
}

/// Reduce a signed integer into `0..m`.
pub fn normalize(a: i64, m: u64) -> u64 {
    (a as i128).rem_euclid(m as i128) as u64
}

/// Legendre symbol (a/p) for an odd prime p: returns 1, -1, or 0.
pub fn legendre(a: i64, p: i64) -> i64 {
    debug_assert!(p > 2 && is_prime(p));
    let r = normalize(a, p as u64);
    if r == 0 {
        return 0;
    }
    let e = modpow(r, (p as u64 - 1) / 2, p as u64);
    if e == 1 {
        1
    } else {
        -1
    }
}

/// Sum of positive divisors of n, or 0 when n is not a positive integer.
pub fn sigma(n: i64) -> i64 {
    if n <= 0 {
        return 0;
    }
    let mut total = 0i64;
    let mut d = 1i64;
    while d * d <= n {
        if n % d == 0 {
            total += d;
            let e = n / d;
            if e != d {
                total += e;
            }
        }
        d += 1;
    }
    total
}
