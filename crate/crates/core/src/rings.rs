//! Exact arithmetic in the imaginary quadratic rings Z[i] (i^2 = -1) and
//! Z[w] with w = (1+i)/2, i^2 = -3 (so w^2 = w - 1), together with divisor
//! sums and the representation counts of the two quaternary forms
//! x^2+y^2+z^2+w^2 and x^2+xy+y^2+z^2+zw+w^2.

use crate::num::{isqrt, sigma};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RingError {
    #[error("gcd of (0, 0) is undefined")]
    GcdBothZero,
}

/// Which imaginary quadratic ring an element lives in.
///
/// `Gauss` is Z[i] on the basis {1, i}, norm a^2 + b^2.
/// `Eisen` is Z[(1+i)/2] (i^2 = -3) on the basis {1, w}, norm a^2 + ab + b^2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RingTag {
    Gauss,
    Eisen,
}

impl RingTag {
    /// Trace of the non-rational basis generator: 0 for i, 1 for w.
    pub fn generator_trace(self) -> i64 {
        match self {
            RingTag::Gauss => 0,
            RingTag::Eisen => 1,
        }
    }

    /// The units of the ring: 4 for Z[i], 6 for Z[w].
    pub fn units(self) -> Vec<ImQuadInt> {
        match self {
            RingTag::Gauss => vec![
                ImQuadInt::new(self, 1, 0),
                ImQuadInt::new(self, -1, 0),
                ImQuadInt::new(self, 0, 1),
                ImQuadInt::new(self, 0, -1),
            ],
            RingTag::Eisen => vec![
                ImQuadInt::new(self, 1, 0),
                ImQuadInt::new(self, -1, 0),
                ImQuadInt::new(self, 0, 1),
                ImQuadInt::new(self, 0, -1),
                ImQuadInt::new(self, 1, -1),
                ImQuadInt::new(self, -1, 1),
            ],
        }
    }
}

/// An element a + b*g of an imaginary quadratic ring, where g is i or w
/// depending on the ring tag. Coefficients are exact integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ImQuadInt {
    pub ring: RingTag,
    pub a: i64,
    pub b: i64,
}

impl ImQuadInt {
    pub fn new(ring: RingTag, a: i64, b: i64) -> Self {
        ImQuadInt { ring, a, b }
    }

    pub fn zero(ring: RingTag) -> Self {
        ImQuadInt::new(ring, 0, 0)
    }

    pub fn one(ring: RingTag) -> Self {
        ImQuadInt::new(ring, 1, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.ring, rhs.ring, "mixed-ring arithmetic");
        ImQuadInt::new(self.ring, self.a + rhs.a, self.b + rhs.b)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.ring, rhs.ring, "mixed-ring arithmetic");
        ImQuadInt::new(self.ring, self.a - rhs.a, self.b - rhs.b)
    }

    pub fn neg(&self) -> Self {
        ImQuadInt::new(self.ring, -self.a, -self.b)
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.ring, rhs.ring, "mixed-ring arithmetic");
        let (a, b, c, d) = (self.a, self.b, rhs.a, rhs.b);
        match self.ring {
            // (a+bi)(c+di) = ac - bd + (ad+bc) i
            RingTag::Gauss => ImQuadInt::new(self.ring, a * c - b * d, a * d + b * c),
            // (a+bw)(c+dw) = ac - bd + (ad+bc+bd) w, using w^2 = w - 1
            RingTag::Eisen => ImQuadInt::new(self.ring, a * c - b * d, a * d + b * c + b * d),
        }
    }

    /// Complex conjugate, expressed on the ring basis.
    pub fn conj(&self) -> Self {
        match self.ring {
            RingTag::Gauss => ImQuadInt::new(self.ring, self.a, -self.b),
            // conj(w) = 1 - w
            RingTag::Eisen => ImQuadInt::new(self.ring, self.a + self.b, -self.b),
        }
    }

    pub fn norm(&self) -> i64 {
        match self.ring {
            RingTag::Gauss => self.a * self.a + self.b * self.b,
            RingTag::Eisen => self.a * self.a + self.a * self.b + self.b * self.b,
        }
    }

    pub fn trace(&self) -> i64 {
        match self.ring {
            RingTag::Gauss => 2 * self.a,
            RingTag::Eisen => 2 * self.a + self.b,
        }
    }

    /// True when `self` divides `rhs` exactly in the ring.
    pub fn divides(&self, rhs: &Self) -> bool {
        if self.is_zero() {
            return rhs.is_zero();
        }
        let n = self.norm();
        let prod = rhs.mul(&self.conj());
        prod.a % n == 0 && prod.b % n == 0
    }

    /// Exact quotient `rhs = q * self`; panics if not divisible.
    pub fn exact_div(&self, rhs: &Self) -> Self {
        let n = self.norm();
        let prod = rhs.mul(&self.conj());
        assert!(prod.a % n == 0 && prod.b % n == 0, "exact_div: not divisible");
        ImQuadInt::new(self.ring, prod.a / n, prod.b / n)
    }

    /// The associate of `self` lying in the canonical sector (see
    /// `canonical_from_candidates`). Zero maps to zero.
    pub fn canonical_associate(&self) -> Self {
        if self.is_zero() {
            return *self;
        }
        let candidates: Vec<ImQuadInt> = self
            .ring
            .units()
            .iter()
            .map(|u| self.mul(u))
            .collect();
        canonical_from_candidates(&candidates)
            .expect("associate orbit always meets the canonical sector")
    }
}

impl std::fmt::Display for ImQuadInt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let g = match self.ring {
            RingTag::Gauss => "i",
            RingTag::Eisen => "w",
        };
        write!(f, "{}{:+}{}", self.a, self.b, g)
    }
}

/// Sector rule for picking one element out of a set of candidates:
/// Gauss sector is a > 0, b >= 0; Eisen sector is a > 0, -a < b <= a.
/// Ties inside the sector are broken lexicographically by (a, b), largest
/// first, which keeps the choice deterministic across runs.
fn in_sector(x: &ImQuadInt) -> bool {
    match x.ring {
        RingTag::Gauss => x.a > 0 && x.b >= 0,
        RingTag::Eisen => x.a > 0 && -x.a < x.b && x.b <= x.a,
    }
}

fn canonical_from_candidates(cands: &[ImQuadInt]) -> Option<ImQuadInt> {
    cands
        .iter()
        .copied()
        .filter(in_sector)
        .max_by_key(|x| (x.a, x.b))
}

/// Divisor sum extended to the rationals: sigma(num/den) is the usual
/// sigma_1 when num/den is a positive integer and 0 otherwise.
pub fn sigma_divisors(num: i64, den: i64) -> i64 {
    assert!(den != 0, "sigma_divisors: zero denominator");
    if num % den != 0 {
        return 0;
    }
    sigma(num / den)
}

/// Number of integer solutions of x^2+y^2+z^2+w^2 = n, as 8 sigma(n) - 32 sigma(n/4).
pub fn count_four_squares(n: i64) -> i64 {
    assert!(n >= 1);
    8 * sigma_divisors(n, 1) - 32 * sigma_divisors(n, 4)
}

/// Number of integer solutions of x^2+xy+y^2+z^2+zw+w^2 = n,
/// as 12 sigma(n) - 36 sigma(n/3).
pub fn count_double_hexagonal(n: i64) -> i64 {
    assert!(n >= 1);
    12 * sigma_divisors(n, 1) - 36 * sigma_divisors(n, 3)
}

/// All solutions of norm(x) = n in the given ring, plus the canonical one.
#[derive(Debug, Clone)]
pub struct NormSolutions {
    pub all: Vec<ImQuadInt>,
    pub canonical: Option<ImQuadInt>,
}

/// Solve norm(x) = n by scanning the coefficient box implied by the
/// positive definite norm form. An empty result is a valid answer, e.g.
/// Gauss with n = 3 (mod 4) primes.
pub fn solve_norm_equation(ring: RingTag, n: i64) -> NormSolutions {
    assert!(n >= 1);
    let mut all = Vec::new();
    match ring {
        RingTag::Gauss => {
            let bound = isqrt(n);
            for a in -bound..=bound {
                let rem = n - a * a;
                let b = isqrt(rem);
                if b * b == rem {
                    if b == 0 {
                        all.push(ImQuadInt::new(ring, a, 0));
                    } else {
                        all.push(ImQuadInt::new(ring, a, b));
                        all.push(ImQuadInt::new(ring, a, -b));
                    }
                }
            }
        }
        RingTag::Eisen => {
            // a^2+ab+b^2 = (a + b/2)^2 + 3 b^2/4 <= n bounds both coords.
            let bb = isqrt(4 * n / 3);
            for b in -bb..=bb {
                let amin = -isqrt(n) - b.abs() - 1;
                let amax = isqrt(n) + b.abs() + 1;
                for a in amin..=amax {
                    if a * a + a * b + b * b == n {
                        all.push(ImQuadInt::new(ring, a, b));
                    }
                }
            }
        }
    }
    all.sort_by_key(|x| (x.a, x.b));
    let canonical = canonical_from_candidates(&all);
    NormSolutions { all, canonical }
}

/// Greatest common divisor by the Euclidean algorithm; both rings are
/// norm-Euclidean for rounding division on their standard bases. The
/// result is the canonical associate.
pub fn ring_gcd(x: &ImQuadInt, y: &ImQuadInt) -> Result<ImQuadInt, RingError> {
    assert_eq!(x.ring, y.ring, "mixed-ring gcd");
    if x.is_zero() && y.is_zero() {
        return Err(RingError::GcdBothZero);
    }
    let (mut r0, mut r1) = (*x, *y);
    while !r1.is_zero() {
        let r = euclid_rem(&r0, &r1);
        r0 = r1;
        r1 = r;
    }
    Ok(r0.canonical_associate())
}

/// Remainder of x by y with norm(rem) < norm(y): divide in the fraction
/// field and round each basis coordinate to the nearest integer.
fn euclid_rem(x: &ImQuadInt, y: &ImQuadInt) -> ImQuadInt {
    let n = y.norm();
    let prod = x.mul(&y.conj());
    let q = ImQuadInt::new(x.ring, round_div(prod.a, n), round_div(prod.b, n));
    let r = x.sub(&q.mul(y));
    debug_assert!(r.norm() < y.norm());
    r
}

fn round_div(a: i64, b: i64) -> i64 {
    // nearest integer to a/b, ties toward +infinity; b > 0 here
    debug_assert!(b > 0);
    (2 * a + b).div_euclid(2 * b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn elem(ring: RingTag, a: i64, b: i64) -> ImQuadInt {
        ImQuadInt::new(ring, a, b)
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma_divisors(1, 1), 1);
        assert_eq!(sigma_divisors(6, 1), 12);
        assert_eq!(sigma_divisors(1, 2), 0);
        assert_eq!(sigma_divisors(-4, 1), 0);
        assert_eq!(sigma_divisors(12, 4), 4);
    }

    #[test]
    fn four_square_examples() {
        assert_eq!(count_four_squares(2), 24);
        assert_eq!(count_four_squares(1), 8);
        assert_eq!(count_four_squares(12), 96);
    }

    #[test]
    fn double_hexagonal_examples() {
        assert_eq!(count_double_hexagonal(1), 12);
        assert_eq!(count_double_hexagonal(3), 12);
        assert_eq!(count_double_hexagonal(2), 36);
    }

    /// Independent oracle: count solutions of x^2+y^2+z^2+w^2 = n by scanning.
    pub fn four_squares_bruteforce(nmax: i64) -> Vec<i64> {
        let bound = isqrt(nmax);
        let mut counts = vec![0i64; (nmax + 1) as usize];
        for x in -bound..=bound {
            for y in -bound..=bound {
                if x * x + y * y > nmax {
                    continue;
                }
                for z in -bound..=bound {
                    let s3 = x * x + y * y + z * z;
                    if s3 > nmax {
                        continue;
                    }
                    for w in -bound..=bound {
                        let s = s3 + w * w;
                        if s <= nmax {
                            counts[s as usize] += 1;
                        }
                    }
                }
            }
        }
        counts
    }

    /// Independent oracle for the hexagonal quaternary form.
    pub fn double_hexagonal_bruteforce(nmax: i64) -> Vec<i64> {
        let bound = isqrt(4 * nmax / 3) + 1;
        let mut counts = vec![0i64; (nmax + 1) as usize];
        let hex = |x: i64, y: i64| x * x + x * y + y * y;
        for x in -bound..=bound {
            for y in -bound..=bound {
                let h1 = hex(x, y);
                if h1 > nmax {
                    continue;
                }
                for z in -bound..=bound {
                    // hex(z, w) >= 3 z^2 / 4 for any w
                    if 3 * z * z > 4 * nmax {
                        continue;
                    }
                    for w in -bound..=bound {
                        let s = h1 + hex(z, w);
                        if s <= nmax {
                            counts[s as usize] += 1;
                        }
                    }
                }
            }
        }
        counts
    }

    #[test]
    fn four_squares_matches_bruteforce_small() {
        let counts = four_squares_bruteforce(120);
        for n in 1..=120 {
            assert_eq!(count_four_squares(n), counts[n as usize], "n = {n}");
        }
    }

    #[test]
    fn double_hexagonal_matches_bruteforce_small() {
        let counts = double_hexagonal_bruteforce(80);
        for n in 1..=80 {
            assert_eq!(count_double_hexagonal(n), counts[n as usize], "n = {n}");
        }
    }

    #[test]
    fn norm_equation_gauss_5() {
        let sols = solve_norm_equation(RingTag::Gauss, 5);
        assert_eq!(sols.all.len(), 8);
        assert_eq!(sols.canonical, Some(elem(RingTag::Gauss, 2, 1)));
        for s in &sols.all {
            assert_eq!(s.norm(), 5);
        }
    }

    #[test]
    fn norm_equation_gauss_3_empty() {
        let sols = solve_norm_equation(RingTag::Gauss, 3);
        assert!(sols.all.is_empty());
        assert!(sols.canonical.is_none());
    }

    #[test]
    fn norm_equation_eisen_7() {
        let sols = solve_norm_equation(RingTag::Eisen, 7);
        assert_eq!(sols.all.len(), 12);
        assert_eq!(sols.canonical, Some(elem(RingTag::Eisen, 3, -1)));
    }

    #[test]
    fn norm_equation_unit_counts() {
        assert_eq!(solve_norm_equation(RingTag::Gauss, 1).all.len(), 4);
        assert_eq!(solve_norm_equation(RingTag::Eisen, 1).all.len(), 6);
    }

    #[test]
    fn split_prime_solution_counts() {
        for l in 2..=100i64 {
            if !crate::num::is_prime(l) {
                continue;
            }
            if l % 4 == 1 {
                assert_eq!(solve_norm_equation(RingTag::Gauss, l).all.len(), 8, "l = {l}");
            }
            if l % 3 == 1 {
                assert_eq!(solve_norm_equation(RingTag::Eisen, l).all.len(), 12, "l = {l}");
            }
        }
    }

    #[test]
    fn gcd_examples() {
        let g = ring_gcd(&elem(RingTag::Gauss, 2, 1), &elem(RingTag::Gauss, 5, 0)).unwrap();
        assert_eq!(g, elem(RingTag::Gauss, 2, 1).canonical_associate());
        assert_eq!(g.norm(), 5);

        let g = ring_gcd(&elem(RingTag::Gauss, 7, 3), &elem(RingTag::Gauss, 1, 0)).unwrap();
        assert_eq!(g, elem(RingTag::Gauss, 1, 0));

        let g = ring_gcd(&elem(RingTag::Gauss, 3, 1), &elem(RingTag::Gauss, 3, -1)).unwrap();
        assert_eq!(g.norm(), 2); // associate of 1+i

        assert_eq!(
            ring_gcd(&elem(RingTag::Eisen, 0, 0), &elem(RingTag::Eisen, 0, 0)),
            Err(RingError::GcdBothZero)
        );
    }

    #[test]
    fn gcd_divides_and_is_maximal() {
        // gcd output divides both inputs and is divisible by every common
        // divisor found by scanning elements of bounded norm.
        let cases = [
            (RingTag::Gauss, (4, 2), (6, 0)),
            (RingTag::Gauss, (5, 5), (10, 0)),
            (RingTag::Eisen, (3, 3), (6, 0)),
            (RingTag::Eisen, (4, 2), (2, 4)),
        ];
        for (ring, (xa, xb), (ya, yb)) in cases {
            let x = elem(ring, xa, xb);
            let y = elem(ring, ya, yb);
            let g = ring_gcd(&x, &y).unwrap();
            assert!(g.divides(&x) && g.divides(&y));
            let bound = x.norm().min(y.norm());
            for n in 1..=bound {
                for d in solve_norm_equation(ring, n).all {
                    if d.divides(&x) && d.divides(&y) {
                        assert!(d.divides(&g), "common divisor {d} must divide gcd {g}");
                    }
                }
            }
        }
    }

    #[test]
    fn canonical_associate_is_stable() {
        for ring in [RingTag::Gauss, RingTag::Eisen] {
            for a in -4i64..=4 {
                for b in -4i64..=4 {
                    let x = elem(ring, a, b);
                    if x.is_zero() {
                        continue;
                    }
                    let c = x.canonical_associate();
                    // canonicalization is idempotent and associate-invariant
                    assert_eq!(c, c.canonical_associate());
                    for u in ring.units() {
                        assert_eq!(x.mul(&u).canonical_associate(), c);
                    }
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn norm_is_multiplicative(a in -50i64..50, b in -50i64..50, c in -50i64..50, d in -50i64..50) {
            for ring in [RingTag::Gauss, RingTag::Eisen] {
                let x = elem(ring, a, b);
                let y = elem(ring, c, d);
                prop_assert_eq!(x.mul(&y).norm(), x.norm() * y.norm());
            }
        }

        #[test]
        fn conj_is_involutive_and_norm(a in -50i64..50, b in -50i64..50) {
            for ring in [RingTag::Gauss, RingTag::Eisen] {
                let x = elem(ring, a, b);
                prop_assert_eq!(x.conj().conj(), x);
                let n = x.mul(&x.conj());
                prop_assert_eq!(n, ImQuadInt::new(ring, x.norm(), 0));
            }
        }
    }
}
