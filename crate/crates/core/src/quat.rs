//! Exact arithmetic in four families of maximal orders of the quaternion
//! algebra B_{p,oo} = Q<i,j> with i^2 = alpha, j^2 = -p, ij = -ji = k.
//!
//! Each order is described by a basis of four elements given by exact
//! rational coordinates on (1, i, j, k). At construction the 4x4x4 table of
//! structure constants is derived and checked: products of basis elements
//! must re-expand integrally in the basis (closure) and the table must be
//! associative on all basis triples. After that, element arithmetic is pure
//! integer arithmetic on basis coordinates.

use crate::num::{is_prime, isqrt, legendre};
use crate::rings::{ImQuadInt, RingTag};
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

type Q = Ratio<i128>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OrderError {
    #[error("{0} is not prime")]
    NotPrime(i64),
    #[error("p = {p} fails the congruence {cond} required for {kind:?}")]
    Congruence { kind: OrderKind, p: i64, cond: &'static str },
    #[error("q = {q} fails the congruence q = 3 (mod 8)")]
    QCongruence { q: i64 },
    #[error("p = {p} must be a non-residue mod q = {q}")]
    ResidueCondition { p: i64, q: i64 },
    #[error("no solution of r^2 = -p (mod {modulus})")]
    NoSqrtMinusP { modulus: i64 },
    #[error("order kind {0:?} requires the auxiliary prime q")]
    MissingQ(OrderKind),
    #[error("elements belong to different orders")]
    MixedOrders,
    #[error("basis is not closed under multiplication")]
    NotClosed,
    #[error("multiplication table is not associative")]
    NotAssociative,
}

/// The four order families. `O1728` and `O0` are the endomorphism rings of
/// the curves with j = 1728 and j = 0; `OQ`/`OPrimeQ` cover the remaining
/// F_p-rational j-invariants, split by whether (1+pi)/2 is an endomorphism.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum OrderKind {
    O1728,
    O0,
    OQ,
    OPrimeQ,
}

/// Identifies an order instance so elements can be checked for compatibility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrderId {
    pub kind: OrderKind,
    pub p: i64,
    pub q: Option<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuatElem {
    pub order: OrderId,
    pub coords: [i64; 4],
}

#[derive(Debug, Clone)]
pub struct QuatOrder {
    pub id: OrderId,
    pub p: i64,
    pub q: Option<i64>,
    /// Square root of -p modulo q (OQ) or modulo 4q (OPrimeQ).
    pub r: Option<i64>,
    /// i^2 in the ambient algebra: -1, -3 or -q.
    pub alpha: i64,
    /// Basis rows as rational coordinates on (1, i, j, k).
    pub basis: [[Q; 4]; 4],
    /// Structure constants: basis[u] * basis[v] = sum_k table[u][v][k] basis[k].
    table: [[[i64; 4]; 4]; 4],
}

fn q0() -> Q {
    Q::zero()
}
fn q1() -> Q {
    Q::one()
}
fn qr(n: i128, d: i128) -> Q {
    Q::new(n, d)
}

/// Multiply two vectors given on (1, i, j, k) with i^2 = alpha, j^2 = beta.
fn algebra_mul(x: &[Q; 4], y: &[Q; 4], alpha: i64, beta: i64) -> [Q; 4] {
    let a = Q::from_integer(alpha as i128);
    let b = Q::from_integer(beta as i128);
    // 1, i, j, k components; k^2 = -alpha*beta, ik = alpha j, ki = -alpha j,
    // jk = -beta i, kj = beta i.
    let one = x[0] * y[0] + a * x[1] * y[1] + b * x[2] * y[2] - a * b * x[3] * y[3];
    let i = x[0] * y[1] + x[1] * y[0] - b * x[2] * y[3] + b * x[3] * y[2];
    let j = x[0] * y[2] + x[2] * y[0] + a * x[1] * y[3] - a * x[3] * y[1];
    let k = x[0] * y[3] + x[3] * y[0] + x[1] * y[2] - x[2] * y[1];
    [one, i, j, k]
}

fn mat_inverse(m: &[[Q; 4]; 4]) -> [[Q; 4]; 4] {
    // Gauss-Jordan over the rationals.
    let mut a = *m;
    let mut inv = [[q0(); 4]; 4];
    for (r, row) in inv.iter_mut().enumerate() {
        row[r] = q1();
    }
    for col in 0..4 {
        let pivot = (col..4)
            .find(|&r| !a[r][col].is_zero())
            .expect("order basis must be invertible");
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let pv = a[col][col];
        for c in 0..4 {
            a[col][c] /= pv;
            inv[col][c] /= pv;
        }
        for r in 0..4 {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col];
                for c in 0..4 {
                    let ac = a[col][c];
                    let ic = inv[col][c];
                    a[r][c] -= f * ac;
                    inv[r][c] -= f * ic;
                }
            }
        }
    }
    inv
}

impl QuatOrder {
    /// Build a maximal order of the requested kind. For `OQ`/`OPrimeQ` the
    /// square root of -p modulo q (resp. 4q) is computed here, smallest
    /// non-negative solution first, so orders are deterministic.
    pub fn make(kind: OrderKind, p: i64, q: Option<i64>) -> Result<QuatOrder, OrderError> {
        if !is_prime(p) || p <= 3 {
            return Err(OrderError::NotPrime(p));
        }
        let (alpha, q_used, r, basis) = match kind {
            OrderKind::O1728 => {
                if p % 4 != 3 {
                    return Err(OrderError::Congruence { kind, p, cond: "p = 3 (mod 4)" });
                }
                // 1, i, (1+j)/2, (i+k)/2
                let basis = [
                    [q1(), q0(), q0(), q0()],
                    [q0(), q1(), q0(), q0()],
                    [qr(1, 2), q0(), qr(1, 2), q0()],
                    [q0(), qr(1, 2), q0(), qr(1, 2)],
                ];
                (-1i64, None, None, basis)
            }
            OrderKind::O0 => {
                if p % 3 != 2 {
                    return Err(OrderError::Congruence { kind, p, cond: "p = 2 (mod 3)" });
                }
                // 1, (1+i)/2, (i+k)/3, (j+k)/2 with i^2 = -3
                let basis = [
                    [q1(), q0(), q0(), q0()],
                    [qr(1, 2), qr(1, 2), q0(), q0()],
                    [q0(), qr(1, 3), q0(), qr(1, 3)],
                    [q0(), q0(), qr(1, 2), qr(1, 2)],
                ];
                (-3i64, None, None, basis)
            }
            OrderKind::OQ | OrderKind::OPrimeQ => {
                let q = q.ok_or(OrderError::MissingQ(kind))?;
                if !is_prime(q) {
                    return Err(OrderError::NotPrime(q));
                }
                if q % 8 != 3 {
                    return Err(OrderError::QCongruence { q });
                }
                if legendre(p, q) != -1 {
                    return Err(OrderError::ResidueCondition { p, q });
                }
                if kind == OrderKind::OQ {
                    let r = (0..q)
                        .find(|r| (r * r + p) % q == 0)
                        .ok_or(OrderError::NoSqrtMinusP { modulus: q })?;
                    // 1, (1+i)/2, (j-k)/2, (r i - k)/q with i^2 = -q
                    let basis = [
                        [q1(), q0(), q0(), q0()],
                        [qr(1, 2), qr(1, 2), q0(), q0()],
                        [q0(), q0(), qr(1, 2), qr(-1, 2)],
                        [q0(), qr(r as i128, q as i128), q0(), qr(-1, q as i128)],
                    ];
                    (-q, Some(q), Some(r), basis)
                } else {
                    let m = 4 * q;
                    let r = (0..m)
                        .find(|r| (r * r + p) % m == 0)
                        .ok_or(OrderError::NoSqrtMinusP { modulus: m })?;
                    // 1, i, (1+j)/2, (r' i - k)/(2q)
                    let basis = [
                        [q1(), q0(), q0(), q0()],
                        [q0(), q1(), q0(), q0()],
                        [qr(1, 2), q0(), qr(1, 2), q0()],
                        [q0(), qr(r as i128, (2 * q) as i128), q0(), qr(-1, (2 * q) as i128)],
                    ];
                    (-q, Some(q), Some(r), basis)
                }
            }
        };

        let beta = -p;
        let inv = mat_inverse(&basis);
        let mut table = [[[0i64; 4]; 4]; 4];
        for u in 0..4 {
            for v in 0..4 {
                let prod = algebra_mul(&basis[u], &basis[v], alpha, beta);
                // coefficients of prod on the basis: prod * basis^{-1}
                for k in 0..4 {
                    let mut c = q0();
                    for t in 0..4 {
                        c += prod[t] * inv[t][k];
                    }
                    if !c.denom().is_one() {
                        return Err(OrderError::NotClosed);
                    }
                    table[u][v][k] = i64::try_from(*c.numer()).expect("structure constant overflow");
                }
            }
        }

        let order = QuatOrder {
            id: OrderId { kind, p, q: q_used },
            p,
            q: q_used,
            r,
            alpha,
            basis,
            table,
        };

        // associativity on all basis triples
        for u in 0..4 {
            for v in 0..4 {
                for w in 0..4 {
                    let left = order.mul(&order.basis_elem(u), &order.basis_elem(v));
                    let left = order.mul(&left, &order.basis_elem(w));
                    let right = order.mul(&order.basis_elem(v), &order.basis_elem(w));
                    let right = order.mul(&order.basis_elem(u), &right);
                    if left != right {
                        return Err(OrderError::NotAssociative);
                    }
                }
            }
        }
        Ok(order)
    }

    pub fn elem(&self, coords: [i64; 4]) -> QuatElem {
        QuatElem { order: self.id, coords }
    }

    pub fn zero(&self) -> QuatElem {
        self.elem([0, 0, 0, 0])
    }

    pub fn one(&self) -> QuatElem {
        self.elem([1, 0, 0, 0])
    }

    fn basis_elem(&self, idx: usize) -> QuatElem {
        let mut c = [0i64; 4];
        c[idx] = 1;
        self.elem(c)
    }

    fn check(&self, x: &QuatElem) {
        assert_eq!(x.order, self.id, "element does not belong to this order");
    }

    pub fn add(&self, x: &QuatElem, y: &QuatElem) -> QuatElem {
        self.check(x);
        self.check(y);
        self.elem([
            x.coords[0] + y.coords[0],
            x.coords[1] + y.coords[1],
            x.coords[2] + y.coords[2],
            x.coords[3] + y.coords[3],
        ])
    }

    pub fn neg(&self, x: &QuatElem) -> QuatElem {
        self.elem([-x.coords[0], -x.coords[1], -x.coords[2], -x.coords[3]])
    }

    pub fn scale(&self, n: i64, x: &QuatElem) -> QuatElem {
        self.elem([n * x.coords[0], n * x.coords[1], n * x.coords[2], n * x.coords[3]])
    }

    pub fn mul(&self, x: &QuatElem, y: &QuatElem) -> QuatElem {
        self.check(x);
        self.check(y);
        let mut out = [0i128; 4];
        for u in 0..4 {
            if x.coords[u] == 0 {
                continue;
            }
            for v in 0..4 {
                if y.coords[v] == 0 {
                    continue;
                }
                let f = x.coords[u] as i128 * y.coords[v] as i128;
                for k in 0..4 {
                    out[k] += f * self.table[u][v][k] as i128;
                }
            }
        }
        self.elem(out.map(|c| i64::try_from(c).expect("coordinate overflow")))
    }

    /// Checked multiply matching the public operation contract: rejects
    /// elements from different orders instead of panicking.
    pub fn multiply(&self, x: &QuatElem, y: &QuatElem) -> Result<QuatElem, OrderError> {
        if x.order != self.id || y.order != self.id {
            return Err(OrderError::MixedOrders);
        }
        Ok(self.mul(x, y))
    }

    /// Coordinates of x on the ambient (1, i, j, k) basis.
    pub fn ambient_coords(&self, x: &QuatElem) -> [Q; 4] {
        let mut out = [q0(); 4];
        for u in 0..4 {
            for t in 0..4 {
                out[t] += Q::from_integer(x.coords[u] as i128) * self.basis[u][t];
            }
        }
        out
    }

    /// Reduced trace: x + conj(x) = trd(x) * 1.
    pub fn reduced_trace(&self, x: &QuatElem) -> i64 {
        let amb = self.ambient_coords(x);
        let t = amb[0] * Q::from_integer(2);
        assert!(t.denom().is_one(), "trace of an order element is an integer");
        i64::try_from(*t.numer()).expect("trace overflow")
    }

    /// Quaternion conjugate, as an element of the same order.
    pub fn conjugate(&self, x: &QuatElem) -> QuatElem {
        let t = self.reduced_trace(x);
        let mut c = [-x.coords[0], -x.coords[1], -x.coords[2], -x.coords[3]];
        c[0] += t; // conj(x) = trd(x) - x, and 1 is the first basis vector
        self.elem(c)
    }

    /// Reduced norm computed through the multiplication table: x * conj(x).
    pub fn reduced_norm(&self, x: &QuatElem) -> i64 {
        let prod = self.mul(x, &self.conjugate(x));
        assert_eq!(prod.coords[1..], [0, 0, 0], "x * conj(x) must be scalar");
        prod.coords[0]
    }

    /// Reduced norm from the closed-form quadratic expression of the order:
    /// an independent route used to cross-check `reduced_norm`.
    pub fn norm_closed_form(&self, x: &QuatElem) -> i64 {
        let [a, b, c, d] = x.coords.map(|v| v as i128);
        let p = self.p as i128;
        let (num, den): (i128, i128) = match self.id.kind {
            OrderKind::O1728 => {
                // ((2x+z)^2 + (2y+w)^2 + p(z^2+w^2)) / 4
                let t1 = (2 * a + c) * (2 * a + c);
                let t2 = (2 * b + d) * (2 * b + d);
                (t1 + t2 + p * (c * c + d * d), 4)
            }
            OrderKind::O0 => {
                // (3(2x+y)^2 + (3y+2z)^2 + p((2z+3w)^2 + 3w^2)) / 12
                let t1 = 3 * (2 * a + b) * (2 * a + b);
                let t2 = (3 * b + 2 * c) * (3 * b + 2 * c);
                let t3 = p * ((2 * c + 3 * d) * (2 * c + 3 * d) + 3 * d * d);
                (t1 + t2 + t3, 12)
            }
            OrderKind::OQ => {
                let q = self.q.unwrap() as i128;
                let r = self.r.unwrap() as i128;
                // (q(2x+y)^2 + (qy+2rw)^2 + pqz^2 + p(qz+2w)^2) / (4q)
                let t1 = q * (2 * a + b) * (2 * a + b);
                let t2 = (q * b + 2 * r * d) * (q * b + 2 * r * d);
                let t3 = p * q * c * c;
                let t4 = p * (q * c + 2 * d) * (q * c + 2 * d);
                (t1 + t2 + t3 + t4, 4 * q)
            }
            OrderKind::OPrimeQ => {
                let q = self.q.unwrap() as i128;
                let r = self.r.unwrap() as i128;
                // (q(2x+z)^2 + (2qy+r'w)^2 + pqz^2 + pw^2) / (4q)
                let t1 = q * (2 * a + c) * (2 * a + c);
                let t2 = (2 * q * b + r * d) * (2 * q * b + r * d);
                let t3 = p * q * c * c + p * d * d;
                (t1 + t2 + t3, 4 * q)
            }
        };
        assert_eq!(num % den, 0, "closed-form norm of an order element is integral");
        i64::try_from(num / den).expect("norm overflow")
    }

    /// All elements of reduced norm exactly n, enumerated from the bounded
    /// coefficient box of the completed-square norm form. Empty is valid.
    pub fn enumerate_by_norm(&self, n: i64) -> Vec<QuatElem> {
        assert!(n >= 1);
        let mut out = Vec::new();
        let p = self.p;
        match self.id.kind {
            OrderKind::O1728 => {
                // 4 Nrd = (2x+z)^2 + (2y+w)^2 + p(z^2+w^2)
                let zb = isqrt(4 * n / p);
                for z in -zb..=zb {
                    for w in -zb..=zb {
                        let rem = 4 * n - p * (z * z + w * w);
                        if rem < 0 {
                            continue;
                        }
                        let s = isqrt(rem);
                        for u in -s..=s {
                            // u = 2x + z
                            if (u - z).rem_euclid(2) != 0 {
                                continue;
                            }
                            let rem2 = rem - u * u;
                            let v = isqrt(rem2);
                            if v * v != rem2 || (v - w).rem_euclid(2) != 0 {
                                continue;
                            }
                            let x = (u - z) / 2;
                            for vv in if v == 0 { vec![0] } else { vec![v, -v] } {
                                let y = (vv - w) / 2;
                                out.push(self.elem([x, y, z, w]));
                            }
                        }
                    }
                }
            }
            OrderKind::O0 => {
                // 12 Nrd = 3(2x+y)^2 + (3y+2z)^2 + p((2z+3w)^2 + 3w^2)
                let wb = isqrt(4 * n / p);
                for w in -wb..=wb {
                    let zb = isqrt(12 * n / p);
                    for z in -zb - 2..=zb + 2 {
                        let rem = 12 * n - p * ((2 * z + 3 * w) * (2 * z + 3 * w) + 3 * w * w);
                        if rem < 0 {
                            continue;
                        }
                        let s = isqrt(rem);
                        for u in -s..=s {
                            // u = 3y + 2z
                            if (u - 2 * z).rem_euclid(3) != 0 {
                                continue;
                            }
                            let y = (u - 2 * z) / 3;
                            let rem2 = rem - u * u;
                            if rem2 % 3 != 0 {
                                continue;
                            }
                            let t = rem2 / 3;
                            let v = isqrt(t);
                            // v = |2x + y|
                            if v * v != t || (v - y).rem_euclid(2) != 0 {
                                continue;
                            }
                            for vv in if v == 0 { vec![0] } else { vec![v, -v] } {
                                let x = (vv - y) / 2;
                                out.push(self.elem([x, y, z, w]));
                            }
                        }
                    }
                }
            }
            OrderKind::OQ => {
                let q = self.q.unwrap();
                let r = self.r.unwrap();
                // 4q Nrd = q(2x+y)^2 + (qy+2rw)^2 + pqz^2 + p(qz+2w)^2
                let zb = isqrt(4 * n / p);
                for z in -zb..=zb {
                    let wb = isqrt(4 * q * n / p) + q;
                    for w in -wb..=wb {
                        let rem =
                            4 * q * n - p * q * z * z - p * (q * z + 2 * w) * (q * z + 2 * w);
                        if rem < 0 {
                            continue;
                        }
                        let s = isqrt(rem);
                        for u in -s..=s {
                            // u = qy + 2rw
                            if (u - 2 * r * w).rem_euclid(q) != 0 {
                                continue;
                            }
                            let y = (u - 2 * r * w) / q;
                            let rem2 = rem - u * u;
                            if rem2 % q != 0 {
                                continue;
                            }
                            let t = rem2 / q;
                            let v = isqrt(t);
                            if v * v != t || (v - y).rem_euclid(2) != 0 {
                                continue;
                            }
                            for vv in if v == 0 { vec![0] } else { vec![v, -v] } {
                                let x = (vv - y) / 2;
                                out.push(self.elem([x, y, z, w]));
                            }
                        }
                    }
                }
            }
            OrderKind::OPrimeQ => {
                let q = self.q.unwrap();
                let r = self.r.unwrap();
                // 4q Nrd = q(2x+z)^2 + (2qy+r'w)^2 + pqz^2 + pw^2
                let zb = isqrt(4 * n / p);
                let wb = isqrt(4 * q * n / p);
                for z in -zb..=zb {
                    for w in -wb..=wb {
                        let rem = 4 * q * n - p * q * z * z - p * w * w;
                        if rem < 0 {
                            continue;
                        }
                        let s = isqrt(rem);
                        for u in -s..=s {
                            // u = 2qy + r'w
                            if (u - r * w).rem_euclid(2 * q) != 0 {
                                continue;
                            }
                            let y = (u - r * w) / (2 * q);
                            let rem2 = rem - u * u;
                            if rem2 % q != 0 {
                                continue;
                            }
                            let t = rem2 / q;
                            let v = isqrt(t);
                            if v * v != t || (v - z).rem_euclid(2) != 0 {
                                continue;
                            }
                            for vv in if v == 0 { vec![0] } else { vec![v, -v] } {
                                let x = (vv - z) / 2;
                                out.push(self.elem([x, y, z, w]));
                            }
                        }
                    }
                }
            }
        }
        out.retain(|e| self.reduced_norm(e) == n);
        out.sort_by_key(|e| e.coords);
        out.dedup();
        out
    }

    /// The unit group of the order (elements of reduced norm 1).
    pub fn units(&self) -> Vec<QuatElem> {
        self.enumerate_by_norm(1)
    }

    /// The imaginary quadratic subring the order visibly contains: Z[i] for
    /// O1728 and O'(q) (spanned by 1 and the i-type generator), Z[w] for O0
    /// and O(q). Only O1728/O0 are used this way here.
    pub fn subring_tag(&self) -> Option<RingTag> {
        match self.id.kind {
            OrderKind::O1728 => Some(RingTag::Gauss),
            OrderKind::O0 => Some(RingTag::Eisen),
            _ => None,
        }
    }

    /// View an element as a subring element when its last two coordinates
    /// vanish. For O1728 the first two basis vectors are 1, i; for O0 they
    /// are 1, (1+i)/2.
    pub fn as_subring(&self, x: &QuatElem) -> Option<ImQuadInt> {
        let tag = self.subring_tag()?;
        if x.coords[2] == 0 && x.coords[3] == 0 {
            Some(ImQuadInt::new(tag, x.coords[0], x.coords[1]))
        } else {
            None
        }
    }

    /// Embed a subring element into the order.
    pub fn from_subring(&self, z: &ImQuadInt) -> QuatElem {
        assert_eq!(
            Some(z.ring),
            self.subring_tag(),
            "subring tag does not match order"
        );
        self.elem([z.a, z.b, 0, 0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn o1728(p: i64) -> QuatOrder {
        QuatOrder::make(OrderKind::O1728, p, None).unwrap()
    }

    fn o0(p: i64) -> QuatOrder {
        QuatOrder::make(OrderKind::O0, p, None).unwrap()
    }

    #[test]
    fn construction_and_congruences() {
        assert!(QuatOrder::make(OrderKind::O1728, 23, None).is_ok());
        assert!(QuatOrder::make(OrderKind::O0, 11, None).is_ok());
        assert!(matches!(
            QuatOrder::make(OrderKind::O1728, 13, None),
            Err(OrderError::Congruence { .. })
        ));
        assert!(matches!(
            QuatOrder::make(OrderKind::O0, 13, None),
            Err(OrderError::Congruence { .. })
        ));
        assert!(matches!(
            QuatOrder::make(OrderKind::OQ, 103, None),
            Err(OrderError::MissingQ(_))
        ));
        // q = 19 = 3 (mod 8) and (103/19) = -1
        let oq = QuatOrder::make(OrderKind::OQ, 103, Some(19)).unwrap();
        let r = oq.r.unwrap();
        assert_eq!((r * r + 103) % 19, 0);
        let opq = QuatOrder::make(OrderKind::OPrimeQ, 103, Some(19)).unwrap();
        let r = opq.r.unwrap();
        assert_eq!((r * r + 103) % 76, 0);
        // q = 5 fails q = 3 (mod 8)
        assert!(matches!(
            QuatOrder::make(OrderKind::OQ, 103, Some(5)),
            Err(OrderError::QCongruence { .. })
        ));
        // (23/11) = 1, so q = 11 is rejected for p = 23
        assert!(matches!(
            QuatOrder::make(OrderKind::OQ, 23, Some(11)),
            Err(OrderError::ResidueCondition { .. })
        ));
    }

    #[test]
    fn basic_relations_o1728() {
        let o = o1728(23);
        let i = o.elem([0, 1, 0, 0]);
        // j = 2*(1+j)/2 - 1, k = 2*(i+k)/2 - i
        let j = o.add(&o.scale(2, &o.elem([0, 0, 1, 0])), &o.elem([-1, 0, 0, 0]));
        let k = o.add(&o.scale(2, &o.elem([0, 0, 0, 1])), &o.neg(&i));
        assert_eq!(o.mul(&i, &i), o.elem([-1, 0, 0, 0]));
        assert_eq!(o.mul(&j, &j), o.elem([-23, 0, 0, 0]));
        assert_eq!(o.mul(&i, &j), k);
        assert_eq!(o.mul(&j, &i), o.neg(&k));
        assert_eq!(o.reduced_norm(&i), 1);
        assert_eq!(o.reduced_trace(&i), 0);
        // x * 1 = x
        let x = o.elem([3, -2, 1, 4]);
        assert_eq!(o.mul(&x, &o.one()), x);
    }

    #[test]
    fn half_unit_norms() {
        let o = o1728(23);
        // (1+j)/2 has Nrd (1+p)/4 = 6 and ((1+j)/2)^2 has Nrd 36
        let h = o.elem([0, 0, 1, 0]);
        assert_eq!(o.reduced_norm(&h), 6);
        let h2 = o.mul(&h, &h);
        assert_eq!(o.reduced_norm(&h2), 36);

        let o = o0(11);
        let w = o.elem([0, 1, 0, 0]);
        assert_eq!(o.reduced_norm(&w), 1);
        assert_eq!(o.reduced_trace(&w), 1);
    }

    #[test]
    fn mixed_orders_rejected() {
        let oa = o1728(23);
        let ob = o1728(31);
        let x = oa.elem([1, 0, 0, 0]);
        let y = ob.elem([1, 0, 0, 0]);
        assert_eq!(oa.multiply(&x, &y), Err(OrderError::MixedOrders));
    }

    fn random_elem(o: &QuatOrder, rng: &mut StdRng) -> QuatElem {
        o.elem([
            rng.gen_range(-6..=6),
            rng.gen_range(-6..=6),
            rng.gen_range(-6..=6),
            rng.gen_range(-6..=6),
        ])
    }

    #[test]
    fn norm_properties_all_kinds() {
        let orders = vec![
            o1728(23),
            o0(11),
            QuatOrder::make(OrderKind::OQ, 103, Some(19)).unwrap(),
            QuatOrder::make(OrderKind::OPrimeQ, 103, Some(19)).unwrap(),
        ];
        let mut rng = StdRng::seed_from_u64(7);
        for o in &orders {
            for _ in 0..1000 {
                let x = random_elem(o, &mut rng);
                let y = random_elem(o, &mut rng);
                // multiplicativity and closed form vs multiplication table
                assert_eq!(
                    o.reduced_norm(&o.mul(&x, &y)),
                    o.reduced_norm(&x) * o.reduced_norm(&y)
                );
                assert_eq!(o.reduced_norm(&x), o.norm_closed_form(&x));
                // anti-involution
                assert_eq!(
                    o.conjugate(&o.mul(&x, &y)),
                    o.mul(&o.conjugate(&y), &o.conjugate(&x))
                );
                assert_eq!(o.conjugate(&o.conjugate(&x)), x);
                // x * conj(x) = Nrd(x), x + conj(x) = Trd(x)
                assert_eq!(
                    o.add(&x, &o.conjugate(&x)),
                    o.scale(o.reduced_trace(&x), &o.one())
                );
            }
        }
    }

    #[test]
    fn unit_counts() {
        // Unit counts fixed by enumeration: 4 for O1728, 6 for O0,
        // 2 for the generic orders.
        assert_eq!(o1728(23).units().len(), 4);
        assert_eq!(o0(11).units().len(), 6);
        assert_eq!(
            QuatOrder::make(OrderKind::OQ, 103, Some(19)).unwrap().units().len(),
            2
        );
        assert_eq!(
            QuatOrder::make(OrderKind::OPrimeQ, 103, Some(19)).unwrap().units().len(),
            2
        );
    }

    #[test]
    fn units_form_a_group() {
        for o in [o1728(23), o0(11)] {
            let units = o.units();
            for u in &units {
                for v in &units {
                    let prod = o.mul(u, v);
                    assert!(units.contains(&prod));
                }
                // inverse = conjugate for norm-1 elements
                assert!(units.contains(&o.conjugate(u)));
            }
            assert!(units.contains(&o.one()));
        }
    }

    #[test]
    fn enumerate_norm_5_at_p_103() {
        let o = o1728(103);
        let elems = o.enumerate_by_norm(5);
        // all Gaussian: z = w = 0 forced by p > 4n
        assert_eq!(elems.len(), 8);
        for e in &elems {
            assert!(o.as_subring(&e).is_some());
        }
    }

    #[test]
    fn enumeration_reduces_to_subring_for_large_p() {
        let o = o1728(103);
        for n in 1..=25 {
            for e in o.enumerate_by_norm(n) {
                if 103 > 4 * n {
                    assert_eq!(e.coords[2], 0);
                    assert_eq!(e.coords[3], 0);
                }
            }
        }
        let o = o0(101);
        for n in 1..=33 {
            for e in o.enumerate_by_norm(n) {
                if 101 > 3 * n {
                    assert_eq!(e.coords[2], 0);
                    assert_eq!(e.coords[3], 0);
                }
            }
        }
    }

    #[test]
    fn enumeration_matches_subring_norm_counts() {
        // For p > 4n (resp. 3n) the count equals the number of subring
        // elements of that norm.
        let o = o1728(103);
        for n in 1..=25 {
            let direct = o.enumerate_by_norm(n).len();
            let expect = crate::rings::solve_norm_equation(RingTag::Gauss, n).all.len();
            assert_eq!(direct, expect, "O1728 n = {n}");
        }
        let o = o0(101);
        for n in 1..=33 {
            let direct = o.enumerate_by_norm(n).len();
            let expect = crate::rings::solve_norm_equation(RingTag::Eisen, n).all.len();
            assert_eq!(direct, expect, "O0 n = {n}");
        }
    }

    #[test]
    fn enumeration_brute_force_cross_check() {
        // Independent oracle: scan a crude coordinate box and compare.
        let o = o1728(23);
        for n in 1..=8 {
            let fast: std::collections::HashSet<_> =
                o.enumerate_by_norm(n).into_iter().map(|e| e.coords).collect();
            let mut slow = std::collections::HashSet::new();
            for a in -8i64..=8 {
                for b in -8i64..=8 {
                    for c in -8i64..=8 {
                        for d in -8i64..=8 {
                            let e = o.elem([a, b, c, d]);
                            if o.reduced_norm(&e) == n {
                                slow.insert(e.coords);
                            }
                        }
                    }
                }
            }
            assert_eq!(fast, slow, "n = {n}");
        }
    }
}
