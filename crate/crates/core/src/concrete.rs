//! Ground-truth backend at tiny primes: explicit supersingular curves over
//! F_{p^2}, torsion bases, the Weil pairing by Miller's algorithm, explicit
//! automorphisms, and Velu isogenies. Everything here is independent curve
//! arithmetic used to cross-validate the symbolic classifier.
//!
//! All checks are restricted to l | p+1, so the full l-torsion is rational
//! over F_{p^2} and no extension towers are needed.

use crate::kernels::{act, classify_one, eigen_setup, find_loops, KernelDesc, VertexCase};
use crate::num::{is_prime, normalize};
use crate::quat::QuatOrder;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CurveError {
    #[error("{0} is not prime")]
    NotPrime(i64),
    #[error("p = {p} fails the congruence {cond}")]
    BadPrime { p: i64, cond: &'static str },
    #[error("l = {ell} does not divide p + 1 = {m}")]
    EllNotDividing { ell: u64, m: u64 },
    #[error("p = {0} exceeds the desk-scale bound 200")]
    TooLarge(i64),
    #[error("kernel generator must have exact order l and be rational")]
    BadKernel,
    #[error(transparent)]
    Kernel(#[from] crate::kernels::KernelError),
    #[error(transparent)]
    Hermitian(#[from] crate::hermitian::HermitianError),
}

/// The quadratic field F_{p^2} = F_p(s), s^2 = smallest non-residue of p.
#[derive(Debug, Clone)]
pub struct Fp2 {
    pub p: u64,
    pub nonresidue: u64,
}

/// An element a + b s.
pub type Fp2El = (u64, u64);

impl Fp2 {
    pub fn new(p: u64) -> Fp2 {
        let nonresidue = (2..p)
            .find(|&n| crate::num::legendre(n as i64, p as i64) == -1)
            .expect("odd primes have non-residues");
        Fp2 { p, nonresidue }
    }

    pub fn zero(&self) -> Fp2El {
        (0, 0)
    }

    pub fn one(&self) -> Fp2El {
        (1, 0)
    }

    pub fn from_int(&self, n: i64) -> Fp2El {
        (normalize(n, self.p), 0)
    }

    pub fn add(&self, x: Fp2El, y: Fp2El) -> Fp2El {
        ((x.0 + y.0) % self.p, (x.1 + y.1) % self.p)
    }

    pub fn sub(&self, x: Fp2El, y: Fp2El) -> Fp2El {
        ((x.0 + self.p - y.0) % self.p, (x.1 + self.p - y.1) % self.p)
    }

    pub fn neg(&self, x: Fp2El) -> Fp2El {
        ((self.p - x.0) % self.p, (self.p - x.1) % self.p)
    }

    pub fn mul(&self, x: Fp2El, y: Fp2El) -> Fp2El {
        let p = self.p;
        let a = (x.0 * y.0 + x.1 * y.1 % p * self.nonresidue) % p;
        let b = (x.0 * y.1 + x.1 * y.0) % p;
        (a, b)
    }

    pub fn square(&self, x: Fp2El) -> Fp2El {
        self.mul(x, x)
    }

    pub fn inv(&self, x: Fp2El) -> Fp2El {
        // (a + bs)^-1 = (a - bs) / (a^2 - n b^2)
        assert!(x != (0, 0), "inversion of zero");
        let p = self.p;
        let norm = (x.0 * x.0 + p * p - x.1 * x.1 % p * self.nonresidue % p) % p;
        let ninv = crate::num::inv_mod(norm, p);
        (x.0 * ninv % p, (p - x.1) % p * ninv % p)
    }

    pub fn div(&self, x: Fp2El, y: Fp2El) -> Fp2El {
        self.mul(x, self.inv(y))
    }

    pub fn pow(&self, x: Fp2El, mut e: u64) -> Fp2El {
        let mut b = x;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.square(b);
            e >>= 1;
        }
        acc
    }

    /// Frobenius x -> x^p is conjugation on the chosen basis.
    pub fn frobenius(&self, x: Fp2El) -> Fp2El {
        (x.0, (self.p - x.1) % self.p)
    }

    pub fn is_square(&self, x: Fp2El) -> bool {
        x == (0, 0) || self.pow(x, (self.p * self.p - 1) / 2) == self.one()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pt {
    Inf,
    Aff(Fp2El, Fp2El),
}

/// Short Weierstrass curve y^2 = x^3 + A x + B over F_{p^2}.
#[derive(Debug, Clone)]
pub struct Curve {
    pub field: Fp2,
    pub a: Fp2El,
    pub b: Fp2El,
}

impl Curve {
    pub fn on_curve(&self, pt: &Pt) -> bool {
        match *pt {
            Pt::Inf => true,
            Pt::Aff(x, y) => {
                let f = &self.field;
                let rhs = f.add(f.add(f.mul(f.square(x), x), f.mul(self.a, x)), self.b);
                f.square(y) == rhs
            }
        }
    }

    pub fn neg(&self, pt: &Pt) -> Pt {
        match *pt {
            Pt::Inf => Pt::Inf,
            Pt::Aff(x, y) => Pt::Aff(x, self.field.neg(y)),
        }
    }

    pub fn add(&self, p1: &Pt, p2: &Pt) -> Pt {
        let f = &self.field;
        match (*p1, *p2) {
            (Pt::Inf, q) => q,
            (q, Pt::Inf) => q,
            (Pt::Aff(x1, y1), Pt::Aff(x2, y2)) => {
                if x1 == x2 && y1 == f.neg(y2) {
                    return Pt::Inf;
                }
                let m = if x1 == x2 {
                    // tangent
                    let num = f.add(f.mul(f.from_int(3), f.square(x1)), self.a);
                    f.div(num, f.mul(f.from_int(2), y1))
                } else {
                    f.div(f.sub(y2, y1), f.sub(x2, x1))
                };
                let x3 = f.sub(f.sub(f.square(m), x1), x2);
                let y3 = f.sub(f.mul(m, f.sub(x1, x3)), y1);
                Pt::Aff(x3, y3)
            }
        }
    }

    pub fn mul(&self, n: u64, pt: &Pt) -> Pt {
        let mut acc = Pt::Inf;
        let mut base = *pt;
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.add(&acc, &base);
            }
            base = self.add(&base, &base);
            n >>= 1;
        }
        acc
    }

    pub fn j_invariant(&self) -> Fp2El {
        let f = &self.field;
        let a3 = f.mul(f.mul(self.a, self.a), self.a);
        let num = f.mul(f.from_int(1728), f.mul(f.from_int(4), a3));
        let den = f.add(
            f.mul(f.from_int(4), a3),
            f.mul(f.from_int(27), f.square(self.b)),
        );
        f.div(num, den)
    }

    /// Exhaustive point count over F_{p^2}.
    pub fn count_points(&self) -> u64 {
        let f = &self.field;
        let p = f.p;
        let mut count = 1u64; // infinity
        for xa in 0..p {
            for xb in 0..p {
                let x = (xa, xb);
                let rhs = f.add(f.add(f.mul(f.square(x), x), f.mul(self.a, x)), self.b);
                if rhs == (0, 0) {
                    count += 1;
                } else if f.is_square(rhs) {
                    count += 2;
                }
            }
        }
        count
    }
}

/// An automorphism of one of the two special curves as an explicit map.
#[derive(Debug, Clone)]
pub enum AutoMap {
    /// (x, y) -> (-x, u y) with u^2 = -1; the order-4 automorphism of E1728.
    Quartic { u: Fp2El },
    /// (x, y) -> (z x, -y) with z a primitive cube root of unity: the
    /// order-6 automorphism of E0 satisfying s^2 = s - 1.
    Sextic { zeta: Fp2El },
}

/// A special curve with its extra automorphism.
#[derive(Debug, Clone)]
pub struct CurveData {
    pub curve: Curve,
    pub auto: AutoMap,
}

impl CurveData {
    /// Apply the extra automorphism.
    pub fn sigma(&self, pt: &Pt) -> Pt {
        let f = &self.curve.field;
        match *pt {
            Pt::Inf => Pt::Inf,
            Pt::Aff(x, y) => match &self.auto {
                AutoMap::Quartic { u } => Pt::Aff(f.neg(x), f.mul(*u, y)),
                AutoMap::Sextic { zeta } => Pt::Aff(f.mul(*zeta, x), f.neg(y)),
            },
        }
    }

    /// Apply a subring element a + b sigma as an endomorphism on a torsion
    /// point, with scalars reduced mod l.
    pub fn subring_apply(&self, z: &crate::rings::ImQuadInt, pt: &Pt, ell: u64) -> Pt {
        let a = normalize(z.a, ell);
        let b = normalize(z.b, ell);
        let pa = self.curve.mul(a, pt);
        let pb = self.curve.mul(b, &self.sigma(pt));
        self.curve.add(&pa, &pb)
    }
}

/// Tag for the two special curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SpecialCurve {
    E1728,
    E0,
}

/// Build y^2 = x^3 + x (j = 1728) or y^2 = x^3 + 1 (j = 0) together with
/// its extra automorphism; rejects primes of the wrong congruence class.
pub fn build_curve(tag: SpecialCurve, p: i64) -> Result<CurveData, CurveError> {
    if !is_prime(p) || p <= 3 {
        return Err(CurveError::NotPrime(p));
    }
    if p > 200 {
        return Err(CurveError::TooLarge(p));
    }
    let field = Fp2::new(p as u64);
    match tag {
        SpecialCurve::E1728 => {
            if p % 4 != 3 {
                return Err(CurveError::BadPrime { p, cond: "p = 3 (mod 4)" });
            }
            let u = sqrt_of_minus_one(&field);
            let curve = Curve { field, a: (1, 0), b: (0, 0) };
            Ok(CurveData { curve, auto: AutoMap::Quartic { u } })
        }
        SpecialCurve::E0 => {
            if p % 3 != 2 {
                return Err(CurveError::BadPrime { p, cond: "p = 2 (mod 3)" });
            }
            let zeta = primitive_cube_root(&field);
            let curve = Curve { field, a: (0, 0), b: (1, 0) };
            Ok(CurveData { curve, auto: AutoMap::Sextic { zeta } })
        }
    }
}

fn sqrt_of_minus_one(f: &Fp2) -> Fp2El {
    let m1 = f.from_int(-1);
    for a in 0..f.p {
        for b in 0..f.p {
            if f.square((a, b)) == m1 {
                return (a, b);
            }
        }
    }
    unreachable!("-1 is a square in F_p^2");
}

fn primitive_cube_root(f: &Fp2) -> Fp2El {
    for a in 0..f.p {
        for b in 0..f.p {
            let z = (a, b);
            if z != f.one() && f.mul(f.square(z), z) == f.one() {
                return z;
            }
        }
    }
    unreachable!("F_p^2 contains the cube roots of unity for p = 2 (mod 3)");
}

/// Deterministic point sampler (seeded by the curve parameters).
struct PointSampler<'a> {
    cd: &'a CurveData,
    rng: StdRng,
}

impl<'a> PointSampler<'a> {
    fn new(cd: &'a CurveData, seed: u64) -> Self {
        PointSampler { cd, rng: StdRng::seed_from_u64(seed) }
    }

    fn next_point(&mut self) -> Pt {
        let f = &self.cd.curve.field;
        loop {
            let x = (self.rng.gen_range(0..f.p), self.rng.gen_range(0..f.p));
            let rhs = f.add(
                f.add(f.mul(f.square(x), x), f.mul(self.cd.curve.a, x)),
                self.cd.curve.b,
            );
            if let Some(y) = sqrt_in_fp2(f, rhs) {
                let y = if self.rng.gen_bool(0.5) { y } else { f.neg(y) };
                return Pt::Aff(x, y);
            }
        }
    }
}

/// Square root in F_{p^2} by scan; fields here have at most 200^2 elements.
fn sqrt_in_fp2(f: &Fp2, v: Fp2El) -> Option<Fp2El> {
    if v == (0, 0) {
        return Some((0, 0));
    }
    if !f.is_square(v) {
        return None;
    }
    for a in 0..f.p {
        for b in 0..f.p {
            if f.square((a, b)) == v {
                return Some((a, b));
            }
        }
    }
    None
}

/// A basis (P, Q) of E[l] with a primitive Weil pairing value.
pub fn torsion_basis(cd: &CurveData, ell: u64) -> Result<(Pt, Pt), CurveError> {
    let p = cd.curve.field.p;
    let m = p + 1;
    if m % ell != 0 {
        return Err(CurveError::EllNotDividing { ell, m });
    }
    let cof = m / ell;
    let mut sampler = PointSampler::new(cd, 0x1507 + p * 31 + ell);
    let pbase = loop {
        let r = sampler.next_point();
        let c = cd.curve.mul(cof, &r);
        if c != Pt::Inf {
            break c;
        }
    };
    let qbase = loop {
        let r = sampler.next_point();
        let c = cd.curve.mul(cof, &r);
        if c == Pt::Inf {
            continue;
        }
        let e = weil_pairing(cd, &pbase, &c, ell)?;
        if e != cd.curve.field.one() {
            break c;
        }
    };
    debug_assert!(cd.curve.mul(ell, &pbase) == Pt::Inf);
    debug_assert!(cd.curve.mul(ell, &qbase) == Pt::Inf);
    Ok((pbase, qbase))
}

/// Value of the line through t and u (tangent when t = u) at x, or None at
/// a zero/pole degeneracy.
fn line_value(curve: &Curve, t: &Pt, u: &Pt, x: &Pt) -> Option<Fp2El> {
    let f = &curve.field;
    let Pt::Aff(xx, xy) = *x else { return None };
    match (*t, *u) {
        (Pt::Inf, _) | (_, Pt::Inf) => Some(f.one()),
        (Pt::Aff(x1, y1), Pt::Aff(x2, y2)) => {
            let v = if x1 == x2 && y1 == f.neg(y2) {
                // vertical line
                f.sub(xx, x1)
            } else {
                let m = if (x1, y1) == (x2, y2) {
                    if y1 == (0, 0) {
                        return Some(f.sub(xx, x1));
                    }
                    f.div(
                        f.add(f.mul(f.from_int(3), f.square(x1)), curve.a),
                        f.mul(f.from_int(2), y1),
                    )
                } else {
                    f.div(f.sub(y2, y1), f.sub(x2, x1))
                };
                f.sub(f.sub(xy, y1), f.mul(m, f.sub(xx, x1)))
            };
            if v == (0, 0) {
                None
            } else {
                Some(v)
            }
        }
    }
}

/// Miller evaluation f_{n,P}(X1) / f_{n,P}(X2); None when an intermediate
/// line vanishes at an evaluation point.
fn miller_ratio(curve: &Curve, p: &Pt, n: u64, x1: &Pt, x2: &Pt) -> Option<Fp2El> {
    let f = &curve.field;
    let mut acc = f.one();
    let mut t = *p;
    let bits = (0..64).rev().skip_while(|&i| n >> i & 1 == 0).skip(1);
    for i in bits {
        // doubling step: f <- f^2 * l_{T,T}(X) / v_{2T}(X)
        let l1 = line_value(curve, &t, &t, x1)?;
        let l2 = line_value(curve, &t, &t, x2)?;
        let t2 = curve.add(&t, &t);
        let v1 = vertical_value(curve, &t2, x1)?;
        let v2 = vertical_value(curve, &t2, x2)?;
        acc = f.mul(f.square(acc), f.div(f.mul(l1, f.inv(l2)), f.mul(v1, f.inv(v2))));
        t = t2;
        if n >> i & 1 == 1 {
            let l1 = line_value(curve, &t, p, x1)?;
            let l2 = line_value(curve, &t, p, x2)?;
            let tp = curve.add(&t, p);
            let v1 = vertical_value(curve, &tp, x1)?;
            let v2 = vertical_value(curve, &tp, x2)?;
            acc = f.mul(acc, f.div(f.mul(l1, f.inv(l2)), f.mul(v1, f.inv(v2))));
            t = tp;
        }
    }
    Some(acc)
}

fn vertical_value(curve: &Curve, t: &Pt, x: &Pt) -> Option<Fp2El> {
    let f = &curve.field;
    match (*t, *x) {
        (Pt::Inf, _) => Some(f.one()),
        (Pt::Aff(xt, _), Pt::Aff(xx, _)) => {
            let v = f.sub(xx, xt);
            if v == (0, 0) {
                None
            } else {
                Some(v)
            }
        }
        _ => None,
    }
}

/// Weil pairing e_l(P, Q) in mu_l, by Miller's algorithm on divisors
/// shifted by a common auxiliary point:
/// e = f_P((Q+S) - (S)) / f_Q((P-S) - (-S)).
pub fn weil_pairing(cd: &CurveData, p: &Pt, q: &Pt, ell: u64) -> Result<Fp2El, CurveError> {
    let curve = &cd.curve;
    let f = &curve.field;
    if curve.mul(ell, p) != Pt::Inf || curve.mul(ell, q) != Pt::Inf {
        return Err(CurveError::BadKernel);
    }
    if *p == Pt::Inf || *q == Pt::Inf {
        return Ok(f.one());
    }
    let mut sampler = PointSampler::new(cd, 0xe11 + f.p);
    for _ in 0..64 {
        let s = sampler.next_point();
        let qs = curve.add(q, &s);
        let ps = curve.add(p, &curve.neg(&s));
        let Some(a) = miller_ratio(curve, p, ell, &qs, &s) else { continue };
        let Some(b) = miller_ratio(curve, q, ell, &ps, &curve.neg(&s)) else { continue };
        let e = f.div(a, b);
        debug_assert_eq!(f.pow(e, ell), f.one(), "pairing lands in mu_l");
        return Ok(e);
    }
    unreachable!("a non-degenerate shift exists");
}

/// Matrix of the extra automorphism on a torsion basis, with its
/// eigenvalue data mod l.
#[derive(Debug, Clone, Serialize)]
pub enum EigenData {
    /// two distinct eigenvalues
    Split { t: u64, t_other: u64 },
    /// a double eigenvalue (ramified case)
    Degenerate { t: u64 },
    /// irreducible characteristic polynomial
    None,
}

pub fn endo_eigenlines(cd: &CurveData, ell: u64) -> Result<EigenData, CurveError> {
    let (p, q) = torsion_basis(cd, ell)?;
    let table = dlog_table(cd, &p, &q, ell);
    let sp = cd.sigma(&p);
    let sq = cd.sigma(&q);
    let (a, c) = table[&sp];
    let (b, d) = table[&sq];
    // char poly X^2 - (a+d) X + (ad - bc)
    let tr = (a + d) % ell;
    let det = ((a * d) % ell + ell * ell - (b * c) % ell) % ell;
    let roots: Vec<u64> = (0..ell)
        .filter(|&x| (x * x + det + (ell - tr) * x) % ell == 0)
        .collect();
    Ok(match roots.len() {
        0 => EigenData::None,
        1 => EigenData::Degenerate { t: roots[0] },
        _ => EigenData::Split { t: roots[0], t_other: roots[1] },
    })
}

/// Lookup table point -> coordinates on the basis (P, Q) of E[l].
fn dlog_table(cd: &CurveData, p: &Pt, q: &Pt, ell: u64) -> HashMap<Pt, (u64, u64)> {
    let mut table = HashMap::new();
    let mut ip = Pt::Inf;
    for i in 0..ell {
        let mut cur = ip;
        for j in 0..ell {
            table.insert(cur, (i, j));
            cur = cd.curve.add(&cur, q);
        }
        ip = cd.curve.add(&ip, p);
    }
    table
}

/// Result of the concrete kernel census: class sizes and orbit profiles,
/// plus the Gram-loop kernels, all computed from curve arithmetic, with a
/// flag recording agreement with the symbolic classifier.
#[derive(Debug, Clone, Serialize)]
pub struct ConcreteCensus {
    pub case: VertexCase,
    pub p: i64,
    pub ell: u64,
    pub kernel_count: usize,
    pub class_sizes: BTreeMap<String, usize>,
    /// (class, orbit size) -> number of orbits
    pub orbit_profile: BTreeMap<String, usize>,
    pub loops: Vec<String>,
    pub concrete_agrees: bool,
}

/// Enumerate all maximal l-isotropic subgroups of (E x E)[l] concretely,
/// verify isotropy with the product Weil pairing, apply the concrete
/// automorphisms, and compare everything with the symbolic layer.
pub fn concrete_kernel_census(
    case: VertexCase,
    p: i64,
    ell: u64,
) -> Result<ConcreteCensus, CurveError> {
    let tag = match case {
        VertexCase::E1728Sq => SpecialCurve::E1728,
        VertexCase::E0Sq => SpecialCurve::E0,
        _ => return Err(CurveError::BadPrime { p, cond: "census covers the two special squares" }),
    };
    let cd = build_curve(tag, p)?;
    let setup = eigen_setup(case, ell)?;

    // choose S with {S, sigma(S)} independent, then S* := sigma(S)
    let (pb, qb) = torsion_basis(&cd, ell)?;
    let s_point = choose_independent(&cd, &pb, &qb, ell);
    let s_star = cd.sigma(&s_point);
    let table = dlog_table(&cd, &s_point, &s_star, ell);
    let f = &cd.curve.field;

    // the automorphism matrix on (S, S*) must be the companion matrix the
    // symbolic layer uses
    {
        let ss = cd.sigma(&s_star);
        let (a, b) = table[&ss];
        let e = normalize(setup.gen_trace, ell);
        assert_eq!((a, b), ((ell - 1) % ell, e), "sigma acts as the companion matrix");
    }

    let to_point = |u: u64, w: u64| -> Pt {
        let pu = cd.curve.mul(u, &s_point);
        let pw = cd.curve.mul(w, &s_star);
        cd.curve.add(&pu, &pw)
    };
    let realize = |k: &KernelDesc| -> [(Pt, Pt); 2] {
        let g = k.generators();
        [
            (to_point(g[0][0], g[0][1]), to_point(g[0][2], g[0][3])),
            (to_point(g[1][0], g[1][1]), to_point(g[1][2], g[1][3])),
        ]
    };

    let kernels = crate::kernels::enumerate_kernels(ell);
    let mut agrees = kernels.len() == ((ell + 1) * (ell * ell + 1)) as usize;

    // isotropy of every kernel under the product pairing
    for k in &kernels {
        let [(a1, b1), (a2, b2)] = realize(k);
        let e1 = weil_pairing(&cd, &a1, &a2, ell)?;
        let e2 = weil_pairing(&cd, &b1, &b2, ell)?;
        if f.mul(e1, e2) != f.one() {
            agrees = false;
        }
    }

    // concrete group action must reproduce the symbolic one kernel by kernel
    let mut class_sizes: BTreeMap<String, usize> = BTreeMap::new();
    let mut orbit_profile: BTreeMap<String, usize> = BTreeMap::new();
    let mut seen: BTreeSet<KernelDesc> = BTreeSet::new();
    for k in &kernels {
        let label = classify_one(&setup, k);
        *class_sizes.entry(label.to_string()).or_insert(0) += 1;
        if seen.contains(k) {
            continue;
        }
        let mut orbit: BTreeSet<KernelDesc> = BTreeSet::new();
        for g in &setup.group {
            let image = concrete_act(&cd, &table, &realize(k), &g.mat, ell);
            if image != act(&setup, g, k) {
                agrees = false;
            }
            orbit.insert(image);
        }
        for m in &orbit {
            seen.insert(*m);
        }
        *orbit_profile
            .entry(format!("{label},{}", orbit.len()))
            .or_insert(0) += 1;
    }

    // class sizes must equal the symbolic classifier's
    let symbolic = crate::kernels::class_sizes(&setup, &kernels);
    for (label, n) in &symbolic {
        if class_sizes.get(&label.to_string()) != Some(n) {
            agrees = false;
        }
    }

    // loops through Gram matrices, located concretely by their action on
    // torsion points
    let order = crate::hermitian::order_for_case(case, p)?;
    let loops = concrete_gram_loops(&cd, &order, case, ell, &table)?;
    let symbolic_loops = find_loops(&setup, None)?;
    if loops != symbolic_loops {
        agrees = false;
    }

    Ok(ConcreteCensus {
        case,
        p,
        ell,
        kernel_count: kernels.len(),
        class_sizes,
        orbit_profile,
        loops: loops.iter().map(|k| k.to_string()).collect(),
        concrete_agrees: agrees,
    })
}

fn choose_independent(cd: &CurveData, pb: &Pt, qb: &Pt, ell: u64) -> Pt {
    // scan small combinations of the torsion basis
    for i in 0..ell {
        for j in 0..ell {
            if i == 0 && j == 0 {
                continue;
            }
            let cand = cd.curve.add(&cd.curve.mul(i, pb), &cd.curve.mul(j, qb));
            let img = cd.sigma(&cand);
            let mut dependent = false;
            let mut acc = Pt::Inf;
            for _ in 0..ell {
                if acc == img {
                    dependent = true;
                    break;
                }
                acc = cd.curve.add(&acc, &cand);
            }
            if !dependent {
                return cand;
            }
        }
    }
    unreachable!("an independent point exists");
}

/// Image of a concrete kernel under a unit matrix, back in canonical form.
fn concrete_act(
    cd: &CurveData,
    table: &HashMap<Pt, (u64, u64)>,
    gens: &[(Pt, Pt); 2],
    g: &crate::kernels::SubringMat2,
    ell: u64,
) -> KernelDesc {
    let mut rows = [[0u64; 4]; 2];
    for (r, (x, y)) in gens.iter().enumerate() {
        let nx = cd.curve.add(
            &cd.subring_apply(&g.e[0][0], x, ell),
            &cd.subring_apply(&g.e[0][1], y, ell),
        );
        let ny = cd.curve.add(
            &cd.subring_apply(&g.e[1][0], x, ell),
            &cd.subring_apply(&g.e[1][1], y, ell),
        );
        let (a, b) = table[&nx];
        let (c, d) = table[&ny];
        rows[r] = [a, b, c, d];
    }
    KernelDesc::from_generators(&rows, ell).expect("automorphisms preserve kernels")
}

/// Kernels of the Gram-equation solution classes, computed by letting the
/// matrices act on concrete torsion points.
fn concrete_gram_loops(
    cd: &CurveData,
    order: &QuatOrder,
    case: VertexCase,
    ell: u64,
    table: &HashMap<Pt, (u64, u64)>,
) -> Result<BTreeSet<KernelDesc>, CurveError> {
    let sols = crate::hermitian::solve_gram(order, case, ell as i64)?;
    let points: Vec<Pt> = table.keys().copied().collect();
    let mut loops = BTreeSet::new();
    for rep in sols.representatives() {
        let sub = crate::hermitian::to_subring_mat(order, &rep)?;
        // kernel = pairs killed by the matrix
        let mut members: Vec<[u64; 4]> = Vec::new();
        for x in &points {
            for y in &points {
                let r0 = cd.curve.add(
                    &cd.subring_apply(&sub.e[0][0], x, ell),
                    &cd.subring_apply(&sub.e[0][1], y, ell),
                );
                let r1 = cd.curve.add(
                    &cd.subring_apply(&sub.e[1][0], x, ell),
                    &cd.subring_apply(&sub.e[1][1], y, ell),
                );
                if r0 == Pt::Inf && r1 == Pt::Inf {
                    let (a, b) = table[x];
                    let (c, d) = table[y];
                    members.push([a, b, c, d]);
                }
            }
        }
        assert_eq!(members.len(), (ell * ell) as usize, "Gram kernels have order l^2");
        let desc = kernel_from_members(&members, ell);
        loops.insert(desc);
    }
    Ok(loops)
}

fn kernel_from_members(members: &[[u64; 4]], ell: u64) -> KernelDesc {
    // find two independent members
    let first = members
        .iter()
        .find(|m| m.iter().any(|&v| v != 0))
        .expect("kernel has nonzero members");
    for second in members {
        let gens = [*first, *second];
        if let Ok(desc) = KernelDesc::from_generators(&gens, ell) {
            return desc;
        }
    }
    unreachable!("kernel of order l^2 has two independent members");
}

/// Codomain j-invariant of the separable l-isogeny with the given cyclic
/// rational kernel, by the Velu formulas.
pub fn velu_isogeny(curve: &Curve, kernel_gen: &Pt, ell: u64) -> Result<Fp2El, CurveError> {
    let f = &curve.field;
    if *kernel_gen == Pt::Inf || curve.mul(ell, kernel_gen) != Pt::Inf || !curve.on_curve(kernel_gen)
    {
        return Err(CurveError::BadKernel);
    }
    // exact order l (l prime: any non-infinity point of order dividing l)
    let mut t_sum = f.zero();
    let mut w_sum = f.zero();
    let mut q = *kernel_gen;
    for _ in 1..ell {
        let Pt::Aff(xq, yq) = q else { return Err(CurveError::BadKernel) };
        let t_q = f.add(f.mul(f.from_int(3), f.square(xq)), curve.a);
        let u_q = f.mul(f.from_int(2), f.square(yq));
        t_sum = f.add(t_sum, t_q);
        w_sum = f.add(w_sum, f.add(u_q, f.mul(xq, t_q)));
        q = curve.add(&q, kernel_gen);
    }
    assert_eq!(q, Pt::Inf, "kernel generator must have order l");
    let a2 = f.sub(curve.a, f.mul(f.from_int(5), t_sum));
    let b2 = f.sub(curve.b, f.mul(f.from_int(7), w_sum));
    let image = Curve { field: curve.field.clone(), a: a2, b: b2 };
    Ok(image.j_invariant())
}

/// Neighbor multiset of a special curve in the l-isogeny graph, by running
/// Velu over all l+1 kernel lines.
#[derive(Debug, Clone, Serialize)]
pub struct VeluNeighborhood {
    pub curve: SpecialCurve,
    pub p: i64,
    pub ell: u64,
    pub loops: usize,
    /// distinct non-loop neighbor j-invariants with their edge counts
    pub neighbor_edge_counts: Vec<usize>,
}

pub fn velu_neighborhood(
    tag: SpecialCurve,
    p: i64,
    ell: u64,
) -> Result<VeluNeighborhood, CurveError> {
    let cd = build_curve(tag, p)?;
    let (pb, qb) = torsion_basis(&cd, ell)?;
    let self_j = cd.curve.j_invariant();
    let mut by_j: BTreeMap<Fp2El, usize> = BTreeMap::new();
    let mut loops = 0usize;
    for k in 0..=ell {
        let gen = if k == ell {
            qb
        } else {
            cd.curve.add(&pb, &cd.curve.mul(k, &qb))
        };
        let j = velu_isogeny(&cd.curve, &gen, ell)?;
        if j == self_j {
            loops += 1;
        } else {
            *by_j.entry(j).or_insert(0) += 1;
        }
    }
    Ok(VeluNeighborhood {
        curve: tag,
        p,
        ell,
        loops,
        neighbor_edge_counts: by_j.values().copied().collect(),
    })
}
