//! 2x2 matrices over a quaternion order: conjugate transpose, the unit
//! groups of product surfaces, the Gram equation M+ M = m I whose solution
//! classes are the loops of a vertex, and the trichotomy of degree-l^4
//! self-composites.

use crate::kernels::VertexCase;
use crate::num::{is_prime, legendre};
use crate::quat::{OrderError, OrderKind, QuatElem, QuatOrder};
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HermitianError {
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error("case {0:?} is incompatible with order kind {1:?}")]
    CaseOrderMismatch(VertexCase, OrderKind),
    #[error("p = {p} too small: entries only reduce to the quadratic subring when p > {bound}")]
    PTooSmall { p: i64, bound: i64 },
    #[error("no auxiliary prime q found for p = {0}")]
    NoAuxiliaryPrime(i64),
    #[error("matrix is not a solution of M+ M = {0} I")]
    NotGram(i64),
    #[error("matrix entries do not lie in the quadratic subring")]
    NotSubring,
}

/// A 2x2 matrix over a quaternion order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mat2Quat {
    pub e: [[QuatElem; 2]; 2],
}

impl Mat2Quat {
    pub fn new(e: [[QuatElem; 2]; 2]) -> Self {
        Mat2Quat { e }
    }

    pub fn diag(o: &QuatOrder, a: QuatElem, d: QuatElem) -> Self {
        Mat2Quat::new([[a, o.zero()], [o.zero(), d]])
    }
}

pub fn mat_mul(o: &QuatOrder, a: &Mat2Quat, b: &Mat2Quat) -> Mat2Quat {
    let mut out = [[o.zero(); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            let mut acc = o.zero();
            for m in 0..2 {
                acc = o.add(&acc, &o.mul(&a.e[r][m], &b.e[m][c]));
            }
            out[r][c] = acc;
        }
    }
    Mat2Quat::new(out)
}

/// Conjugate transpose: entrywise quaternion conjugate, then transpose.
pub fn conj_transpose(o: &QuatOrder, m: &Mat2Quat) -> Mat2Quat {
    Mat2Quat::new([
        [o.conjugate(&m.e[0][0]), o.conjugate(&m.e[1][0])],
        [o.conjugate(&m.e[0][1]), o.conjugate(&m.e[1][1])],
    ])
}

pub fn scalar_mat(o: &QuatOrder, n: i64) -> Mat2Quat {
    Mat2Quat::diag(o, o.scale(n, &o.one()), o.scale(n, &o.one()))
}

/// Does M+ M = n I hold exactly?
pub fn is_gram(o: &QuatOrder, m: &Mat2Quat, n: i64) -> bool {
    let prod = mat_mul(o, &conj_transpose(o, m), m);
    prod == scalar_mat(o, n)
}

/// The automorphism group of a product surface, as unitary 2x2 matrices.
#[derive(Debug, Clone)]
pub struct UnitGroup {
    pub case: VertexCase,
    pub elements: Vec<Mat2Quat>,
}

impl UnitGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }
}

/// The quaternion order used to realize a vertex case at the prime p.
/// For the two special squares this is the endomorphism ring itself;
/// for the generic cases it is O(q) for the smallest admissible q.
pub fn order_for_case(case: VertexCase, p: i64) -> Result<QuatOrder, HermitianError> {
    match case {
        VertexCase::E1728Sq => Ok(QuatOrder::make(OrderKind::O1728, p, None)?),
        VertexCase::E0Sq => Ok(QuatOrder::make(OrderKind::O0, p, None)?),
        VertexCase::PairDistinct | VertexCase::SquareGeneric => {
            let q = (3..p)
                .filter(|&q| is_prime(q) && q % 8 == 3 && legendre(p, q) == -1)
                .next()
                .ok_or(HermitianError::NoAuxiliaryPrime(p))?;
            Ok(QuatOrder::make(OrderKind::OQ, p, Some(q))?)
        }
    }
}

/// Compute the unit group of Aut(E x E') for the case: all 2x2 matrices g
/// with entries of reduced norm 0 or 1 satisfying g+ g = I, restricted to
/// block-diagonal shape when the two factors are not isomorphic.
pub fn unit_group(case: VertexCase, p: i64) -> Result<(QuatOrder, UnitGroup), HermitianError> {
    let order = order_for_case(case, p)?;
    let group = unit_group_of(&order, case);
    Ok((order, group))
}

pub fn unit_group_of(order: &QuatOrder, case: VertexCase) -> UnitGroup {
    let mut entries = vec![order.zero()];
    entries.extend(order.units());
    let mut elements = Vec::new();
    for a in &entries {
        for b in &entries {
            for c in &entries {
                for d in &entries {
                    let g = Mat2Quat::new([[*a, *b], [*c, *d]]);
                    if !is_gram(order, &g, 1) {
                        continue;
                    }
                    if case == VertexCase::PairDistinct {
                        // no swap: the two factors are not isomorphic
                        if !(b.coords == [0; 4] && c.coords == [0; 4]) {
                            continue;
                        }
                    }
                    elements.push(g);
                }
            }
        }
    }
    elements.sort();
    UnitGroup { case, elements }
}

/// All solutions of M+ M = m I over the order, grouped into left
/// unit-classes {g M : g in G}; each class is one loop of the vertex.
#[derive(Debug, Clone)]
pub struct GramClasses {
    pub m: i64,
    /// one sorted vector of matrices per class; the first entry is the
    /// canonical representative
    pub classes: Vec<Vec<Mat2Quat>>,
}

impl GramClasses {
    pub fn representatives(&self) -> Vec<Mat2Quat> {
        self.classes.iter().map(|c| c[0]).collect()
    }
}

/// Solve the Gram equation by enumerating top rows (a, b) with
/// Nrd a + Nrd b = m and completing the bottom row from the orthogonality
/// constraint.
pub fn solve_gram(
    order: &QuatOrder,
    case: VertexCase,
    m: i64,
) -> Result<GramClasses, HermitianError> {
    match (case, order.id.kind) {
        (VertexCase::E1728Sq, OrderKind::O1728) => {
            if order.p <= 4 * m {
                return Err(HermitianError::PTooSmall { p: order.p, bound: 4 * m });
            }
        }
        (VertexCase::E0Sq, OrderKind::O0) => {
            if order.p <= 3 * m {
                return Err(HermitianError::PTooSmall { p: order.p, bound: 3 * m });
            }
        }
        (c, k) => return Err(HermitianError::CaseOrderMismatch(c, k)),
    }

    let mut by_norm: BTreeMap<i64, Vec<QuatElem>> = BTreeMap::new();
    by_norm.insert(0, vec![order.zero()]);
    for n in 1..=m {
        by_norm.insert(n, order.enumerate_by_norm(n));
    }

    let mut solutions: Vec<Mat2Quat> = Vec::new();
    for na in 0..=m {
        let nb = m - na;
        for a in &by_norm[&na] {
            for b in &by_norm[&nb] {
                if nb == 0 {
                    // b = 0 forces c = 0, d of norm m
                    for d in &by_norm[&m] {
                        let mat = Mat2Quat::new([[*a, *b], [order.zero(), *d]]);
                        if is_gram(order, &mat, m) {
                            solutions.push(mat);
                        }
                    }
                    continue;
                }
                // c has norm nb; the cross condition conj(a) b + conj(c) d = 0
                // determines d = -c conj(a) b / nb
                let ab = order.mul(&order.conjugate(a), b);
                for c in &by_norm[&nb] {
                    let num = order.neg(&order.mul(c, &ab));
                    if num.coords.iter().any(|v| v % nb != 0) {
                        continue;
                    }
                    let d = order.elem([
                        num.coords[0] / nb,
                        num.coords[1] / nb,
                        num.coords[2] / nb,
                        num.coords[3] / nb,
                    ]);
                    let mat = Mat2Quat::new([[*a, *b], [*c, d]]);
                    if is_gram(order, &mat, m) {
                        solutions.push(mat);
                    }
                }
            }
        }
    }
    solutions.sort();
    solutions.dedup();

    // group into left unit-classes
    let group = unit_group_of(order, case);
    let mut class_of: BTreeMap<Mat2Quat, usize> = BTreeMap::new();
    let mut classes: Vec<Vec<Mat2Quat>> = Vec::new();
    for sol in &solutions {
        if class_of.contains_key(sol) {
            continue;
        }
        let mut class: Vec<Mat2Quat> = group
            .elements
            .iter()
            .map(|g| mat_mul(order, g, sol))
            .collect();
        class.sort();
        class.dedup();
        assert_eq!(class.len(), group.order(), "left action of units is free");
        let idx = classes.len();
        for mem in &class {
            class_of.insert(*mem, idx);
        }
        classes.push(class);
    }
    // every class member must itself be a recorded solution
    let total: usize = classes.iter().map(|c| c.len()).sum();
    assert_eq!(total, solutions.len(), "classes partition the solution set");
    Ok(GramClasses { m, classes })
}

/// Trichotomy of a degree-l^4 self-composite M (a solution of
/// M+ M = l^2 I): a backtracking composite tau-hat . tau, an extension of
/// an eigen-multiplication loop (a subring multiple of a degree-l^2
/// solution), or a generic good extension with kernel (Z/l^2)^2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum L4Class {
    Backtrack,
    EigenExtension,
    GoodExtension,
}

pub fn classify_l4_loop(
    order: &QuatOrder,
    m: &Mat2Quat,
    ell: i64,
) -> Result<L4Class, HermitianError> {
    if !is_gram(order, m, ell * ell) {
        return Err(HermitianError::NotGram(ell * ell));
    }
    let bound = match order.id.kind {
        OrderKind::O1728 => 4 * ell * ell,
        _ => 3 * ell * ell,
    };
    if order.p <= bound {
        return Err(HermitianError::PTooSmall { p: order.p, bound });
    }

    // backtracking: M = g . (l I)
    if divide_scalar(order, m, ell)
        .map(|quot| is_gram(order, &quot, 1))
        .unwrap_or(false)
    {
        return Ok(L4Class::Backtrack);
    }

    // eigen extension: M = s M' for a subring element s of norm l and a
    // degree-l^2 solution M'
    for s in order.enumerate_by_norm(ell) {
        if order.as_subring(&s).is_none() {
            continue;
        }
        if let Some(quot) = divide_left(order, m, &s) {
            if is_gram(order, &quot, ell) {
                return Ok(L4Class::EigenExtension);
            }
        }
    }
    Ok(L4Class::GoodExtension)
}

/// Kernel shape of a Gram solution of M+ M = l^2 I, as invariant factors:
/// read from the rank of M mod l (nullity 4, 3, 2 give (l,l,l,l),
/// (l^2,l,l), (l^2,l^2)).
pub fn l4_kernel_shape(
    order: &QuatOrder,
    m: &Mat2Quat,
    ell: u64,
) -> Result<Vec<u64>, HermitianError> {
    let sub = to_subring_mat(order, m)?;
    let gen_trace = order.subring_tag().map(|t| t.generator_trace()).unwrap_or(0);
    let op = sub.operator(gen_trace, ell);
    let nullity = crate::kernels::nullspace4(&op, ell).len();
    Ok(match nullity {
        4 => vec![ell, ell, ell, ell],
        3 => vec![ell * ell, ell, ell],
        2 => vec![ell * ell, ell * ell],
        _ => panic!("a degree-l^4 composite has nullity 2, 3 or 4 mod l"),
    })
}

/// Entrywise view of a matrix inside the quadratic subring.
pub fn to_subring_mat(
    order: &QuatOrder,
    m: &Mat2Quat,
) -> Result<crate::kernels::SubringMat2, HermitianError> {
    let conv = |x: &QuatElem| order.as_subring(x).ok_or(HermitianError::NotSubring);
    Ok(crate::kernels::SubringMat2::new([
        [conv(&m.e[0][0])?, conv(&m.e[0][1])?],
        [conv(&m.e[1][0])?, conv(&m.e[1][1])?],
    ]))
}

fn divide_scalar(order: &QuatOrder, m: &Mat2Quat, n: i64) -> Option<Mat2Quat> {
    let mut out = [[order.zero(); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            let e = &m.e[r][c];
            if e.coords.iter().any(|v| v % n != 0) {
                return None;
            }
            out[r][c] = order.elem([
                e.coords[0] / n,
                e.coords[1] / n,
                e.coords[2] / n,
                e.coords[3] / n,
            ]);
        }
    }
    Some(Mat2Quat::new(out))
}

/// Left-divide by a central subring element: M = s Q, so Q = conj(s) M / Nrd(s).
fn divide_left(order: &QuatOrder, m: &Mat2Quat, s: &QuatElem) -> Option<Mat2Quat> {
    let n = order.reduced_norm(s);
    let sc = order.conjugate(s);
    let mut out = [[order.zero(); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            let prod = order.mul(&sc, &m.e[r][c]);
            if prod.coords.iter().any(|v| v % n != 0) {
                return None;
            }
            out[r][c] = order.elem([
                prod.coords[0] / n,
                prod.coords[1] / n,
                prod.coords[2] / n,
                prod.coords[3] / n,
            ]);
        }
    }
    Some(Mat2Quat::new(out))
}
