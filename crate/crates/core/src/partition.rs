//! Grouping of non-loop kernels by target vertex.
//!
//! For the two special square cases with split eigenvalues, a vertex can
//! receive two orbits of edges instead of one. The matching rule factors a
//! degree-l^2 edge K through a degree-l^4 self-isogeny: the eigen-block
//! intersection of K picks a unique degree-l^2 loop T, the composite
//! T . [lambda] kills K, and the complementary factor has kernel
//! phi(l^{-1} K) where phi is the composite acting on the l^2-torsion. All
//! of this is exact subring matrix arithmetic, independent of p.

use crate::kernels::{
    act, find_loops, kernel_of_matrix, orbit_decompose, EigenSetup, EigenSide, KernelDesc,
    KernelError, OrbitInfo, ProjPoint, Scenario, SubringMat2, VertexCase,
};
use crate::num::inv_mod;
use crate::rings::{solve_norm_equation, ImQuadInt};
use std::collections::BTreeMap;

/// One adjacent vertex: the orbits of edges landing on it (one, or two for
/// merged eigen-type vertices) and the total edge multiplicity.
#[derive(Debug, Clone)]
pub struct VertexGroup {
    pub class: crate::kernels::ClassLabel,
    pub orbits: Vec<OrbitInfo>,
    pub multiplicity: usize,
}

/// Partition the non-loop kernels into vertex groups.
pub fn vertex_partition(
    setup: &EigenSetup,
    scenario: Option<Scenario>,
) -> Result<Vec<VertexGroup>, KernelError> {
    let loops = find_loops(setup, scenario)?;
    let kernels = crate::kernels::enumerate_kernels(setup.ell);
    let orbits = orbit_decompose(setup, &kernels);

    let mut loop_orbits = Vec::new();
    let mut edge_orbits = Vec::new();
    for o in orbits {
        let n_loops = o.orbit.iter().filter(|k| loops.contains(k)).count();
        assert!(
            n_loops == 0 || n_loops == o.orbit.len(),
            "an orbit mixes loops and non-loops"
        );
        if n_loops > 0 {
            loop_orbits.push(o);
        } else {
            edge_orbits.push(o);
        }
    }

    let merge = matches!(setup.case, VertexCase::E1728Sq | VertexCase::E0Sq) && setup.split;
    if !merge {
        return Ok(edge_orbits
            .into_iter()
            .map(|o| VertexGroup {
                class: o.class,
                multiplicity: o.orbit.len(),
                orbits: vec![o],
            })
            .collect());
    }

    let pairing = PairingContext::new(setup)?;
    let mut by_rep: BTreeMap<KernelDesc, OrbitInfo> = BTreeMap::new();
    let mut rep_of: BTreeMap<KernelDesc, KernelDesc> = BTreeMap::new();
    for o in edge_orbits {
        for k in &o.orbit {
            rep_of.insert(*k, o.representative);
        }
        by_rep.insert(o.representative, o);
    }

    let mut groups = Vec::new();
    let mut consumed: BTreeMap<KernelDesc, bool> = BTreeMap::new();
    let reps: Vec<KernelDesc> = by_rep.keys().copied().collect();
    for rep in reps {
        if consumed.contains_key(&rep) {
            continue;
        }
        let o = by_rep.get(&rep).unwrap().clone();
        let side = eigen_side(setup, &rep);
        match side {
            None => {
                consumed.insert(rep, true);
                groups.push(VertexGroup {
                    class: o.class,
                    multiplicity: o.orbit.len(),
                    orbits: vec![o],
                });
            }
            Some(s) => {
                let partner = pairing.partner(&rep, s);
                let partner_rep = *rep_of
                    .get(&partner)
                    .expect("partner kernel must be a non-loop kernel");
                assert_ne!(partner_rep, rep, "partner must lie in a different orbit");
                let po = by_rep.get(&partner_rep).unwrap().clone();
                assert_eq!(po.class, o.class, "paired orbits share the class");
                consumed.insert(rep, true);
                consumed.insert(partner_rep, true);
                let multiplicity = o.orbit.len() + po.orbit.len();
                groups.push(VertexGroup {
                    class: o.class,
                    orbits: vec![o, po],
                    multiplicity,
                });
            }
        }
    }
    Ok(groups)
}

/// Eigen-block side on which the kernel meets L_i x L_i in a line, if any.
fn eigen_side(setup: &EigenSetup, k: &KernelDesc) -> Option<EigenSide> {
    let d1 = crate::kernels::kerg_dim(setup, k, EigenSide::One).ok()?;
    if d1 == 1 {
        return Some(EigenSide::One);
    }
    let d2 = crate::kernels::kerg_dim(setup, k, EigenSide::Two).ok()?;
    if d2 == 1 {
        return Some(EigenSide::Two);
    }
    None
}

/// Loop matrices over the subring together with the eigen data needed to
/// run the pairing.
pub struct PairingContext<'a> {
    setup: &'a EigenSetup,
    lambda: ImQuadInt,
    /// kernel of each degree-l^2 loop -> a matrix realizing it
    loop_matrices: BTreeMap<KernelDesc, SubringMat2>,
}

impl<'a> PairingContext<'a> {
    pub fn new(setup: &'a EigenSetup) -> Result<Self, KernelError> {
        if !setup.split || setup.ring.is_none() {
            return Err(KernelError::NoEigenData(setup.ell));
        }
        let ring = setup.ring.unwrap();
        let ell = setup.ell;
        let lambda = setup.lambda.unwrap();
        let mut loop_matrices = BTreeMap::new();

        // diagonal loops: pairs of eigen factors
        let lam_c = lambda.conj();
        for (a, d) in [
            (lambda, lambda),
            (lambda, lam_c),
            (lam_c, lambda),
            (lam_c, lam_c),
        ] {
            let m = SubringMat2::diag(a, d);
            let k = kernel_of_matrix(&m, setup.gen_trace, ell)?;
            loop_matrices.entry(k).or_insert(m);
        }

        // non-diagonal loops: [[a, b g], [s conj(b) conj(g), conj(a)]] with
        // norm(a) + norm(b) = l, where g is the subring generator and the
        // sign s makes the columns orthogonal (s = +1 for i, -1 for w)
        let g = ImQuadInt::new(ring, 0, 1);
        let (g2, sign): (ImQuadInt, i64) = match ring {
            crate::rings::RingTag::Gauss => (g, 1),
            crate::rings::RingTag::Eisen => (g.conj(), -1),
        };
        for na in 1..(ell as i64) {
            let nb = ell as i64 - na;
            for a in solve_norm_equation(ring, na).all {
                for b in solve_norm_equation(ring, nb).all {
                    let e01 = b.mul(&g);
                    let mut e10 = b.conj().mul(&g2);
                    if sign < 0 {
                        e10 = e10.neg();
                    }
                    let m = SubringMat2::new([[a, e01], [e10, a.conj()]]);
                    let k = kernel_of_matrix(&m, setup.gen_trace, ell)?;
                    loop_matrices.entry(k).or_insert(m);
                }
            }
        }

        // every loop kernel must have been realized
        let loops = find_loops(setup, None)?;
        for k in &loops {
            assert!(
                loop_matrices.contains_key(k),
                "loop {k} has no matrix realization"
            );
        }
        loop_matrices.retain(|k, _| loops.contains(k));
        Ok(PairingContext { setup, lambda, loop_matrices })
    }

    /// The kernel paired with `k` (the other orbit of the same vertex).
    pub fn partner(&self, k: &KernelDesc, side: EigenSide) -> KernelDesc {
        let setup = self.setup;
        let ell = setup.ell;
        let line = self.intersection_line(k, side);

        // the unique degree-l^2 loop whose eigen-block intersection on this
        // side is the same line
        let tau = self
            .loop_matrices
            .iter()
            .find(|(lk, _)| {
                self.try_intersection_line(lk, side) == Some(line)
            })
            .map(|(_, m)| *m)
            .expect("a loop matches every eigen-block line");

        // phi = tau . [lambda_side], acting on the l^2-torsion
        let lam = match side {
            EigenSide::One => self.lambda,
            EigenSide::Two => self.lambda.conj(),
        };
        let phi = mat2_mul(&tau, &SubringMat2::diag(lam, lam));
        let m2 = ell * ell;
        let op = phi.operator(setup.gen_trace, m2);

        // generators of K lifted to the l^2-torsion; phi kills the embedded
        // copy l*K, so phi(lift) is divisible by l
        let gens = k.generators();
        let mut new_gens: Vec<[u64; 4]> = Vec::new();
        for gen in gens {
            let image = apply4_mod(&op, &gen, m2);
            let mut reduced = [0u64; 4];
            for (slot, v) in reduced.iter_mut().zip(image) {
                assert_eq!(v % ell, 0, "composite must kill the kernel mod l");
                *slot = v / ell;
            }
            new_gens.push(reduced);
        }
        // plus l * (image of the full l^2-torsion): columns of phi mod l
        let op_l = phi.operator(setup.gen_trace, ell);
        for col in 0..4 {
            let mut v = [0u64; 4];
            for r in 0..4 {
                v[r] = op_l[r][col];
            }
            new_gens.push(v);
        }

        let basis = span_basis(&new_gens, ell);
        assert_eq!(basis.len(), 2, "partner kernel must be two-dimensional");
        let partner = KernelDesc::from_generators(&[basis[0], basis[1]], ell)
            .expect("partner spans a kernel");
        debug_assert_ne!(partner, *k);
        partner
    }

    /// K  intersect  (L_side x L_side) as a projective point on the basis
    /// ((v, 0), (0, v)) of the eigen block, assuming the intersection is a
    /// line.
    fn intersection_line(&self, k: &KernelDesc, side: EigenSide) -> ProjPoint {
        self.try_intersection_line(k, side)
            .expect("kernel meets the eigen block in a line")
    }

    fn try_intersection_line(&self, k: &KernelDesc, side: EigenSide) -> Option<ProjPoint> {
        let setup = self.setup;
        let ell = setup.ell;
        let v = match side {
            EigenSide::One => setup.l1.unwrap(),
            EigenSide::Two => setup.l2.unwrap(),
        };
        let gens = k.generators();
        let mut found: Option<ProjPoint> = None;
        for c0 in 0..ell {
            for c1 in 0..ell {
                if c0 == 0 && c1 == 0 {
                    continue;
                }
                let w = [
                    (c0 * gens[0][0] + c1 * gens[1][0]) % ell,
                    (c0 * gens[0][1] + c1 * gens[1][1]) % ell,
                    (c0 * gens[0][2] + c1 * gens[1][2]) % ell,
                    (c0 * gens[0][3] + c1 * gens[1][3]) % ell,
                ];
                // w must be (alpha v, beta v)
                let alpha_beta = decompose_on_line(&w, &v, ell);
                if let Some((alpha, beta)) = alpha_beta {
                    let p = ProjPoint::new(alpha, beta, ell);
                    match found {
                        None => found = Some(p),
                        Some(q) if q == p => {}
                        // two independent directions: intersection is a plane
                        Some(_) => return None,
                    }
                }
            }
        }
        found
    }
}

/// Write (w0, w1, w2, w3) = (alpha * v, beta * v) when possible.
fn decompose_on_line(w: &[u64; 4], v: &ProjPoint, ell: u64) -> Option<(u64, u64)> {
    let scal = |x: u64, y: u64| -> Option<u64> {
        // scalar s with (x, y) = s * (v.x, v.y)
        if v.x != 0 {
            let s = x * inv_mod(v.x, ell) % ell;
            if s * v.y % ell == y % ell {
                Some(s)
            } else {
                None
            }
        } else {
            if x % ell != 0 {
                return None;
            }
            Some(y * inv_mod(v.y, ell) % ell)
        }
    };
    let alpha = scal(w[0], w[1])?;
    let beta = scal(w[2], w[3])?;
    if alpha == 0 && beta == 0 {
        None
    } else {
        Some((alpha, beta))
    }
}

fn mat2_mul(a: &SubringMat2, b: &SubringMat2) -> SubringMat2 {
    let zero = ImQuadInt::zero(a.e[0][0].ring);
    let mut out = [[zero; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            let mut acc = zero;
            for m in 0..2 {
                acc = acc.add(&a.e[r][m].mul(&b.e[m][c]));
            }
            out[r][c] = acc;
        }
    }
    SubringMat2::new(out)
}

fn apply4_mod(op: &[[u64; 4]; 4], v: &[u64; 4], m: u64) -> [u64; 4] {
    let mut out = [0u64; 4];
    for r in 0..4 {
        let mut acc: u128 = 0;
        for c in 0..4 {
            acc += op[r][c] as u128 * v[c] as u128;
        }
        out[r] = (acc % m as u128) as u64;
    }
    out
}

/// Row basis of the span of a vector list over F_l.
fn span_basis(vecs: &[[u64; 4]], ell: u64) -> Vec<[u64; 4]> {
    let mut basis: Vec<[u64; 4]> = Vec::new();
    for v in vecs {
        let mut w = *v;
        for b in &basis {
            // eliminate leading coordinate of b from w
            let lead = b.iter().position(|&x| x != 0).unwrap();
            if w[lead] != 0 {
                let f = w[lead] * inv_mod(b[lead], ell) % ell;
                for c in 0..4 {
                    w[c] = (w[c] + (ell - f) * b[c] % ell) % ell;
                }
            }
        }
        if w.iter().any(|&x| x % ell != 0) {
            basis.push(w.map(|x| x % ell));
            // keep basis in echelon form
            basis.sort_by_key(|b| b.iter().position(|&x| x != 0).unwrap());
            let mut reduced: Vec<[u64; 4]> = Vec::new();
            for b in basis.iter() {
                let mut w = *b;
                for r in &reduced {
                    let lead = r.iter().position(|&x| x != 0).unwrap();
                    if w[lead] != 0 {
                        let f = w[lead] * inv_mod(r[lead], ell) % ell;
                        for c in 0..4 {
                            w[c] = (w[c] + (ell - f) * r[c] % ell) % ell;
                        }
                    }
                }
                if w.iter().any(|&x| x != 0) {
                    reduced.push(w);
                }
            }
            basis = reduced;
        }
    }
    basis
}

/// Edge conservation: total edge multiplicity plus the loop count equals
/// the out-degree (l+1)(l^2+1).
pub fn check_edge_conservation(
    setup: &EigenSetup,
    scenario: Option<Scenario>,
) -> Result<(), KernelError> {
    let ell = setup.ell;
    let loops = find_loops(setup, scenario)?;
    let groups = vertex_partition(setup, scenario)?;
    let edges: usize = groups.iter().map(|g| g.multiplicity).sum();
    let expected = ((ell + 1) * (ell * ell + 1)) as usize;
    assert_eq!(edges + loops.len(), expected, "edge conservation");
    Ok(())
}

/// Convenience: the action of a group element on a kernel, re-exported for
/// table generation.
pub fn orbit_of(setup: &EigenSetup, k: &KernelDesc) -> Vec<KernelDesc> {
    let mut orbit: Vec<KernelDesc> = setup.group.iter().map(|g| act(setup, g, k)).collect();
    orbit.sort();
    orbit.dedup();
    orbit
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{eigen_setup, ClassLabel};

    fn setup(case: VertexCase, ell: u64) -> EigenSetup {
        eigen_setup(case, ell).unwrap()
    }

    #[test]
    fn dc_vertices_at_5() {
        // (E1728Sq, l=5): the Dc kernels form 2 vertices with 8 edges each
        let s = setup(VertexCase::E1728Sq, 5);
        let groups = vertex_partition(&s, None).unwrap();
        let dc: Vec<&VertexGroup> = groups.iter().filter(|g| g.class == ClassLabel::Dc).collect();
        assert_eq!(dc.len(), 2);
        for g in dc {
            assert_eq!(g.multiplicity, 8);
            assert_eq!(g.orbits.len(), 2);
        }
    }

    #[test]
    fn pairing_is_an_involution_and_preserves_class() {
        for (case, ell) in [
            (VertexCase::E1728Sq, 5u64),
            (VertexCase::E1728Sq, 13),
            (VertexCase::E0Sq, 7),
            (VertexCase::E0Sq, 13),
        ] {
            let s = setup(case, ell);
            let ctx = PairingContext::new(&s).unwrap();
            let loops = find_loops(&s, None).unwrap();
            for k in crate::kernels::enumerate_kernels(ell) {
                if loops.contains(&k) {
                    continue;
                }
                let side = match super::eigen_side(&s, &k) {
                    Some(side) => side,
                    None => continue,
                };
                let partner = ctx.partner(&k, side);
                // the partner is a non-loop kernel of the same class on the
                // other eigen side, and pairing back returns k
                assert!(!loops.contains(&partner));
                assert_eq!(
                    crate::kernels::classify_one(&s, &k),
                    crate::kernels::classify_one(&s, &partner)
                );
                let other = super::eigen_side(&s, &partner).expect("partner has a side");
                assert_ne!(other, side, "partner lies on the opposite eigen side");
                // a loop matrix realizes its kernel only up to a left unit,
                // so the pairing is involutive at the orbit level
                let back = ctx.partner(&partner, other);
                assert!(
                    orbit_of(&s, &k).contains(&back),
                    "pairing must be an involution up to the group action"
                );
            }
        }
    }

    #[test]
    fn edge_conservation_small() {
        for ell in [2u64, 3, 5, 7, 11, 13] {
            check_edge_conservation(&setup(VertexCase::E1728Sq, ell), None).unwrap();
            check_edge_conservation(&setup(VertexCase::E0Sq, ell), None).unwrap();
            check_edge_conservation(&setup(VertexCase::SquareGeneric, ell), None).unwrap();
            for sc in [
                Scenario::NoSmallIsogeny,
                Scenario::IsogenyDegree(ell - 1),
                Scenario::IsogenyDegreeEll,
            ] {
                if let Scenario::IsogenyDegree(d) = sc {
                    if d == 0 || !crate::num::is_square((ell - d) as i64) {
                        continue;
                    }
                }
                check_edge_conservation(&setup(VertexCase::PairDistinct, ell), Some(sc)).unwrap();
            }
        }
    }

    #[test]
    fn nn3_vertices_at_5() {
        // (SquareGeneric, l=5): class NN3 has 88 kernels in 22 vertices of 4
        let s = setup(VertexCase::SquareGeneric, 5);
        let groups = vertex_partition(&s, None).unwrap();
        let nn3: Vec<&VertexGroup> = groups.iter().filter(|g| g.class == ClassLabel::NN3).collect();
        assert_eq!(nn3.len(), 22);
        assert!(nn3.iter().all(|g| g.multiplicity == 4));
    }

    #[test]
    fn dd_vertices_pair_distinct() {
        // (PairDistinct, l=5, no small isogeny): 36 diagonal vertices x 1
        let s = setup(VertexCase::PairDistinct, 5);
        let groups = vertex_partition(&s, Some(Scenario::NoSmallIsogeny)).unwrap();
        let dd: Vec<&VertexGroup> = groups.iter().filter(|g| g.class == ClassLabel::DD).collect();
        assert_eq!(dd.len(), 36);
        assert!(dd.iter().all(|g| g.multiplicity == 1));
    }
}
