//! Neighbor tables for the four product-vertex families, the verification
//! harness that recomputes them against their closed forms, the elliptic
//! l-isogeny neighborhood counts for the two special curves, and the
//! census of product-type principally polarized surfaces.

use crate::kernels::{
    eigen_setup, find_loops, ClassLabel, KernelDesc, KernelError, Scenario, VertexCase,
};
use crate::num::{is_prime, legendre};
use crate::partition::{vertex_partition, VertexGroup};
use crate::quat::QuatOrder;
use crate::rings::{solve_norm_equation, RingTag};
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Hermitian(#[from] crate::hermitian::HermitianError),
    #[error("{0} is not prime")]
    NotPrime(i64),
    #[error("p = {p} fails the congruence {cond}")]
    BadPrime { p: i64, cond: &'static str },
    #[error("l = {ell} out of range: {reason}")]
    BadEll { ell: u64, reason: &'static str },
    #[error("p must exceed {bound} for the stated counts to apply")]
    PTooSmall { bound: i64 },
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct NeighborRow {
    pub class: String,
    pub vertices: u64,
    pub multiplicity: u64,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct LoopRecord {
    pub kernel: String,
    pub class: String,
}

/// Neighbor structure of one vertex case at one prime: rows of
/// (class, vertex count, edge multiplicity) plus the loop records.
#[derive(Debug, Clone, Serialize)]
pub struct NeighborTable {
    pub case: VertexCase,
    pub ell: u64,
    pub scenario: Option<String>,
    pub rows: Vec<NeighborRow>,
    pub loops: Vec<LoopRecord>,
}

pub fn scenario_string(s: Scenario) -> String {
    match s {
        Scenario::NoSmallIsogeny => "none".into(),
        Scenario::IsogenyDegree(d) => format!("d={d}"),
        Scenario::IsogenyDegreeEll => "ell".into(),
    }
}

/// Derive the neighbor table from the vertex partition and the loop set.
pub fn neighbor_table(
    case: VertexCase,
    ell: u64,
    scenario: Option<Scenario>,
) -> Result<NeighborTable, ReportError> {
    let setup = eigen_setup(case, ell)?;
    let groups = vertex_partition(&setup, scenario)?;
    let loops = find_loops(&setup, scenario)?;

    // A class whose vertices come in both merged (two-orbit) and unmerged
    // flavors gets -1 / -2 row variants; in the split square cases the Nc
    // and Nd classes always carry both variants even when one is empty.
    let mut variants: BTreeMap<ClassLabel, Vec<&VertexGroup>> = BTreeMap::new();
    for g in &groups {
        variants.entry(g.class).or_default().push(g);
    }

    let split_square = matches!(case, VertexCase::E1728Sq | VertexCase::E0Sq) && setup.split;
    let mut rows: Vec<NeighborRow> = Vec::new();
    for (class, vgs) in &variants {
        let has_both = vgs.iter().any(|g| g.orbits.len() == 1) && vgs.iter().any(|g| g.orbits.len() == 2);
        let force_both =
            split_square && matches!(class, ClassLabel::Nc | ClassLabel::Nd);
        if has_both || force_both {
            let orbit_size = vgs
                .iter()
                .flat_map(|g| g.orbits.iter())
                .map(|o| o.orbit.len() as u64)
                .max()
                .expect("class has at least one orbit");
            let single: Vec<_> = vgs.iter().filter(|g| g.orbits.len() == 1).collect();
            let merged: Vec<_> = vgs.iter().filter(|g| g.orbits.len() == 2).collect();
            rows.push(NeighborRow {
                class: format!("{class}-1"),
                vertices: single.len() as u64,
                multiplicity: orbit_size,
            });
            rows.push(NeighborRow {
                class: format!("{class}-2"),
                vertices: merged.len() as u64,
                multiplicity: 2 * orbit_size,
            });
        } else {
            // one row per multiplicity actually observed
            let mut by_mult: BTreeMap<u64, u64> = BTreeMap::new();
            for g in vgs {
                *by_mult.entry(g.multiplicity as u64).or_insert(0) += 1;
            }
            for (mult, count) in by_mult {
                rows.push(NeighborRow {
                    class: class.to_string(),
                    vertices: count,
                    multiplicity: mult,
                });
            }
        }
    }

    let loop_records = loops
        .iter()
        .map(|k| LoopRecord {
            kernel: k.to_string(),
            class: crate::kernels::classify_one(&setup, k).to_string(),
        })
        .collect();

    Ok(NeighborTable {
        case,
        ell,
        scenario: scenario.map(scenario_string),
        rows,
        loops: loop_records,
    })
}

impl NeighborTable {
    /// Total edges in rows plus loops; must equal (l+1)(l^2+1).
    pub fn edge_total(&self) -> u64 {
        let row_edges: u64 = self.rows.iter().map(|r| r.vertices * r.multiplicity).sum();
        row_edges + self.loops.len() as u64
    }

    /// (vertices, multiplicity) pairs split by diagonal/non-diagonal class.
    pub fn shape(&self) -> TableShape {
        let mut diag = Vec::new();
        let mut nondiag = Vec::new();
        for r in &self.rows {
            if r.vertices == 0 {
                continue;
            }
            let is_diag = r.class.starts_with('D');
            let target = if is_diag { &mut diag } else { &mut nondiag };
            target.push((r.vertices, r.multiplicity));
        }
        diag.sort_unstable();
        nondiag.sort_unstable();
        TableShape { diag, nondiag, loops: self.loops.len() as u64 }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("case,ell,class,vertices,multiplicity\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{:?},{},{},{},{}\n",
                self.case, self.ell, r.class, r.vertices, r.multiplicity
            ));
        }
        out
    }
}

/// Class-free table summary used for the l = 2 and l = 3 statements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableShape {
    pub diag: Vec<(u64, u64)>,
    pub nondiag: Vec<(u64, u64)>,
    pub loops: u64,
}

/// The closed-form expectation for a table, where one is stated.
#[derive(Debug, Clone)]
pub enum ExpectedTable {
    ByClass { rows: Vec<(String, u64, u64)>, loops: u64 },
    ByShape(TableShape),
}

/// Closed-form neighbor tables. Returns None when l = 2 for the pair cases
/// (there the sign collapse makes the odd-l statements inapplicable and the
/// derived table is checked structurally instead).
pub fn expected_table(
    case: VertexCase,
    ell: u64,
    scenario: Option<Scenario>,
) -> Option<ExpectedTable> {
    let l = ell;
    let by_class = |rows: Vec<(&str, u64, u64)>, loops: u64| {
        Some(ExpectedTable::ByClass {
            rows: rows
                .into_iter()
                .map(|(c, v, m)| (c.to_string(), v, m))
                .collect(),
            loops,
        })
    };
    match case {
        VertexCase::E1728Sq => {
            if l == 2 {
                return Some(ExpectedTable::ByShape(TableShape {
                    diag: vec![(1, 4), (1, 4)],
                    nondiag: vec![(1, 4)],
                    loops: 3,
                }));
            }
            if l % 4 == 1 {
                by_class(
                    vec![
                        ("Dc", (l - 1) / 2, 8),
                        ("Dd", (l - 1) / 2, 4),
                        ("De", (l - 1) * (l - 3) / 8, 8),
                        ("Nb", (l - 1) / 4, 4),
                        ("Nc-1", (l - 1) * (l - 3) / 4, 8),
                        ("Nc-2", (l - 1) / 2, 16),
                        ("Nd-1", (l - 1) * (l * l - 3 * l + 6) / 16, 16),
                        ("Nd-2", (l - 1) * (l - 5) / 16, 32),
                    ],
                    l + 3,
                )
            } else {
                by_class(
                    vec![
                        ("Dd", (l + 1) / 2, 4),
                        ("De", (l * l - 1) / 8, 8),
                        ("Nb", (l + 1) / 4, 4),
                        ("Nc", (l * l - 1) / 4, 8),
                        ("Nd", l * (l + 1) * (l - 3) / 16, 16),
                    ],
                    l + 1,
                )
            }
        }
        VertexCase::E0Sq => {
            if l == 2 {
                return Some(ExpectedTable::ByShape(TableShape {
                    diag: vec![(1, 9)],
                    nondiag: vec![(1, 3)],
                    loops: 3,
                }));
            }
            if l == 3 {
                // ramified case: the diagonal vertices carry 6 and 9 edges
                // and there is one loop; the 24 non-diagonal edges fall into
                // orbits of 6 and 18 (an orbit of 8 would need a stabilizer
                // of odd order, impossible since -I fixes every kernel)
                return Some(ExpectedTable::ByShape(TableShape {
                    diag: vec![(1, 6), (1, 9)],
                    nondiag: vec![(1, 6), (1, 18)],
                    loops: 1,
                }));
            }
            if l % 3 == 1 {
                by_class(
                    vec![
                        ("Dc", (l - 1) / 3, 12),
                        ("Dd", (l - 1) / 3, 9),
                        ("De", (l - 1) * (l - 4) / 18, 18),
                        ("Nb", (l - 1) / 6, 6),
                        ("Nc-1", (l - 1) * (l - 3) / 6, 18),
                        ("Nc-2", (l - 1) / 3, 36),
                        ("Nd-1", (l - 1) * (l * l - 4 * l + 9) / 36, 36),
                        ("Nd-2", (l - 1) * (l - 7) / 36, 72),
                    ],
                    l + 3,
                )
            } else {
                by_class(
                    vec![
                        ("Dd", (l + 1) / 3, 9),
                        ("De", (l * l - l - 2) / 18, 18),
                        ("Nb", (l + 1) / 6, 6),
                        ("Nc", (l * l - 1) / 6, 18),
                        ("Nd", (l * l * l - 3 * l * l - 3 * l + 1) / 36, 36),
                    ],
                    l + 1,
                )
            }
        }
        VertexCase::PairDistinct => {
            if l == 2 {
                return None;
            }
            let scenario = scenario?;
            let (dd, nn, loops) = match scenario {
                Scenario::IsogenyDegree(_) => ((l + 1) * (l + 1), (l * l * l - l - 2) / 2, 2),
                Scenario::IsogenyDegreeEll => (l * l + 2 * l, (l * l * l - l) / 2, 1),
                Scenario::NoSmallIsogeny => ((l + 1) * (l + 1), (l * l * l - l) / 2, 0),
            };
            by_class(vec![("DD", dd, 1), ("NN", nn, 2)], loops)
        }
        VertexCase::SquareGeneric => {
            if l == 2 {
                return None;
            }
            let (nn3, loops) = if l % 4 == 1 {
                ((l * l * l - l * l - 2 * l - 2) / 4, 2)
            } else {
                ((l * l * l - l * l - 2 * l) / 4, 0)
            };
            by_class(
                vec![
                    ("DD1", l + 1, 1),
                    ("DD2", l * (l + 1) / 2, 2),
                    ("NN2", (l * l + l) / 2, 2),
                    ("NN3", nn3, 4),
                ],
                loops,
            )
        }
    }
}

/// Closed-form class cardinalities, where the congruence class of l admits
/// a stated formula.
pub fn expected_class_sizes(case: VertexCase, ell: u64) -> Option<Vec<(ClassLabel, u64)>> {
    use ClassLabel::*;
    let l = ell;
    match case {
        VertexCase::E1728Sq => {
            if l % 4 == 1 {
                Some(vec![
                    (Da, 2),
                    (Db, 2),
                    (Dc, 4 * (l - 1)),
                    (Dd, 2 * (l - 1)),
                    (De, (l - 1) * (l - 3)),
                    (Na, l - 1),
                    (Nb, l - 1),
                    (Nc, 2 * (l * l - 1)),
                    (Nd, (l - 1) * (l * l - l - 4)),
                ])
            } else if l % 4 == 3 {
                Some(vec![
                    (Dd, 2 * (l + 1)),
                    (De, l * l - 1),
                    (Na, l + 1),
                    (Nb, l + 1),
                    (Nc, 2 * (l * l - 1)),
                    (Nd, l * (l + 1) * (l - 3)),
                ])
            } else {
                None
            }
        }
        VertexCase::E0Sq => {
            if l % 3 == 1 {
                Some(vec![
                    (Da, 2),
                    (Db, 2),
                    (Dc, 4 * (l - 1)),
                    (Dd, 3 * (l - 1)),
                    (De, (l - 1) * (l - 4)),
                    (Na, l - 1),
                    (Nb, l - 1),
                    (Nc, 3 * (l * l - 1)),
                    (Nd, l * l * l - 3 * l * l - 3 * l + 5),
                ])
            } else if l % 3 == 2 && l != 2 {
                Some(vec![
                    (Dd, 3 * (l + 1)),
                    (De, l * l - l - 2),
                    (Na, l + 1),
                    (Nb, l + 1),
                    (Nc, 3 * (l * l - 1)),
                    (Nd, l * l * l - 3 * l * l - 3 * l + 1),
                ])
            } else {
                None
            }
        }
        VertexCase::PairDistinct => Some(vec![(DD, (l + 1) * (l + 1)), (NN, l * l * l - l)]),
        VertexCase::SquareGeneric => {
            if l == 2 {
                Some(vec![(DD1, 3), (DD2, 6), (NN1, 1), (NN2, 3), (NN3, 2)])
            } else {
                let nn1 = if l % 4 == 1 { 2 } else { 0 };
                Some(vec![
                    (DD1, l + 1),
                    (DD2, l * (l + 1)),
                    (NN1, nn1),
                    (NN2, l * l + l),
                    (NN3, l * l * l - l * l - 2 * l - nn1),
                ])
            }
        }
    }
}

/// Expected loop count where a statement covers (case, l, scenario).
pub fn expected_loop_count(case: VertexCase, ell: u64, scenario: Option<Scenario>) -> u64 {
    let l = ell;
    match case {
        VertexCase::E1728Sq => {
            if l == 2 {
                3
            } else if l % 4 == 1 {
                l + 3
            } else {
                l + 1
            }
        }
        VertexCase::E0Sq => match l {
            2 => 3,
            3 => 1,
            _ if l % 3 == 1 => l + 3,
            _ => l + 1,
        },
        VertexCase::PairDistinct => match scenario.expect("scenario required") {
            Scenario::IsogenyDegree(_) => {
                if l == 2 {
                    1
                } else {
                    2
                }
            }
            Scenario::IsogenyDegreeEll => 1,
            Scenario::NoSmallIsogeny => 0,
        },
        VertexCase::SquareGeneric => {
            if l == 2 {
                1
            } else if l % 4 == 1 {
                2
            } else {
                0
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub ell_max: u64,
    pub checks: Vec<CheckLine>,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,pass,detail\n");
        for c in &self.checks {
            out.push_str(&format!("{},{},{}\n", c.name, c.pass, c.detail));
        }
        out
    }
}

fn push_check(checks: &mut Vec<CheckLine>, name: String, pass: bool, detail: String) {
    checks.push(CheckLine { name, pass, detail });
}

fn scenarios_for(case: VertexCase, ell: u64) -> Vec<Option<Scenario>> {
    if case == VertexCase::PairDistinct {
        let mut v = vec![
            Some(Scenario::NoSmallIsogeny),
            Some(Scenario::IsogenyDegreeEll),
        ];
        // smallest valid degree: l - 1 is a positive square for l >= 2
        let d = ell - 1;
        if d >= 1 && crate::num::is_square((ell - d) as i64) {
            v.push(Some(Scenario::IsogenyDegree(d)));
        }
        v
    } else {
        vec![None]
    }
}

/// Recompute every table for all primes l <= ell_max, compare class sizes,
/// table rows and loop counts with their closed forms, check edge
/// conservation, and (for the stated small (case, p, l) combinations)
/// compare Gram-equation loop classes with the kernel-level loop set.
pub fn verify_tables(ell_max: u64) -> Result<VerificationReport, ReportError> {
    if ell_max > 31 {
        return Err(ReportError::BadEll { ell: ell_max, reason: "verification is desk-scale, l <= 31" });
    }
    let mut checks = Vec::new();
    let primes: Vec<u64> = (2..=ell_max).filter(|&l| is_prime(l as i64)).collect();
    let cases = [
        VertexCase::E1728Sq,
        VertexCase::E0Sq,
        VertexCase::PairDistinct,
        VertexCase::SquareGeneric,
    ];
    for &ell in &primes {
        for case in cases {
            let setup = eigen_setup(case, ell)?;
            // class cardinalities
            if let Some(expect) = expected_class_sizes(case, ell) {
                let sizes = crate::kernels::class_sizes(&setup, &crate::kernels::enumerate_kernels(ell));
                let mut ok = true;
                let mut detail = String::new();
                for (label, want) in &expect {
                    let got = sizes.get(label).copied().unwrap_or(0) as u64;
                    if got != *want {
                        ok = false;
                        detail.push_str(&format!("{label}: got {got} want {want}; "));
                    }
                }
                let extra: u64 = sizes
                    .iter()
                    .filter(|(l2, _)| !expect.iter().any(|(e, _)| e == *l2))
                    .map(|(_, n)| *n as u64)
                    .sum();
                if extra != 0 {
                    ok = false;
                    detail.push_str("unexpected classes present;");
                }
                push_check(
                    &mut checks,
                    format!("class-sizes {case:?} l={ell}"),
                    ok,
                    if ok { "all closed forms match".into() } else { detail },
                );
            }
            for scenario in scenarios_for(case, ell) {
                let table = neighbor_table(case, ell, scenario)?;
                // edge conservation is structural
                let expect_edges = (ell + 1) * (ell * ell + 1);
                push_check(
                    &mut checks,
                    format!(
                        "edge-conservation {case:?} l={ell}{}",
                        scenario.map(|s| format!(" {}", scenario_string(s))).unwrap_or_default()
                    ),
                    table.edge_total() == expect_edges,
                    format!("{} edges", table.edge_total()),
                );
                // loop counts
                let want_loops = expected_loop_count(case, ell, scenario);
                push_check(
                    &mut checks,
                    format!(
                        "loop-count {case:?} l={ell}{}",
                        scenario.map(|s| format!(" {}", scenario_string(s))).unwrap_or_default()
                    ),
                    table.loops.len() as u64 == want_loops,
                    format!("got {} want {}", table.loops.len(), want_loops),
                );
                // table rows
                if let Some(expected) = expected_table(case, ell, scenario) {
                    let (ok, detail) = compare_table(&table, &expected);
                    push_check(
                        &mut checks,
                        format!(
                            "table {case:?} l={ell}{}",
                            scenario.map(|s| format!(" {}", scenario_string(s))).unwrap_or_default()
                        ),
                        ok,
                        detail,
                    );
                }
            }
        }
    }

    // Gram-equation loops against kernel-level loops at the stated primes.
    for (case, p, ells) in [
        (VertexCase::E1728Sq, 103i64, vec![2u64, 5, 7]),
        (VertexCase::E0Sq, 101, vec![2, 3, 5]),
    ] {
        let order = crate::hermitian::order_for_case(case, p)?;
        for ell in ells {
            if ell > ell_max {
                continue;
            }
            let ok = gram_loops_agree(&order, case, ell)?;
            push_check(
                &mut checks,
                format!("gram-loops {case:?} p={p} l={ell}"),
                ok,
                "Gram classes = kernel loop set".into(),
            );
        }
    }

    Ok(VerificationReport { ell_max, checks })
}

/// Solve the Gram equation at m = l and compare the kernel of each class
/// with the symbolic loop set.
pub fn gram_loops_agree(
    order: &QuatOrder,
    case: VertexCase,
    ell: u64,
) -> Result<bool, ReportError> {
    let setup = eigen_setup(case, ell)?;
    let sols = crate::hermitian::solve_gram(order, case, ell as i64)?;
    let mut kernels: std::collections::BTreeSet<KernelDesc> = Default::default();
    for rep in sols.representatives() {
        let sub = crate::hermitian::to_subring_mat(order, &rep)?;
        kernels.insert(crate::kernels::kernel_of_matrix(&sub, setup.gen_trace, ell)?);
    }
    let loops = find_loops(&setup, None)?;
    // distinct classes must give distinct kernels
    Ok(kernels == loops && kernels.len() == sols.classes.len())
}

fn compare_table(table: &NeighborTable, expected: &ExpectedTable) -> (bool, String) {
    match expected {
        ExpectedTable::ByClass { rows, loops } => {
            let mut got: Vec<(String, u64, u64)> = table
                .rows
                .iter()
                .map(|r| (r.class.clone(), r.vertices, r.multiplicity))
                .collect();
            let mut want = rows.clone();
            // empty expected rows may be omitted in the derived table only
            // if the derived table also has them with zero vertices
            got.retain(|(_, v, _)| *v > 0);
            want.retain(|(_, v, _)| *v > 0);
            got.sort();
            want.sort();
            let ok = got == want && table.loops.len() as u64 == *loops;
            let detail = if ok {
                "rows match".into()
            } else {
                format!("got {:?} want {:?}", got, want)
            };
            (ok, detail)
        }
        ExpectedTable::ByShape(shape) => {
            let got = table.shape();
            let ok = got == *shape;
            let detail = if ok {
                "shape matches".into()
            } else {
                format!("got {:?} want {:?}", got, shape)
            };
            (ok, detail)
        }
    }
}

/// Which special curve an elliptic neighborhood is computed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
pub enum CurveTag {
    E1728,
    E0,
}

#[derive(Debug, Clone, Serialize)]
pub struct EllipticNeighborhood {
    pub curve: CurveTag,
    pub ell: u64,
    pub p: i64,
    pub vertices: u64,
    pub edges_per_vertex: u64,
    pub loops: u64,
    pub fp_rational_vertices: u64,
}

/// Counts for the l-isogeny neighborhood of E_1728 or E_0 inside the graph
/// of curves with trace -2p over F_{p^2}.
pub fn elliptic_neighborhood(
    curve: CurveTag,
    ell: u64,
    p: i64,
) -> Result<EllipticNeighborhood, ReportError> {
    if !is_prime(p) {
        return Err(ReportError::NotPrime(p));
    }
    if !is_prime(ell as i64) || ell < 3 || ell as i64 == p {
        return Err(ReportError::BadEll { ell, reason: "need an odd prime l different from p" });
    }
    let (vertices, edges, loops, rational) = match curve {
        CurveTag::E1728 => {
            if p % 4 != 3 {
                return Err(ReportError::BadPrime { p, cond: "p = 3 (mod 4)" });
            }
            if p <= 4 * (ell * ell) as i64 {
                return Err(ReportError::PTooSmall { bound: 4 * (ell * ell) as i64 });
            }
            let sign: i64 = if ell % 4 == 1 { 1 } else { -1 };
            let vertices = ((ell as i64 - sign) / 2) as u64;
            // loops exist exactly when l is a norm from Z[i]
            let loops = if solve_norm_equation(RingTag::Gauss, ell as i64).canonical.is_some() {
                2
            } else {
                0
            };
            let rational = (1 + legendre(ell as i64, p)) as u64;
            (vertices, 2u64, loops, rational)
        }
        CurveTag::E0 => {
            if p % 3 != 2 {
                return Err(ReportError::BadPrime { p, cond: "p = 2 (mod 3)" });
            }
            if p <= 3 * (ell * ell) as i64 {
                return Err(ReportError::PTooSmall { bound: 3 * (ell * ell) as i64 });
            }
            let sign = legendre(ell as i64, 3);
            let vertices = ((ell as i64 - sign) / 3) as u64;
            let loops = if solve_norm_equation(RingTag::Eisen, ell as i64).canonical.is_some() {
                2
            } else {
                0
            };
            let rational = (1 + legendre(-p, ell as i64)) as u64;
            (vertices, 3u64, loops, rational)
        }
    };
    // total degree check: every neighbor absorbs `edges` arrows
    assert_eq!(edges * vertices + loops, ell + 1);
    Ok(EllipticNeighborhood {
        curve,
        ell,
        p,
        vertices,
        edges_per_vertex: edges,
        loops,
        fp_rational_vertices: rational,
    })
}

/// The printed closed form for the Jacobian-type count, reported as an
/// exact fraction with an integrality flag; no correction is applied when
/// it fails to be integral.
#[derive(Debug, Clone, Serialize)]
pub struct JacobianFormula {
    pub numerator: i64,
    pub denominator: i64,
    pub integral: bool,
    pub value: Option<i64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CensusReport {
    pub p: i64,
    pub s_p2: i64,
    pub product_type_count: i64,
    pub jacobian_as_printed: JacobianFormula,
}

/// Census of product-type vertices at p: the supersingular j-invariant
/// count by the mass formula, and S(S+1)/2 products.
pub fn vertex_census(p: i64) -> Result<CensusReport, ReportError> {
    if !is_prime(p) {
        return Err(ReportError::NotPrime(p));
    }
    if p <= 5 {
        return Err(ReportError::BadPrime { p, cond: "p > 5" });
    }
    let correction = match p % 12 {
        1 => 0,
        5 | 7 => 1,
        11 => 2,
        _ => unreachable!("p > 3 is coprime to 12"),
    };
    let s = p / 12 + correction;
    let product = s * (s + 1) / 2;
    let num = p * p * p + 24 * p * p + 141 * p - 346;
    let den = 2880;
    let integral = num % den == 0;
    Ok(CensusReport {
        p,
        s_p2: s,
        product_type_count: product,
        jacobian_as_printed: JacobianFormula {
            numerator: num,
            denominator: den,
            integral,
            value: if integral { Some(num / den) } else { None },
        },
    })
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_e1728_5() {
        let t = neighbor_table(VertexCase::E1728Sq, 5, None).unwrap();
        let mut rows: Vec<(String, u64, u64)> = t
            .rows
            .iter()
            .map(|r| (r.class.clone(), r.vertices, r.multiplicity))
            .collect();
        rows.sort();
        let mut want: Vec<(String, u64, u64)> = vec![
            ("Dc".into(), 2, 8),
            ("Dd".into(), 2, 4),
            ("De".into(), 1, 8),
            ("Nb".into(), 1, 4),
            ("Nc-1".into(), 2, 8),
            ("Nc-2".into(), 2, 16),
            ("Nd-1".into(), 4, 16),
            ("Nd-2".into(), 0, 32),
        ];
        want.sort();
        assert_eq!(rows, want);
        assert_eq!(t.loops.len(), 8);
    }

    #[test]
    fn table_e1728_2() {
        let t = neighbor_table(VertexCase::E1728Sq, 2, None).unwrap();
        let shape = t.shape();
        assert_eq!(shape.diag, vec![(1, 4), (1, 4)]);
        assert_eq!(shape.nondiag, vec![(1, 4)]);
        assert_eq!(shape.loops, 3);
    }

    #[test]
    fn table_e0_3() {
        let t = neighbor_table(VertexCase::E0Sq, 3, None).unwrap();
        let shape = t.shape();
        assert_eq!(shape.diag, vec![(1, 6), (1, 9)]);
        assert_eq!(shape.nondiag, vec![(1, 6), (1, 18)]);
        assert_eq!(shape.loops, 1);
    }

    #[test]
    fn verify_small() {
        let report = verify_tables(7).unwrap();
        for c in &report.checks {
            assert!(c.pass, "{}: {}", c.name, c.detail);
        }
        assert!(report.checks.len() > 30);
    }

    #[test]
    fn elliptic_examples() {
        let n = elliptic_neighborhood(CurveTag::E1728, 5, 103).unwrap();
        assert_eq!((n.vertices, n.edges_per_vertex, n.loops), (2, 2, 2));
        assert_eq!(n.fp_rational_vertices, 0);

        let n = elliptic_neighborhood(CurveTag::E1728, 3, 47).unwrap();
        assert_eq!((n.vertices, n.edges_per_vertex, n.loops), (2, 2, 0));

        let n = elliptic_neighborhood(CurveTag::E0, 5, 101).unwrap();
        assert_eq!((n.vertices, n.edges_per_vertex, n.loops), (2, 3, 0));

        assert!(matches!(
            elliptic_neighborhood(CurveTag::E1728, 5, 13),
            Err(ReportError::BadPrime { .. })
        ));
        assert!(matches!(
            elliptic_neighborhood(CurveTag::E1728, 5, 23),
            Err(ReportError::PTooSmall { .. })
        ));
    }

    #[test]
    fn gram_loops_agree_all_stated_combinations() {
        // every (p, l) pair with p large enough for the subring reduction
        for (case, ps, ells) in [
            (VertexCase::E1728Sq, vec![23i64, 103], vec![2u64, 5, 7]),
            (VertexCase::E0Sq, vec![11, 101], vec![2, 3, 5]),
        ] {
            for &p in &ps {
                let order = crate::hermitian::order_for_case(case, p).unwrap();
                for &ell in &ells {
                    let bound = if case == VertexCase::E1728Sq { 4 * ell } else { 3 * ell };
                    if p <= bound as i64 {
                        continue;
                    }
                    assert!(
                        gram_loops_agree(&order, case, ell).unwrap(),
                        "{case:?} p={p} l={ell}"
                    );
                }
            }
        }
    }

    #[test]
    fn elliptic_degree_identity_sweep() {
        // edges * vertices + loops = l + 1 across valid parameters
        // (asserted inside the constructor; this drives a range of cases)
        for (ell, p) in [(3u64, 47i64), (5, 103), (7, 199), (11, 487), (13, 1103)] {
            let n = elliptic_neighborhood(CurveTag::E1728, ell, p).unwrap();
            assert_eq!(n.edges_per_vertex * n.vertices + n.loops, ell + 1);
        }
        for (ell, p) in [(5u64, 101i64), (7, 149), (11, 383), (13, 509)] {
            let n = elliptic_neighborhood(CurveTag::E0, ell, p).unwrap();
            assert_eq!(n.edges_per_vertex * n.vertices + n.loops, ell + 1);
        }
    }

    #[test]
    fn census_examples() {
        let c = vertex_census(11).unwrap();
        assert_eq!((c.s_p2, c.product_type_count), (2, 3));
        assert!(!c.jacobian_as_printed.integral);

        let c = vertex_census(23).unwrap();
        assert_eq!((c.s_p2, c.product_type_count), (3, 6));

        let c = vertex_census(13).unwrap();
        assert_eq!((c.s_p2, c.product_type_count), (1, 1));
        assert!(!c.jacobian_as_printed.integral);

        assert!(vertex_census(5).is_err());
        assert!(vertex_census(9).is_err());
    }

    #[test]
    fn json_schema_fields() {
        let t = neighbor_table(VertexCase::E1728Sq, 5, None).unwrap();
        let json = to_json(&t);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(v.get("case").is_some());
        assert!(v.get("ell").is_some());
        assert!(v.get("scenario").is_some());
        assert!(v["rows"].as_array().unwrap()[0].get("class").is_some());
        assert!(v["rows"].as_array().unwrap()[0].get("vertices").is_some());
        assert!(v["rows"].as_array().unwrap()[0].get("multiplicity").is_some());
        assert!(v["loops"].as_array().unwrap()[0].get("kernel").is_some());
        assert!(v.get("scenario").unwrap().is_null());
    }

    #[test]
    fn csv_header() {
        let t = neighbor_table(VertexCase::PairDistinct, 3, Some(Scenario::NoSmallIsogeny)).unwrap();
        let csv = t.to_csv();
        assert!(csv.starts_with("case,ell,class,vertices,multiplicity\n"));
        // empty-table export still carries the header
        let empty = NeighborTable {
            case: VertexCase::E1728Sq,
            ell: 5,
            scenario: None,
            rows: vec![],
            loops: vec![],
        };
        assert_eq!(empty.to_csv(), "case,ell,class,vertices,multiplicity\n");
        let json = to_json(&empty);
        assert!(json.contains("\"rows\": []"));
    }

    #[test]
    fn sigma_consistency_with_num() {
        assert_eq!(crate::num::sigma(28), 56);
    }
}
