//! Counting and small-scale enumeration of maximal l^n-isotropic subgroups
//! of (Z/l^n)^4 under the standard symplectic pairing.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IsotropicError {
    #[error("oracle is restricted to l^n <= 9, got l = {ell}, n = {n}")]
    TooLarge { ell: u64, n: u32 },
}

/// Closed-form count of maximal l^n-isotropic subgroups:
/// l^(2n-3) (l^2+1)(l+1) (l^n + (l^(n-1)-1)/(l-1)).
/// For n = 1 this evaluates to (l+1)(l^2+1).
pub fn isotropic_count(ell: u64, n: u32) -> u128 {
    assert!(n >= 1);
    let l = ell as u128;
    let geom = (l.pow(n - 1) - 1) / (l - 1); // 1 + l + ... + l^(n-2), 0 when n = 1
    let bracket = l.pow(n) + geom;
    let tail = (l * l + 1) * (l + 1) * bracket;
    if 2 * n >= 3 {
        l.pow(2 * n - 3) * tail
    } else {
        // n = 1: the l^(2n-3) factor is 1/l and divides the bracket exactly
        assert_eq!(tail % l, 0);
        tail / l
    }
}

/// A subgroup of (Z/l^n)^4 listed by its elements, with its shape as
/// invariant factors (non-increasing orders of a minimal generator set).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct IsotropicSubgroup {
    pub elements: Vec<[u64; 4]>,
    pub shape: Vec<u64>,
}

/// Enumerate all maximal l^n-isotropic subgroups of (Z/l^n)^4 by brute
/// force. Maximal isotropic subgroups have order l^(2n); the standard
/// pairing is <x, y> = x1 y2 - x2 y1 + x3 y4 - x4 y3 mod l^n.
pub fn isotropic_enumerate_oracle(
    ell: u64,
    n: u32,
) -> Result<Vec<IsotropicSubgroup>, IsotropicError> {
    if ell.pow(n) > 9 {
        return Err(IsotropicError::TooLarge { ell, n });
    }
    let m = ell.pow(n);
    let target_order = (m * m) as usize;

    let all: Vec<[u64; 4]> = (0..m.pow(4))
        .map(|i| {
            [
                i % m,
                (i / m) % m,
                (i / (m * m)) % m,
                (i / (m * m * m)) % m,
            ]
        })
        .collect();

    let pair = |x: &[u64; 4], y: &[u64; 4]| -> u64 {
        let mm = m as u128;
        let a = (x[0] as u128 * y[1] as u128 + x[2] as u128 * y[3] as u128) % mm;
        let b = (x[1] as u128 * y[0] as u128 + x[3] as u128 * y[2] as u128) % mm;
        ((a + mm - b) % mm) as u64
    };

    let mut found: std::collections::BTreeSet<Vec<[u64; 4]>> = std::collections::BTreeSet::new();

    // generate subgroups from up to three generators; maximal isotropic
    // subgroups of a rank-4 module need at most 3
    let mut consider = |gens: &[[u64; 4]]| {
        // isotropy on generators suffices by bilinearity
        for a in gens {
            for b in gens {
                if pair(a, b) != 0 {
                    return;
                }
            }
        }
        let sub = span(gens, m);
        if sub.len() == target_order {
            found.insert(sub);
        }
    };

    for a in &all {
        for b in &all {
            consider(&[*a, *b]);
        }
    }
    if n > 1 {
        // three-generator shapes: one generator of each order class
        let low: Vec<[u64; 4]> = all
            .iter()
            .copied()
            .filter(|v| v.iter().all(|&c| c % ell == 0))
            .collect();
        for a in &all {
            for b in &low {
                for c in &low {
                    consider(&[*a, *b, *c]);
                }
            }
        }
    }

    Ok(found
        .into_iter()
        .map(|elements| {
            let shape = subgroup_shape(&elements, m);
            IsotropicSubgroup { elements, shape }
        })
        .collect())
}

/// Closure of a generator list inside (Z/m)^4.
fn span(gens: &[[u64; 4]], m: u64) -> Vec<[u64; 4]> {
    let mut set = std::collections::BTreeSet::new();
    set.insert([0u64; 4]);
    let mut frontier: Vec<[u64; 4]> = vec![[0u64; 4]];
    while let Some(v) = frontier.pop() {
        for g in gens {
            let w = [
                (v[0] + g[0]) % m,
                (v[1] + g[1]) % m,
                (v[2] + g[2]) % m,
                (v[3] + g[3]) % m,
            ];
            if set.insert(w) {
                frontier.push(w);
            }
        }
    }
    set.into_iter().collect()
}

/// Invariant factors of a finite abelian l-group given by its elements:
/// read off from the element-order profile.
fn subgroup_shape(elements: &[[u64; 4]], m: u64) -> Vec<u64> {
    let order_of = |v: &[u64; 4]| -> u64 {
        let mut o = 1u64;
        let mut w = *v;
        while w != [0, 0, 0, 0] {
            for c in 0..4 {
                w[c] = (w[c] + v[c]) % m;
            }
            o += 1;
        }
        o
    };
    // counts of elements of each order determine the abelian group type
    // for groups of rank <= 3; reconstruct greedily
    let mut orders: Vec<u64> = elements.iter().map(order_of).collect();
    orders.sort_unstable();
    let total = elements.len() as u64;
    // try all factorizations of total into at most 3 non-increasing
    // prime-power parts and match element-order counts
    let ell = smallest_prime_factor(m);
    let mut parts: Vec<Vec<u64>> = Vec::new();
    enumerate_factorizations(total, m, ell, &mut Vec::new(), &mut parts);
    for shape in parts {
        if order_profile(&shape, ell) == orders {
            return shape;
        }
    }
    panic!("unrecognized subgroup shape");
}

fn smallest_prime_factor(m: u64) -> u64 {
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            return d;
        }
        d += 1;
    }
    if m > 1 {
        m
    } else {
        1
    }
}

fn enumerate_factorizations(
    total: u64,
    max_part: u64,
    ell: u64,
    acc: &mut Vec<u64>,
    out: &mut Vec<Vec<u64>>,
) {
    if total == 1 {
        if !acc.is_empty() {
            out.push(acc.clone());
        }
        return;
    }
    if acc.len() >= 4 {
        return;
    }
    let mut part = max_part.min(*acc.last().unwrap_or(&max_part));
    while part > 1 {
        if total % part == 0 && part % ell == 0 {
            acc.push(part);
            enumerate_factorizations(total / part, max_part, ell, acc, out);
            acc.pop();
        }
        part /= ell;
    }
}

/// Sorted element-order list of Z/s1 x Z/s2 x ... .
fn order_profile(shape: &[u64], ell: u64) -> Vec<u64> {
    let mut orders = Vec::new();
    let mut idx = vec![0u64; shape.len()];
    loop {
        let o = idx
            .iter()
            .zip(shape)
            .map(|(&i, &s)| {
                if i == 0 {
                    1
                } else {
                    s / gcd(i, s)
                }
            })
            .max()
            .unwrap_or(1);
        orders.push(o);
        // increment mixed-radix counter
        let mut c = 0;
        loop {
            if c == shape.len() {
                orders.sort_unstable();
                return orders;
            }
            idx[c] += 1;
            if idx[c] < shape[c] {
                break;
            }
            idx[c] = 0;
            c += 1;
        }
        let _ = ell;
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
