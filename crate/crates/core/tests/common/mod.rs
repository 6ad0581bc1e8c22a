//! Oracles and generators shared by the integration tests. Nothing here
//! calls the library's determinant, matching or elimination code.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use ssc_core::pattern::{ColorId, ColoredPatternMatrix, ColoredSystem, Entry};
use ssc_core::rational::RationalMatrix;
use ssc_core::symbolic::ColorPolynomial;

/// Monomial as sorted `(name, exponent)` pairs.
pub type Mono = Vec<(String, u32)>;
pub type Poly = BTreeMap<Mono, i64>;

fn mono_mul(a: &Mono, b: &Mono) -> Mono {
    let mut m: BTreeMap<String, u32> = a.iter().cloned().collect();
    for (v, e) in b {
        *m.entry(v.clone()).or_default() += e;
    }
    m.into_iter().collect()
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            *out.entry(mono_mul(ma, mb)).or_default() += ca * cb;
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

fn poly_add_scaled(acc: &mut Poly, p: &Poly, s: i64) {
    for (m, c) in p {
        *acc.entry(m.clone()).or_default() += s * c;
    }
    acc.retain(|_, c| *c != 0);
}

fn entry_poly(e: Entry) -> Option<Poly> {
    e.color()
        .map(|c| Poly::from([(vec![(c.to_string(), 1)], 1)]))
}

/// Determinant by Laplace expansion along the first row.
pub fn cofactor_det(grid: &[Vec<Entry>]) -> Poly {
    let n = grid.len();
    if n == 0 {
        return Poly::from([(Mono::new(), 1)]);
    }
    let mut acc = Poly::new();
    for j in 0..n {
        let Some(e) = entry_poly(grid[0][j]) else {
            continue;
        };
        let minor: Vec<Vec<Entry>> = grid[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != j)
                    .map(|(_, v)| *v)
                    .collect()
            })
            .collect();
        let term = poly_mul(&e, &cofactor_det(&minor));
        poly_add_scaled(&mut acc, &term, if j % 2 == 0 { 1 } else { -1 });
    }
    acc
}

pub fn library_poly(p: &ColorPolynomial) -> Poly {
    p.terms()
        .map(|(m, c)| {
            let mono = m
                .factors()
                .iter()
                .map(|(v, e)| (v.to_string(), *e))
                .collect();
            (mono, i64::try_from(c.clone()).expect("small coefficient"))
        })
        .collect()
}

pub fn poly_from(terms: &[(&[(&str, u32)], i64)]) -> Poly {
    terms
        .iter()
        .map(|(m, c)| (m.iter().map(|(v, e)| (v.to_string(), *e)).collect(), *c))
        .collect()
}

/// Rank by textbook Gaussian elimination over the rationals.
pub fn gauss_rank(m: &RationalMatrix) -> usize {
    let mut a = m.to_rows();
    let rows = m.rows();
    let mut rank = 0;
    for c in 0..m.cols() {
        let Some(p) = (rank..rows).find(|&r| !a[r][c].is_zero()) else {
            continue;
        };
        a.swap(p, rank);
        let pivot = a[rank][c].clone();
        let pivot_row = a[rank].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != rank && !row[c].is_zero() {
                let f = &row[c] / &pivot;
                for (v, p) in row.iter_mut().zip(&pivot_row).skip(c) {
                    *v -= p * &f;
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Permutation sign from the definition: parity of the inversion count.
pub fn inversion_sign(gamma: &[usize]) -> i8 {
    let mut inv = 0;
    for i in 0..gamma.len() {
        for j in i + 1..gamma.len() {
            if gamma[i] > gamma[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Random grid with every cell nonzero with probability `density`, colored
/// uniformly among `k` nonzero and `l` arbitrary colors. Unused labels are
/// closed up by `canonicalize`.
pub fn random_pattern(
    rng: &mut ChaCha8Rng,
    rows: usize,
    cols: usize,
    density: f64,
    k: u32,
    l: u32,
) -> ColoredPatternMatrix {
    assert!(k + l >= 1);
    let grid = (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| {
                    if !rng.gen_bool(density) {
                        return Entry::Zero;
                    }
                    let pick = rng.gen_range(0..k + l);
                    Entry::Colored(if pick < k {
                        ColorId::star(pick + 1)
                    } else {
                        ColorId::question(pick - k + 1)
                    })
                })
                .collect()
        })
        .collect();
    ColoredPatternMatrix::canonicalize(grid)
        .expect("random grid is rectangular")
        .0
}

/// `(k, l)` with `1 <= k + l <= budget`.
pub fn random_budget(rng: &mut ChaCha8Rng, budget: u32) -> (u32, u32) {
    let total = rng.gen_range(1..=budget);
    let k = rng.gen_range(0..=total);
    (k, total - k)
}

pub fn random_system(rng: &mut ChaCha8Rng, n: usize, m: usize, density: f64) -> ColoredSystem {
    let (k, l) = random_budget(rng, 4);
    ColoredSystem::new(random_pattern(rng, n, n + m, density, k, l), n).unwrap()
}

/// `[M | D]` where `D` is the `p x p` diagonal indicator of `black`.
pub fn with_indicator(m: &RationalMatrix, black: &BTreeSet<usize>) -> RationalMatrix {
    let p = m.rows();
    let mut d = RationalMatrix::zeros(p, p);
    for &v in black {
        d.set(v, v, BigRational::one());
    }
    m.hconcat(&d).unwrap()
}

pub fn grid(rows: &[&str]) -> Vec<Vec<Entry>> {
    rows.iter()
        .map(|r| r.split_whitespace().map(|t| t.parse().unwrap()).collect())
        .collect()
}

pub const FIVE_STATE: [&str; 5] = [
    "0 0 c1 0 0 c1 0",
    "0 g2 0 c2 g1 c2 c1",
    "c1 0 g2 0 0 0 0",
    "g1 g1 c1 c1 0 0 0",
    "c2 c2 0 0 0 0 0",
];

pub const FIVE_STATE_BARRED: [&str; 5] = [
    "c3 0 c1 0 0 c1 0",
    "0 g2 0 c2 g1 c2 c1",
    "c1 0 g3 0 0 0 0",
    "g1 g1 c1 g4 0 0 0",
    "c2 c2 0 0 c4 0 0",
];

pub const TWO_STATE: [&str; 2] = ["c1 c1 c2", "c1 0 c2"];

pub const SQUARE3: [&str; 3] = ["c1 0 g2", "g1 g1 c1", "c2 c2 0"];

pub const NOT_COLORABLE_FULL_RANK: [&str; 3] = ["c1 c2 c3 0", "0 c2 0 c2", "c1 0 c2 c3"];

pub fn five_state() -> ColoredSystem {
    ColoredSystem::new(ColoredPatternMatrix::from_tokens(&FIVE_STATE).unwrap(), 5).unwrap()
}

pub fn two_state() -> ColoredSystem {
    ColoredSystem::new(ColoredPatternMatrix::from_tokens(&TWO_STATE).unwrap(), 2).unwrap()
}

/// 1-based vertex list to a 0-based set.
pub fn set1(vs: &[usize]) -> BTreeSet<usize> {
    vs.iter().map(|v| v - 1).collect()
}
