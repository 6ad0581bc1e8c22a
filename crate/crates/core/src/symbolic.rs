//! Brute-force oracles over the color variables of a square matrix.
//!
//! `symbolic_determinant` expands `det(N)` as an integer polynomial in one
//! variable per color class. Terms are grouped by monomial, which is the same
//! as grouping matchings by spectrum, so a nonsingular class is exactly one
//! whose determinant is a single monomial in `c` variables.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matching::{
    build_bipartite, enumerate_perfect_matchings, ColoredBipartiteGraph, DEFAULT_MATCHING_BUDGET,
};
use crate::pattern::{instantiate, ColorAssignment, ColorId, ColoredPatternMatrix};
use crate::rational::{rat, Rational};
use crate::univariate::rational_roots;

pub const DEFAULT_DETERMINANT_SIZE: usize = 10;
pub const DEFAULT_PERMANENT_SIZE: usize = 12;

/// Product of color variables; exponents are positive and colors sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(Vec<(ColorId, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Self(Vec::new())
    }

    pub fn var(c: ColorId) -> Self {
        Self(vec![(c, 1)])
    }

    pub fn from_colors(colors: impl IntoIterator<Item = ColorId>) -> Self {
        let mut counts: BTreeMap<ColorId, u32> = BTreeMap::new();
        for c in colors {
            *counts.entry(c).or_default() += 1;
        }
        Self(counts.into_iter().collect())
    }

    pub fn factors(&self) -> &[(ColorId, u32)] {
        &self.0
    }

    pub fn degree_in(&self, c: ColorId) -> u32 {
        self.0.iter().find(|(v, _)| *v == c).map_or(0, |(_, e)| *e)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut counts: BTreeMap<ColorId, u32> = self.0.iter().copied().collect();
        for &(c, e) in &other.0 {
            *counts.entry(c).or_default() += e;
        }
        Self(counts.into_iter().collect())
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(c, e)| {
                if *e == 1 {
                    c.to_string()
                } else {
                    format!("{c}^{e}")
                }
            })
            .collect();
        f.write_str(&parts.join("*"))
    }
}

/// Integer polynomial in the color variables. No zero coefficients are
/// stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ColorPolynomial {
    terms: BTreeMap<Monomial, BigInt>,
}

impl ColorPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(v: i64) -> Self {
        Self::term(Monomial::one(), BigInt::from(v))
    }

    pub fn var(c: ColorId) -> Self {
        Self::term(Monomial::var(c), BigInt::one())
    }

    pub fn term(m: Monomial, coeff: BigInt) -> Self {
        let mut p = Self::zero();
        p.add_term(m, coeff);
        p
    }

    pub fn add_term(&mut self, m: Monomial, coeff: BigInt) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry(m).or_insert_with(BigInt::zero);
        *slot += coeff;
        if slot.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn variables(&self) -> Vec<ColorId> {
        let mut vs: Vec<ColorId> = self
            .terms
            .keys()
            .flat_map(|m| m.0.iter().map(|(c, _)| *c))
            .collect();
        vs.sort();
        vs.dedup();
        vs
    }

    pub fn evaluate(&self, a: &ColorAssignment) -> Result<Rational> {
        let mut total = Rational::zero();
        for (m, coeff) in &self.terms {
            let mut v = Rational::from_integer(coeff.clone());
            for &(c, e) in &m.0 {
                let x = a.get(c).ok_or_else(|| Error::MissingColor(c.to_string()))?;
                for _ in 0..e {
                    v *= x;
                }
            }
            total += v;
        }
        Ok(total)
    }

    /// Coefficients (lowest degree first) of the univariate polynomial in
    /// `var` obtained by substituting `a` for every other variable.
    pub fn univariate_in(&self, var: ColorId, a: &ColorAssignment) -> Result<Vec<Rational>> {
        let mut coeffs: Vec<Rational> = Vec::new();
        for (m, coeff) in &self.terms {
            let deg = m.degree_in(var) as usize;
            let mut v = Rational::from_integer(coeff.clone());
            for &(c, e) in &m.0 {
                if c == var {
                    continue;
                }
                let x = a.get(c).ok_or_else(|| Error::MissingColor(c.to_string()))?;
                for _ in 0..e {
                    v *= x;
                }
            }
            if coeffs.len() <= deg {
                coeffs.resize(deg + 1, Rational::zero());
            }
            coeffs[deg] += v;
        }
        Ok(coeffs)
    }
}

impl Add for &ColorPolynomial {
    type Output = ColorPolynomial;

    fn add(self, rhs: &ColorPolynomial) -> ColorPolynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Mul for &ColorPolynomial {
    type Output = ColorPolynomial;

    fn mul(self, rhs: &ColorPolynomial) -> ColorPolynomial {
        let mut out = ColorPolynomial::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &ColorPolynomial {
    type Output = ColorPolynomial;

    fn neg(self) -> ColorPolynomial {
        ColorPolynomial {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl fmt::Display for ColorPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if m.0.is_empty() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{abs}*{m}")?;
            }
        }
        Ok(())
    }
}

/// Sorted `[monomial, coefficient]` pairs; coefficients that do not fit in
/// an i64 are written as decimal strings.
impl Serialize for ColorPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<(String, serde_json::Value)> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let coeff = match c.to_i64() {
                    Some(v) => serde_json::Value::from(v),
                    None => serde_json::Value::from(c.to_string()),
                };
                (m.to_string(), coeff)
            })
            .collect();
        pairs.serialize(s)
    }
}

pub fn symbolic_determinant(m: &ColoredPatternMatrix) -> Result<ColorPolynomial> {
    symbolic_determinant_with(m, DEFAULT_DETERMINANT_SIZE)
}

/// Sum over perfect matchings of `sign * product of edge colors`.
pub fn symbolic_determinant_with(
    m: &ColoredPatternMatrix,
    max_size: usize,
) -> Result<ColorPolynomial> {
    let g = build_bipartite(m)?;
    if g.size() > max_size {
        return Err(Error::BudgetExceeded {
            what: "determinant size",
            limit: max_size,
        });
    }
    let mut det = ColorPolynomial::zero();
    for pm in enumerate_perfect_matchings(&g, DEFAULT_MATCHING_BUDGET)? {
        let colors = pm
            .gamma
            .iter()
            .enumerate()
            .map(|(x, &y)| g.edge(x, y).expect("matching edge"));
        det.add_term(Monomial::from_colors(colors), BigInt::from(pm.sign));
    }
    Ok(det)
}

/// True iff `p` is a single term whose variables are all `c` colors.
pub fn single_solid_monomial(p: &ColorPolynomial) -> bool {
    p.len() == 1
        && p.terms
            .iter()
            .all(|(m, c)| !c.is_zero() && m.0.iter().all(|(v, _)| v.is_star()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SingularSearch {
    /// `det(instantiate(m, assignment)) == 0` with every `c` value nonzero.
    Witness {
        assignment: ColorAssignment,
        /// The determinant polynomial is the zero polynomial.
        identically_zero: bool,
        trial: usize,
    },
    /// No rational witness within the trial budget. This does not mean none
    /// exists.
    Exhausted { trials: usize },
}

fn draw_star(rng: &mut ChaCha8Rng) -> Rational {
    let v: i64 = rng.gen_range(1..=10);
    if rng.gen_bool(0.5) {
        rat(v)
    } else {
        rat(-v)
    }
}

fn draw_question(rng: &mut ChaCha8Rng) -> Rational {
    if rng.gen_bool(0.25) {
        Rational::zero()
    } else {
        draw_star(rng)
    }
}

/// Searches for a singular member of the class: fixes every variable but
/// one at random, then solves exactly for a rational root of the remaining
/// univariate determinant.
pub fn find_singular_assignment(
    m: &ColoredPatternMatrix,
    trials: usize,
    seed: u64,
) -> Result<SingularSearch> {
    let det = symbolic_determinant(m)?;
    let colors = m.colors();
    if det.is_zero() {
        let mut a = ColorAssignment::new();
        for &c in &colors {
            a.set(c, if c.is_star() { rat(1) } else { rat(0) });
        }
        return Ok(SingularSearch::Witness {
            assignment: a,
            identically_zero: true,
            trial: 0,
        });
    }
    let vars = det.variables();
    if vars.is_empty() {
        // Nonzero constant determinant.
        return Ok(SingularSearch::Exhausted { trials });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let var = vars[trial % vars.len()];
        let mut a = ColorAssignment::new();
        for &c in &colors {
            let v = if c.is_star() {
                draw_star(&mut rng)
            } else {
                draw_question(&mut rng)
            };
            a.set(c, v);
        }
        let uni = det.univariate_in(var, &a)?;
        let root = if uni.iter().all(Zero::is_zero) {
            Some(rat(1))
        } else {
            rational_roots(&uni)
                .roots
                .into_iter()
                .map(|(r, _)| r)
                .find(|r| !(var.is_star() && r.is_zero()))
        };
        if let Some(r) = root {
            a.set(var, r);
            debug_assert!(instantiate(m, &a)?.det()?.is_zero());
            return Ok(SingularSearch::Witness {
                assignment: a,
                identically_zero: false,
                trial,
            });
        }
    }
    Ok(SingularSearch::Exhausted { trials })
}

pub fn permanent_01(g: &ColoredBipartiteGraph) -> Result<u128> {
    permanent_01_with(g, DEFAULT_PERMANENT_SIZE)
}

/// Number of perfect matchings by inclusion-exclusion over column subsets:
/// `perm(A) = sum_S (-1)^(t-|S|) prod_y sum_{x in S} A[y][x]`.
pub fn permanent_01_with(g: &ColoredBipartiteGraph, max_size: usize) -> Result<u128> {
    let t = g.size();
    if t > max_size {
        return Err(Error::BudgetExceeded {
            what: "permanent size",
            limit: max_size,
        });
    }
    if t == 0 {
        return Ok(1);
    }
    let mut total: i128 = 0;
    for subset in 1u32..(1 << t) {
        let mut prod: i128 = 1;
        for y in 0..t {
            let row_sum = (0..t)
                .filter(|&x| subset & (1 << x) != 0 && g.edge(x, y).is_some())
                .count() as i128;
            prod *= row_sum;
            if prod == 0 {
                break;
            }
        }
        if (t - subset.count_ones() as usize).is_multiple_of(2) {
            total += prod;
        } else {
            total -= prod;
        }
    }
    Ok(total as u128)
}
