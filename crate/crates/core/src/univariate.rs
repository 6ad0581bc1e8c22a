//! Rational roots of univariate polynomials with rational coefficients.
//!
//! Coefficients are stored lowest degree first.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::rational::Rational;

/// Largest absolute coefficient whose divisors we enumerate.
const DIVISOR_LIMIT: u64 = 1 << 40;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootSet {
    /// Distinct rational roots with multiplicity, ascending.
    pub roots: Vec<(Rational, usize)>,
    /// False if a coefficient was too large to enumerate candidates, in
    /// which case nonzero roots may be missing.
    pub complete: bool,
}

impl RootSet {
    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|(_, m)| m).sum()
    }
}

pub fn trim(coeffs: &[Rational]) -> Vec<Rational> {
    let mut v = coeffs.to_vec();
    while v.last().is_some_and(Zero::is_zero) {
        v.pop();
    }
    v
}

pub fn eval(coeffs: &[Rational], x: &Rational) -> Rational {
    coeffs
        .iter()
        .rev()
        .fold(Rational::zero(), |acc, c| acc * x + c)
}

/// Divides by `(x - r)`, assuming `r` is a root.
fn deflate(coeffs: &[Rational], r: &Rational) -> Vec<Rational> {
    let n = coeffs.len();
    let mut out = vec![Rational::zero(); n - 1];
    let mut carry = Rational::zero();
    for i in (1..n).rev() {
        carry = &coeffs[i] + carry * r;
        out[i - 1] = carry.clone();
    }
    out
}

fn divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let n = n.abs().to_u64()?;
    if n > DIVISOR_LIMIT {
        return None;
    }
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            small.push(BigInt::from(d));
            if d * d != n {
                large.push(BigInt::from(n / d));
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    Some(small)
}

/// All rational roots of a nonzero polynomial. Panics on the zero
/// polynomial, which has every number as a root.
pub fn rational_roots(coeffs: &[Rational]) -> RootSet {
    let mut p = trim(coeffs);
    assert!(!p.is_empty(), "zero polynomial has no finite root set");
    let mut roots = Vec::new();
    let zero_mult = p.iter().take_while(|c| c.is_zero()).count();
    if zero_mult > 0 {
        p.drain(..zero_mult);
        roots.push((Rational::zero(), zero_mult));
    }
    if p.len() == 1 {
        return RootSet {
            roots,
            complete: true,
        };
    }

    // Integer coefficients with the same roots.
    let lcm = p.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = p.iter().map(|c| c.numer() * (&lcm / c.denom())).collect();
    let (Some(ps), Some(qs)) = (divisors(&ints[0]), divisors(ints.last().unwrap())) else {
        return RootSet {
            roots,
            complete: false,
        };
    };
    let mut candidates: Vec<Rational> = Vec::new();
    for num in &ps {
        for den in &qs {
            if num.gcd(den).is_one() {
                let r = BigRational::new(num.clone(), den.clone());
                candidates.push(-r.clone());
                candidates.push(r);
            }
        }
    }
    candidates.sort();
    candidates.dedup();
    for r in candidates {
        let mut mult = 0;
        while p.len() > 1 && eval(&p, &r).is_zero() {
            p = deflate(&p, &r);
            mult += 1;
        }
        if mult > 0 {
            roots.push((r, mult));
        }
    }
    roots.sort_by(|a, b| a.0.cmp(&b.0));
    RootSet {
        roots,
        complete: true,
    }
}
