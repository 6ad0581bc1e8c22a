//! Controllability decision for colored structured systems, plus the exact
//! Kalman oracle and seeded sampling used to refute a class.
//!
//! `(A, B, coloring)` is controllable for every member of its class if the
//! graphs of both `[A B]` and the barred matrix `[Ā B]` are colorable. The
//! condition is only sufficient: failure yields `Inconclusive`, never
//! "uncontrollable". A class is refuted only by an explicit member that fails
//! the Kalman rank test.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::color_rule::{is_colorable_with, Colorability, SearchOptions};
use crate::error::{Error, Result};
use crate::pattern::{
    build_barred, instantiate, ColorAssignment, ColorId, ColoredPatternMatrix, ColoredSystem,
    Renumbering,
};
use crate::rational::{rat, Rational, RationalMatrix};
use crate::univariate::rational_roots;

/// `[B, AB, ..., A^(n-1) B]`.
pub fn controllability_matrix(a: &RationalMatrix, b: &RationalMatrix) -> Result<RationalMatrix> {
    let n = a.rows();
    if a.cols() != n || b.rows() != n {
        return Err(Error::Dimension(format!(
            "A is {}x{}, B is {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let mut block = b.clone();
    let mut out = b.clone();
    for _ in 1..n {
        block = a.mul(&block)?;
        out = out.hconcat(&block)?;
    }
    Ok(out)
}

pub fn kalman_controllable(a: &RationalMatrix, b: &RationalMatrix) -> Result<bool> {
    Ok(controllability_matrix(a, b)?.rank() == a.rows())
}

/// Coefficients of `det(xI - A)`, lowest degree first (Faddeev-LeVerrier).
pub fn characteristic_polynomial(a: &RationalMatrix) -> Result<Vec<Rational>> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let mut coeffs = vec![Rational::zero(); n + 1];
    coeffs[n] = Rational::one();
    let id = RationalMatrix::identity(n);
    let mut m = RationalMatrix::zeros(n, n);
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        m = a.mul(&m)?.add(&id.scale(&coeffs[n - k + 1]))?;
        let amk = a.mul(&m)?;
        let trace: Rational = (0..n).map(|i| amk.get(i, i).clone()).sum();
        coeffs[n - k] = -trace / rat(k as i64);
    }
    Ok(coeffs)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EigenCheck {
    #[serde(serialize_with = "ser_rational")]
    pub eigenvalue: Rational,
    pub multiplicity: usize,
    /// `rank [λI - A, B] == n`.
    pub full_rank: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HautusReport {
    pub checks: Vec<EigenCheck>,
    /// Every eigenvalue (with multiplicity) is rational, so the checks are
    /// a complete Hautus test.
    pub all_eigenvalues_rational: bool,
}

impl HautusReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.full_rank)
    }
}

fn ser_rational<S: serde::Serializer>(v: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// Hautus rank test at every rational eigenvalue of `A`.
pub fn hautus_rational(a: &RationalMatrix, b: &RationalMatrix) -> Result<HautusReport> {
    let n = a.rows();
    let roots = rational_roots(&characteristic_polynomial(a)?);
    let id = RationalMatrix::identity(n);
    let checks = roots
        .roots
        .iter()
        .map(|(lambda, mult)| {
            let pencil = id.scale(lambda).sub(a)?.hconcat(b)?;
            Ok(EigenCheck {
                eigenvalue: lambda.clone(),
                multiplicity: *mult,
                full_rank: pencil.rank() == n,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HautusReport {
        all_eigenvalues_rational: roots.complete && roots.total_multiplicity() == n,
        checks,
    })
}

/// Seeded recipe for drawing members of a colored pattern class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SamplePlan {
    pub seed: u64,
    pub trials: usize,
    /// Values for `c` colors; must not contain zero.
    #[serde(skip)]
    pub star_pool: Vec<Rational>,
    /// Nonzero values for `g` colors, used when zero is not drawn.
    #[serde(skip)]
    pub question_pool: Vec<Rational>,
    /// Probability (in quarters, 0..=4) that a `g` color is zero.
    pub question_zero_quarters: u8,
}

impl SamplePlan {
    /// Integers in `[-10, 10]`; `g` colors are zero with probability 1/4.
    pub fn new(seed: u64, trials: usize) -> Self {
        let pool: Vec<Rational> = (-10..=10).filter(|&v| v != 0).map(rat).collect();
        Self {
            seed,
            trials,
            star_pool: pool.clone(),
            question_pool: pool,
            question_zero_quarters: 1,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    pub fn draw(&self, rng: &mut ChaCha8Rng, colors: &BTreeSet<ColorId>) -> ColorAssignment {
        let mut a = ColorAssignment::new();
        for &c in colors {
            let v = if c.is_star() {
                self.star_pool[rng.gen_range(0..self.star_pool.len())].clone()
            } else if rng.gen_range(0..4u8) < self.question_zero_quarters {
                Rational::zero()
            } else {
                self.question_pool[rng.gen_range(0..self.question_pool.len())].clone()
            };
            a.set(c, v);
        }
        a
    }

    /// The first `trials` assignments for `colors`.
    pub fn assignments(&self, colors: &BTreeSet<ColorId>) -> Vec<ColorAssignment> {
        let mut rng = self.rng();
        (0..self.trials)
            .map(|_| self.draw(&mut rng, colors))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SystemCounterexample {
    pub trial: usize,
    pub assignment: ColorAssignment,
    pub a: RationalMatrix,
    pub b: RationalMatrix,
    pub controllability_rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SystemSampleReport {
    pub seed: u64,
    pub trials_run: usize,
    pub counterexample: Option<SystemCounterexample>,
}

/// Splits a realization of `[A B]` into `(A, B)`.
pub fn split_system(
    sys: &ColoredSystem,
    a: &ColorAssignment,
) -> Result<(RationalMatrix, RationalMatrix)> {
    let full = instantiate(sys.matrix(), a)?;
    let n = sys.state_dim();
    Ok((full.columns(0..n), full.columns(n..full.cols())))
}

pub fn refute_by_sampling(sys: &ColoredSystem, plan: &SamplePlan) -> Result<SystemSampleReport> {
    let colors = sys.matrix().colors();
    let mut rng = plan.rng();
    for trial in 0..plan.trials {
        let assignment = plan.draw(&mut rng, &colors);
        let (a, b) = split_system(sys, &assignment)?;
        let rank = controllability_matrix(&a, &b)?.rank();
        if rank < sys.state_dim() {
            return Ok(SystemSampleReport {
                seed: plan.seed,
                trials_run: trial + 1,
                counterexample: Some(SystemCounterexample {
                    trial,
                    assignment,
                    a,
                    b,
                    controllability_rank: rank,
                }),
            });
        }
    }
    Ok(SystemSampleReport {
        seed: plan.seed,
        trials_run: plan.trials,
        counterexample: None,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankCounterexample {
    pub trial: usize,
    pub assignment: ColorAssignment,
    pub matrix: RationalMatrix,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankSampleReport {
    pub seed: u64,
    pub trials_run: usize,
    pub counterexample: Option<RankCounterexample>,
}

pub fn refute_fullrank_by_sampling(
    m: &ColoredPatternMatrix,
    plan: &SamplePlan,
) -> Result<RankSampleReport> {
    if m.rows() > m.cols() {
        return Err(Error::TooManyRows {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let colors = m.colors();
    let mut rng = plan.rng();
    for trial in 0..plan.trials {
        let assignment = plan.draw(&mut rng, &colors);
        let matrix = instantiate(m, &assignment)?;
        let rank = matrix.rank();
        if rank < m.rows() {
            return Ok(RankSampleReport {
                seed: plan.seed,
                trials_run: trial + 1,
                counterexample: Some(RankCounterexample {
                    trial,
                    assignment,
                    matrix,
                    rank,
                }),
            });
        }
    }
    Ok(RankSampleReport {
        seed: plan.seed,
        trials_run: plan.trials,
        counterexample: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    SufficientControllable,
    Inconclusive,
    RefutedBySample,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// The graph of `[A B]`.
    Original,
    /// The graph of `[Ā B]`.
    Barred,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub status: VerdictStatus,
    pub original: Colorability,
    pub barred: Colorability,
    /// `[Ā B]` as token rows.
    pub barred_matrix: Vec<String>,
    pub barred_renumbering: Vec<Renumbering>,
    pub failed_sides: Vec<Side>,
    pub sampling: Option<SystemSampleReport>,
}

/// Runs the graph test on both `[A B]` and `[Ā B]`.
pub fn check_controllability(sys: &ColoredSystem) -> Result<Verdict> {
    check_controllability_with(sys, &SearchOptions::default())
}

pub fn check_controllability_with(sys: &ColoredSystem, opts: &SearchOptions) -> Result<Verdict> {
    let barred = build_barred(sys);
    let original = is_colorable_with(sys.matrix(), opts)?;
    let barred_col = is_colorable_with(barred.system.matrix(), opts)?;
    let mut failed_sides = Vec::new();
    if !original.colorable {
        failed_sides.push(Side::Original);
    }
    if !barred_col.colorable {
        failed_sides.push(Side::Barred);
    }
    Ok(Verdict {
        status: if failed_sides.is_empty() {
            VerdictStatus::SufficientControllable
        } else {
            VerdictStatus::Inconclusive
        },
        original,
        barred: barred_col,
        barred_matrix: barred
            .system
            .matrix()
            .to_string()
            .lines()
            .map(str::to_owned)
            .collect(),
        barred_renumbering: barred.renumbering,
        failed_sides,
        sampling: None,
    })
}

/// `check_controllability`, then sampling when the graph test is
/// inconclusive. A sampled Kalman failure turns the verdict into
/// `RefutedBySample`.
pub fn decide(sys: &ColoredSystem, opts: &SearchOptions, plan: &SamplePlan) -> Result<Verdict> {
    let mut verdict = check_controllability_with(sys, opts)?;
    if verdict.status == VerdictStatus::Inconclusive && plan.trials > 0 {
        let report = refute_by_sampling(sys, plan)?;
        if report.counterexample.is_some() {
            verdict.status = VerdictStatus::RefutedBySample;
        }
        verdict.sampling = Some(report);
    }
    Ok(verdict)
}
