//! Perfect matchings of the colored bipartite graph of a square colored
//! pattern matrix, and the matching-based nonsingularity test.
//!
//! For a `t x t` matrix `N`, column `i` is vertex `x_i` and row `j` is vertex
//! `y_j`; the edge `{x_i, y_j}` exists iff `N[j][i]` is not `0`. A perfect
//! matching is a permutation `gamma` with edges `{x_i, y_gamma(i)}`.
//!
//! The matrix is nonsingular for every member of its class iff the graph has
//! a perfect matching, exactly one spectrum class has nonzero signature, and
//! that class uses only nonzero (`c`) colors.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pattern::{ColorId, ColoredPatternMatrix, Entry};

pub const DEFAULT_MATCHING_BUDGET: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BipartiteEdge {
    /// Column index (0-based).
    pub x: usize,
    /// Row index (0-based).
    pub y: usize,
    pub color: ColorId,
    pub solid: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoredBipartiteGraph {
    size: usize,
    /// `colors[x * size + y]`: color of edge `{x, y}` if present.
    colors: Vec<Option<ColorId>>,
}

impl ColoredBipartiteGraph {
    /// Builds the graph from row-major cells of a `t x t` grid.
    pub(crate) fn from_cells(t: usize, cells: &[Entry]) -> Self {
        debug_assert_eq!(cells.len(), t * t);
        let mut colors = vec![None; t * t];
        for y in 0..t {
            for x in 0..t {
                colors[x * t + y] = cells[y * t + x].color();
            }
        }
        Self { size: t, colors }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn edge(&self, x: usize, y: usize) -> Option<ColorId> {
        self.colors[x * self.size + y]
    }

    pub fn edges(&self) -> Vec<BipartiteEdge> {
        let t = self.size;
        (0..t)
            .flat_map(|x| (0..t).map(move |y| (x, y)))
            .filter_map(|(x, y)| {
                self.edge(x, y).map(|color| BipartiteEdge {
                    x,
                    y,
                    color,
                    solid: color.is_star(),
                })
            })
            .collect()
    }
}

pub fn build_bipartite(m: &ColoredPatternMatrix) -> Result<ColoredBipartiteGraph> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    Ok(ColoredBipartiteGraph::from_cells(m.rows(), m.cells()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PerfectMatching {
    /// `gamma[x] = y`, 0-based.
    pub gamma: Vec<usize>,
    pub sign: i8,
}

/// Parity of a permutation via its cycle decomposition: `(-1)^(t - cycles)`.
pub fn permutation_sign(gamma: &[usize]) -> i8 {
    let mut seen = vec![false; gamma.len()];
    let mut cycles = 0;
    for start in 0..gamma.len() {
        if seen[start] {
            continue;
        }
        cycles += 1;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = gamma[i];
        }
    }
    if (gamma.len() - cycles).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// All perfect matchings in lexicographic order of `gamma`.
///
/// Column-by-column backtracking; a branch is cut as soon as some unmatched
/// row has no edge left to an unassigned column.
pub fn enumerate_perfect_matchings(
    g: &ColoredBipartiteGraph,
    budget: usize,
) -> Result<Vec<PerfectMatching>> {
    let t = g.size;
    let mut out = Vec::new();
    if t == 0 {
        return Ok(out);
    }
    let mut gamma = vec![usize::MAX; t];
    let mut row_used = vec![false; t];
    search(g, 0, &mut gamma, &mut row_used, &mut out, budget)?;
    Ok(out)
}

fn search(
    g: &ColoredBipartiteGraph,
    x: usize,
    gamma: &mut [usize],
    row_used: &mut [bool],
    out: &mut Vec<PerfectMatching>,
    budget: usize,
) -> Result<()> {
    let t = g.size;
    if x == t {
        if out.len() >= budget {
            return Err(Error::BudgetExceeded {
                what: "perfect matching",
                limit: budget,
            });
        }
        out.push(PerfectMatching {
            gamma: gamma.to_vec(),
            sign: permutation_sign(gamma),
        });
        return Ok(());
    }
    for y in 0..t {
        if row_used[y] || g.edge(x, y).is_none() {
            continue;
        }
        gamma[x] = y;
        row_used[y] = true;
        let feasible = (0..t)
            .filter(|&r| !row_used[r])
            .all(|r| (x + 1..t).any(|c| g.edge(c, r).is_some()));
        if feasible {
            search(g, x + 1, gamma, row_used, out, budget)?;
        }
        row_used[y] = false;
        gamma[x] = usize::MAX;
    }
    Ok(())
}

/// Sorted multiset of the edge colors used by a matching.
pub fn spectrum(g: &ColoredBipartiteGraph, m: &PerfectMatching) -> Vec<ColorId> {
    let mut s: Vec<ColorId> = m
        .gamma
        .iter()
        .enumerate()
        .map(|(x, &y)| g.edge(x, y).expect("matching uses graph edges"))
        .collect();
    s.sort();
    s
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceClass {
    pub spectrum: Vec<ColorId>,
    pub members: Vec<PerfectMatching>,
    pub signature: i64,
}

impl EquivalenceClass {
    pub fn is_all_solid(&self) -> bool {
        self.spectrum.iter().all(|c| c.is_star())
    }

    pub fn summary(&self) -> ClassSummary {
        ClassSummary {
            spectrum: self.spectrum.clone(),
            signature: self.signature,
            members: self.members.len(),
        }
    }
}

/// Groups matchings by spectrum; classes come out ordered by spectrum.
pub fn group_equivalence_classes(
    ms: &[PerfectMatching],
    g: &ColoredBipartiteGraph,
) -> Vec<EquivalenceClass> {
    let mut by_spectrum: BTreeMap<Vec<ColorId>, Vec<PerfectMatching>> = BTreeMap::new();
    for m in ms {
        by_spectrum
            .entry(spectrum(g, m))
            .or_default()
            .push(m.clone());
    }
    by_spectrum
        .into_iter()
        .map(|(spectrum, members)| {
            let signature = members.iter().map(|m| m.sign as i64).sum();
            EquivalenceClass {
                spectrum,
                members,
                signature,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassSummary {
    pub spectrum: Vec<ColorId>,
    pub signature: i64,
    pub members: usize,
}

/// Why the test passed, or which of its three conditions failed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NonsingularityWitness {
    /// The unique class with nonzero signature; all of its colors are `c`.
    UniqueSolidClass {
        spectrum: Vec<ColorId>,
        signature: i64,
    },
    /// Condition 1: the graph has no perfect matching.
    NoPerfectMatching,
    /// Condition 2: the number of nonzero-signature classes is not one.
    NonzeroClassCount { nonzero: Vec<ClassSummary> },
    /// Condition 3: the unique nonzero class uses arbitrary-value colors.
    DashedInSpectrum {
        spectrum: Vec<ColorId>,
        dashed: Vec<ColorId>,
    },
}

impl NonsingularityWitness {
    /// 1, 2 or 3 for a failed condition, `None` on success.
    pub fn failed_condition(&self) -> Option<u8> {
        match self {
            Self::UniqueSolidClass { .. } => None,
            Self::NoPerfectMatching => Some(1),
            Self::NonzeroClassCount { .. } => Some(2),
            Self::DashedInSpectrum { .. } => Some(3),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NonsingularityCertificate {
    pub verdict: bool,
    pub matching_count: usize,
    pub classes: Vec<ClassSummary>,
    pub witness: NonsingularityWitness,
}

pub fn is_nonsingular(m: &ColoredPatternMatrix) -> Result<NonsingularityCertificate> {
    is_nonsingular_with(m, DEFAULT_MATCHING_BUDGET)
}

pub fn is_nonsingular_with(
    m: &ColoredPatternMatrix,
    budget: usize,
) -> Result<NonsingularityCertificate> {
    let g = build_bipartite(m)?;
    certify(&g, budget)
}

pub(crate) fn certify(
    g: &ColoredBipartiteGraph,
    budget: usize,
) -> Result<NonsingularityCertificate> {
    let ms = enumerate_perfect_matchings(g, budget)?;
    let classes = group_equivalence_classes(&ms, g);
    let summaries: Vec<ClassSummary> = classes.iter().map(EquivalenceClass::summary).collect();
    let nonzero: Vec<&EquivalenceClass> = classes.iter().filter(|c| c.signature != 0).collect();
    let witness = if ms.is_empty() {
        NonsingularityWitness::NoPerfectMatching
    } else if nonzero.len() != 1 {
        NonsingularityWitness::NonzeroClassCount {
            nonzero: nonzero.iter().map(|c| c.summary()).collect(),
        }
    } else if !nonzero[0].is_all_solid() {
        let mut dashed: Vec<ColorId> = nonzero[0]
            .spectrum
            .iter()
            .copied()
            .filter(|c| !c.is_star())
            .collect();
        dashed.dedup();
        NonsingularityWitness::DashedInSpectrum {
            spectrum: nonzero[0].spectrum.clone(),
            dashed,
        }
    } else {
        NonsingularityWitness::UniqueSolidClass {
            spectrum: nonzero[0].spectrum.clone(),
            signature: nonzero[0].signature,
        }
    };
    Ok(NonsingularityCertificate {
        verdict: witness.failed_condition().is_none(),
        matching_count: ms.len(),
        classes: summaries,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&str]) -> ColoredPatternMatrix {
        ColoredPatternMatrix::from_tokens(rows).unwrap()
    }

    #[test]
    fn sign_by_cycles() {
        assert_eq!(permutation_sign(&[0, 1, 2]), 1);
        assert_eq!(permutation_sign(&[1, 0, 2]), -1);
        assert_eq!(permutation_sign(&[1, 2, 0]), 1);
        assert_eq!(permutation_sign(&[3, 2, 1, 0]), 1);
        assert_eq!(permutation_sign(&[]), 1);
    }

    #[test]
    fn single_solid_edge() {
        let g = build_bipartite(&mat(&["c1"])).unwrap();
        assert_eq!(g.edges().len(), 1);
        assert!(g.edges()[0].solid);
    }

    #[test]
    fn all_zero_has_no_edges_or_matchings() {
        let g = build_bipartite(&mat(&["0 0", "0 0"])).unwrap();
        assert!(g.edges().is_empty());
        assert!(enumerate_perfect_matchings(&g, 10).unwrap().is_empty());
    }

    #[test]
    fn complete_two_by_two() {
        let g = build_bipartite(&mat(&["c1 c1", "c1 c1"])).unwrap();
        let ms = enumerate_perfect_matchings(&g, 10).unwrap();
        let signs: Vec<i8> = ms.iter().map(|m| m.sign).collect();
        assert_eq!(signs, vec![1, -1]);
        let classes = group_equivalence_classes(&ms, &g);
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].signature, 0);
    }

    #[test]
    fn isolated_column_vertex() {
        let g = build_bipartite(&mat(&["c1 0", "c2 0"])).unwrap();
        assert!(enumerate_perfect_matchings(&g, 10).unwrap().is_empty());
        let cert = certify(&g, 10).unwrap();
        assert_eq!(cert.witness.failed_condition(), Some(1));
    }

    #[test]
    fn single_matching_single_class() {
        let g = build_bipartite(&mat(&["0 c1", "g1 0"])).unwrap();
        let ms = enumerate_perfect_matchings(&g, 10).unwrap();
        let classes = group_equivalence_classes(&ms, &g);
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].signature, -1);
    }

    #[test]
    fn failed_conditions() {
        let cert = is_nonsingular(&mat(&["g1"])).unwrap();
        assert!(!cert.verdict);
        assert_eq!(cert.witness.failed_condition(), Some(3));

        let cert = is_nonsingular(&mat(&["c1 c1", "c1 c1"])).unwrap();
        assert!(!cert.verdict);
        assert_eq!(cert.witness.failed_condition(), Some(2));
    }

    #[test]
    fn non_square_rejected() {
        assert!(matches!(
            is_nonsingular(&mat(&["c1 c1"])),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn budget_is_enforced() {
        let g = build_bipartite(&mat(&["c1 c1 c1", "c1 c1 c1", "c1 c1 c1"])).unwrap();
        assert!(matches!(
            enumerate_perfect_matchings(&g, 5),
            Err(Error::BudgetExceeded { limit: 5, .. })
        ));
        assert_eq!(enumerate_perfect_matchings(&g, 6).unwrap().len(), 6);
    }
}
