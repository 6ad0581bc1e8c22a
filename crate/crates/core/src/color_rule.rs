//! Color change rule on the directed graph of a colored pattern matrix.
//!
//! For a `p x q` matrix `M` (`p <= q`) the vertices are `0..q` and there is
//! an edge `i -> j` iff `M[j][i]` is not `0`; only the first `p` vertices
//! can have incoming edges. Starting from all white, a set `Y` of white
//! vertices turns black when it is a color-perfect white neighbor of some
//! `X`: `|X| = |Y|`, `Y` is exactly the white out-neighborhood of `X`, and
//! the square submatrix `M[Y][X]` passes the matching nonsingularity test.
//! The graph is colorable when some sequence of such steps blackens all of
//! `0..p`, and then every member of the class has full row rank.
//!
//! Vertex indices are 0-based in this API and 1-based in serialized output.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matching::{
    certify, ColoredBipartiteGraph, NonsingularityCertificate, DEFAULT_MATCHING_BUDGET,
};
use crate::pattern::{ColorId, ColoredPatternMatrix};

pub const DEFAULT_STATE_BUDGET: usize = 1 << 20;

/// Bitmask search limits the matrix to this many rows and columns.
pub const MAX_VERTICES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DirectedEdge {
    pub from: usize,
    pub to: usize,
    pub color: ColorId,
    pub solid: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoredDirectedGraph {
    matrix: ColoredPatternMatrix,
    /// Rows reached from each column vertex.
    out: Vec<Vec<usize>>,
}

pub fn build_directed_graph(m: &ColoredPatternMatrix) -> Result<ColoredDirectedGraph> {
    if m.rows() > m.cols() {
        return Err(Error::TooManyRows {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let out = (0..m.cols())
        .map(|i| (0..m.rows()).filter(|&j| !m.get(j, i).is_zero()).collect())
        .collect();
    Ok(ColoredDirectedGraph {
        matrix: m.clone(),
        out,
    })
}

impl ColoredDirectedGraph {
    pub fn vertex_count(&self) -> usize {
        self.matrix.cols()
    }

    pub fn row_count(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ColoredPatternMatrix {
        &self.matrix
    }

    pub fn out_neighbors(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub fn edges(&self) -> Vec<DirectedEdge> {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(from, tos)| {
                tos.iter().map(move |&to| {
                    let color = self.matrix.get(to, from).color().expect("edge has a color");
                    DirectedEdge {
                        from,
                        to,
                        color,
                        solid: color.is_star(),
                    }
                })
            })
            .collect()
    }

    /// Square submatrix `M[Y][X]` with the coloring restricted to its cells.
    fn sub_bipartite(&self, x: &[usize], y: &[usize]) -> ColoredBipartiteGraph {
        ColoredBipartiteGraph::from_cells(x.len(), &self.matrix.sub_cells(y, x))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ColorState {
    pub black: BTreeSet<usize>,
}

impl ColorState {
    pub fn all_white() -> Self {
        Self::default()
    }

    pub fn with_black(black: impl IntoIterator<Item = usize>) -> Self {
        Self {
            black: black.into_iter().collect(),
        }
    }

    pub fn is_white(&self, v: usize) -> bool {
        !self.black.contains(&v)
    }
}

pub fn white_out_neighbors(
    g: &ColoredDirectedGraph,
    x: &BTreeSet<usize>,
    s: &ColorState,
) -> BTreeSet<usize> {
    x.iter()
        .flat_map(|&i| g.out[i].iter().copied())
        .filter(|&j| s.is_white(j))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NeighborFailure {
    EmptySet,
    OutOfRange,
    CardinalityMismatch { x: usize, y: usize },
    NotWhiteNeighborhood,
    Singular,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NeighborCheck {
    pub holds: bool,
    pub failure: Option<NeighborFailure>,
    pub certificate: Option<NonsingularityCertificate>,
}

impl NeighborCheck {
    fn fail(f: NeighborFailure) -> Self {
        Self {
            holds: false,
            failure: Some(f),
            certificate: None,
        }
    }
}

pub fn is_color_perfect_white_neighbor(
    g: &ColoredDirectedGraph,
    x: &BTreeSet<usize>,
    y: &BTreeSet<usize>,
    s: &ColorState,
) -> Result<NeighborCheck> {
    is_color_perfect_white_neighbor_with(g, x, y, s, DEFAULT_MATCHING_BUDGET)
}

pub fn is_color_perfect_white_neighbor_with(
    g: &ColoredDirectedGraph,
    x: &BTreeSet<usize>,
    y: &BTreeSet<usize>,
    s: &ColorState,
    matching_budget: usize,
) -> Result<NeighborCheck> {
    if x.is_empty() || y.is_empty() {
        return Ok(NeighborCheck::fail(NeighborFailure::EmptySet));
    }
    if x.iter().any(|&v| v >= g.vertex_count()) || y.iter().any(|&v| v >= g.row_count()) {
        return Ok(NeighborCheck::fail(NeighborFailure::OutOfRange));
    }
    if x.len() != y.len() {
        return Ok(NeighborCheck::fail(NeighborFailure::CardinalityMismatch {
            x: x.len(),
            y: y.len(),
        }));
    }
    if &white_out_neighbors(g, x, s) != y {
        return Ok(NeighborCheck::fail(NeighborFailure::NotWhiteNeighborhood));
    }
    let xs: Vec<usize> = x.iter().copied().collect();
    let ys: Vec<usize> = y.iter().copied().collect();
    let cert = certify(&g.sub_bipartite(&xs, &ys), matching_budget)?;
    Ok(NeighborCheck {
        holds: cert.verdict,
        failure: (!cert.verdict).then_some(NeighborFailure::Singular),
        certificate: Some(cert),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub x: BTreeSet<usize>,
    pub y: BTreeSet<usize>,
    pub certificate: NonsingularityCertificate,
}

impl Serialize for TraceStep {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Step<'a> {
            x: Vec<usize>,
            y: Vec<usize>,
            certificate: &'a NonsingularityCertificate,
        }
        Step {
            x: self.x.iter().map(|v| v + 1).collect(),
            y: self.y.iter().map(|v| v + 1).collect(),
            certificate: &self.certificate,
        }
        .serialize(s)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DerivationTrace {
    pub steps: Vec<TraceStep>,
}

impl DerivationTrace {
    /// `(X, Y)` pairs, 0-based.
    pub fn pairs(&self) -> Vec<(Vec<usize>, Vec<usize>)> {
        self.steps
            .iter()
            .map(|s| (s.x.iter().copied().collect(), s.y.iter().copied().collect()))
            .collect()
    }

    /// Black set before each step, followed by the final black set.
    pub fn states(&self) -> Vec<BTreeSet<usize>> {
        let mut black = BTreeSet::new();
        let mut out = vec![black.clone()];
        for step in &self.steps {
            black.extend(step.y.iter().copied());
            out.push(black.clone());
        }
        out
    }

    /// Re-checks every step from the all-white state and returns the
    /// derived set.
    pub fn replay(&self, g: &ColoredDirectedGraph) -> Result<BTreeSet<usize>> {
        replay_pairs(g, self.steps.iter().map(|s| (&s.x, &s.y)))
    }
}

/// Replays `(X, Y)` steps (0-based) from all white and returns the derived
/// set, or the first step that is not a color-perfect white neighbor.
pub fn replay_pairs<'a>(
    g: &ColoredDirectedGraph,
    steps: impl IntoIterator<Item = (&'a BTreeSet<usize>, &'a BTreeSet<usize>)>,
) -> Result<BTreeSet<usize>> {
    let mut state = ColorState::all_white();
    for (i, (x, y)) in steps.into_iter().enumerate() {
        if let Some(v) = y.iter().find(|v| !state.is_white(**v)) {
            return Err(Error::InvalidTrace {
                step: i + 1,
                reason: format!("vertex {} is already black", v + 1),
            });
        }
        let check = is_color_perfect_white_neighbor(g, x, y, &state)?;
        if !check.holds {
            return Err(Error::InvalidTrace {
                step: i + 1,
                reason: format!("{:?}", check.failure),
            });
        }
        state.black.extend(y.iter().copied());
    }
    Ok(state.black)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    /// Largest `|X|` tried; `None` means up to the number of rows.
    pub max_x: Option<usize>,
    /// Maximum number of distinct black sets expanded.
    pub state_budget: usize,
    pub matching_budget: usize,
    /// Take the first valid step at each state without backtracking. A
    /// negative answer in this mode is not conclusive.
    pub greedy: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            max_x: None,
            state_budget: DEFAULT_STATE_BUDGET,
            matching_budget: DEFAULT_MATCHING_BUDGET,
            greedy: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Colorability {
    pub colorable: bool,
    /// False when `colorable == false` came from greedy mode.
    pub exhaustive: bool,
    /// A full derivation when colorable; for greedy failures, the steps
    /// taken before getting stuck.
    pub trace: DerivationTrace,
    pub states_explored: usize,
}

impl Colorability {
    pub fn derived_set(&self) -> BTreeSet<usize> {
        self.trace.states().pop().unwrap_or_default()
    }
}

impl Serialize for Colorability {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out<'a> {
            colorable: bool,
            exhaustive: bool,
            derived_set: Vec<usize>,
            states_explored: usize,
            trace: &'a DerivationTrace,
        }
        Out {
            colorable: self.colorable,
            exhaustive: self.exhaustive,
            derived_set: self.derived_set().iter().map(|v| v + 1).collect(),
            states_explored: self.states_explored,
            trace: &self.trace,
        }
        .serialize(s)
    }
}

pub fn is_colorable(m: &ColoredPatternMatrix) -> Result<Colorability> {
    is_colorable_with(m, &SearchOptions::default())
}

pub fn is_colorable_with(m: &ColoredPatternMatrix, opts: &SearchOptions) -> Result<Colorability> {
    let g = build_directed_graph(m)?;
    if g.vertex_count() > MAX_VERTICES {
        return Err(Error::BudgetExceeded {
            what: "vertex count",
            limit: MAX_VERTICES,
        });
    }
    let mut search = Search::new(&g, opts);
    let (colorable, exhaustive, pairs) = if opts.greedy {
        let (done, pairs) = search.greedy()?;
        (done, done, pairs)
    } else {
        match search.dfs(0)? {
            Some(mut pairs) => {
                pairs.reverse();
                (true, true, pairs)
            }
            None => (false, true, Vec::new()),
        }
    };
    let trace = search.materialize(&pairs)?;
    debug_assert!(trace.replay(&g).is_ok());
    Ok(Colorability {
        colorable,
        exhaustive,
        trace,
        states_explored: search.explored,
    })
}

struct Search<'a> {
    g: &'a ColoredDirectedGraph,
    opts: &'a SearchOptions,
    out_mask: Vec<u64>,
    full: u64,
    failed: HashSet<u64>,
    nonsingular: HashMap<(u64, u64), bool>,
    explored: usize,
}

fn bits(mask: u64) -> Vec<usize> {
    (0..64).filter(|b| mask & (1 << b) != 0).collect()
}

impl<'a> Search<'a> {
    fn new(g: &'a ColoredDirectedGraph, opts: &'a SearchOptions) -> Self {
        let out_mask = g
            .out
            .iter()
            .map(|rows| rows.iter().fold(0u64, |m, &r| m | (1 << r)))
            .collect();
        let p = g.row_count();
        let full = if p == 64 { u64::MAX } else { (1u64 << p) - 1 };
        Self {
            g,
            opts,
            out_mask,
            full,
            failed: HashSet::new(),
            nonsingular: HashMap::new(),
            explored: 0,
        }
    }

    fn visit(&mut self) -> Result<()> {
        self.explored += 1;
        if self.explored > self.opts.state_budget {
            return Err(Error::BudgetExceeded {
                what: "colorability state",
                limit: self.opts.state_budget,
            });
        }
        Ok(())
    }

    /// Valid `(X, Y)` masks at `black`, smallest `|X|` first, then
    /// lexicographic in `X`.
    fn candidates(&mut self, black: u64) -> Result<Vec<(u64, u64)>> {
        let white = self.full & !black;
        let eligible: Vec<usize> = (0..self.g.vertex_count())
            .filter(|&c| self.out_mask[c] & white != 0)
            .collect();
        let cap = self
            .opts
            .max_x
            .unwrap_or(usize::MAX)
            .min(white.count_ones() as usize)
            .min(eligible.len());
        let mut found = Vec::new();
        for k in 1..=cap {
            let mut combos = Vec::new();
            self.combos(&eligible, white, k, 0, 0, 0, &mut combos);
            for (xm, ym) in combos {
                if self.step_is_nonsingular(xm, ym)? {
                    found.push((xm, ym));
                }
            }
        }
        Ok(found)
    }

    /// Size-`k` subsets of `eligible` whose white out-neighborhood has
    /// exactly `k` vertices. Branches whose neighborhood already exceeds
    /// `k` are cut.
    #[allow(clippy::too_many_arguments)]
    fn combos(
        &self,
        eligible: &[usize],
        white: u64,
        k: usize,
        start: usize,
        xm: u64,
        ym: u64,
        out: &mut Vec<(u64, u64)>,
    ) {
        let chosen = xm.count_ones() as usize;
        if ym.count_ones() as usize > k {
            return;
        }
        if chosen == k {
            if ym.count_ones() as usize == k {
                out.push((xm, ym));
            }
            return;
        }
        for idx in start..eligible.len() {
            if eligible.len() - idx < k - chosen {
                break;
            }
            let c = eligible[idx];
            self.combos(
                eligible,
                white,
                k,
                idx + 1,
                xm | (1 << c),
                ym | (self.out_mask[c] & white),
                out,
            );
        }
    }

    fn step_is_nonsingular(&mut self, xm: u64, ym: u64) -> Result<bool> {
        if let Some(&v) = self.nonsingular.get(&(xm, ym)) {
            return Ok(v);
        }
        let sub = self.g.sub_bipartite(&bits(xm), &bits(ym));
        let v = certify(&sub, self.opts.matching_budget)?.verdict;
        self.nonsingular.insert((xm, ym), v);
        Ok(v)
    }

    /// Depth-first search over black sets. Returns the steps in reverse.
    fn dfs(&mut self, black: u64) -> Result<Option<Vec<(u64, u64)>>> {
        if black == self.full {
            return Ok(Some(Vec::new()));
        }
        if self.failed.contains(&black) {
            return Ok(None);
        }
        self.visit()?;
        for (xm, ym) in self.candidates(black)? {
            if let Some(mut rest) = self.dfs(black | ym)? {
                rest.push((xm, ym));
                return Ok(Some(rest));
            }
        }
        self.failed.insert(black);
        Ok(None)
    }

    fn greedy(&mut self) -> Result<(bool, Vec<(u64, u64)>)> {
        let mut black = 0u64;
        let mut steps = Vec::new();
        while black != self.full {
            self.visit()?;
            let Some(&(xm, ym)) = self.candidates(black)?.first() else {
                return Ok((false, steps));
            };
            black |= ym;
            steps.push((xm, ym));
        }
        Ok((true, steps))
    }

    fn materialize(&self, pairs: &[(u64, u64)]) -> Result<DerivationTrace> {
        let steps = pairs
            .iter()
            .map(|&(xm, ym)| {
                let (xs, ys) = (bits(xm), bits(ym));
                Ok(TraceStep {
                    certificate: certify(
                        &self.g.sub_bipartite(&xs, &ys),
                        self.opts.matching_budget,
                    )?,
                    x: xs.into_iter().collect(),
                    y: ys.into_iter().collect(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DerivationTrace { steps })
    }
}
