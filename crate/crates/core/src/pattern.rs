//! Colored pattern matrices, colored structured systems and their text/JSON
//! document format.
//!
//! The coloring lives in the grid itself: a cell holds `0`, a nonzero color
//! `c<r>` or an arbitrary-value color `g<s>`. Cells sharing a token form one
//! class of the coloring, so the partition can never drift out of sync with
//! the pattern.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{Rational, RationalMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ColorKind {
    /// `c<r>`: every cell of the class holds the same nonzero value.
    Star,
    /// `g<s>`: every cell of the class holds the same arbitrary value.
    Question,
}

impl ColorKind {
    fn prefix(self) -> char {
        match self {
            ColorKind::Star => 'c',
            ColorKind::Question => 'g',
        }
    }
}

/// A color class label. Ordering puts all `c` colors before all `g` colors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColorId {
    pub kind: ColorKind,
    pub index: u32,
}

impl ColorId {
    pub fn star(index: u32) -> Self {
        assert!(index >= 1, "color indices start at 1");
        Self {
            kind: ColorKind::Star,
            index,
        }
    }

    pub fn question(index: u32) -> Self {
        assert!(index >= 1, "color indices start at 1");
        Self {
            kind: ColorKind::Question,
            index,
        }
    }

    pub fn is_star(self) -> bool {
        self.kind == ColorKind::Star
    }
}

impl fmt::Display for ColorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind.prefix(), self.index)
    }
}

impl Serialize for ColorId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for ColorId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.parse::<Entry>()? {
            Entry::Colored(c) => Ok(c),
            Entry::Zero => Err("`0` is not a color".into()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Entry {
    Zero,
    Colored(ColorId),
}

impl Entry {
    pub fn color(self) -> Option<ColorId> {
        match self {
            Entry::Zero => None,
            Entry::Colored(c) => Some(c),
        }
    }

    pub fn is_zero(self) -> bool {
        self == Entry::Zero
    }
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entry::Zero => f.write_str("0"),
            Entry::Colored(c) => c.fmt(f),
        }
    }
}

impl FromStr for Entry {
    type Err = String;

    /// Grammar: `0 | c<digits> | g<digits>`, digits without leading zeros.
    fn from_str(tok: &str) -> Result<Self, String> {
        if tok == "0" {
            return Ok(Entry::Zero);
        }
        let mut chars = tok.chars();
        let kind = match chars.next() {
            Some('c') => ColorKind::Star,
            Some('g') => ColorKind::Question,
            _ => return Err(format!("malformed token `{tok}`")),
        };
        let digits = chars.as_str();
        if digits.is_empty()
            || !digits.bytes().all(|b| b.is_ascii_digit())
            || digits.starts_with('0')
        {
            return Err(format!("malformed token `{tok}`"));
        }
        let index = digits
            .parse::<u32>()
            .map_err(|_| format!("color index out of range in `{tok}`"))?;
        Ok(Entry::Colored(ColorId { kind, index }))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    MalformedToken,
    MalformedHeader,
    RaggedRow,
    DimensionMismatch,
    EmptyMatrix,
    GappedIndex,
    BadStateDim,
}

/// One violated invariant. `cell` is 1-based `(row, col)` when it applies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub cell: Option<(usize, usize)>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.cell {
            Some((i, j)) => write!(f, "({i},{j}): {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Checks a raw grid against the matrix invariants: nonempty, rectangular,
/// and color indices numbered 1..k (stars) and 1..l (questions) with no gaps.
pub fn validate(grid: &[Vec<Entry>]) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    if grid.is_empty() || grid[0].is_empty() {
        diags.push(Diagnostic {
            kind: DiagnosticKind::EmptyMatrix,
            cell: None,
            message: "matrix must have at least one row and one column".into(),
        });
        return diags;
    }
    let width = grid[0].len();
    for (i, row) in grid.iter().enumerate().skip(1) {
        if row.len() != width {
            diags.push(Diagnostic {
                kind: DiagnosticKind::RaggedRow,
                cell: Some((i + 1, row.len().min(width) + 1)),
                message: format!("row {} has {} entries, expected {width}", i + 1, row.len()),
            });
        }
    }
    diags.extend(gap_diagnostics(grid));
    diags
}

fn gap_diagnostics(grid: &[Vec<Entry>]) -> Vec<Diagnostic> {
    let mut first_seen: BTreeMap<ColorId, (usize, usize)> = BTreeMap::new();
    for (i, row) in grid.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            if let Entry::Colored(c) = e {
                first_seen.entry(*c).or_insert((i + 1, j + 1));
            }
        }
    }
    let mut diags = Vec::new();
    for kind in [ColorKind::Star, ColorKind::Question] {
        let used: Vec<(ColorId, (usize, usize))> = first_seen
            .iter()
            .filter(|(c, _)| c.kind == kind)
            .map(|(c, at)| (*c, *at))
            .collect();
        for (pos, (c, at)) in used.iter().enumerate() {
            let expected = pos as u32 + 1;
            if c.index != expected {
                let suggestion = ColorId {
                    kind,
                    index: expected,
                };
                diags.push(Diagnostic {
                    kind: DiagnosticKind::GappedIndex,
                    cell: Some(*at),
                    message: format!(
                        "gapped color index: {c} used but {suggestion} is missing; renumber {c} -> {suggestion}"
                    ),
                });
            }
        }
    }
    diags
}

/// A `p x q` grid of tokens whose colors are canonically numbered.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ColoredPatternMatrix {
    rows: usize,
    cols: usize,
    cells: Vec<Entry>,
}

impl ColoredPatternMatrix {
    pub fn new(grid: Vec<Vec<Entry>>) -> Result<Self> {
        let diags = validate(&grid);
        if !diags.is_empty() {
            return Err(Error::Invalid(diags));
        }
        let rows = grid.len();
        let cols = grid[0].len();
        let m = Self {
            rows,
            cols,
            cells: grid.into_iter().flatten().collect(),
        };
        debug_assert!(m.partition_is_consistent());
        Ok(m)
    }

    /// Parses whitespace-separated tokens, one row per slice element.
    pub fn from_tokens(rows: &[&str]) -> Result<Self> {
        let grid = rows
            .iter()
            .enumerate()
            .map(|(i, line)| {
                line.split_whitespace()
                    .map(|t| {
                        t.parse::<Entry>().map_err(|message| Error::Parse {
                            line: i + 1,
                            message,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid)
    }

    /// Renumbers colors so each kind uses 1..k without gaps, keeping the
    /// relative order of the original indices. Returns the old -> new map
    /// restricted to colors whose label changed.
    pub fn canonicalize(grid: Vec<Vec<Entry>>) -> Result<(Self, Vec<Renumbering>)> {
        let used: BTreeSet<ColorId> = grid.iter().flatten().filter_map(|e| e.color()).collect();
        let mut map = BTreeMap::new();
        let (mut k, mut l) = (0, 0);
        for c in used {
            let next = match c.kind {
                ColorKind::Star => {
                    k += 1;
                    ColorId::star(k)
                }
                ColorKind::Question => {
                    l += 1;
                    ColorId::question(l)
                }
            };
            map.insert(c, next);
        }
        let grid = grid
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|e| match e {
                        Entry::Colored(c) => Entry::Colored(map[&c]),
                        Entry::Zero => Entry::Zero,
                    })
                    .collect()
            })
            .collect();
        let renumbering = map
            .into_iter()
            .filter(|(from, to)| from != to)
            .map(|(from, to)| Renumbering { from, to })
            .collect();
        Ok((Self::new(grid)?, renumbering))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// 0-based access.
    pub fn get(&self, i: usize, j: usize) -> Entry {
        self.cells[i * self.cols + j]
    }

    pub fn cells(&self) -> &[Entry] {
        &self.cells
    }

    pub fn to_grid(&self) -> Vec<Vec<Entry>> {
        self.cells
            .chunks(self.cols)
            .map(<[Entry]>::to_vec)
            .collect()
    }

    pub fn colors(&self) -> BTreeSet<ColorId> {
        self.cells.iter().filter_map(|e| e.color()).collect()
    }

    /// Number of nonzero-color classes (k).
    pub fn star_classes(&self) -> usize {
        self.colors().iter().filter(|c| c.is_star()).count()
    }

    /// Number of arbitrary-value classes (l).
    pub fn question_classes(&self) -> usize {
        self.colors().iter().filter(|c| !c.is_star()).count()
    }

    /// 0-based locations of one color class.
    pub fn class(&self, color: ColorId) -> Vec<(usize, usize)> {
        (0..self.rows)
            .flat_map(|i| (0..self.cols).map(move |j| (i, j)))
            .filter(|&(i, j)| self.get(i, j) == Entry::Colored(color))
            .collect()
    }

    /// Cells of the submatrix with the given 0-based rows and columns, in
    /// row-major order. Colors keep their labels (no renumbering).
    pub fn sub_cells(&self, rows: &[usize], cols: &[usize]) -> Vec<Entry> {
        rows.iter()
            .flat_map(|&i| cols.iter().map(move |&j| self.get(i, j)))
            .collect()
    }

    fn partition_is_consistent(&self) -> bool {
        // Every colored cell lies in exactly one class.
        let colored = self.cells.iter().filter(|e| !e.is_zero()).count();
        let covered: usize = self.colors().iter().map(|&c| self.class(c).len()).sum();
        colored == covered
    }
}

impl fmt::Display for ColoredPatternMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.cells.chunks(self.cols) {
            let toks: Vec<String> = row.iter().map(Entry::to_string).collect();
            writeln!(f, "{}", toks.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Renumbering {
    pub from: ColorId,
    pub to: ColorId,
}

/// `[A B]` with columns `0..n` forming `A` and `n..n+m` forming `B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoredSystem {
    state_dim: usize,
    matrix: ColoredPatternMatrix,
}

impl ColoredSystem {
    pub fn new(matrix: ColoredPatternMatrix, state_dim: usize) -> Result<Self> {
        if state_dim == 0 || matrix.rows() != state_dim || matrix.cols() <= state_dim {
            return Err(Error::Invalid(vec![Diagnostic {
                kind: DiagnosticKind::BadStateDim,
                cell: None,
                message: format!(
                    "state dimension {state_dim} does not fit a {}x{} matrix (need rows = n, cols > n, n >= 1)",
                    matrix.rows(),
                    matrix.cols()
                ),
            }]));
        }
        Ok(Self { state_dim, matrix })
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn input_dim(&self) -> usize {
        self.matrix.cols() - self.state_dim
    }

    pub fn matrix(&self) -> &ColoredPatternMatrix {
        &self.matrix
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BarredSystem {
    pub system: ColoredSystem,
    /// Maps the fresh-index labels (`c<k+j>`, `g<l+j>`) and any original
    /// labels shifted by dropping empty classes to their canonical labels.
    pub renumbering: Vec<Renumbering>,
    /// Number of diagonal cells that became fresh nonzero colors.
    pub fresh_star: usize,
}

/// Builds `[Ā B]` with its coloring: every diagonal cell of `A` becomes a
/// singleton class, nonzero if `A_ii` was zero and arbitrary otherwise.
/// Off-diagonal cells and `B` keep their colors; classes emptied by removing
/// the diagonal are dropped and the labels renumbered canonically.
pub fn build_barred(sys: &ColoredSystem) -> BarredSystem {
    let m = sys.matrix();
    let n = sys.state_dim();
    let k = m.star_classes() as u32;
    let l = m.question_classes() as u32;
    let mut grid = m.to_grid();
    let (mut next_star, mut next_question) = (k, l);
    let mut fresh_star = 0;
    for (i, row) in grid.iter_mut().enumerate().take(n) {
        row[i] = if row[i].is_zero() {
            next_star += 1;
            fresh_star += 1;
            Entry::Colored(ColorId::star(next_star))
        } else {
            next_question += 1;
            Entry::Colored(ColorId::question(next_question))
        };
    }
    let (matrix, renumbering) =
        ColoredPatternMatrix::canonicalize(grid).expect("barred grid keeps its shape");
    BarredSystem {
        system: ColoredSystem::new(matrix, n).expect("barred matrix keeps its shape"),
        renumbering,
        fresh_star,
    }
}

/// Values for color classes. Nonzero colors must be assigned nonzero values.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ColorAssignment(BTreeMap<ColorId, Rational>);

impl ColorAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, color: ColorId, value: Rational) {
        self.0.insert(color, value);
    }

    pub fn with(mut self, color: ColorId, value: Rational) -> Self {
        self.set(color, value);
        self
    }

    pub fn get(&self, color: ColorId) -> Option<&Rational> {
        self.0.get(&color)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ColorId, &Rational)> {
        self.0.iter()
    }

    pub fn check_covers(&self, colors: impl IntoIterator<Item = ColorId>) -> Result<()> {
        for c in colors {
            match self.0.get(&c) {
                None => return Err(Error::MissingColor(c.to_string())),
                Some(v) if c.is_star() && v.is_zero() => {
                    return Err(Error::ZeroStar(c.to_string()))
                }
                Some(_) => {}
            }
        }
        Ok(())
    }
}

impl Serialize for ColorAssignment {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let m: BTreeMap<String, String> = self
            .0
            .iter()
            .map(|(c, v)| (c.to_string(), v.to_string()))
            .collect();
        m.serialize(s)
    }
}

/// The member of the colored pattern class selected by `a`.
pub fn instantiate(m: &ColoredPatternMatrix, a: &ColorAssignment) -> Result<RationalMatrix> {
    instantiate_cells(m.rows(), m.cols(), m.cells(), a)
}

pub(crate) fn instantiate_cells(
    rows: usize,
    cols: usize,
    cells: &[Entry],
    a: &ColorAssignment,
) -> Result<RationalMatrix> {
    a.check_covers(cells.iter().filter_map(|e| e.color()))?;
    let mut out = RationalMatrix::zeros(rows, cols);
    for (idx, e) in cells.iter().enumerate() {
        if let Entry::Colored(c) = e {
            out.set(idx / cols, idx % cols, a.0[c].clone());
        }
    }
    Ok(out)
}

/// A parsed document: the matrix and, optionally, the state dimension that
/// splits it into `[A B]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternDocument {
    pub matrix: ColoredPatternMatrix,
    pub state_dim: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Envelope {
    rows: usize,
    cols: usize,
    state_dim: Option<usize>,
    entries: Vec<Vec<String>>,
}

impl PatternDocument {
    pub fn system(&self) -> Result<ColoredSystem> {
        let n = self.state_dim.ok_or(Error::MissingStateDim)?;
        ColoredSystem::new(self.matrix.clone(), n)
    }

    /// Accepts either the text format or the JSON envelope.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::parse_json(text)
        } else {
            Self::parse_text(text)
        }
    }

    /// `dims p q [n]` followed by `p` lines of `q` tokens. Blank lines are
    /// ignored.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "empty document".into(),
        })?;
        let (p, q, n) = parse_header(header).map_err(|message| Error::Parse {
            line: hline,
            message,
        })?;
        let mut grid = Vec::with_capacity(p);
        for (lineno, line) in lines {
            let row = line
                .split_whitespace()
                .map(|t| t.parse::<Entry>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|message| Error::Parse {
                    line: lineno,
                    message,
                })?;
            grid.push(row);
        }
        Self::assemble(p, q, n, grid)
    }

    pub fn parse_json(text: &str) -> Result<Self> {
        let env: Envelope = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        let grid = env
            .entries
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .map(|t| t.parse::<Entry>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|message| Error::Parse {
                        line: i + 1,
                        message,
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::assemble(env.rows, env.cols, env.state_dim, grid)
    }

    fn assemble(p: usize, q: usize, n: Option<usize>, grid: Vec<Vec<Entry>>) -> Result<Self> {
        let mut diags = Vec::new();
        if grid.len() != p {
            diags.push(Diagnostic {
                kind: DiagnosticKind::DimensionMismatch,
                cell: None,
                message: format!("header declares {p} rows, found {}", grid.len()),
            });
        }
        for (i, row) in grid.iter().enumerate() {
            if row.len() != q {
                diags.push(Diagnostic {
                    kind: DiagnosticKind::RaggedRow,
                    cell: Some((i + 1, row.len().min(q) + 1)),
                    message: format!("row {} has {} entries, expected {q}", i + 1, row.len()),
                });
            }
        }
        if !diags.is_empty() {
            return Err(Error::Invalid(diags));
        }
        let matrix = ColoredPatternMatrix::new(grid)?;
        if let Some(n) = n {
            ColoredSystem::new(matrix.clone(), n)?;
        }
        Ok(Self {
            matrix,
            state_dim: n,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("dims {} {}", self.matrix.rows(), self.matrix.cols());
        if let Some(n) = self.state_dim {
            out.push_str(&format!(" {n}"));
        }
        out.push('\n');
        out.push_str(&self.matrix.to_string());
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.envelope()).expect("envelope serializes")
    }

    fn envelope(&self) -> Envelope {
        Envelope {
            rows: self.matrix.rows(),
            cols: self.matrix.cols(),
            state_dim: self.state_dim,
            entries: self
                .matrix
                .to_grid()
                .iter()
                .map(|r| r.iter().map(Entry::to_string).collect())
                .collect(),
        }
    }
}

fn parse_header(line: &str) -> Result<(usize, usize, Option<usize>), String> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.first() != Some(&"dims") || !(3..=4).contains(&parts.len()) {
        return Err(format!("expected `dims p q [n]`, got `{line}`"));
    }
    let num = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| format!("bad dimension `{s}` in header"))
    };
    let p = num(parts[1])?;
    let q = num(parts[2])?;
    if p == 0 || q == 0 {
        return Err("dimensions must be positive".into());
    }
    let n = parts.get(3).map(|s| num(s)).transpose()?;
    Ok((p, q, n))
}

/// Collects every problem in a text document instead of stopping at the
/// first. Used by `ssc validate`.
pub fn lint_document(text: &str) -> Vec<Diagnostic> {
    if text.trim_start().starts_with('{') {
        return match PatternDocument::parse_json(text) {
            Ok(_) => Vec::new(),
            Err(e) => error_diagnostics(e),
        };
    }
    let mut diags = Vec::new();
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let Some((_, header)) = lines.next() else {
        return vec![Diagnostic {
            kind: DiagnosticKind::EmptyMatrix,
            cell: None,
            message: "empty document".into(),
        }];
    };
    let dims = match parse_header(header) {
        Ok(d) => Some(d),
        Err(message) => {
            diags.push(Diagnostic {
                kind: DiagnosticKind::MalformedHeader,
                cell: None,
                message,
            });
            None
        }
    };
    let mut grid = Vec::new();
    for (r, (_, line)) in lines.enumerate() {
        let mut row = Vec::new();
        for (c, tok) in line.split_whitespace().enumerate() {
            match tok.parse::<Entry>() {
                Ok(e) => row.push(e),
                Err(message) => {
                    diags.push(Diagnostic {
                        kind: DiagnosticKind::MalformedToken,
                        cell: Some((r + 1, c + 1)),
                        message,
                    });
                    row.push(Entry::Zero);
                }
            }
        }
        grid.push(row);
    }
    if let Some((p, q, n)) = dims {
        if grid.len() != p {
            diags.push(Diagnostic {
                kind: DiagnosticKind::DimensionMismatch,
                cell: None,
                message: format!("header declares {p} rows, found {}", grid.len()),
            });
        }
        for (i, row) in grid.iter().enumerate() {
            if row.len() != q {
                diags.push(Diagnostic {
                    kind: DiagnosticKind::RaggedRow,
                    cell: Some((i + 1, row.len().min(q) + 1)),
                    message: format!("row {} has {} entries, expected {q}", i + 1, row.len()),
                });
            }
        }
        if let Some(n) = n {
            if n == 0 || n != p || q <= n {
                diags.push(Diagnostic {
                    kind: DiagnosticKind::BadStateDim,
                    cell: None,
                    message: format!(
                        "state dimension {n} does not fit a {p}x{q} matrix (need rows = n, cols > n, n >= 1)"
                    ),
                });
            }
        }
    }
    diags.extend(gap_diagnostics(&grid));
    diags
}

fn error_diagnostics(e: Error) -> Vec<Diagnostic> {
    match e {
        Error::Invalid(d) => d,
        other => vec![Diagnostic {
            kind: DiagnosticKind::MalformedToken,
            cell: None,
            message: other.to_string(),
        }],
    }
}
