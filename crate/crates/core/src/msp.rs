//! Monotone span programs and the normal-form construction.
//!
//! A program `(F_q, M, psi)` accepts a player set `A` when `e_1 = (1,0,...,0)`
//! lies in the row space of `M_A`, the rows labeled by players of `A`.
//!
//! The normal form takes the minimal sets `A_1..A_k` of a structure and, for
//! each `A_i` with `r_i = |A_i| - 1`, emits `r_i` unit rows (one fresh column
//! each, handed to the first `r_i` members) and one row `(1, 0.., -1..-1, 0..)`
//! handed to the last member. The matrix has `c + k` rows and `c + 1` columns
//! where `c = sum r_i`; column 0 carries the secret.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::access::{all_subsets, AccessStructure, PlayerSet};
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldMatrix, FieldVector, PrimeField};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotoneSpanProgram {
    matrix: FieldMatrix,
    /// 1-based owner of each row.
    psi: Vec<usize>,
    n: usize,
}

/// Coefficients reproducing `e_1` from the rows of an accepted set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    /// Row indices (0-based) of `M_A`, ascending.
    pub rows: Vec<usize>,
    /// One coefficient per entry of `rows`.
    pub coefficients: FieldVector,
}

impl MonotoneSpanProgram {
    pub fn new(matrix: FieldMatrix, psi: Vec<usize>, n: usize) -> Result<Self> {
        if matrix.cols() == 0 {
            return Err(Error::InvalidProgram(
                "matrix needs at least the secret column".into(),
            ));
        }
        if psi.len() != matrix.rows() {
            return Err(Error::DimensionMismatch {
                expected: matrix.rows(),
                got: psi.len(),
            });
        }
        if let Some(&player) = psi.iter().find(|&&p| p == 0 || p > n) {
            return Err(Error::PlayerOutOfRange { player, n });
        }
        if let Some(p) = (1..=n).find(|p| !psi.contains(p)) {
            return Err(Error::InvalidProgram(format!(
                "psi is not surjective: player {p} owns no row"
            )));
        }
        Ok(Self { matrix, psi, n })
    }

    pub fn field(&self) -> PrimeField {
        self.matrix.field()
    }

    pub fn matrix(&self) -> &FieldMatrix {
        &self.matrix
    }

    pub fn psi(&self) -> &[usize] {
        &self.psi
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Row indices owned by players in `a`, ascending.
    pub fn rows_of(&self, a: PlayerSet) -> Vec<usize> {
        (0..self.psi.len())
            .filter(|&r| a.contains(self.psi[r]))
            .collect()
    }

    pub fn rows_of_player(&self, player: usize) -> Vec<usize> {
        self.rows_of(PlayerSet::singleton(player))
    }

    /// `M_A`.
    pub fn submatrix(&self, a: PlayerSet) -> FieldMatrix {
        self.matrix.select_rows(&self.rows_of(a))
    }

    pub fn rank_of_rows(&self, rows: &[usize]) -> usize {
        self.matrix.select_rows(rows).rank()
    }

    pub fn rank_of_set(&self, a: PlayerSet) -> usize {
        self.submatrix(a).rank()
    }

    /// `e_1`, the secret target.
    pub fn target(&self) -> FieldVector {
        let mut t = vec![0; self.matrix.cols()];
        t[0] = 1;
        t
    }

    fn solve_on_rows(&self, rows: &[usize]) -> Option<FieldVector> {
        self.matrix
            .select_rows(rows)
            .solve_combination(&self.target())
            .expect("target has e entries")
    }

    pub fn accepts(&self, a: PlayerSet) -> bool {
        self.acceptance_witness(a).is_some()
    }

    /// Witness coefficients when `e_1 ∈ im(M_A^t)`.
    pub fn acceptance_witness(&self, a: PlayerSet) -> Option<Witness> {
        let rows = self.rows_of(a);
        self.solve_on_rows(&rows)
            .map(|coefficients| Witness { rows, coefficients })
    }

    /// A vector `v` with `M_B v = 0` and `v_1 = 1`, certifying that `B` is rejected.
    pub fn rejection_witness(&self, b: PlayerSet) -> Result<FieldVector> {
        let f = self.field();
        let kernel = self.submatrix(b).kernel_basis();
        let v = kernel.into_iter().find(|v| v[0] != 0).ok_or_else(|| {
            Error::Precondition(format!("{b} is accepted; no rejection witness exists"))
        })?;
        let inv = f.inv(v[0]);
        Ok(v.into_iter().map(|x| f.mul(x, inv)).collect())
    }

    /// True iff acceptance agrees with `g` on every subset of `{1..n}`.
    pub fn computes(&self, g: &AccessStructure) -> bool {
        g.n() == self.n && all_subsets(self.n).all(|a| self.accepts(a) == g.authorizes(a))
    }

    /// The set `{u M^t : u_1 = s}` enumerated over all `u`.
    pub fn codewords(&self, s: FieldElement) -> BTreeSet<FieldVector> {
        let f = self.field();
        let e = self.matrix.cols();
        let mt = self.matrix.transpose();
        let mut out = BTreeSet::new();
        let mut u = vec![0; e];
        u[0] = s;
        loop {
            out.insert(mt.combine_rows(&u).expect("u has e entries"));
            // odometer over u[1..]
            let mut i = 1;
            while i < e {
                u[i] += 1;
                if u[i] < f.modulus() {
                    break;
                }
                u[i] = 0;
                i += 1;
            }
            if i == e {
                break;
            }
        }
        out
    }

    /// Rows whose removal leaves every minimal set of the owner still accepted.
    pub fn dispensable_rows(&self, g: &AccessStructure) -> Vec<usize> {
        (0..self.psi.len())
            .filter(|&r| {
                let owner = self.psi[r];
                g.minimal_masks()
                    .iter()
                    .filter(|m| m.contains(owner))
                    .all(|&m| {
                        let rows: Vec<usize> =
                            self.rows_of(m).into_iter().filter(|&x| x != r).collect();
                        self.solve_on_rows(&rows).is_some()
                    })
            })
            .collect()
    }

    /// Appends a row owned by `player`.
    pub fn with_extra_row(&self, row: &[FieldElement], player: usize) -> Result<Self> {
        let matrix = self.matrix.with_row(row)?;
        let mut psi = self.psi.clone();
        psi.push(player);
        Self::new(matrix, psi, self.n)
    }

    /// Parses the dump format written by `Display`.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let (matrix_text, psi_line) = text
            .split_once("psi:")
            .ok_or_else(|| Error::InvalidProgram("missing `psi:` line".into()))?;
        let matrix: FieldMatrix = matrix_text.parse()?;
        let psi = psi_line
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::InvalidProgram(format!("`{t}` is not a player id")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(matrix, psi, n)
    }
}

/// Matrix text form followed by `psi: 1 2 2 3 3 1`.
impl fmt::Display for MonotoneSpanProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.matrix)?;
        let psi: Vec<String> = self.psi.iter().map(|p| p.to_string()).collect();
        writeln!(f, "psi: {}", psi.join(" "))
    }
}

/// Block bookkeeping of a normal-form matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NormalFormLayout {
    /// `A_1..A_k` in block order, members in labeling order.
    pub minimal_set_order: Vec<Vec<usize>>,
    /// `r_i = |A_i| - 1`.
    pub block_ranks: Vec<usize>,
    /// First row of each block.
    pub row_offsets: Vec<usize>,
    /// First fresh column of each block (columns `1..=c` are fresh).
    pub col_offsets: Vec<usize>,
    /// `c = sum r_i`.
    pub c: usize,
}

impl NormalFormLayout {
    pub fn k(&self) -> usize {
        self.minimal_set_order.len()
    }

    /// Total row count `r = c + k`.
    pub fn d(&self) -> usize {
        self.c + self.k()
    }

    pub fn e(&self) -> usize {
        self.c + 1
    }

    pub fn block_rows(&self, block: usize) -> std::ops::Range<usize> {
        let start = self.row_offsets[block];
        start..start + self.block_ranks[block] + 1
    }

    pub fn block_of_row(&self, row: usize) -> usize {
        (0..self.k())
            .find(|&b| self.block_rows(b).contains(&row))
            .expect("row inside the matrix")
    }

    pub fn block_mask(&self, block: usize) -> PlayerSet {
        self.minimal_set_order[block]
            .iter()
            .fold(PlayerSet::EMPTY, |acc, &p| acc.with(p))
    }

    pub fn block_of_set(&self, set: PlayerSet) -> Option<usize> {
        (0..self.k()).find(|&b| self.block_mask(b) == set)
    }

    /// The row of `player` inside `block`.
    pub fn row_in_block(&self, block: usize, player: usize) -> Option<usize> {
        let pos = self.minimal_set_order[block]
            .iter()
            .position(|&p| p == player)?;
        Some(self.row_offsets[block] + pos)
    }
}

/// A normal-form program together with its layout and the structure it realizes.
#[derive(Debug, Clone)]
pub struct NormalForm {
    pub program: MonotoneSpanProgram,
    pub layout: NormalFormLayout,
    pub structure: AccessStructure,
}

/// Builds the normal-form program of a connected, realizable structure. Blocks
/// follow the structure's presentation order and the labeling follows the
/// member order inside each presented set.
pub fn build_normal_form(g: &AccessStructure, field: PrimeField) -> Result<NormalForm> {
    g.require_realizable_connected()?;
    let order: Vec<Vec<usize>> = g.presentation().to_vec();
    let block_ranks: Vec<usize> = order.iter().map(|a| a.len() - 1).collect();
    let c: usize = block_ranks.iter().sum();
    let k = order.len();
    let (d, e) = (c + k, c + 1);

    let mut row_offsets = Vec::with_capacity(k);
    let mut col_offsets = Vec::with_capacity(k);
    let (mut row, mut col) = (0, 1);
    for &ri in &block_ranks {
        row_offsets.push(row);
        col_offsets.push(col);
        row += ri + 1;
        col += ri;
    }

    let minus_one = field.element(-1);
    let mut data = vec![0; d * e];
    let mut psi = Vec::with_capacity(d);
    for (b, set) in order.iter().enumerate() {
        let (r0, c0, ri) = (row_offsets[b], col_offsets[b], block_ranks[b]);
        for t in 0..ri {
            data[(r0 + t) * e + c0 + t] = 1;
            psi.push(set[t]);
        }
        let last = r0 + ri;
        data[last * e] = 1;
        for t in 0..ri {
            data[last * e + c0 + t] = minus_one;
        }
        psi.push(set[ri]);
    }

    let matrix = FieldMatrix::new(field, d, e, data)?;
    let program = MonotoneSpanProgram::new(matrix, psi, g.n())?;
    let layout = NormalFormLayout {
        minimal_set_order: order,
        block_ranks,
        row_offsets,
        col_offsets,
        c,
    };
    Ok(NormalForm {
        program,
        layout,
        structure: g.clone(),
    })
}

/// Pass/fail for the four structural properties of a normal-form matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StructuralReport {
    /// (i) rows owned by the players of each minimal authorized set are independent.
    pub minimal_sets_independent: bool,
    /// (ii) `rank(M) = 1 + sum r_i`.
    pub rank_formula: bool,
    /// (iii) rows owned by each single player are independent.
    pub players_independent: bool,
    /// (iv) each column `2..=c+1` has exactly two nonzero rows, in the same block.
    pub column_pairs: bool,
}

impl StructuralReport {
    pub fn all_pass(&self) -> bool {
        self.minimal_sets_independent
            && self.rank_formula
            && self.players_independent
            && self.column_pairs
    }
}

pub fn structural_check(
    program: &MonotoneSpanProgram,
    layout: &NormalFormLayout,
) -> StructuralReport {
    let independent = |rows: &[usize]| program.rank_of_rows(rows) == rows.len();

    let minimal_sets_independent =
        (0..layout.k()).all(|b| independent(&program.rows_of(layout.block_mask(b))));

    let rank_formula = program.matrix().rank() == 1 + layout.c;

    let players_independent = (1..=program.n()).all(|p| independent(&program.rows_of_player(p)));

    let m = program.matrix();
    let column_pairs = m.cols() == layout.e()
        && (1..m.cols()).all(|col| {
            let support: Vec<usize> = (0..m.rows()).filter(|&r| m.get(r, col) != 0).collect();
            support.len() == 2
                && support.iter().all(|&r| r < layout.d())
                && layout.block_of_row(support[0]) == layout.block_of_row(support[1])
        });

    StructuralReport {
        minimal_sets_independent,
        rank_formula,
        players_independent,
        column_pairs,
    }
}

/// `rank(M_X) - rank(M_X without row)`: 1 when `row` is independent of the rest of `M_X`.
fn is_independent_in(program: &MonotoneSpanProgram, set: PlayerSet, row: usize) -> bool {
    let rows = program.rows_of(set);
    debug_assert!(rows.contains(&row));
    let rest: Vec<usize> = rows.iter().copied().filter(|&r| r != row).collect();
    program.rank_of_rows(&rows) > program.rank_of_rows(&rest)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Lemma2Case {
    /// `A_i ⊆ P \ A`.
    Contained,
    /// `A_i ⊄ P \ A`.
    NotContained,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Lemma2Report {
    pub case: Lemma2Case,
    /// Row of `p` inside the block of `A_i`.
    pub row: usize,
    pub dependent_in_complement: bool,
    pub independent_in_extended: bool,
    /// Whether the observed pattern is the one predicted for `case`.
    pub matches_prediction: bool,
}

/// Checks `A ∪ B ∪ {p} = P` with `B = P \ A \ {p}` authorized and `p ∉ A`.
fn admissible_partition(g: &AccessStructure, a: PlayerSet, p: usize) -> Result<PlayerSet> {
    g.check_subset(a)?;
    if p == 0 || p > g.n() {
        return Err(Error::PlayerOutOfRange {
            player: p,
            n: g.n(),
        });
    }
    if a.contains(p) {
        return Err(Error::Precondition(format!("player {p} already in {a}")));
    }
    let b = a.with(p).complement(g.n());
    if !g.authorizes(b) {
        return Err(Error::Precondition(format!("B = {b} is not authorized")));
    }
    Ok(b)
}

/// Dependence pattern of the row of `p` in the block of `A_i`, inside
/// `M_{P\A}` and `M_{A ∪ {p}}`.
pub fn lemma2_case(nf: &NormalForm, a: PlayerSet, p: usize, ai: PlayerSet) -> Result<Lemma2Report> {
    let g = &nf.structure;
    admissible_partition(g, a, p)?;
    if !ai.contains(p) {
        return Err(Error::Precondition(format!(
            "{ai} does not contain player {p}"
        )));
    }
    let block = nf
        .layout
        .block_of_set(ai)
        .ok_or_else(|| Error::Precondition(format!("{ai} is not a minimal authorized set")))?;
    let row = nf
        .layout
        .row_in_block(block, p)
        .expect("p belongs to the block");

    let complement = a.complement(g.n());
    let extended = a.with(p);
    let case = if ai.is_subset_of(complement) {
        Lemma2Case::Contained
    } else {
        Lemma2Case::NotContained
    };
    let dependent_in_complement = !is_independent_in(&nf.program, complement, row);
    let independent_in_extended = is_independent_in(&nf.program, extended, row);
    let matches_prediction = match case {
        Lemma2Case::Contained => dependent_in_complement && independent_in_extended,
        Lemma2Case::NotContained => !dependent_in_complement && independent_in_extended,
    };
    Ok(Lemma2Report {
        case,
        row,
        dependent_in_complement,
        independent_in_extended,
        matches_prediction,
    })
}

/// Rank changes when player `p` moves from `P \ A` to `A`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankBookkeeping {
    pub pivot: usize,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    /// `|A^p|`: minimal sets through `p` inside `P \ A`.
    pub a_p_count: usize,
    /// `|Ā^p|`: minimal sets through `p` not inside `P \ A`.
    pub abar_p_count: usize,
    pub rank_a: usize,
    pub rank_a_with_p: usize,
    pub rank_complement: usize,
    pub rank_b: usize,
}

impl RankBookkeeping {
    /// `rk(M_{A∪{p}}) = rk(M_A) + |A^p| + |Ā^p|`.
    pub fn growth_identity(&self) -> bool {
        self.rank_a_with_p == self.rank_a + self.a_p_count + self.abar_p_count
    }

    /// `rk(M_{P\A\{p}}) = rk(M_{P\A}) - |Ā^p|`.
    pub fn shrink_identity(&self) -> bool {
        self.rank_complement >= self.abar_p_count
            && self.rank_b == self.rank_complement - self.abar_p_count
    }

    pub fn identities_hold(&self) -> bool {
        self.growth_identity() && self.shrink_identity()
    }
}

pub fn rank_bookkeeping(nf: &NormalForm, a: PlayerSet, p: usize) -> Result<RankBookkeeping> {
    let g = &nf.structure;
    let b = admissible_partition(g, a, p)?;
    let complement = a.complement(g.n());
    let through_p = g.minimal_masks().iter().filter(|m| m.contains(p));
    let (inside, outside): (Vec<PlayerSet>, Vec<PlayerSet>) =
        through_p.partition(|m| m.is_subset_of(complement));
    let prog = &nf.program;
    Ok(RankBookkeeping {
        pivot: p,
        a: a.players(),
        b: b.players(),
        a_p_count: inside.len(),
        abar_p_count: outside.len(),
        rank_a: prog.rank_of_set(a),
        rank_a_with_p: prog.rank_of_set(a.with(p)),
        rank_complement: prog.rank_of_set(complement),
        rank_b: prog.rank_of_set(b),
    })
}

/// CSS description `|s> -> sum_{c in C} |s X + c>`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CssForm {
    /// Column 0 of `M`, length `d`.
    pub x_bar: FieldVector,
    /// Columns `1..e` of `M`; their span is `C`.
    pub generators: Vec<FieldVector>,
    #[serde(skip)]
    field: PrimeField,
}

impl CssForm {
    /// Every element of `s X + C`.
    pub fn coset(&self, s: FieldElement) -> BTreeSet<FieldVector> {
        let f = self.field;
        let d = self.x_bar.len();
        let shift: FieldVector = self.x_bar.iter().map(|&x| f.mul(s, x)).collect();
        let mut out = BTreeSet::new();
        let g = self.generators.len();
        let mut coef = vec![0u64; g];
        loop {
            let mut word = shift.clone();
            for (gen, &k) in self.generators.iter().zip(&coef) {
                if k != 0 {
                    for i in 0..d {
                        word[i] = f.add(word[i], f.mul(k, gen[i]));
                    }
                }
            }
            out.insert(word);
            let mut i = 0;
            while i < g {
                coef[i] += 1;
                if coef[i] < f.modulus() {
                    break;
                }
                coef[i] = 0;
                i += 1;
            }
            if i == g {
                break;
            }
        }
        out
    }
}

pub fn to_css(nf: &NormalForm) -> CssForm {
    let m = nf.program.matrix();
    CssForm {
        x_bar: m.column(0),
        generators: (1..m.cols()).map(|c| m.column(c)).collect(),
        field: m.field(),
    }
}
