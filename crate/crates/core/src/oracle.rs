//! Dense state-vector simulation of the span-program encoding
//!
//! ```text
//! |s> -> q^{-c/2} sum_{u : u_1 = s} |u M^t>
//! ```
//!
//! used as ground truth for the rank formula. Nothing here looks at ranks:
//! entropies come from explicit reduced density matrices and their spectra.
//!
//! Basis index `i` of a `d`-coordinate register encodes the string
//! `x_0 x_1 ... x_{d-1}` in big-endian radix `q` (coordinate 0 most significant).
//! Coordinates are 0-based row indices of the span matrix.

use std::fmt::Write as _;

use faer::{Mat, MatRef, Side};
use serde::Serialize;

use crate::access::{all_subsets, PlayerSet};
use crate::entropy::{canonical_subsets, Scheme, SecretSpec};
use crate::error::{Error, Result};
use crate::field::{FieldElement, PrimeField};
use crate::msp::MonotoneSpanProgram;

pub type C64 = faer::c64;

/// Default cap on `q^d` amplitudes, and on `dim^2` entries of explicit density matrices.
pub const DEFAULT_AMPLITUDE_CAP: u128 = 1 << 22;

/// Eigenvalues at or below this are treated as zero.
pub const EIGEN_CLIP: f64 = 1e-12;

/// Oracle-versus-formula agreement threshold, in bits.
pub const FORMULA_TOLERANCE: f64 = 1e-6;

/// Trace distance (unauthorized) and fidelity (authorized) thresholds.
pub const SECRECY_TOLERANCE: f64 = 1e-9;

/// Hermiticity, trace and flat-spectrum tolerance for density matrices.
pub const STATE_TOLERANCE: f64 = 1e-10;

fn check_cap(needed: u128, cap: u128) -> Result<()> {
    if needed > cap {
        Err(Error::SimulationCap { needed, cap })
    } else {
        Ok(())
    }
}

fn checked_pow(q: u64, exp: usize) -> u128 {
    (q as u128).checked_pow(exp as u32).unwrap_or(u128::MAX)
}

/// Radix-`q` rendering of a basis index; digits above 9 use letters, and
/// moduli beyond 36 fall back to dot-separated numbers.
pub fn basis_string(q: u64, d: usize, index: usize) -> String {
    let digits = index_digits(q, d, index);
    if q <= 36 {
        digits
            .iter()
            .map(|&x| std::char::from_digit(x as u32, q as u32).expect("digit below radix"))
            .collect()
    } else {
        digits
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }
}

fn index_digits(q: u64, d: usize, mut index: usize) -> Vec<FieldElement> {
    let mut digits = vec![0; d];
    for slot in digits.iter_mut().rev() {
        *slot = (index as u64 % q) as FieldElement;
        index /= q as usize;
    }
    digits
}

fn digits_index(q: u64, digits: &[FieldElement]) -> usize {
    digits
        .iter()
        .fold(0usize, |acc, &x| acc * q as usize + x as usize)
}

/// A normalized pure state on `d` qudits of dimension `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    q: u64,
    d: usize,
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn basis(q: u64, digits: &[FieldElement]) -> Self {
        let d = digits.len();
        let mut amplitudes = vec![C64::new(0.0, 0.0); q.pow(d as u32) as usize];
        amplitudes[digits_index(q, digits)] = C64::new(1.0, 0.0);
        Self { q, d, amplitudes }
    }

    /// Normalizes the given amplitudes.
    pub fn from_amplitudes(q: u64, d: usize, mut amplitudes: Vec<C64>) -> Result<Self> {
        let len = checked_pow(q, d);
        if amplitudes.len() as u128 != len {
            return Err(Error::DimensionMismatch {
                expected: len as usize,
                got: amplitudes.len(),
            });
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Precondition("zero vector is not a state".into()));
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        Ok(Self { q, d, amplitudes })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn coordinates(&self) -> usize {
        self.d
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, digits: &[FieldElement]) -> C64 {
        self.amplitudes[digits_index(self.q, digits)]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Basis indices with nonzero amplitude, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.amplitudes.len())
            .filter(|&i| self.amplitudes[i] != C64::new(0.0, 0.0))
            .collect()
    }

    /// Basis strings of the support.
    pub fn support_strings(&self) -> Vec<String> {
        self.support()
            .into_iter()
            .map(|i| basis_string(self.q, self.d, i))
            .collect()
    }

    /// One `basis-string re im` line per nonzero amplitude, sorted by basis string.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for i in self.support() {
            let a = self.amplitudes[i];
            let _ = writeln!(
                out,
                "{} {:.15} {:.15}",
                basis_string(self.q, self.d, i),
                a.re,
                a.im
            );
        }
        out
    }

    /// The state as a `dim(coords) x dim(rest)` matrix.
    fn bipartite(&self, coords: &[usize]) -> Mat<C64> {
        let rest: Vec<usize> = (0..self.d).filter(|c| !coords.contains(c)).collect();
        let q = self.q as usize;
        let rows = q.pow(coords.len() as u32);
        let cols = q.pow(rest.len() as u32);
        let mut m = Mat::zeros(rows, cols);
        for i in self.support() {
            let digits = index_digits(self.q, self.d, i);
            let k: Vec<_> = coords.iter().map(|&c| digits[c]).collect();
            let r: Vec<_> = rest.iter().map(|&c| digits[c]).collect();
            m[(digits_index(self.q, &k), digits_index(self.q, &r))] = self.amplitudes[i];
        }
        m
    }
}

fn validate_coords(coords: &[usize], d: usize) -> Result<Vec<usize>> {
    let mut sorted = coords.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != coords.len() {
        return Err(Error::Precondition(format!(
            "repeated coordinate in {coords:?}"
        )));
    }
    if let Some(&c) = sorted.iter().find(|&&c| c >= d) {
        return Err(Error::Precondition(format!(
            "coordinate {c} outside 0..{d}"
        )));
    }
    Ok(sorted)
}

/// A density operator on the listed coordinates, in big-endian order of that
/// list, held as a factor `F` with `rho = F F^dagger`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    q: u64,
    coords: Vec<usize>,
    factor: Mat<C64>,
}

impl DensityMatrix {
    fn from_factor(q: u64, coords: Vec<usize>, factor: Mat<C64>) -> Self {
        Self { q, coords, factor }
    }

    pub fn coords(&self) -> &[usize] {
        &self.coords
    }

    pub fn factor(&self) -> &Mat<C64> {
        &self.factor
    }

    /// The dense `dim() x dim()` operator.
    pub fn matrix(&self) -> Mat<C64> {
        &self.factor * self.factor.adjoint()
    }

    pub fn dim(&self) -> usize {
        self.factor.nrows()
    }

    pub fn trace(&self) -> f64 {
        let f = &self.factor;
        (0..f.nrows())
            .flat_map(|i| (0..f.ncols()).map(move |j| f[(i, j)].norm_sqr()))
            .sum()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let m = self.matrix();
        max_entry_norm((&m - m.adjoint()).as_ref()) <= tol
    }

    /// All `dim()` eigenvalues, ascending. Computed from the smaller of
    /// `F F^dagger` and `F^dagger F` and padded with zeros.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let f = &self.factor;
        if f.nrows() <= f.ncols() {
            return hermitian_eigenvalues(self.matrix());
        }
        let mut eig = vec![0.0; f.nrows() - f.ncols()];
        eig.extend(hermitian_eigenvalues(f.adjoint() * f));
        eig.sort_by(f64::total_cmp);
        eig
    }

    pub fn entropy_bits(&self) -> f64 {
        entropy_from_spectrum(&self.eigenvalues())
    }

    /// Checks the Hermitian, unit-trace, positive-semidefinite invariants.
    pub fn is_valid(&self) -> bool {
        self.is_hermitian(STATE_TOLERANCE)
            && (self.trace() - 1.0).abs() <= STATE_TOLERANCE
            && hermitian_eigenvalues(self.matrix())
                .iter()
                .all(|&l| l >= -STATE_TOLERANCE)
    }

    /// Traces out every coordinate not in `keep`; `keep` must be a subset of `coords()`.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let keep = validate_coords(keep, usize::MAX)?;
        let positions: Vec<usize> = keep
            .iter()
            .map(|c| {
                self.coords.iter().position(|x| x == c).ok_or_else(|| {
                    Error::Precondition(format!("coordinate {c} is not held by this operator"))
                })
            })
            .collect::<Result<_>>()?;
        let others: Vec<usize> = (0..self.coords.len())
            .filter(|i| !positions.contains(i))
            .collect();
        let q = self.q;
        let r = self.factor.ncols();
        let dim = (q as usize).pow(keep.len() as u32);
        let traced = (q as usize).pow(others.len() as u32);
        // rows sharing the traced digits t become column block t of the new factor
        let mut out = Mat::zeros(dim, r * traced);
        for i in 0..self.dim() {
            let digits = index_digits(q, self.coords.len(), i);
            let k: Vec<_> = positions.iter().map(|&p| digits[p]).collect();
            let t: Vec<_> = others.iter().map(|&o| digits[o]).collect();
            let (k, t) = (digits_index(q, &k), digits_index(q, &t));
            for c in 0..r {
                out[(k, t * r + c)] = self.factor[(i, c)];
            }
        }
        Ok(DensityMatrix::from_factor(q, keep, out))
    }

    /// `(1/2) ||rho - sigma||_1`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        self.check_same_space(other)?;
        let diff = self.matrix() - other.matrix();
        Ok(0.5
            * hermitian_eigenvalues(diff)
                .iter()
                .map(|l| l.abs())
                .sum::<f64>())
    }

    /// Uhlmann fidelity, computed as `||F_rho^dagger F_sigma||_1^2`.
    pub fn fidelity(&self, other: &DensityMatrix) -> Result<f64> {
        self.check_same_space(other)?;
        let c = self.factor.adjoint() * &other.factor;
        let gram = if c.nrows() <= c.ncols() {
            &c * c.adjoint()
        } else {
            c.adjoint() * &c
        };
        let s: f64 = hermitian_eigenvalues(gram)
            .into_iter()
            .map(|l| l.max(0.0).sqrt())
            .sum();
        Ok(s * s)
    }

    fn check_same_space(&self, other: &DensityMatrix) -> Result<()> {
        if self.q != other.q || self.coords != other.coords {
            return Err(Error::Precondition(
                "density matrices act on different coordinates".into(),
            ));
        }
        Ok(())
    }
}

fn max_entry_norm(m: MatRef<'_, C64>) -> f64 {
    (0..m.nrows())
        .flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)].norm()))
        .fold(0.0, f64::max)
}

/// Hermitian part of `m` as a real symmetric matrix: its real part when that
/// is all there is, otherwise `[[Re, -Im], [Im, Re]]`, whose spectrum is that of
/// `m` with every eigenvalue doubled.
fn real_form(m: &Mat<C64>) -> (Mat<f64>, bool) {
    let n = m.nrows();
    let h = Mat::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    if (0..n).all(|i| (0..n).all(|j| h[(i, j)].im == 0.0)) {
        return (Mat::from_fn(n, n, |i, j| h[(i, j)].re), false);
    }
    let r = Mat::from_fn(2 * n, 2 * n, |i, j| {
        let x = h[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => x.re,
            (true, false) => -x.im,
            (false, true) => x.im,
        }
    });
    (r, true)
}

/// Ascending eigenvalues of the Hermitian part of `m`.
fn hermitian_eigenvalues(m: Mat<C64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let (r, doubled) = real_form(&m);
    let mut eig = r
        .self_adjoint_eigenvalues(Side::Lower)
        .expect("symmetric eigensolver failed to converge");
    assert!(
        eig.iter().all(|x| x.is_finite()),
        "eigensolver produced a non-finite value"
    );
    eig.sort_by(f64::total_cmp);
    if doubled {
        eig = eig.into_iter().step_by(2).collect();
    }
    eig
}

/// `-sum l log2 l` over eigenvalues above [`EIGEN_CLIP`].
pub fn entropy_from_spectrum(eigenvalues: &[f64]) -> f64 {
    eigenvalues
        .iter()
        .filter(|&&l| l > EIGEN_CLIP)
        .map(|&l| -l * l.log2())
        .sum::<f64>()
        .max(0.0)
}

/// True when all eigenvalues above the clip agree within `tol`.
pub fn spectrum_is_flat(eigenvalues: &[f64], tol: f64) -> bool {
    let nonzero: Vec<f64> = eigenvalues
        .iter()
        .copied()
        .filter(|&l| l > EIGEN_CLIP)
        .collect();
    match (nonzero.first(), nonzero.last()) {
        (Some(lo), Some(hi)) => {
            let lo = nonzero.iter().copied().fold(*lo, f64::min);
            let hi = nonzero.iter().copied().fold(*hi, f64::max);
            hi - lo <= tol
        }
        _ => true,
    }
}

/// A classical mixture `sum_s p_s |psi_s><psi_s|` of pure states on the same register.
#[derive(Debug, Clone)]
pub struct Ensemble {
    components: Vec<(f64, PureState)>,
}

impl Ensemble {
    pub fn new(components: Vec<(f64, PureState)>) -> Result<Self> {
        let Some((_, first)) = components.first() else {
            return Err(Error::Precondition("empty ensemble".into()));
        };
        let (q, d) = (first.q, first.d);
        if components.iter().any(|(_, s)| s.q != q || s.d != d) {
            return Err(Error::Precondition(
                "ensemble states live on different registers".into(),
            ));
        }
        Ok(Self { components })
    }

    pub fn pure(state: PureState) -> Self {
        Self {
            components: vec![(1.0, state)],
        }
    }

    fn register(&self) -> (u64, usize) {
        let s = &self.components[0].1;
        (s.q, s.d)
    }

    /// `[sqrt(p_0) Psi_0 | sqrt(p_1) Psi_1 | ...]`, so that `rho_K = W W^dagger`.
    fn stacked(&self, coords: &[usize]) -> Mat<C64> {
        let blocks: Vec<Mat<C64>> = self
            .components
            .iter()
            .filter(|(p, _)| *p > 0.0)
            .map(|(p, s)| s.bipartite(coords) * faer::Scale(C64::new(p.sqrt(), 0.0)))
            .collect();
        let rows = blocks[0].nrows();
        let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
        let mut w = Mat::zeros(rows, cols);
        let mut offset = 0;
        for b in &blocks {
            w.as_mut()
                .submatrix_mut(0, offset, rows, b.ncols())
                .copy_from(b);
            offset += b.ncols();
        }
        w
    }
}

/// Anything that can be reduced onto a set of coordinates.
pub trait QuantumSource {
    fn reduced_density(&self, coords: &[usize]) -> Result<DensityMatrix>;

    /// Spectrum of the reduced state on `coords` (nonzero part is what matters).
    fn reduced_spectrum(&self, coords: &[usize]) -> Result<Vec<f64>> {
        Ok(self.reduced_density(coords)?.eigenvalues())
    }

    fn reduced_entropy(&self, coords: &[usize]) -> Result<f64> {
        Ok(entropy_from_spectrum(&self.reduced_spectrum(coords)?))
    }
}

impl QuantumSource for Ensemble {
    fn reduced_density(&self, coords: &[usize]) -> Result<DensityMatrix> {
        let (q, d) = self.register();
        let coords = validate_coords(coords, d)?;
        let w = self.stacked(&coords);
        Ok(DensityMatrix::from_factor(q, coords, w))
    }

    /// Uses whichever of `W W^dagger` and `W^dagger W` is smaller; their
    /// nonzero spectra coincide.
    fn reduced_spectrum(&self, coords: &[usize]) -> Result<Vec<f64>> {
        let (_, d) = self.register();
        let coords = validate_coords(coords, d)?;
        let w = self.stacked(&coords);
        let gram = if w.nrows() <= w.ncols() {
            &w * w.adjoint()
        } else {
            w.adjoint() * &w
        };
        Ok(hermitian_eigenvalues(gram))
    }
}

impl QuantumSource for PureState {
    fn reduced_density(&self, coords: &[usize]) -> Result<DensityMatrix> {
        Ensemble::pure(self.clone()).reduced_density(coords)
    }

    fn reduced_spectrum(&self, coords: &[usize]) -> Result<Vec<f64>> {
        Ensemble::pure(self.clone()).reduced_spectrum(coords)
    }
}

impl QuantumSource for DensityMatrix {
    fn reduced_density(&self, coords: &[usize]) -> Result<DensityMatrix> {
        self.partial_trace(coords)
    }
}

/// Codeword coordinates held by each visible player.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShareLayout {
    /// `shares[p - 1]` lists the 0-based coordinates of player `p`.
    shares: Vec<Vec<usize>>,
}

impl ShareLayout {
    /// Layout for players `1..=visible` of `program`; coordinates of players
    /// beyond `visible` belong to nobody and are traced out.
    pub fn new(program: &MonotoneSpanProgram, visible: usize) -> Result<Self> {
        if visible > program.n() {
            return Err(Error::Precondition(format!(
                "{visible} visible players but the program has {}",
                program.n()
            )));
        }
        let shares: Vec<Vec<usize>> = (1..=visible).map(|p| program.rows_of_player(p)).collect();
        if let Some(p) = shares.iter().position(|s| s.is_empty()) {
            return Err(Error::Disconnected(p + 1));
        }
        Ok(Self { shares })
    }

    pub fn players(&self) -> usize {
        self.shares.len()
    }

    pub fn share(&self, player: usize) -> &[usize] {
        &self.shares[player - 1]
    }

    /// Sorted coordinates owned by players in `a`.
    pub fn coords_of(&self, a: PlayerSet) -> Vec<usize> {
        let mut coords: Vec<usize> = a
            .iter()
            .filter(|&p| p <= self.shares.len())
            .flat_map(|p| self.shares[p - 1].iter().copied())
            .collect();
        coords.sort_unstable();
        coords
    }

    pub fn visible_coords(&self) -> Vec<usize> {
        self.coords_of(PlayerSet::full(self.shares.len()))
    }
}

/// `q^{-c/2} sum_{u : u_1 = s} |u M^t>`, enumerated directly from the matrix.
pub fn encode_secret(
    program: &MonotoneSpanProgram,
    s: FieldElement,
    cap: u128,
) -> Result<PureState> {
    let field: PrimeField = program.field();
    if !field.contains(s) {
        return Err(Error::InvalidSecret(format!(
            "{s} is not an element of {field}"
        )));
    }
    let m = program.matrix();
    let (d, e) = (m.rows(), m.cols());
    let q = field.modulus();
    check_cap(checked_pow(q, d), cap)?;
    check_cap(checked_pow(q, e - 1), cap)?;

    let mut amplitudes = vec![C64::new(0.0, 0.0); q.pow(d as u32) as usize];
    let mut u = vec![0; e];
    u[0] = s;
    let free = q.pow((e - 1) as u32);
    for code in 0..free {
        let mut rest = code;
        for slot in u[1..].iter_mut() {
            *slot = rest % q;
            rest /= q;
        }
        let word: Vec<FieldElement> = (0..d).map(|r| field.dot(m.row(r), &u)).collect();
        amplitudes[digits_index(q, &word)] += C64::new(1.0, 0.0);
    }
    PureState::from_amplitudes(q, d, amplitudes)
}

/// The encoded states of every secret value, with the share layout of the
/// visible players.
#[derive(Debug, Clone)]
pub struct QuantumScheme {
    states: Vec<PureState>,
    layout: ShareLayout,
    secret: SecretSpec,
}

/// Per-subset comparison of simulated and rank-formula entropies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyComparison {
    pub subset: PlayerSet,
    pub oracle_bits: f64,
    pub formula_bits: f64,
}

impl EntropyComparison {
    pub fn difference(&self) -> f64 {
        (self.oracle_bits - self.formula_bits).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormulaComparison {
    pub rows: Vec<EntropyComparison>,
    pub discrepancies: Vec<EntropyComparison>,
}

impl FormulaComparison {
    pub fn matched(&self) -> usize {
        self.rows.len() - self.discrepancies.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecrecyReport {
    pub unauthorized_checked: usize,
    pub authorized_checked: usize,
    /// Unauthorized sets whose reduced state depends on the secret, with the
    /// largest trace distance seen.
    pub secrecy_violations: Vec<(PlayerSet, f64)>,
    /// Authorized sets whose reductions for distinct secrets overlap, with the
    /// largest fidelity seen.
    pub recoverability_violations: Vec<(PlayerSet, f64)>,
    /// Only classical mixtures of basis secrets are simulated.
    pub diagonal_ensembles_only: bool,
}

impl SecrecyReport {
    pub fn secrecy_ok(&self) -> bool {
        self.secrecy_violations.is_empty()
    }

    pub fn recoverability_ok(&self) -> bool {
        self.recoverability_violations.is_empty()
    }
}

impl QuantumScheme {
    /// Simulates `program` with players `1..=visible` holding shares.
    pub fn new(
        program: &MonotoneSpanProgram,
        visible: usize,
        secret: &SecretSpec,
        cap: u128,
    ) -> Result<Self> {
        if secret.field() != program.field() {
            return Err(Error::InvalidSecret(
                "secret and program use different fields".into(),
            ));
        }
        let layout = ShareLayout::new(program, visible)?;
        let states = program
            .field()
            .elements()
            .map(|s| encode_secret(program, s, cap))
            .collect::<Result<Vec<_>>>()?;
        // distinct secrets must occupy disjoint supports for the diagonal mixture to be exact
        for (i, a) in states.iter().enumerate() {
            let sa = a.support();
            for b in &states[i + 1..] {
                if b.support().iter().any(|x| sa.binary_search(x).is_ok()) {
                    return Err(Error::Precondition(
                        "encoded secrets overlap; cosets are not disjoint".into(),
                    ));
                }
            }
        }
        Ok(Self {
            states,
            layout,
            secret: secret.clone(),
        })
    }

    pub fn from_scheme(scheme: &Scheme, secret: &SecretSpec, cap: u128) -> Result<Self> {
        Self::new(&scheme.normal_form().program, scheme.n(), secret, cap)
    }

    pub fn state(&self, s: FieldElement) -> &PureState {
        &self.states[s as usize]
    }

    pub fn layout(&self) -> &ShareLayout {
        &self.layout
    }

    pub fn ensemble(&self) -> Ensemble {
        let components = self
            .states
            .iter()
            .enumerate()
            .map(|(s, st)| (self.secret.probability(s as u64), st.clone()))
            .collect();
        Ensemble::new(components).expect("states share a register")
    }

    fn dense_cap_check(&self, coords: usize, cap: u128) -> Result<()> {
        let dim = checked_pow(self.states[0].q, coords);
        check_cap(dim.saturating_mul(dim), cap)
    }

    /// `sum_s p_s |enc(s)><enc(s)|` on the visible players' coordinates.
    pub fn density(&self, cap: u128) -> Result<DensityMatrix> {
        let coords = self.layout.visible_coords();
        self.dense_cap_check(coords.len(), cap)?;
        self.ensemble().reduced_density(&coords)
    }

    /// Reduced state of `a` for the fixed secret `s`.
    pub fn reduced_for_secret(&self, a: PlayerSet, s: FieldElement) -> Result<DensityMatrix> {
        self.state(s).reduced_density(&self.layout.coords_of(a))
    }

    pub fn subset_entropy(&self, a: PlayerSet) -> Result<f64> {
        self.ensemble().reduced_entropy(&self.layout.coords_of(a))
    }

    pub fn subset_spectrum(&self, a: PlayerSet) -> Result<Vec<f64>> {
        self.ensemble().reduced_spectrum(&self.layout.coords_of(a))
    }

    /// Unauthorized sets must see the same state for every secret; authorized
    /// sets must see orthogonally supported states for distinct secrets.
    pub fn verify_secrecy_recoverability(
        &self,
        scheme: &Scheme,
        cap: u128,
    ) -> Result<SecrecyReport> {
        if !self.secret.has_full_support() {
            return Err(Error::Precondition(
                "secret distribution must have full support".into(),
            ));
        }
        let g = scheme.structure();
        let q = self.secret.field().modulus();
        let mut report = SecrecyReport {
            unauthorized_checked: 0,
            authorized_checked: 0,
            secrecy_violations: Vec::new(),
            recoverability_violations: Vec::new(),
            diagonal_ensembles_only: true,
        };
        for a in all_subsets(g.n()) {
            let reduced = (0..q)
                .map(|s| self.reduced_for_secret(a, s))
                .collect::<Result<Vec<_>>>()?;
            if g.authorizes(a) {
                report.authorized_checked += 1;
                let mut worst = 0.0f64;
                for i in 0..reduced.len() {
                    for j in i + 1..reduced.len() {
                        worst = worst.max(reduced[i].fidelity(&reduced[j])?);
                    }
                }
                if worst >= SECRECY_TOLERANCE {
                    report.recoverability_violations.push((a, worst));
                }
            } else {
                report.unauthorized_checked += 1;
                // trace distance needs the dense operators
                self.dense_cap_check(self.layout.coords_of(a).len(), cap)?;
                let mut worst = 0.0f64;
                for r in &reduced[1..] {
                    worst = worst.max(reduced[0].trace_distance(r)?);
                }
                if worst >= SECRECY_TOLERANCE {
                    report.secrecy_violations.push((a, worst));
                }
            }
        }
        Ok(report)
    }

    /// Oracle entropy of every visible subset against the rank formula.
    pub fn compare_with_formula(&self, scheme: &Scheme) -> Result<FormulaComparison> {
        let mut rows = Vec::new();
        for a in canonical_subsets(scheme.n()) {
            rows.push(EntropyComparison {
                subset: a,
                oracle_bits: self.subset_entropy(a)?,
                formula_bits: scheme.entropy(a, &self.secret)?.entropy_bits,
            });
        }
        let discrepancies = rows
            .iter()
            .filter(|r| r.difference().is_nan() || r.difference() > FORMULA_TOLERANCE)
            .cloned()
            .collect();
        Ok(FormulaComparison {
            rows,
            discrepancies,
        })
    }
}

/// Full-system density of a structure's scheme, purifier traced out.
pub fn scheme_density(scheme: &Scheme, secret: &SecretSpec, cap: u128) -> Result<DensityMatrix> {
    QuantumScheme::from_scheme(scheme, secret, cap)?.density(cap)
}

pub fn oracle_subset_entropy(
    scheme: &Scheme,
    secret: &SecretSpec,
    a: PlayerSet,
    cap: u128,
) -> Result<f64> {
    scheme.structure().check_subset(a)?;
    QuantumScheme::from_scheme(scheme, secret, cap)?.subset_entropy(a)
}

pub fn compare_with_formula(
    scheme: &Scheme,
    secret: &SecretSpec,
    cap: u128,
) -> Result<FormulaComparison> {
    QuantumScheme::from_scheme(scheme, secret, cap)?.compare_with_formula(scheme)
}

pub fn verify_secrecy_recoverability(
    scheme: &Scheme,
    secret: &SecretSpec,
    cap: u128,
) -> Result<SecrecyReport> {
    QuantumScheme::from_scheme(scheme, secret, cap)?.verify_secrecy_recoverability(scheme, cap)
}
