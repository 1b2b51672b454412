//! Subset entropies of normal-form secret-sharing states from matrix ranks.
//!
//! For a player set `A` with complement `Ā` (taken in the full, possibly
//! purified, player set), with `a = rk(M_A)`, `b = rk(M_Ā)` and `m = rk(M)`:
//!
//! ```text
//! S(A) = (a + b - m) log2 q + [A authorized] S(secret)
//! ```
//!
//! Structures that are not self-dual are handled through their one-player
//! purification; the extra share is never part of a queried subset.

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::Serialize;

use crate::access::{all_subsets, AccessStructure, PlayerSet};
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::msp::{build_normal_form, NormalForm};

/// Tolerance for comparing rank-formula entropies; they are sums of exact
/// multiples of `log2 q` and a single constant, so only rounding is absorbed.
pub const COMPARE_TOLERANCE: f64 = 1e-12;

/// Tolerance on the probabilities of a secret distribution summing to one.
pub const PROBABILITY_TOLERANCE: f64 = 1e-12;

/// A classical ensemble over the basis secrets `|0>, ..., |q-1>`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecretSpec {
    #[serde(serialize_with = "serialize_field")]
    field: PrimeField,
    distribution: Vec<f64>,
    entropy_bits: f64,
}

fn serialize_field<S: serde::Serializer>(
    f: &PrimeField,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_u64(f.modulus())
}

impl SecretSpec {
    pub fn new(field: PrimeField, distribution: Vec<f64>) -> Result<Self> {
        let q = field.modulus() as usize;
        if distribution.len() != q {
            return Err(Error::InvalidSecret(format!(
                "{} probabilities given for q = {q}",
                distribution.len()
            )));
        }
        if distribution.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(Error::InvalidSecret(
                "probabilities must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = distribution.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(Error::InvalidSecret(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        let entropy_bits = shannon_entropy(&distribution);
        Ok(Self {
            field,
            distribution,
            entropy_bits,
        })
    }

    /// The completely mixed secret, `S = log2 q`.
    pub fn uniform(field: PrimeField) -> Self {
        let q = field.modulus() as usize;
        Self::new(field, vec![1.0 / q as f64; q]).expect("uniform distribution is valid")
    }

    /// A secret fixed to the basis value `s`.
    pub fn point(field: PrimeField, s: u64) -> Result<Self> {
        if !field.contains(s) {
            return Err(Error::InvalidSecret(format!(
                "{s} is not an element of {field}"
            )));
        }
        let mut dist = vec![0.0; field.modulus() as usize];
        dist[s as usize] = 1.0;
        Self::new(field, dist)
    }

    /// Parses `"p0,p1,..."`.
    pub fn parse(field: PrimeField, text: &str) -> Result<Self> {
        let probs = text
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidSecret(format!("`{t}` is not a probability")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(field, probs)
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn distribution(&self) -> &[f64] {
        &self.distribution
    }

    pub fn probability(&self, s: u64) -> f64 {
        self.distribution[s as usize]
    }

    /// Shannon entropy of the distribution, in bits.
    pub fn entropy_bits(&self) -> f64 {
        self.entropy_bits
    }

    pub fn has_full_support(&self) -> bool {
        self.distribution.iter().all(|&p| p > 0.0)
    }
}

pub fn shannon_entropy(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Entropy of one player subset together with the ranks that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyReport {
    pub subset: PlayerSet,
    pub authorized: bool,
    /// `rk(M_A)`.
    pub a: usize,
    /// `rk(M_Ā)`, complement in the full player set.
    pub b: usize,
    /// `rk(M)`.
    pub m: usize,
    pub entropy_bits: f64,
}

impl EntropyReport {
    /// `a + b - m`, the number of `log2 q` units in the entropy.
    pub fn rank_units(&self) -> usize {
        self.a + self.b - self.m
    }
}

/// A structure together with the normal-form program realizing it, purified
/// when the structure is not self-dual.
#[derive(Debug, Clone)]
pub struct Scheme {
    original: AccessStructure,
    normal_form: NormalForm,
    purified: bool,
}

impl Scheme {
    pub fn new(g: &AccessStructure, field: PrimeField) -> Result<Self> {
        g.require_realizable_connected()?;
        let purified = !g.is_self_dual();
        let realized = if purified { g.purify()? } else { g.clone() };
        let normal_form = build_normal_form(&realized, field)?;
        Ok(Self {
            original: g.clone(),
            normal_form,
            purified,
        })
    }

    pub fn structure(&self) -> &AccessStructure {
        &self.original
    }

    pub fn normal_form(&self) -> &NormalForm {
        &self.normal_form
    }

    pub fn field(&self) -> PrimeField {
        self.normal_form.program.field()
    }

    pub fn is_purified(&self) -> bool {
        self.purified
    }

    /// Players visible to callers, `{1..n}` of the original structure.
    pub fn n(&self) -> usize {
        self.original.n()
    }

    /// Player count of the realized (possibly purified) structure.
    pub fn total_players(&self) -> usize {
        self.normal_form.structure.n()
    }

    /// `(rk(M_A), rk(M_Ā), rk(M))`.
    pub fn ranks(&self, a: PlayerSet) -> (usize, usize, usize) {
        let prog = &self.normal_form.program;
        let complement = a.complement(self.total_players());
        (
            prog.rank_of_set(a),
            prog.rank_of_set(complement),
            prog.matrix().rank(),
        )
    }

    pub fn entropy(&self, a: PlayerSet, secret: &SecretSpec) -> Result<EntropyReport> {
        self.original.check_subset(a)?;
        if secret.field() != self.field() {
            return Err(Error::InvalidSecret(format!(
                "secret over {} used with a scheme over {}",
                secret.field(),
                self.field()
            )));
        }
        let authorized = self.original.authorizes(a);
        let (ra, rb, m) = self.ranks(a);
        let units = (ra + rb - m) as f64;
        let mut entropy_bits = units * (self.field().modulus() as f64).log2();
        if authorized {
            entropy_bits += secret.entropy_bits();
        }
        Ok(EntropyReport {
            subset: a,
            authorized,
            a: ra,
            b: rb,
            m,
            entropy_bits,
        })
    }

    /// One report per subset of `{1..n}`, in canonical order (size, then lexicographic).
    pub fn all_entropies(&self, secret: &SecretSpec) -> Result<Vec<EntropyReport>> {
        canonical_subsets(self.n())
            .into_iter()
            .map(|a| self.entropy(a, secret))
            .collect()
    }
}

/// Subsets of `{1..n}` sorted by size, then lexicographically.
pub fn canonical_subsets(n: usize) -> Vec<PlayerSet> {
    let mut subsets: Vec<PlayerSet> = all_subsets(n).collect();
    subsets.sort_by(|a, b| a.canonical_cmp(*b));
    subsets
}

pub fn subset_entropy(
    g: &AccessStructure,
    secret: &SecretSpec,
    a: PlayerSet,
) -> Result<EntropyReport> {
    Scheme::new(g, secret.field())?.entropy(a, secret)
}

pub fn all_subset_entropies(
    g: &AccessStructure,
    secret: &SecretSpec,
) -> Result<Vec<EntropyReport>> {
    Scheme::new(g, secret.field())?.all_entropies(secret)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ViolationKind {
    /// Both sets unauthorized and `S(A) > S(B)`.
    UnauthorizedDecrease,
    /// Both sets authorized and `S(A) < S(B)`.
    AuthorizedIncrease,
}

/// A pair `A ⊂ B` breaking the expected ordering.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub smaller: EntropyReport,
    pub larger: EntropyReport,
}

/// Checks every pair `A ⊂ B`: unauthorized pairs must not lose entropy and
/// authorized pairs must not gain any.
pub fn verify_monotonicity(g: &AccessStructure, secret: &SecretSpec) -> Result<Vec<Violation>> {
    let scheme = Scheme::new(g, secret.field())?;
    let n = scheme.n();
    let reports: Vec<EntropyReport> = all_subsets(n)
        .map(|a| scheme.entropy(a, secret))
        .collect::<Result<_>>()?;
    let mut violations = Vec::new();
    for small in canonical_subsets(n) {
        for large in canonical_subsets(n) {
            if small == large || !small.is_subset_of(large) {
                continue;
            }
            let (ra, rb) = (
                &reports[small.bits() as usize],
                &reports[large.bits() as usize],
            );
            let kind = match (ra.authorized, rb.authorized) {
                (false, false) if ra.entropy_bits > rb.entropy_bits + COMPARE_TOLERANCE => {
                    ViolationKind::UnauthorizedDecrease
                }
                (true, true) if ra.entropy_bits + COMPARE_TOLERANCE < rb.entropy_bits => {
                    ViolationKind::AuthorizedIncrease
                }
                _ => continue,
            };
            violations.push(Violation {
                kind,
                smaller: ra.clone(),
                larger: rb.clone(),
            });
        }
    }
    Ok(violations)
}

/// Entropies along a maximal chain `∅ = B_0 ⊂ B_1 ⊂ ... ⊂ B_n = P`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyProfile {
    pub steps: Vec<EntropyReport>,
    /// Index of the first authorized set.
    pub crossover: usize,
    pub self_dual: bool,
    pub secret_entropy_bits: f64,
}

impl EntropyProfile {
    pub fn entropies(&self) -> Vec<f64> {
        self.steps.iter().map(|r| r.entropy_bits).collect()
    }

    /// Unauthorized before the crossover, authorized from it on.
    pub fn single_crossover(&self) -> bool {
        self.steps
            .iter()
            .enumerate()
            .all(|(i, r)| r.authorized == (i >= self.crossover))
    }

    /// Nondecreasing over `B_0..B_{j-1}` and nonincreasing over `B_j..B_n`.
    pub fn rises_then_falls(&self) -> bool {
        let e = self.entropies();
        let j = self.crossover;
        e[..j].windows(2).all(|w| w[0] <= w[1] + COMPARE_TOLERANCE)
            && e[j..].windows(2).all(|w| w[0] + COMPARE_TOLERANCE >= w[1])
    }

    /// `S(B_0) = 0`, and `S(B_n) = S(secret)` for self-dual structures or
    /// `S(B_n) >= S(secret)` otherwise.
    pub fn endpoints_hold(&self) -> bool {
        let e = self.entropies();
        let last = *e.last().expect("chain has at least two sets");
        let end_ok = if self.self_dual {
            (last - self.secret_entropy_bits).abs() <= COMPARE_TOLERANCE
        } else {
            last + COMPARE_TOLERANCE >= self.secret_entropy_bits
        };
        e[0] == 0.0 && end_ok
    }

    pub fn is_tent(&self) -> bool {
        self.single_crossover() && self.rises_then_falls() && self.endpoints_hold()
    }
}

/// Validates `∅ = B_0 ⊂ ... ⊂ B_n = P` growing by exactly one player per step.
pub fn check_chain(n: usize, chain: &[PlayerSet]) -> Result<()> {
    if chain.len() != n + 1 {
        return Err(Error::MalformedChain(format!(
            "expected {} sets from the empty set to all players, got {}",
            n + 1,
            chain.len()
        )));
    }
    if !chain[0].is_empty() {
        return Err(Error::MalformedChain(format!(
            "chain starts at {} instead of {{}}",
            chain[0]
        )));
    }
    if chain[n] != PlayerSet::full(n) {
        return Err(Error::MalformedChain(format!(
            "chain ends at {} instead of all players",
            chain[n]
        )));
    }
    for w in chain.windows(2) {
        if !(w[0].is_subset_of(w[1]) && w[1].len() == w[0].len() + 1) {
            return Err(Error::MalformedChain(format!(
                "{} -> {} does not add exactly one player",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

pub fn chain_profile(
    g: &AccessStructure,
    secret: &SecretSpec,
    chain: &[PlayerSet],
) -> Result<EntropyProfile> {
    let scheme = Scheme::new(g, secret.field())?;
    profile_for(&scheme, secret, chain)
}

pub fn profile_for(
    scheme: &Scheme,
    secret: &SecretSpec,
    chain: &[PlayerSet],
) -> Result<EntropyProfile> {
    let n = scheme.n();
    check_chain(n, chain)?;
    let steps = chain
        .iter()
        .map(|&b| scheme.entropy(b, secret))
        .collect::<Result<Vec<_>>>()?;
    let crossover = steps
        .iter()
        .position(|r| r.authorized)
        .unwrap_or(steps.len());
    Ok(EntropyProfile {
        steps,
        crossover,
        self_dual: !scheme.is_purified(),
        secret_entropy_bits: secret.entropy_bits(),
    })
}

/// Chain from adding players in the given order.
pub fn chain_from_order(order: &[usize]) -> Vec<PlayerSet> {
    let mut chain = vec![PlayerSet::EMPTY];
    let mut current = PlayerSet::EMPTY;
    for &p in order {
        current = current.with(p);
        chain.push(current);
    }
    chain
}

/// The lexicographic-greedy chain `∅ ⊂ {1} ⊂ {1,2} ⊂ ... ⊂ {1..n}`.
pub fn greedy_chain(n: usize) -> Vec<PlayerSet> {
    chain_from_order(&(1..=n).collect::<Vec<_>>())
}

/// All `n!` maximal chains, in lexicographic order of the player insertion order.
pub fn maximal_chains(n: usize) -> Vec<Vec<PlayerSet>> {
    let mut out = Vec::new();
    let mut order = Vec::with_capacity(n);
    permute(n, &mut order, &mut out);
    out
}

fn permute(n: usize, order: &mut Vec<usize>, out: &mut Vec<Vec<PlayerSet>>) {
    if order.len() == n {
        out.push(chain_from_order(order));
        return;
    }
    for p in 1..=n {
        if !order.contains(&p) {
            order.push(p);
            permute(n, order, out);
            order.pop();
        }
    }
}

/// Where the entropy maxima over authorized and unauthorized sets are attained.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremalReport {
    pub authorized_max_bits: f64,
    pub authorized_maximizers: Vec<PlayerSet>,
    pub attained_at_minimal: bool,
    pub unauthorized_max_bits: f64,
    pub unauthorized_maximizers: Vec<PlayerSet>,
    pub attained_at_maximal_unauthorized: bool,
}

impl ExtremalReport {
    pub fn holds(&self) -> bool {
        self.attained_at_minimal && self.attained_at_maximal_unauthorized
    }
}

pub fn extremal_check(g: &AccessStructure, secret: &SecretSpec) -> Result<ExtremalReport> {
    let reports = all_subset_entropies(g, secret)?;
    let maximal_unauth = g.maximal_unauthorized();
    let (auth, unauth): (Vec<&EntropyReport>, Vec<&EntropyReport>) =
        reports.iter().partition(|r| r.authorized);
    let (authorized_max_bits, authorized_maximizers) = argmax(&auth);
    let (unauthorized_max_bits, unauthorized_maximizers) = argmax(&unauth);
    Ok(ExtremalReport {
        authorized_max_bits,
        attained_at_minimal: authorized_maximizers
            .iter()
            .any(|&a| g.is_minimal_authorized(a)),
        authorized_maximizers,
        unauthorized_max_bits,
        attained_at_maximal_unauthorized: unauthorized_maximizers
            .iter()
            .any(|a| maximal_unauth.contains(a)),
        unauthorized_maximizers,
    })
}

fn argmax(reports: &[&EntropyReport]) -> (f64, Vec<PlayerSet>) {
    let max = reports
        .iter()
        .map(|r| r.entropy_bits)
        .max_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal))
        .unwrap_or(0.0);
    let at = reports
        .iter()
        .filter(|r| (r.entropy_bits - max).abs() <= COMPARE_TOLERANCE)
        .map(|r| r.subset)
        .collect();
    (max, at)
}

pub const CSV_HEADER: &str = "subset,size,authorized,entropy_bits";

/// Renders reports as CSV, one row per report in the given order.
pub fn reports_to_csv(reports: &[EntropyReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{:.6}",
            r.subset.dash_joined(),
            r.subset.len(),
            r.authorized,
            r.entropy_bits
        );
    }
    out
}
