//! Access structures given by their minimal authorized sets.
//!
//! Subsets of players are bitmasks internally ([`PlayerSet`]) and sorted
//! 1-based player lists at every external boundary. All structure-level
//! operations are exact enumerations over the `2^n` subsets of `P`, so `n`
//! is capped at construction time.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default hard cap on the number of players for enumeration-based operations.
pub const DEFAULT_PLAYER_CAP: usize = 20;

/// Absolute limit imposed by the 64-bit mask representation.
pub const MAX_PLAYERS: usize = 63;

/// A subset of players `{1..n}`; bit `i - 1` represents player `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PlayerSet(u64);

impl PlayerSet {
    pub const EMPTY: Self = Self(0);

    pub fn from_bits(bits: u64) -> Self {
        Self(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    /// `{1..n}`.
    pub fn full(n: usize) -> Self {
        Self(if n >= 64 { u64::MAX } else { (1u64 << n) - 1 })
    }

    pub fn singleton(player: usize) -> Self {
        Self(1 << (player - 1))
    }

    /// Builds a set from 1-based player ids, checking each lies in `1..=n`.
    pub fn from_players(players: &[usize], n: usize) -> Result<Self> {
        let mut bits = 0u64;
        for &p in players {
            if p == 0 || p > n || p > MAX_PLAYERS {
                return Err(Error::PlayerOutOfRange { player: p, n });
            }
            bits |= 1 << (p - 1);
        }
        Ok(Self(bits))
    }

    /// Parses a comma-separated list such as `1,2,3`; the empty string is `{}`.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let players = text
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::InvalidStructure(format!("`{t}` is not a player id")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_players(&players, n)
    }

    #[inline]
    pub fn contains(self, player: usize) -> bool {
        (1..=64).contains(&player) && self.0 & (1 << (player - 1)) != 0
    }

    #[inline]
    pub fn with(self, player: usize) -> Self {
        Self(self.0 | (1 << (player - 1)))
    }

    #[inline]
    pub fn without(self, player: usize) -> Self {
        Self(self.0 & !(1 << (player - 1)))
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    #[inline]
    pub fn union(self, other: Self) -> Self {
        Self(self.0 | other.0)
    }

    #[inline]
    pub fn intersection(self, other: Self) -> Self {
        Self(self.0 & other.0)
    }

    #[inline]
    pub fn difference(self, other: Self) -> Self {
        Self(self.0 & !other.0)
    }

    #[inline]
    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    /// `{1..n} \ self`.
    #[inline]
    pub fn complement(self, n: usize) -> Self {
        Self::full(n).difference(self)
    }

    /// Sorted 1-based player ids.
    pub fn players(self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (1..=64).filter(move |&p| self.contains(p))
    }

    /// Players joined by `-`, e.g. `1-2-3`; the empty set renders as an empty string.
    pub fn dash_joined(self) -> String {
        self.iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join("-")
    }

    /// Ordering by size first, then lexicographically on sorted member lists.
    pub fn canonical_cmp(self, other: Self) -> std::cmp::Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.players().cmp(&other.players()))
    }
}

impl Serialize for PlayerSet {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl fmt::Display for PlayerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inner: Vec<String> = self.iter().map(|p| p.to_string()).collect();
        write!(f, "{{{}}}", inner.join(","))
    }
}

/// Every subset of `{1..n}` in increasing bitmask order.
pub fn all_subsets(n: usize) -> impl Iterator<Item = PlayerSet> {
    (0..1u64 << n).map(PlayerSet)
}

/// A monotone access structure on players `{1..n}`.
///
/// Two structures compare equal when they have the same player count and the
/// same minimal sets; the order in which the minimal sets (and their members)
/// were supplied is kept separately as the *presentation*, which fixes the row
/// labeling of the normal-form span program.
#[derive(Debug, Clone)]
pub struct AccessStructure {
    n: usize,
    minimal: Vec<PlayerSet>,
    presentation: Vec<Vec<usize>>,
}

impl PartialEq for AccessStructure {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.minimal == other.minimal
    }
}

impl Eq for AccessStructure {}

/// Flags describing how a structure relates to its dual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureClassification {
    pub self_dual: bool,
    pub quantum_realizable: bool,
    pub connected: bool,
}

/// The on-disk JSON shape: `{"n": 3, "minimal_sets": [[1,2],[2,3],[1,3]]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureFile {
    pub n: usize,
    pub minimal_sets: Vec<Vec<usize>>,
}

impl AccessStructure {
    pub fn from_minimal_sets(n: usize, sets: Vec<Vec<usize>>) -> Result<Self> {
        Self::from_minimal_sets_with_cap(n, sets, DEFAULT_PLAYER_CAP)
    }

    /// Validates and canonicalizes a list of authorized sets. Sets that contain
    /// another listed set are dropped; the survivors keep their input order and
    /// member order as the presentation.
    pub fn from_minimal_sets_with_cap(n: usize, sets: Vec<Vec<usize>>, cap: usize) -> Result<Self> {
        check_player_count(n, cap)?;
        if sets.is_empty() {
            return Err(Error::InvalidStructure("no minimal sets given".into()));
        }
        let mut masks = Vec::with_capacity(sets.len());
        for set in &sets {
            if set.is_empty() {
                return Err(Error::InvalidStructure("empty authorized set".into()));
            }
            let mask = PlayerSet::from_players(set, n)?;
            if mask.len() != set.len() {
                return Err(Error::InvalidStructure(format!(
                    "repeated player in {set:?}"
                )));
            }
            if masks.contains(&mask) {
                return Err(Error::InvalidStructure(format!("duplicate set {mask}")));
            }
            masks.push(mask);
        }
        let keep: Vec<bool> = masks
            .iter()
            .map(|&a| !masks.iter().any(|&b| b != a && b.is_subset_of(a)))
            .collect();
        let presentation: Vec<Vec<usize>> = sets
            .into_iter()
            .zip(&keep)
            .filter_map(|(s, &k)| k.then_some(s))
            .collect();
        let mut minimal: Vec<PlayerSet> = masks
            .into_iter()
            .zip(&keep)
            .filter_map(|(m, &k)| k.then_some(m))
            .collect();
        minimal.sort_by(|a, b| a.canonical_cmp(*b));
        Ok(Self {
            n,
            minimal,
            presentation,
        })
    }

    /// Builds a structure from the minimal members of an up-closed family given
    /// by its characteristic predicate over all subsets of `{1..n}`.
    fn from_authorized_predicate(n: usize, authorized: impl Fn(PlayerSet) -> bool) -> Result<Self> {
        let minimal: Vec<PlayerSet> = all_subsets(n)
            .filter(|&a| authorized(a) && a.iter().all(|p| !authorized(a.without(p))))
            .collect();
        if minimal.iter().any(|m| m.is_empty()) {
            return Err(Error::InvalidStructure(
                "the empty set would be authorized".into(),
            ));
        }
        let mut sorted = minimal;
        sorted.sort_by(|a, b| a.canonical_cmp(*b));
        let sets = sorted.iter().map(|m| m.players()).collect();
        Self::from_minimal_sets_with_cap(n, sets, n.max(DEFAULT_PLAYER_CAP))
    }

    pub fn from_file(file: StructureFile) -> Result<Self> {
        Self::from_minimal_sets(file.n, file.minimal_sets)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: StructureFile = serde_json::from_str(text)
            .map_err(|e| Error::InvalidStructure(format!("malformed JSON: {e}")))?;
        Self::from_file(file)
    }

    /// Canonical JSON form.
    pub fn to_file(&self) -> StructureFile {
        StructureFile {
            n: self.n,
            minimal_sets: self.minimal_sets(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("structure serializes")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn players(&self) -> PlayerSet {
        PlayerSet::full(self.n)
    }

    /// Minimal sets in canonical order, as masks.
    pub fn minimal_masks(&self) -> &[PlayerSet] {
        &self.minimal
    }

    /// Minimal sets in canonical order, as sorted player lists.
    pub fn minimal_sets(&self) -> Vec<Vec<usize>> {
        self.minimal.iter().map(|m| m.players()).collect()
    }

    /// Minimal sets in the order (and member order) they were supplied.
    pub fn presentation(&self) -> &[Vec<usize>] {
        &self.presentation
    }

    /// Checks that `a` lies inside `{1..n}`.
    pub fn check_subset(&self, a: PlayerSet) -> Result<()> {
        if a.is_subset_of(self.players()) {
            Ok(())
        } else {
            let player = a.difference(self.players()).iter().next().unwrap_or(0);
            Err(Error::PlayerOutOfRange { player, n: self.n })
        }
    }

    pub fn is_authorized(&self, a: PlayerSet) -> Result<bool> {
        self.check_subset(a)?;
        Ok(self.authorizes(a))
    }

    /// Unchecked membership test: `a` contains some minimal set.
    #[inline]
    pub fn authorizes(&self, a: PlayerSet) -> bool {
        self.minimal.iter().any(|m| m.is_subset_of(a))
    }

    pub fn authorized_sets(&self) -> impl Iterator<Item = PlayerSet> + '_ {
        all_subsets(self.n).filter(|&a| self.authorizes(a))
    }

    pub fn unauthorized_sets(&self) -> impl Iterator<Item = PlayerSet> + '_ {
        all_subsets(self.n).filter(|&a| !self.authorizes(a))
    }

    /// `Γ* = {A : P \ A ∉ Γ}`, reported by its minimal sets.
    pub fn dual(&self) -> AccessStructure {
        let n = self.n;
        Self::from_authorized_predicate(n, |a| !self.authorizes(a.complement(n)))
            .expect("dual of a structure with nonempty minimal sets is a valid structure")
    }

    pub fn is_minimal_authorized(&self, a: PlayerSet) -> bool {
        self.minimal.contains(&a)
    }

    pub fn is_self_dual(&self) -> bool {
        self.dual() == *self
    }

    /// `Γ ⊆ Γ*`: no authorized set has an authorized complement.
    pub fn is_quantum_realizable(&self) -> bool {
        let n = self.n;
        self.authorized_sets()
            .all(|a| !self.authorizes(a.complement(n)))
    }

    pub fn unimportant_players(&self) -> Vec<usize> {
        let covered = self
            .minimal
            .iter()
            .fold(PlayerSet::EMPTY, |acc, &m| acc.union(m));
        self.players().difference(covered).players()
    }

    pub fn is_connected(&self) -> bool {
        self.unimportant_players().is_empty()
    }

    pub fn classify(&self) -> StructureClassification {
        StructureClassification {
            self_dual: self.is_self_dual(),
            quantum_realizable: self.is_quantum_realizable(),
            connected: self.is_connected(),
        }
    }

    /// Fails unless the structure is realizable and connected.
    pub fn require_realizable_connected(&self) -> Result<()> {
        if !self.is_quantum_realizable() {
            return Err(Error::Unrealizable);
        }
        if let Some(&p) = self.unimportant_players().first() {
            return Err(Error::Disconnected(p));
        }
        Ok(())
    }

    /// One-extra-player purification: on `P ∪ {n+1}`, `A` is authorized iff
    /// `A ∩ P` is authorized here, or `n+1 ∈ A` and `P \ A` is unauthorized here.
    ///
    /// The result is checked to be self-dual and to agree with `self` on every
    /// subset of `P`. On a self-dual input player `n+1` comes out unimportant.
    pub fn purify(&self) -> Result<AccessStructure> {
        if !self.is_quantum_realizable() {
            return Err(Error::Unrealizable);
        }
        let n = self.n;
        let extra = n + 1;
        check_player_count(extra, MAX_PLAYERS)?;
        let purified = Self::from_authorized_predicate(extra, |a| {
            let inside = a.intersection(self.players());
            self.authorizes(inside) || (a.contains(extra) && !self.authorizes(inside.complement(n)))
        })?;
        if !purified.is_self_dual() {
            return Err(Error::Purification(format!(
                "result {} is not self-dual",
                purified.to_json()
            )));
        }
        if let Some(a) = all_subsets(n).find(|&a| purified.authorizes(a) != self.authorizes(a)) {
            return Err(Error::Purification(format!(
                "restriction to the original players differs at {a}"
            )));
        }
        Ok(purified)
    }

    /// Unauthorized sets all of whose one-player extensions are authorized.
    pub fn maximal_unauthorized(&self) -> Vec<PlayerSet> {
        let n = self.n;
        self.unauthorized_sets()
            .filter(|&a| a.complement(n).iter().all(|p| self.authorizes(a.with(p))))
            .collect()
    }
}

fn check_player_count(n: usize, cap: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidStructure(
            "at least one player is required".into(),
        ));
    }
    let cap = cap.min(MAX_PLAYERS);
    if n > cap {
        return Err(Error::EnumerationCap { n, cap });
    }
    Ok(())
}

/// Every access structure on `{1..n}`: all nonempty antichains of nonempty subsets.
pub fn all_structures(n: usize) -> Vec<AccessStructure> {
    let subsets: Vec<PlayerSet> = all_subsets(n).skip(1).collect();
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    extend_antichains(&subsets, 0, &mut chosen, &mut |family: &[PlayerSet]| {
        if !family.is_empty() {
            let sets = family.iter().map(|m| m.players()).collect();
            out.push(AccessStructure::from_minimal_sets(n, sets).expect("antichain is valid"));
        }
    });
    out
}

fn extend_antichains(
    subsets: &[PlayerSet],
    from: usize,
    chosen: &mut Vec<PlayerSet>,
    emit: &mut impl FnMut(&[PlayerSet]),
) {
    emit(chosen);
    for i in from..subsets.len() {
        let s = subsets[i];
        if chosen
            .iter()
            .all(|&c| !c.is_subset_of(s) && !s.is_subset_of(c))
        {
            chosen.push(s);
            extend_antichains(subsets, i + 1, chosen, emit);
            chosen.pop();
        }
    }
}

/// The `(k, n)` threshold structure: every `k`-subset of `{1..n}` is minimal.
pub fn threshold(k: usize, n: usize) -> Result<AccessStructure> {
    if k == 0 || k > n {
        return Err(Error::InvalidStructure(format!(
            "threshold {k} out of range for {n} players"
        )));
    }
    let mut sets: Vec<PlayerSet> = all_subsets(n).filter(|s| s.len() == k).collect();
    sets.sort_by(|a, b| a.canonical_cmp(*b));
    AccessStructure::from_minimal_sets(n, sets.iter().map(|s| s.players()).collect())
}
